#include "kyano/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include "kyano/kysym.hpp"

namespace kyano::dynamics {

namespace {

std::vector<Jet> seed_phase(const PhasePoint& z) {
    const std::size_t n = z.dim();
    std::vector<Jet> v;
    v.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) v.push_back(Jet::variable(z.x[i], i, 2 * n));
    for (std::size_t i = 0; i < n; ++i) v.push_back(Jet::variable(z.p[i], n + i, 2 * n));
    return v;
}

std::vector<double> position_values(std::span<const Jet> z, std::size_t n) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = z[i].value();
    return x;
}

void check_point(const PhasePoint& z, std::size_t n) {
    if (z.x.size() != n || z.p.size() != n) throw ShapeError("phase point has wrong dimension");
}

// dz/dt = (dH/dp, -dH/dx)
PhasePoint hamilton_rhs(const PhaseFunction& H, const PhasePoint& z) {
    const Jet h = H.jet(z);
    const std::size_t n = z.dim();
    PhasePoint d{std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        d.x[i] = h.d(n + i);
        d.p[i] = -h.d(i);
    }
    return d;
}

PhasePoint axpy(const PhasePoint& z, double a, const PhasePoint& d) {
    PhasePoint out = z;
    for (std::size_t i = 0; i < z.dim(); ++i) {
        out.x[i] += a * d.x[i];
        out.p[i] += a * d.p[i];
    }
    return out;
}

template <typename Rhs>
Trajectory rk4(Rhs&& rhs, const PhasePoint& z0, double dt, std::size_t steps, const MetricSpec* domain) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error("step size must be positive");
    Trajectory traj;
    traj.dt = dt;
    traj.t.reserve(steps + 1);
    traj.z.reserve(steps + 1);
    if (domain) domain->check_domain(z0.x);
    traj.t.push_back(0.0);
    traj.z.push_back(z0);
    PhasePoint z = z0;
    for (std::size_t s = 0; s < steps; ++s) {
        try {
            const PhasePoint k1 = rhs(z);
            const PhasePoint z2 = axpy(z, 0.5 * dt, k1);
            if (domain) domain->check_domain(z2.x);
            const PhasePoint k2 = rhs(z2);
            const PhasePoint z3 = axpy(z, 0.5 * dt, k2);
            if (domain) domain->check_domain(z3.x);
            const PhasePoint k3 = rhs(z3);
            const PhasePoint z4 = axpy(z, dt, k3);
            if (domain) domain->check_domain(z4.x);
            const PhasePoint k4 = rhs(z4);
            PhasePoint next = z;
            for (std::size_t i = 0; i < z.dim(); ++i) {
                next.x[i] += dt / 6.0 * (k1.x[i] + 2.0 * k2.x[i] + 2.0 * k3.x[i] + k4.x[i]);
                next.p[i] += dt / 6.0 * (k1.p[i] + 2.0 * k2.p[i] + 2.0 * k3.p[i] + k4.p[i]);
            }
            if (domain) domain->check_domain(next.x);
            z = std::move(next);
        } catch (const DomainError& e) {
            traj.steps = s;
            throw DomainExit("left the chart domain after " + std::to_string(s) + " steps: " + e.what(),
                             std::move(traj));
        } catch (const SingularMetricError& e) {
            traj.steps = s;
            throw DomainExit("metric became singular after " + std::to_string(s) + " steps: " + e.what(),
                             std::move(traj));
        }
        traj.t.push_back(static_cast<double>(s + 1) * dt);
        traj.z.push_back(z);
    }
    traj.steps = steps;
    return traj;
}

}  // namespace

std::vector<double> PhasePoint::flat() const {
    std::vector<double> z(x);
    z.insert(z.end(), p.begin(), p.end());
    return z;
}

PhasePoint PhasePoint::from_flat(std::span<const double> z) {
    if (z.size() % 2 != 0) throw ShapeError("phase vector must have even length");
    const std::size_t n = z.size() / 2;
    return {std::vector<double>(z.begin(), z.begin() + n), std::vector<double>(z.begin() + n, z.end())};
}

PhaseFunction::PhaseFunction(std::size_t n, Fn fn, std::string label)
    : n_(n), fn_(std::move(fn)), label_(std::move(label)) {
    if (n == 0 || 2 * n > kMaxJetVars) throw ShapeError("phase space dimension out of range");
}

PhaseFunction PhaseFunction::from_expression(std::size_t n, const expr::Expression& e, std::string label) {
    if (e.dim() != 2 * n) throw ShapeError("phase function expression must use 2n variables");
    if (label.empty()) label = e.to_string();
    return PhaseFunction(n, [e](std::span<const Jet> z) { return e.evaluate<Jet>(z); }, std::move(label));
}

PhaseFunction PhaseFunction::parse(std::size_t n, std::string_view source) {
    return from_expression(n, expr::parse_expression(source, expr::phase_names(n)));
}

PhaseFunction PhaseFunction::coordinate(std::size_t n, std::size_t i) {
    if (i >= n) throw ShapeError("coordinate index out of range");
    return PhaseFunction(n, [i](std::span<const Jet> z) { return z[i]; }, "x" + std::to_string(i + 1));
}

PhaseFunction PhaseFunction::momentum(std::size_t n, std::size_t i) {
    if (i >= n) throw ShapeError("momentum index out of range");
    return PhaseFunction(n, [n, i](std::span<const Jet> z) { return z[n + i]; }, "p" + std::to_string(i + 1));
}

PhaseFunction PhaseFunction::hamiltonian(const MetricSpec& spec) {
    const std::size_t n = spec.dim();
    auto fn = [spec, n](std::span<const Jet> z) {
        spec.check_domain(position_values(z, n));
        const Tensor<Jet> ginv = invert(spec.components<Jet>(z.subspan(0, n)));
        Jet h(0.0);
        for (std::size_t a = 0; a < n; ++a) {
            Jet row(0.0);
            for (std::size_t b = 0; b < n; ++b) row += ginv(a, b) * z[n + b];
            h += z[n + a] * row;
        }
        return 0.5 * h;
    };
    return PhaseFunction(n, std::move(fn), "H");
}

PhaseFunction PhaseFunction::killing_quadratic(const MetricSpec& spec, const AntisymTensorField& field) {
    const std::size_t n = spec.dim();
    if (field.dim() != n || field.rank() != 2) throw ShapeError("Killing quadratic needs a rank-2 field on the chart");
    auto fn = [spec, field, n](std::span<const Jet> z) {
        spec.check_domain(position_values(z, n));
        const std::span<const Jet> x = z.subspan(0, n);
        const Tensor<Jet> K = kysym::killing_from_ky_jet(spec, field, x);
        const Tensor<Jet> ginv = invert(spec.components<Jet>(x));
        // raised momentum p^a = g^{ab} p_b, then K_ab p^a p^b
        std::vector<Jet> up(n, Jet(0.0));
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) up[a] += ginv(a, b) * z[n + b];
        }
        Jet q(0.0);
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) q += K(a, b) * up[a] * up[b];
        }
        return q;
    };
    return PhaseFunction(n, std::move(fn), "K(" + field.label() + ")");
}

PhaseFunction PhaseFunction::angular_momentum(std::size_t i) {
    if (i >= 3) throw ShapeError("angular momentum index out of range");
    const std::size_t j = (i + 1) % 3;
    const std::size_t k = (i + 2) % 3;
    return PhaseFunction(
        3, [j, k](std::span<const Jet> z) { return z[j] * z[3 + k] - z[k] * z[3 + j]; }, "L" + std::to_string(i + 1));
}

double PhaseFunction::value(const PhasePoint& z) const {
    check_point(z, n_);
    std::vector<Jet> v;
    for (double a : z.x) v.emplace_back(a);
    for (double a : z.p) v.emplace_back(a);
    return fn_(v).value();
}

Jet PhaseFunction::jet(const PhasePoint& z) const {
    check_point(z, n_);
    const std::vector<Jet> v = seed_phase(z);
    return fn_(v);
}

PhaseFunction PhaseFunction::operator*(const PhaseFunction& o) const {
    if (o.n_ != n_) throw ShapeError("phase functions differ in dimension");
    auto a = fn_;
    auto b = o.fn_;
    return PhaseFunction(n_, [a, b](std::span<const Jet> z) { return a(z) * b(z); },
                         "(" + label_ + ")*(" + o.label_ + ")");
}

PhaseFunction PhaseFunction::operator+(const PhaseFunction& o) const {
    if (o.n_ != n_) throw ShapeError("phase functions differ in dimension");
    auto a = fn_;
    auto b = o.fn_;
    return PhaseFunction(n_, [a, b](std::span<const Jet> z) { return a(z) + b(z); }, label_ + " + " + o.label_);
}

double poisson_bracket(const PhaseFunction& F, const PhaseFunction& G, const PhasePoint& z) {
    if (F.dim() != G.dim()) throw ShapeError("bracket of functions on different phase spaces");
    const Jet f = F.jet(z);
    const Jet g = G.jet(z);
    const std::size_t n = F.dim();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += f.d(i) * g.d(n + i) - f.d(n + i) * g.d(i);
    return acc;
}

double nambu_bracket(const ScalarFn& F1, const ScalarFn& F2, const ScalarFn& F3, std::span<const double> point) {
    if (point.size() != 3) throw ShapeError("Nambu bracket is defined on three variables");
    const std::vector<Jet> x = seed_jets(point);
    // Rows go into a canonical order first so permuting the arguments flips the sign exactly.
    std::array<std::array<double, 3>, 3> rows{};
    const Jet vals[3] = {F1(x), F2(x), F3(x)};
    for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t c = 0; c < 3; ++c) rows[r][c] = vals[r].d(c);
    }
    double sign = 1.0;
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j + 1 < 3 - i; ++j) {
            if (rows[j + 1] < rows[j]) {
                std::swap(rows[j], rows[j + 1]);
                sign = -sign;
            }
        }
    }
    if (rows[0] == rows[1] || rows[1] == rows[2]) return 0.0;
    const auto& a = rows[0];
    const auto& b = rows[1];
    const auto& c = rows[2];
    return sign * (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) +
                   a[2] * (b[0] * c[1] - b[1] * c[0]));
}

Trajectory geodesic_integrate(const MetricSpec& spec, const PhasePoint& z0, double dt, std::size_t steps) {
    check_point(z0, spec.dim());
    return hamilton_integrate(PhaseFunction::hamiltonian(spec), z0, dt, steps, &spec);
}

Trajectory hamilton_integrate(const PhaseFunction& H, const PhasePoint& z0, double dt, std::size_t steps,
                              const MetricSpec* domain) {
    check_point(z0, H.dim());
    return rk4([&H](const PhasePoint& z) { return hamilton_rhs(H, z); }, z0, dt, steps, domain);
}

Drift conservation_monitor(const Trajectory& traj, const PhaseFunction& Q) {
    if (traj.z.empty()) throw Error("conservation_monitor: empty trajectory");
    Drift d;
    d.initial = Q.value(traj.z.front());
    for (const auto& z : traj.z) d.max_abs = std::max(d.max_abs, std::abs(Q.value(z) - d.initial));
    d.max_rel = d.initial != 0.0 ? d.max_abs / std::abs(d.initial) : d.max_abs;
    return d;
}

Trajectory unified_hamilton_flow(const PhaseFunction& H, const PhasePoint& z0, double dt, std::size_t steps) {
    check_point(z0, H.dim());
    const std::size_t n = H.dim();
    auto rhs = [&H, n](const PhasePoint& z) {
        const Jet h = H.jet(z);
        // state s = (f~, f), grad = (dH/df~, dH/df)
        std::vector<double> grad(2 * n);
        for (std::size_t i = 0; i < n; ++i) {
            grad[i] = h.d(n + i);
            grad[n + i] = h.d(i);
        }
        std::vector<double> sdot(2 * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            sdot[i] = -grad[n + i];  // row block [0, -I]
            sdot[n + i] = grad[i];   // row block [I, 0]
        }
        PhasePoint d{std::vector<double>(n), std::vector<double>(n)};
        for (std::size_t i = 0; i < n; ++i) {
            d.p[i] = sdot[i];
            d.x[i] = sdot[n + i];
        }
        return d;
    };
    Trajectory traj = rk4(rhs, z0, dt, steps, nullptr);
    traj.method = "rk4 (unified J grad H)";
    return traj;
}

}  // namespace kyano::dynamics
