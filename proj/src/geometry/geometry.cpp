#include "kyano/geometry.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace kyano::geometry {

namespace {

constexpr double kChartGuard = 1e-9;
constexpr double kSampleMargin = 0.1;

double taub_nut_c2(const TaubNUT& t) {
    return t.normalization == TaubNutNormalization::FourMSquared ? 4.0 * t.m * t.m : 16.0 * t.m * t.m;
}

std::string format_param(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Gamma^l_{ab} = 1/2 g^{ls} (d_a g_{sb} + d_b g_{sa} - d_s g_{ab}); dg(c, a, b) = d_c g_{ab}.
template <typename T>
Tensor<T> christoffel_from(const Tensor<T>& ginv, const Tensor<T>& dg) {
    const std::size_t n = ginv.dim();
    Tensor<T> gamma(n, 3, T(0.0));
    for (std::size_t l = 0; l < n; ++l) {
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = a; b < n; ++b) {
                T acc(0.0);
                for (std::size_t s = 0; s < n; ++s) {
                    acc += ginv(l, s) * (dg(a, s, b) + dg(b, s, a) - dg(s, a, b));
                }
                acc = 0.5 * acc;
                gamma(l, a, b) = acc;
                gamma(l, b, a) = acc;
            }
        }
    }
    return gamma;
}

}  // namespace

MetricSpec MetricSpec::flat(std::size_t n) {
    if (n == 0) throw ShapeError("flat metric needs dimension >= 1");
    return MetricSpec(Flat{n});
}

MetricSpec MetricSpec::const_curvature(double K, Chart chart) { return MetricSpec(ConstCurvature3{K, chart}); }

MetricSpec MetricSpec::taub_nut(double m, TaubNutNormalization norm) {
    if (!(m > 0.0)) throw ShapeError("Taub-NUT mass parameter must be positive");
    return MetricSpec(TaubNUT{m, norm});
}

MetricSpec MetricSpec::custom(std::vector<std::vector<expr::Expression>> metric, std::vector<std::string> names) {
    const std::size_t n = metric.size();
    if (n == 0) throw ShapeError("custom metric is empty");
    for (const auto& row : metric) {
        if (row.size() != n) throw ShapeError("custom metric must be square");
        for (const auto& e : row) {
            if (e.dim() != n) throw ShapeError("custom metric entry has wrong chart dimension");
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (metric[i][j].to_string() != metric[j][i].to_string()) {
                throw ShapeError("custom metric is not symmetric at (" + std::to_string(i + 1) + "," +
                                 std::to_string(j + 1) + ")");
            }
        }
    }
    if (names.empty()) names = expr::default_names(n);
    if (names.size() != n) throw ShapeError("coordinate name count does not match dimension");
    return MetricSpec(Custom{n, std::move(metric), std::move(names)});
}

std::size_t MetricSpec::dim() const {
    return std::visit(
        [](const auto& k) -> std::size_t {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Flat> || std::is_same_v<T, Custom>) {
                return k.n;
            } else if constexpr (std::is_same_v<T, ConstCurvature3>) {
                return 3;
            } else {
                return 4;
            }
        },
        kind_);
}

std::vector<std::string> MetricSpec::coordinate_names() const {
    std::vector<std::string> names = std::visit(
        [&](const auto& k) -> std::vector<std::string> {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Flat>) {
                return expr::default_names(k.n);
            } else if constexpr (std::is_same_v<T, ConstCurvature3>) {
                if (k.chart == Chart::Spherical) return {"r", "theta", "phi"};
                return {"q1", "q2", "q3"};
            } else if constexpr (std::is_same_v<T, TaubNUT>) {
                return {"r", "theta", "phi", "psi"};
            } else {
                return k.names;
            }
        },
        kind_);
    if (momentum_) {
        for (std::size_t i = 0; i < names.size(); ++i) {
            std::string& s = names[i];
            if (s == "r") {
                s = "p";
            } else if ((s[0] == 'x' || s[0] == 'q') && s.size() > 1 && std::isdigit(static_cast<unsigned char>(s[1]))) {
                s[0] = 'p';
            } else if (s != "theta" && s != "phi" && s != "psi") {
                s = "~" + s;
            }
        }
    }
    return names;
}

std::string MetricSpec::name() const {
    std::string base = std::visit(
        [](const auto& k) -> std::string {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Flat>) {
                return "flat(" + std::to_string(k.n) + ")";
            } else if constexpr (std::is_same_v<T, ConstCurvature3>) {
                return std::string("const-curvature(K=") + format_param(k.K) +
                       (k.chart == Chart::Spherical ? ", spherical)" : ")");
            } else if constexpr (std::is_same_v<T, TaubNUT>) {
                return std::string("taub-nut(m=") + format_param(k.m) +
                       (k.normalization == TaubNutNormalization::FourMSquared ? ", 4m^2)" : ", 16m^2)");
            } else {
                return "custom(" + std::to_string(k.n) + ")";
            }
        },
        kind_);
    return momentum_ ? "dual " + base : base;
}

void MetricSpec::check_domain(std::span<const double> x) const {
    if (x.size() != dim()) {
        throw ShapeError(name() + " expects " + std::to_string(dim()) + " coordinates, got " +
                         std::to_string(x.size()));
    }
    for (double v : x) {
        if (!std::isfinite(v)) throw DomainError(name() + ": non-finite coordinate");
    }
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, ConstCurvature3>) {
                double r2 = 0.0;
                if (k.chart == Chart::Cartesian) {
                    for (double v : x) r2 += v * v;
                } else {
                    if (x[0] < kChartGuard) throw DomainError(name() + ": radius below chart guard");
                    if (std::abs(std::sin(x[1])) < kChartGuard) {
                        throw DomainError(name() + ": polar axis is a coordinate singularity");
                    }
                    r2 = x[0] * x[0];
                }
                if (std::abs(1.0 + k.K * r2 / 4.0) < kChartGuard) {
                    throw DomainError(name() + ": conformal factor 1 + K r^2/4 vanishes");
                }
            } else if constexpr (std::is_same_v<T, TaubNUT>) {
                if (x[0] < kChartGuard) throw DomainError(name() + ": r must be positive");
                if (std::abs(std::sin(x[1])) < kChartGuard) {
                    throw DomainError(name() + ": sin(theta) vanishes (coordinate singularity)");
                }
            }
        },
        kind_);
}

SampleBox MetricSpec::sample_box() const {
    using std::numbers::pi;
    SampleBox box;
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Flat> || std::is_same_v<T, Custom>) {
                box.ranges.assign(k.n, {-1.0, 1.0});
            } else if constexpr (std::is_same_v<T, ConstCurvature3>) {
                // Singular radius 2/sqrt(-K) for K < 0.
                double rmax = 1.5;
                if (k.K < 0.0) rmax = std::min(rmax, 2.0 / std::sqrt(-k.K) - kSampleMargin);
                if (k.chart == Chart::Cartesian) {
                    const double h = std::min(1.0, rmax / std::sqrt(3.0));
                    box.ranges.assign(3, {-h, h});
                } else {
                    box.ranges = {{kSampleMargin, rmax}, {kSampleMargin, pi - kSampleMargin}, {0.0, 2.0 * pi}};
                }
            } else {
                box.ranges = {{0.2, 3.0}, {kSampleMargin, pi - kSampleMargin}, {0.0, 2.0 * pi}, {0.0, 4.0 * pi}};
            }
        },
        kind_);
    return box;
}

template <typename S>
Tensor<S> MetricSpec::components(std::span<const S> x) const {
    using std::cos;
    using std::sin;
    std::vector<double> xv(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) xv[i] = value(x[i]);
    check_domain(xv);

    const std::size_t n = dim();
    Tensor<S> g(n, 2, S(0.0));
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Flat>) {
                for (std::size_t i = 0; i < n; ++i) g(i, i) = S(1.0);
            } else if constexpr (std::is_same_v<T, ConstCurvature3>) {
                if (k.chart == Chart::Cartesian) {
                    S r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                    const S omega = S(1.0) + (k.K / 4.0) * r2;
                    const S conf = S(1.0) / (omega * omega);
                    for (std::size_t i = 0; i < 3; ++i) g(i, i) = conf;
                } else {
                    const S& r = x[0];
                    const S s = sin(x[1]);
                    const S omega = S(1.0) + (k.K / 4.0) * (r * r);
                    const S conf = S(1.0) / (omega * omega);
                    g(0, 0) = conf;
                    g(1, 1) = conf * r * r;
                    g(2, 2) = conf * r * r * s * s;
                }
            } else if constexpr (std::is_same_v<T, TaubNUT>) {
                const S& r = x[0];
                const S s = sin(x[1]);
                const S c = cos(x[1]);
                const S V = S(1.0) + (2.0 * k.m) / r;
                const S w = taub_nut_c2(k) / V;
                g(0, 0) = V;
                g(1, 1) = V * r * r;
                g(2, 2) = V * r * r * s * s + w * c * c;
                g(2, 3) = w * c;
                g(3, 2) = g(2, 3);
                g(3, 3) = w;
            } else {
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = i; j < n; ++j) {
                        g(i, j) = k.metric[i][j].template evaluate<S>(x);
                        g(j, i) = g(i, j);
                    }
                }
            }
        },
        kind_);
    return g;
}

template Tensor<double> MetricSpec::components<double>(std::span<const double>) const;
template Tensor<Jet> MetricSpec::components<Jet>(std::span<const Jet>) const;
template Tensor<Dual2> MetricSpec::components<Dual2>(std::span<const Dual2>) const;

MetricSpec MetricSpec::dual() const {
    MetricSpec d = *this;
    d.momentum_ = !momentum_;
    return d;
}

MetricSpec dual_metric(const MetricSpec& spec) { return spec.dual(); }

MetricValue metric_at(const MetricSpec& spec, std::span<const double> point) {
    return spec.components<double>(point);
}

Matrix inverse_metric_at(const MetricSpec& spec, std::span<const double> point) {
    return invert(metric_at(spec, point));
}

Tensor<Jet> metric_jet(const MetricSpec& spec, std::span<const double> point) {
    const std::vector<Jet> x = seed_jets(point);
    return spec.components<Jet>(std::span<const Jet>(x));
}

ChristoffelValue christoffel_at(const MetricSpec& spec, std::span<const double> point) {
    const std::size_t n = spec.dim();
    const Tensor<Jet> g = metric_jet(spec, point);
    const Matrix ginv = invert(values_of(g));
    Tensor<double> dg(n, 3);
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) dg(c, a, b) = g(a, b).d(c);
        }
    }
    return christoffel_from(ginv, dg);
}

Tensor<double> covariant_derivative_lower(const Tensor<Jet>& t, const ChristoffelValue& gamma) {
    const std::size_t n = t.dim();
    const std::size_t r = t.rank();
    Tensor<double> out(n, r + 1);
    std::vector<std::size_t> idx(r + 1);
    std::vector<std::size_t> sub(r);
    for (std::size_t k = 0; k < out.size(); ++k) {
        idx = out.unravel(k);
        const std::size_t lambda = idx[0];
        for (std::size_t i = 0; i < r; ++i) sub[i] = idx[i + 1];
        double v = t[sub].d(lambda);
        for (std::size_t slot = 0; slot < r; ++slot) {
            const std::size_t mu = sub[slot];
            for (std::size_t s = 0; s < n; ++s) {
                const double gm = gamma(s, lambda, mu);
                if (gm == 0.0) continue;
                sub[slot] = s;
                v -= gm * t[sub].value();
            }
            sub[slot] = mu;
        }
        out.data()[k] = v;
    }
    return out;
}

Tensor<double> covariant_derivative(const MetricSpec& spec, const AntisymTensorField& field,
                                    std::span<const double> point) {
    if (field.dim() != spec.dim()) {
        throw ShapeError("field dimension " + std::to_string(field.dim()) + " does not match metric dimension " +
                         std::to_string(spec.dim()));
    }
    const ChristoffelValue gamma = christoffel_at(spec, point);
    return covariant_derivative_lower(field.evaluate_at(point), gamma);
}

Tensor<double> covariant_derivative_2form(const MetricSpec& spec, const AntisymTensorField& field,
                                          std::span<const double> point) {
    if (field.rank() != 2) throw ShapeError("covariant_derivative_2form needs a rank-2 field");
    return covariant_derivative(spec, field, point);
}

CurvatureValue curvature_at(const MetricSpec& spec, std::span<const double> point) {
    const std::size_t n = spec.dim();
    std::vector<Dual2> x;
    for (std::size_t i = 0; i < n; ++i) x.push_back(Dual2::variable(point[i], i, n));
    const Tensor<Dual2> g2 = spec.components<Dual2>(std::span<const Dual2>(x));

    // Lift one derivative level: g and d_c g as first-order jets.
    Tensor<Jet> g(n, 2, Jet(0.0));
    Tensor<Jet> dg(n, 3, Jet(0.0));
    std::vector<double> partials(n);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            const Dual2& e = g2(a, b);
            for (std::size_t k = 0; k < n; ++k) partials[k] = e.d(k);
            g(a, b) = Jet::from_parts(e.value(), partials.data(), n);
            for (std::size_t c = 0; c < n; ++c) {
                for (std::size_t k = 0; k < n; ++k) partials[k] = e.dd(c, k);
                dg(c, a, b) = Jet::from_parts(e.d(c), partials.data(), n);
            }
        }
    }
    const Tensor<Jet> ginv = invert(g);
    const Tensor<Jet> gamma = christoffel_from(ginv, dg);

    CurvatureValue out;
    out.riemann = Tensor<double>(n, 4);
    for (std::size_t rho = 0; rho < n; ++rho) {
        for (std::size_t sigma = 0; sigma < n; ++sigma) {
            for (std::size_t mu = 0; mu < n; ++mu) {
                for (std::size_t nu = mu + 1; nu < n; ++nu) {
                    double v = gamma(rho, nu, sigma).d(mu) - gamma(rho, mu, sigma).d(nu);
                    for (std::size_t l = 0; l < n; ++l) {
                        v += gamma(rho, mu, l).value() * gamma(l, nu, sigma).value() -
                             gamma(rho, nu, l).value() * gamma(l, mu, sigma).value();
                    }
                    const std::size_t i1[4] = {rho, sigma, mu, nu};
                    const std::size_t i2[4] = {rho, sigma, nu, mu};
                    out.riemann[i1] = v;
                    out.riemann[i2] = -v;
                }
            }
        }
    }
    out.ricci = Matrix(n, 2);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t v = 0; v < n; ++v) {
            double acc = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                const std::size_t i[4] = {r, s, r, v};
                acc += out.riemann[i];
            }
            out.ricci(s, v) = acc;
        }
    }
    const Matrix ginv_v = values_of(ginv);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t v = 0; v < n; ++v) out.scalar += ginv_v(s, v) * out.ricci(s, v);
    }
    return out;
}

}  // namespace kyano::geometry
