#include "kyano/kysym.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

namespace kyano::kysym {

namespace {

void require_antisymmetric(const Tensor<double>& f) {
    const double scale = std::max(1.0, max_abs(f));
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < f.size(); ++k) {
        idx = f.unravel(k);
        for (std::size_t a = 0; a + 1 < idx.size(); ++a) {
            std::swap(idx[a], idx[a + 1]);
            const double sum = f.data()[k] + f[idx];
            std::swap(idx[a], idx[a + 1]);
            if (std::abs(sum) > 1e-12 * scale) throw ShapeError("tensor is not antisymmetric");
        }
    }
}

double pfaffian(const Matrix& a, std::vector<std::size_t>& rows) {
    const std::size_t m = rows.size();
    if (m == 0) return 1.0;
    if (m % 2 == 1) return 0.0;
    const std::size_t first = rows.front();
    double acc = 0.0;
    for (std::size_t j = 1; j < m; ++j) {
        const double aij = a(first, rows[j]);
        if (aij == 0.0) continue;
        std::vector<std::size_t> rest;
        rest.reserve(m - 2);
        for (std::size_t k = 1; k < m; ++k) {
            if (k != j) rest.push_back(rows[k]);
        }
        const double sign = (j % 2 == 1) ? 1.0 : -1.0;
        acc += sign * aij * pfaffian(a, rest);
    }
    return acc;
}

template <typename S>
std::vector<S> cartesian_partials_row(const S& r, const S& st, const S& ct, const S& sp, const S& cp, int i,
                                      std::size_t slot_count) {
    // d x_i / d(r, theta, phi, psi)
    std::vector<S> row(slot_count, S(0.0));
    if (i == 0) {
        row[0] = st * cp;
        row[1] = r * ct * cp;
        row[2] = -(r * st * sp);
    } else if (i == 1) {
        row[0] = st * sp;
        row[1] = r * ct * sp;
        row[2] = r * st * cp;
    } else {
        row[0] = ct;
        row[1] = -(r * st);
    }
    return row;
}

// Upper-triangle components (01,02,03,12,13,23) of the Taub-NUT two-form f_index.
template <typename S>
std::vector<S> taubnut_components(int index, std::span<const S> x, double m) {
    using std::cos;
    using std::sin;
    if (index < 1 || index > 3) throw ShapeError("Taub-NUT two-form index must be 1, 2 or 3");
    if (value(x[0]) < 1e-9) throw DomainError("Taub-NUT two-form: r must be positive");
    if (std::abs(std::sin(value(x[1]))) < 1e-9) throw DomainError("Taub-NUT two-form: sin(theta) vanishes");
    const S& r = x[0];
    const S st = sin(x[1]);
    const S ct = cos(x[1]);
    const S sp = sin(x[2]);
    const S cp = cos(x[2]);
    const S V = S(1.0) + (2.0 * m) / r;

    std::vector<std::vector<S>> dx;
    for (int i = 0; i < 3; ++i) dx.push_back(cartesian_partials_row(r, st, ct, sp, cp, i, 4));
    const std::vector<S> sigma{S(0.0), S(0.0), ct, S(1.0)};

    const int i = index - 1;
    const int j = (i + 1) % 3;
    const int k = (i + 2) % 3;
    std::vector<S> out;
    for (std::size_t a = 0; a < 4; ++a) {
        for (std::size_t b = a + 1; b < 4; ++b) {
            S term = (4.0 * m) * (sigma[a] * dx[i][b] - sigma[b] * dx[i][a]);
            // eps_ijk dx_j ^ dx_k summed over j,k = 2 dx_j ^ dx_k for the cyclic pair.
            S wedge = dx[j][a] * dx[k][b] - dx[k][a] * dx[j][b];
            term = term - 2.0 * (V * wedge);
            out.push_back(term);
        }
    }
    return out;
}

// Printed components (12, 13, 23) on (r, theta, phi).
template <typename S>
std::vector<S> constcurv_components(Side side, std::span<const S> x, double K) {
    using std::cos;
    using std::sin;
    const double rv = value(x[0]);
    if (rv < 1e-9) throw DomainError("constant-curvature field: radius below chart guard");
    if (std::abs(1.0 + K * rv * rv / 4.0) < 1e-9) {
        throw DomainError("constant-curvature field: conformal factor vanishes");
    }
    const S& r = x[0];
    const S st = sin(x[1]);
    const S s2t = sin(2.0 * x[1]);
    const S sp = sin(x[2]);
    const S cp = cos(x[2]);
    const S omega = S(1.0) + (K / 4.0) * (r * r);
    const S omega2 = omega * omega;
    const S four_plus = S(4.0) + K * (r * r);
    const S k_minus = K * (r * r) - S(4.0);
    S f12 = side == Side::Position ? (r * sp) / (16.0 * omega2) : (16.0 * (r * sp)) / omega2;
    S f13 = (r * s2t * cp) / (32.0 * omega2);
    S f23 = (r * r * st * st * cp * k_minus) / (four_plus * omega2);
    return {f12, f13, f23};
}

}  // namespace

Tensor<double> flat_ky_tensor(std::span<const double> v) {
    const std::size_t n = v.size();
    if (n < 2) throw ShapeError("flat Killing-Yano tensor needs n >= 2");
    Tensor<double> f(n, n - 1);
    std::vector<std::size_t> full(n);
    for (std::size_t k = 0; k < f.size(); ++k) {
        const std::vector<std::size_t> idx = f.unravel(k);
        // The only surviving term of eps_{c i1..} v_c is the missing index c.
        std::vector<bool> seen(n, false);
        bool repeated = false;
        for (std::size_t i : idx) {
            if (seen[i]) repeated = true;
            seen[i] = true;
        }
        if (repeated) continue;
        std::size_t c = 0;
        while (seen[c]) ++c;
        full[0] = c;
        for (std::size_t i = 0; i < idx.size(); ++i) full[i + 1] = idx[i];
        f.data()[k] = levi_civita(full) * v[c];
    }
    return f;
}

KYPair flat_ky_pair(std::size_t n, std::span<const double> x, std::span<const double> p) {
    if (x.size() != n || p.size() != n) throw ShapeError("flat_ky_pair: tuple length does not match dimension");
    return {flat_ky_tensor(x), flat_ky_tensor(p)};
}

AntisymTensorField flat_ky_field(std::size_t n) {
    if (n < 2) throw ShapeError("flat Killing-Yano field needs n >= 2");
    const auto tuples = ascending_tuples(n, n - 1);
    std::vector<std::size_t> missing;
    std::vector<int> signs;
    for (const auto& t : tuples) {
        std::vector<bool> seen(n, false);
        for (std::size_t i : t) seen[i] = true;
        std::size_t c = 0;
        while (seen[c]) ++c;
        std::vector<std::size_t> full{c};
        full.insert(full.end(), t.begin(), t.end());
        missing.push_back(c);
        signs.push_back(levi_civita(full));
    }
    auto fn = [missing, signs](std::span<const Jet> x) {
        std::vector<Jet> out;
        for (std::size_t i = 0; i < missing.size(); ++i) {
            out.push_back(signs[i] > 0 ? x[missing[i]] : -x[missing[i]]);
        }
        return out;
    };
    return AntisymTensorField(n, n - 1, std::move(fn), "eps.x (flat, n=" + std::to_string(n) + ")");
}

std::vector<double> reconstruct_position(const Tensor<double>& f) {
    const std::size_t n = f.dim();
    if (n < 2 || f.rank() + 1 != n) throw ShapeError("reconstruction needs a rank n-1 tensor");
    require_antisymmetric(f);
    // Sum over ascending tuples only; each contributes (n-1)! identical terms to the full sum.
    std::vector<double> x(n, 0.0);
    std::vector<std::size_t> full(n);
    for (const auto& t : ascending_tuples(n, n - 1)) {
        std::vector<bool> seen(n, false);
        for (std::size_t i : t) seen[i] = true;
        std::size_t c = 0;
        while (seen[c]) ++c;
        full[0] = c;
        for (std::size_t i = 0; i < t.size(); ++i) full[i + 1] = t[i];
        x[c] += levi_civita(full) * f[t];
    }
    return x;
}

std::vector<double> reconstruct_momentum(const Tensor<double>& f_tilde) { return reconstruct_position(f_tilde); }

Tensor<double> covariant_constancy_residual(const MetricSpec& spec, const AntisymTensorField& field,
                                            std::span<const double> point) {
    return geometry::covariant_derivative(spec, field, point);
}

Tensor<double> ky_residual(const MetricSpec& spec, const AntisymTensorField& field, std::span<const double> point) {
    const Tensor<double> d = geometry::covariant_derivative(spec, field, point);
    Tensor<double> res(d.dim(), d.rank());
    std::vector<std::size_t> swapped;
    for (std::size_t k = 0; k < d.size(); ++k) {
        swapped = d.unravel(k);
        std::swap(swapped[0], swapped[1]);
        res.data()[k] = d.data()[k] + d[swapped];
    }
    return res;
}

Tensor<Jet> killing_from_ky_jet(const MetricSpec& spec, const AntisymTensorField& field, std::span<const Jet> x) {
    if (field.rank() != 2) throw ShapeError("Killing tensor construction needs a rank-2 field");
    if (field.dim() != spec.dim()) throw ShapeError("field and metric dimensions differ");
    const std::size_t n = spec.dim();
    const Tensor<Jet> f = field.evaluate(x);
    const Tensor<Jet> ginv = invert(spec.components<Jet>(x));
    // h^lambda_nu = g^{lambda sigma} f_{sigma nu}
    Tensor<Jet> h(n, 2, Jet(0.0));
    for (std::size_t l = 0; l < n; ++l) {
        for (std::size_t v = 0; v < n; ++v) {
            Jet acc(0.0);
            for (std::size_t s = 0; s < n; ++s) acc += ginv(l, s) * f(s, v);
            h(l, v) = acc;
        }
    }
    Tensor<Jet> K(n, 2, Jet(0.0));
    for (std::size_t mu = 0; mu < n; ++mu) {
        for (std::size_t nu = mu; nu < n; ++nu) {
            Jet acc(0.0);
            for (std::size_t l = 0; l < n; ++l) acc += f(mu, l) * h(l, nu);
            K(mu, nu) = acc;
            K(nu, mu) = acc;
        }
    }
    return K;
}

KillingTensorValue killing_from_ky(const MetricSpec& spec, const AntisymTensorField& field,
                                   std::span<const double> point) {
    std::vector<Jet> x(point.begin(), point.end());
    return values_of(killing_from_ky_jet(spec, field, x));
}

Tensor<double> killing_equation_residual(const MetricSpec& spec, const AntisymTensorField& field,
                                         std::span<const double> point) {
    const std::vector<Jet> x = seed_jets(point);
    const Tensor<Jet> K = killing_from_ky_jet(spec, field, x);
    const Tensor<double> dK = geometry::covariant_derivative_lower(K, geometry::christoffel_at(spec, point));
    const std::size_t n = spec.dim();
    Tensor<double> res(n, 3);
    for (std::size_t l = 0; l < n; ++l) {
        for (std::size_t m = 0; m < n; ++m) {
            for (std::size_t v = 0; v < n; ++v) res(l, m, v) = dK(l, m, v) + dK(m, v, l) + dK(v, l, m);
        }
    }
    return res;
}

double antisymmetric_determinant(const Matrix& f) {
    const std::size_t n = f.dim();
    if (n % 2 == 1) return 0.0;
    if (n > 10) return determinant(f);
    std::vector<std::size_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = i;
    const double pf = pfaffian(f, rows);
    return pf * pf;
}

Nondegeneracy nondegeneracy(const AntisymTensorField& field, const MetricSpec& spec, std::span<const double> point) {
    if (field.rank() != 2) throw ShapeError("non-degeneracy is defined for rank-2 fields");
    spec.check_domain(point);
    Nondegeneracy out;
    out.determinant = antisymmetric_determinant(field.value_at(point));
    out.nondegenerate = std::abs(out.determinant) > kNondegeneracyTol;
    return out;
}

Tensor<double> exterior_derivative_2form(const AntisymTensorField& field, std::span<const double> point) {
    if (field.rank() != 2) throw ShapeError("exterior derivative is implemented for rank-2 fields");
    const Tensor<Jet> f = field.evaluate_at(point);
    const std::size_t n = field.dim();
    Tensor<double> out(n, 3);
    for (std::size_t l = 0; l < n; ++l) {
        for (std::size_t m = 0; m < n; ++m) {
            for (std::size_t v = 0; v < n; ++v) out(l, m, v) = f(m, v).d(l) + f(v, l).d(m) + f(l, m).d(v);
        }
    }
    return out;
}

SymplecticForm symplectic_from_ky(const MetricSpec& spec, const AntisymTensorField& field,
                                  std::span<const std::vector<double>> sample_points,
                                  const SymplecticTolerances& tol) {
    using Reason = SymplecticError::Reason;
    if (field.rank() != 2 || field.dim() != spec.dim()) {
        throw SymplecticError(Reason::RankMismatch, "symplectic form needs a rank-2 field on the metric's chart");
    }
    if (spec.dim() % 2 == 1) {
        throw SymplecticError(Reason::OddDimension, "symplectic form needs an even-dimensional manifold");
    }
    if (sample_points.empty()) throw ShapeError("symplectic_from_ky needs at least one sample point");
    SymplecticForm form(field, spec);
    form.min_det_ = std::numeric_limits<double>::infinity();
    for (const auto& p : sample_points) {
        const double det = antisymmetric_determinant(field.value_at(p));
        form.min_det_ = std::min(form.min_det_, std::abs(det));
        form.max_cc_ = std::max(form.max_cc_, max_abs(covariant_constancy_residual(spec, field, p)));
        form.max_closed_ = std::max(form.max_closed_, max_abs(exterior_derivative_2form(field, p)));
    }
    if (!(form.min_det_ > tol.determinant)) {
        throw SymplecticError(Reason::Degenerate, "form is degenerate at a sample point (|det| = " +
                                                      std::to_string(form.min_det_) + ")");
    }
    if (form.max_cc_ > tol.covariant_constancy) {
        throw SymplecticError(Reason::NotCovariantConstant,
                              "form is not covariantly constant (max |Df| = " + std::to_string(form.max_cc_) + ")");
    }
    if (form.max_closed_ > tol.closedness) {
        throw SymplecticError(Reason::NotClosed,
                              "form is not closed (max |df| = " + std::to_string(form.max_closed_) + ")");
    }
    return form;
}

Matrix constcurv_ky(Side side, std::span<const double> point, double K) {
    if (point.size() != 3) throw ShapeError("constant-curvature field lives on a 3-dimensional chart");
    const std::vector<double> c = constcurv_components<double>(side, point, K);
    Matrix f(3, 2);
    f(0, 1) = c[0];
    f(1, 0) = -c[0];
    f(0, 2) = c[1];
    f(2, 0) = -c[1];
    f(1, 2) = c[2];
    f(2, 1) = -c[2];
    return f;
}

AntisymTensorField constcurv_ky_field(Side side, double K) {
    auto fn = [side, K](std::span<const Jet> x) { return constcurv_components<Jet>(side, x, K); };
    return AntisymTensorField(3, 2, std::move(fn),
                              side == Side::Position ? "printed constant-curvature f" : "printed constant-curvature f~");
}

Matrix taubnut_ky(int index, std::span<const double> point, double m) {
    if (point.size() != 4) throw ShapeError("Taub-NUT two-form lives on a 4-dimensional chart");
    const std::vector<double> c = taubnut_components<double>(index, point, m);
    Matrix f(4, 2);
    std::size_t k = 0;
    for (std::size_t a = 0; a < 4; ++a) {
        for (std::size_t b = a + 1; b < 4; ++b) {
            f(a, b) = c[k];
            f(b, a) = -c[k];
            ++k;
        }
    }
    return f;
}

AntisymTensorField taubnut_ky_field(int index, double m) {
    if (index < 1 || index > 3) throw ShapeError("Taub-NUT two-form index must be 1, 2 or 3");
    auto fn = [index, m](std::span<const Jet> x) { return taubnut_components<Jet>(index, x, m); };
    return AntisymTensorField(4, 2, std::move(fn), "Taub-NUT f_" + std::to_string(index));
}

KYReport verify_ky(const MetricSpec& spec, const AntisymTensorField& field,
                   std::span<const std::vector<double>> points, const KYTolerances& tol) {
    if (field.dim() != spec.dim()) throw ShapeError("field and metric dimensions differ");
    KYReport report;
    report.metric = spec.name();
    report.field = field.label();
    report.samples = points.size();
    report.tolerances = tol;
    bool all_nondegenerate = field.rank() == 2 && !points.empty();
    for (const auto& p : points) {
        const Tensor<double> d = geometry::covariant_derivative(spec, field, p);
        report.max_covariant_constancy_residual = std::max(report.max_covariant_constancy_residual, max_abs(d));
        report.max_ky_residual = std::max(report.max_ky_residual, max_abs(ky_residual(spec, field, p)));
        if (field.rank() == 2) {
            const double det = antisymmetric_determinant(field.value_at(p));
            report.determinants.push_back(det);
            if (!(std::abs(det) > tol.determinant)) all_nondegenerate = false;
        }
    }
    report.is_ky = !points.empty() && report.max_ky_residual <= tol.ky;
    report.is_covariant_constant = !points.empty() && report.max_covariant_constancy_residual <= tol.covariant_constancy;
    report.is_nondegenerate = all_nondegenerate;
    return report;
}

AnsatzResult ky_solve_ansatz(const MetricSpec& spec, const std::vector<expr::Expression>& basis,
                             std::span<const std::vector<double>> sample_points, double rel_tol) {
    const std::size_t n = spec.dim();
    if (basis.empty()) throw ShapeError("ansatz basis is empty");
    for (const auto& b : basis) {
        if (b.dim() != n) throw ShapeError("ansatz basis function has wrong chart dimension");
    }
    const auto tuples = ascending_tuples(n, 2);
    const std::size_t nb = basis.size();
    const std::size_t unknowns = tuples.size() * nb;
    // Residual is symmetric in its first two indices: keep lambda <= nu, all mu.
    const std::size_t rows_per_point = n * (n + 1) / 2 * n;

    AnsatzResult result;
    result.unknowns = unknowns;
    result.equations = rows_per_point * sample_points.size();
    result.underdetermined = result.equations < 2 * unknowns;

    Eigen::MatrixXd A(result.equations, unknowns);
    for (std::size_t pi = 0; pi < sample_points.size(); ++pi) {
        const auto& p = sample_points[pi];
        const geometry::ChristoffelValue gamma = geometry::christoffel_at(spec, p);
        const std::vector<Jet> x = seed_jets(p);
        std::vector<Jet> phi;
        for (const auto& b : basis) phi.push_back(b.evaluate<Jet>(x));

        for (std::size_t t = 0; t < tuples.size(); ++t) {
            for (std::size_t a = 0; a < nb; ++a) {
                Tensor<Jet> f(n, 2, Jet(0.0));
                f(tuples[t][0], tuples[t][1]) = phi[a];
                f(tuples[t][1], tuples[t][0]) = -phi[a];
                const Tensor<double> d = geometry::covariant_derivative_lower(f, gamma);
                std::size_t row = pi * rows_per_point;
                for (std::size_t l = 0; l < n; ++l) {
                    for (std::size_t v = l; v < n; ++v) {
                        for (std::size_t m = 0; m < n; ++m) {
                            A(static_cast<Eigen::Index>(row++), static_cast<Eigen::Index>(t * nb + a)) =
                                d(l, v, m) + d(v, l, m);
                        }
                    }
                }
            }
        }
    }

    Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    result.singular_values.assign(sv.data(), sv.data() + sv.size());
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    const Eigen::MatrixXd& V = svd.matrixV();
    for (std::size_t c = 0; c < unknowns; ++c) {
        const bool null = c >= static_cast<std::size_t>(sv.size()) || sv(static_cast<Eigen::Index>(c)) <= rel_tol * smax;
        if (!null) continue;
        std::vector<double> coeffs(unknowns);
        for (std::size_t k = 0; k < unknowns; ++k) coeffs[k] = V(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c));
        result.coefficients.push_back(coeffs);

        std::vector<std::vector<double>> per_component(tuples.size(), std::vector<double>(nb));
        for (std::size_t t = 0; t < tuples.size(); ++t) {
            for (std::size_t a = 0; a < nb; ++a) per_component[t][a] = coeffs[t * nb + a];
        }
        auto fn = [basis, per_component](std::span<const Jet> xs) {
            std::vector<Jet> phis;
            for (const auto& b : basis) phis.push_back(b.evaluate<Jet>(xs));
            std::vector<Jet> out;
            for (const auto& row : per_component) {
                Jet acc(0.0);
                for (std::size_t a = 0; a < row.size(); ++a) acc += row[a] * phis[a];
                out.push_back(acc);
            }
            return out;
        };
        result.fields.emplace_back(n, 2, std::move(fn), "ansatz solution " + std::to_string(result.fields.size() + 1));
    }
    return result;
}

}  // namespace kyano::kysym
