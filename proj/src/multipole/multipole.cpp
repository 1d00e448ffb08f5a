#include "kyano/multipole.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "kyano/kysym.hpp"
#include "kyano/sampling.hpp"

namespace kyano::multipole {

namespace {

using Mat = Tensor<double>;

constexpr double delta(std::size_t i, std::size_t j) { return i == j ? 1.0 : 0.0; }

int eps(std::size_t i, std::size_t j, std::size_t k) { return levi_civita({i, j, k}); }

// eps_ijk a_jk
Vec3 eps_contract(const Mat3& a) {
    Vec3 out{};
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            for (std::size_t k = 0; k < 3; ++k) out[i] += eps(i, j, k) * a[j][k];
        }
    }
    return out;
}

// -eps_ijk v_i, as a matrix in (j, k)
Mat3 minus_eps_vector(const Vec3& v) {
    Mat3 out{};
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            for (std::size_t k = 0; k < 3; ++k) out[j][k] -= eps(i, j, k) * v[i];
        }
    }
    return out;
}

Mat3 to_mat3(const Mat& t) {
    Mat3 out{};
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) out[i][j] = t(i, j);
    }
    return out;
}

Mat3 matmul(const Mat3& a, const Mat3& b) {
    Mat3 out{};
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            for (std::size_t m = 0; m < 3; ++m) out[i][j] += a[i][m] * b[m][j];
        }
    }
    return out;
}

double contract(const Mat3& a, const Mat3& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) s += a[i][j] * b[i][j];
    }
    return s;
}

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 as_vec3(const std::vector<double>& v) {
    if (v.size() != 3) throw ShapeError("multipole tensors need a 3-dimensional phase point");
    return {v[0], v[1], v[2]};
}

double diff(const Vec3& a, const Vec3& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < 3; ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double diff(const Mat3& a, const Mat3& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < 3; ++i) m = std::max(m, diff(a[i], b[i]));
    return m;
}

// The Runge-Lenz form 1/8 eps {(f^2 - 2) g_jk - 2 f_jk (f.g)}, with g the partner tensor.
Vec3 runge_lenz_ky(const Mat3& f, const Mat3& g) {
    const double f2 = contract(f, f);
    const double fg = contract(f, g);
    Mat3 inner{};
    for (std::size_t j = 0; j < 3; ++j) {
        for (std::size_t k = 0; k < 3; ++k) inner[j][k] = (f2 - 2.0) * g[j][k] - 2.0 * f[j][k] * fg;
    }
    Vec3 out = eps_contract(inner);
    for (double& v : out) v /= 8.0;
    return out;
}

// The conformal form 1/4 eps {2 f_jk (f.g) - g_jk f^2}.
Vec3 conformal_ky(const Mat3& f, const Mat3& g) {
    const double f2 = contract(f, f);
    const double fg = contract(f, g);
    Mat3 inner{};
    for (std::size_t j = 0; j < 3; ++j) {
        for (std::size_t k = 0; k < 3; ++k) inner[j][k] = 2.0 * f[j][k] * fg - g[j][k] * f2;
    }
    Vec3 out = eps_contract(inner);
    for (double& v : out) v /= 4.0;
    return out;
}

Vec3 runge_lenz_direct(const Vec3& x, const Vec3& p) {
    const double p2 = dot(p, p);
    const double D = dot(x, p);
    Vec3 out{};
    for (std::size_t i = 0; i < 3; ++i) out[i] = 0.5 * x[i] * p2 - p[i] * D - 0.5 * x[i];
    return out;
}

Vec3 conformal_direct(const Vec3& x, const Vec3& p) {
    const double r2 = dot(x, x);
    const double D = dot(x, p);
    Vec3 out{};
    for (std::size_t i = 0; i < 3; ++i) out[i] = 2.0 * x[i] * D - r2 * p[i];
    return out;
}

std::string format_residual(double r) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", r);
    return buf;
}

}  // namespace

MultipoleSet evaluate_multipoles(const PhasePoint& z) {
    const Vec3 x = as_vec3(z.x);
    const Vec3 p = as_vec3(z.p);
    MultipoleSet m;

    // direct
    m.d_dot = p;
    m.r2 = dot(x, x);
    m.p2 = dot(p, p);
    m.D = dot(x, p);
    m.L = {x[1] * p[2] - x[2] * p[1], x[2] * p[0] - x[0] * p[2], x[0] * p[1] - x[1] * p[0]};
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            m.Q_direct[i][j] = x[i] * x[j] - m.r2 * delta(i, j) / 3.0;
            m.S[i][j] = x[i] * p[j] + x[j] * p[i] - 2.0 * m.D * delta(i, j) / 3.0;
            m.mu_quad_direct[i][j] = (x[i] * m.L[j] + x[j] * m.L[i]) / 3.0;
            m.T_quad_transversal_direct[i][j] = m.Q_direct[i][j] * m.D;
            for (std::size_t k = 0; k < 3; ++k) {
                m.octupole_direct[i][j][k] =
                    x[i] * x[j] * x[k] - m.r2 / 5.0 * (x[i] * delta(j, k) + x[j] * delta(i, k) + x[k] * delta(i, j));
            }
        }
        m.T_dipole_direct[i] = (x[i] * m.D - 2.0 * m.r2 * p[i]) / 10.0;
        m.T_dipole_transversal_direct[i] = 0.5 * x[i] * m.D;
    }
    m.C = conformal_direct(x, p);
    m.C_tilde = conformal_direct(p, x);
    m.A = runge_lenz_direct(x, p);
    m.A_tilde_swap = runge_lenz_direct(p, x);

    // Killing-Yano forms
    const kysym::KYPair pair = kysym::flat_ky_pair(3, z.x, z.p);
    const Mat3 f = to_mat3(pair.f);
    const Mat3 ft = to_mat3(pair.f_tilde);
    const double f2 = contract(f, f);
    const double ft2 = contract(ft, ft);
    const double fdot = contract(f, ft);
    const Mat3 ff = matmul(f, f);
    const Mat3 fft = matmul(f, ft);
    const Mat3 ffft = matmul(ff, ft);

    m.r2_ky = 0.5 * f2;
    m.p2_ky = 0.5 * ft2;
    m.D_ky = 0.5 * fdot;
    for (std::size_t i = 0; i < 3; ++i) {
        double mu = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            for (std::size_t l = 0; l < 3; ++l) {
                for (std::size_t n = 0; n < 3; ++n) mu += eps(k, l, n) * f[k][i] * ft[l][n];
            }
        }
        m.mu_ky[i] = 0.5 * mu;
    }
    Mat3 dipole_inner{};
    Mat3 transversal_inner{};
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            m.Q_ky_printed[i][j] = 0.25 * (ff[i][j] - delta(i, j) * f2 / 3.0);
            m.Q_ky_corrected[i][j] = kQuadrupoleA * ff[i][j] + kQuadrupoleB * delta(i, j) * f2;
            m.mu_quad_ky[i][j] = -(ffft[i][j] + ffft[j][i]) / 3.0;
            m.T_quad_ky[i][j] = (ff[i][j] - 0.25 * delta(i, j) * f2) * fdot - 2.5 * fft[i][j] * f2;
            m.T_quad_transversal[i][j] = (ff[i][j] - delta(i, j) * f2 / 3.0) * fdot / 8.0;
            dipole_inner[i][j] = f[i][j] * fdot - 2.0 * ft[i][j] * f2;
            transversal_inner[i][j] = f[i][j] * fdot;
        }
    }
    const Vec3 dipole = eps_contract(dipole_inner);
    const Vec3 transversal = eps_contract(transversal_inner);
    for (std::size_t i = 0; i < 3; ++i) {
        m.T_dipole_ky[i] = dipole[i] / 40.0;
        m.T_dipole_transversal[i] = transversal[i] / 8.0;
    }
    m.C_ky = conformal_ky(f, ft);
    m.C_tilde_ky = conformal_ky(ft, f);
    m.A_tilde_ky = runge_lenz_ky(f, ft);
    m.A_ky = runge_lenz_ky(ft, f);
    for (std::size_t i = 0; i < 3; ++i) m.toroid_from_generators[i] = (2.0 * m.A_tilde_ky[i] + m.C_ky[i]) * m.D_ky;
    return m;
}

QuadrupoleFit fit_quadrupole(const std::vector<PhasePoint>& points) {
    if (points.empty()) throw Error("fit_quadrupole needs at least one point");
    Eigen::MatrixXd A(9 * points.size(), 2);
    Eigen::VectorXd b(9 * points.size());
    Eigen::Index row = 0;
    for (const auto& z : points) {
        const Mat3 f = to_mat3(kysym::flat_ky_tensor(z.x));
        const Mat3 ff = matmul(f, f);
        const double f2 = contract(f, f);
        const MultipoleSet m = evaluate_multipoles(z);
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) {
                A(row, 0) = ff[i][j];
                A(row, 1) = delta(i, j) * f2;
                b(row) = m.Q_direct[i][j];
                ++row;
            }
        }
    }
    const Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
    QuadrupoleFit fit{c(0), c(1), (A * c - b).cwiseAbs().maxCoeff()};
    return fit;
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Holds:
            return "holds";
        case Verdict::Fails:
            return "fails";
        case Verdict::HoldsAfterCorrection:
            return "holds-after-documented-correction";
    }
    return "fails";
}

Verdict verdict_from_string(const std::string& s) {
    if (s == "holds") return Verdict::Holds;
    if (s == "fails") return Verdict::Fails;
    if (s == "holds-after-documented-correction") return Verdict::HoldsAfterCorrection;
    throw Error("unknown verdict '" + s + "'");
}

const IdentityResult& IdentityReport::at(const std::string& id) const {
    for (const auto& r : identities) {
        if (r.id == id) return r;
    }
    throw Error("no identity '" + id + "' in report");
}

std::string IdentityReport::table() const {
    std::size_t w_id = 8;
    std::size_t w_anchor = 6;
    for (const auto& r : identities) {
        w_id = std::max(w_id, r.id.size());
        w_anchor = std::max(w_anchor, r.anchor.size());
    }
    std::ostringstream out;
    auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w - std::min(w, s.size()), ' '); };
    out << pad("identity", w_id) << "  " << pad("anchor", w_anchor) << "  " << pad("residual", 10) << "  verdict\n";
    for (const auto& r : identities) {
        out << pad(r.id, w_id) << "  " << pad(r.anchor, w_anchor) << "  " << pad(format_residual(r.residual), 10)
            << "  " << to_string(r.verdict) << "\n";
    }
    for (const auto& n : notes) out << "note: " << n << "\n";
    return out.str();
}

IdentityReport identity_suite(const std::vector<PhasePoint>& points) {
    if (points.empty()) throw Error("identity_suite needs at least one sample point");

    struct Spec {
        const char* id;
        const char* anchor;
        const char* lhs;
        const char* rhs;
        bool corrected;
        const char* correction;
    };
    static const Spec specs[] = {
        {"1", "radius and impulse", "r^2, p^2", "f^2/2, f~^2/2", false, ""},
        {"2", "magnetic dipole", "mu_i = 1/2 eps_klm f_ki f~_lm", "L_i = (x cross p)_i", false, ""},
        {"3", "dilatation", "1/2 f_ij f~_ij", "x.p", false, ""},
        {"4", "quadrupole mass-inertia", "1/4 (f_im f_mj - 1/3 delta_ij f^2)", "x_i x_j - r^2 delta_ij/3", false, "5"},
        {"5", "quadrupole mass-inertia", "f_im f_mj + 1/3 delta_ij f^2", "x_i x_j - r^2 delta_ij/3", true, ""},
        {"6", "toroid dipole", "1/40 eps_ijk {f_jk (f.f~) - 2 f~_jk f^2}", "1/10 (x_i D - 2 r^2 p_i)", false, ""},
        {"7", "toroid dipole, transversal", "1/8 eps_ijk f_jk (f.f~)", "1/2 x_i D", false, ""},
        {"8", "conformal operator", "1/4 eps_ijk {2 f_jk (f.f~) - f~_jk f^2}", "2 x_i D - r^2 p_i", false, ""},
        {"9", "Runge-Lenz, momentum conjugate", "1/8 eps_ijk {(f^2 - 2) f~_jk - 2 f_jk (f.f~)}",
         "A_i with x and p exchanged", false, ""},
        {"10-printed", "Killing-Yano from generators", "f_jk, f~_jk",
         "-eps_ijk (2 A~_i + C_i), -eps_ijk (2 A_i + C~_i)", false, "10-swapped"},
        {"10-swapped", "Killing-Yano from generators", "f_jk, f~_jk",
         "-eps_ijk (2 A_i + C~_i), -eps_ijk (2 A~_i + C_i)", true, ""},
        {"11a", "toroid dipole from generators", "(2 A~_i + C_i) D", "1/10 (x_i D - 2 r^2 p_i)", false, ""},
        {"11b", "toroid dipole from generators", "(2 A~_i + C_i) D", "1/2 x_i D", false, ""},
        {"12", "magnetic quadrupole", "-1/3 {f_ik f_kl f~_lj + f_jk f_kl f~_li}", "1/3 (x_i L_j + x_j L_i)", false,
         ""},
        {"13a", "toroid quadrupole", "(f_im f_mj - 1/4 delta_ij f^2)(f.f~) - 5/2 f_im f~_mj f^2", "Q_ij D", false,
         ""},
        {"13b", "toroid quadrupole, transversal", "1/8 (f_im f_mj - 1/3 delta_ij f^2)(f.f~)", "Q_ij D", false, ""},
        {"14", "quadrupole mass-inertia", "trace 1/4 (f_im f_mj - 1/3 delta_ij f^2)", "0", false, "5"},
    };
    constexpr std::size_t count = sizeof(specs) / sizeof(specs[0]);

    std::vector<std::array<double, count>> per_point(points.size());
    parallel_for(points.size(), [&](std::size_t n) {
        const PhasePoint& z = points[n];
        const MultipoleSet m = evaluate_multipoles(z);
        const kysym::KYPair pair = kysym::flat_ky_pair(3, z.x, z.p);
        const Mat3 f = to_mat3(pair.f);
        const Mat3 ft = to_mat3(pair.f_tilde);
        Vec3 two_at_c{};
        Vec3 two_a_ct{};
        for (std::size_t i = 0; i < 3; ++i) {
            two_at_c[i] = 2.0 * m.A_tilde_ky[i] + m.C_ky[i];
            two_a_ct[i] = 2.0 * m.A_ky[i] + m.C_tilde_ky[i];
        }
        const Mat3 from_at_c = minus_eps_vector(two_at_c);
        const Mat3 from_a_ct = minus_eps_vector(two_a_ct);
        double trace = 0.0;
        for (std::size_t i = 0; i < 3; ++i) trace += m.Q_ky_printed[i][i];

        auto& r = per_point[n];
        r[0] = std::max(std::abs(m.r2 - m.r2_ky), std::abs(m.p2 - m.p2_ky));
        r[1] = diff(m.mu_ky, m.L);
        r[2] = std::abs(m.D_ky - m.D);
        r[3] = diff(m.Q_ky_printed, m.Q_direct);
        r[4] = diff(m.Q_ky_corrected, m.Q_direct);
        r[5] = diff(m.T_dipole_ky, m.T_dipole_direct);
        r[6] = diff(m.T_dipole_transversal, m.T_dipole_transversal_direct);
        r[7] = diff(m.C_ky, m.C);
        r[8] = diff(m.A_tilde_ky, m.A_tilde_swap);
        r[9] = std::max(diff(f, from_at_c), diff(ft, from_a_ct));
        r[10] = std::max(diff(f, from_a_ct), diff(ft, from_at_c));
        r[11] = diff(m.toroid_from_generators, m.T_dipole_direct);
        r[12] = diff(m.toroid_from_generators, m.T_dipole_transversal_direct);
        r[13] = diff(m.mu_quad_ky, m.mu_quad_direct);
        r[14] = diff(m.T_quad_ky, m.T_quad_transversal_direct);
        r[15] = diff(m.T_quad_transversal, m.T_quad_transversal_direct);
        r[16] = std::abs(trace);
    });

    IdentityReport report;
    report.samples = points.size();
    for (std::size_t k = 0; k < count; ++k) {
        double worst = 0.0;
        for (const auto& r : per_point) worst = std::max(worst, r[k]);
        IdentityResult res;
        res.id = specs[k].id;
        res.anchor = specs[k].anchor;
        res.lhs = specs[k].lhs;
        res.rhs = specs[k].rhs;
        res.residual = worst;
        res.correction = specs[k].correction;
        if (worst <= kHoldsTol) {
            res.verdict = specs[k].corrected ? Verdict::HoldsAfterCorrection : Verdict::Holds;
        } else {
            res.verdict = Verdict::Fails;
        }
        report.identities.push_back(std::move(res));
    }
    report.notes.push_back(
        "charge octupole: the printed Killing-Yano form has unbound indices m, n on its right-hand side; "
        "index-inconsistent, not evaluable. Only the direct form x_i x_j x_k - r^2/5 (x_i d_jk + x_j d_ik + x_k d_ij) "
        "is computed.");
    report.notes.push_back(
        "toroid dipole from generators: (2 A~ + C) D equals -p_i D; it matches neither 1/10 (x_i D - 2 r^2 p_i) nor "
        "1/2 x_i D.");
    return report;
}

const std::vector<Expectation>& expectation_table() {
    static const std::vector<Expectation> table = {
        {"1", Verdict::Holds},
        {"2", Verdict::Holds},
        {"3", Verdict::Holds},
        {"4", Verdict::Fails},
        {"5", Verdict::HoldsAfterCorrection},
        {"6", Verdict::Holds},
        {"7", Verdict::Holds},
        {"8", Verdict::Holds},
        {"9", Verdict::Holds},
        {"10-printed", Verdict::Fails},
        {"10-swapped", Verdict::HoldsAfterCorrection},
        {"11a", Verdict::Fails},
        {"11b", Verdict::Fails},
        {"12", Verdict::Holds},
        {"13a", Verdict::Fails},
        {"13b", Verdict::Fails},
        {"14", Verdict::Fails},
    };
    return table;
}

std::vector<ExpectationMismatch> compare_with_expectations(const IdentityReport& report) {
    std::vector<ExpectationMismatch> out;
    for (const auto& e : expectation_table()) {
        const IdentityResult* found = nullptr;
        for (const auto& r : report.identities) {
            if (r.id == e.id) found = &r;
        }
        if (!found) {
            out.push_back({e.id, to_string(e.verdict), "missing"});
        } else if (found->verdict != e.verdict) {
            out.push_back({e.id, to_string(e.verdict), to_string(found->verdict)});
        }
    }
    for (const auto& r : report.identities) {
        bool listed = false;
        for (const auto& e : expectation_table()) listed = listed || r.id == e.id;
        if (!listed) out.push_back({r.id, "unlisted", to_string(r.verdict)});
    }
    return out;
}

GeneratorReconstruction reconstruct_ky_from_generators(const PhasePoint& z) {
    const MultipoleSet m = evaluate_multipoles(z);
    const kysym::KYPair pair = kysym::flat_ky_pair(3, z.x, z.p);
    const Mat3 f = to_mat3(pair.f);
    const Mat3 ft = to_mat3(pair.f_tilde);
    Vec3 two_at_c{};
    Vec3 two_a_ct{};
    for (std::size_t i = 0; i < 3; ++i) {
        two_at_c[i] = 2.0 * m.A_tilde_ky[i] + m.C_ky[i];
        two_a_ct[i] = 2.0 * m.A_ky[i] + m.C_tilde_ky[i];
    }
    const Mat3 from_at_c = minus_eps_vector(two_at_c);
    const Mat3 from_a_ct = minus_eps_vector(two_a_ct);
    if (std::max(diff(f, from_at_c), diff(ft, from_a_ct)) <= kHoldsTol) {
        return {from_at_c, from_a_ct, Pairing::Printed};
    }
    if (std::max(diff(f, from_a_ct), diff(ft, from_at_c)) <= kHoldsTol) {
        return {from_a_ct, from_at_c, Pairing::Swapped};
    }
    throw Error("neither generator pairing reproduces the Killing-Yano pair");
}

std::vector<PhasePoint> sample_phase_points(std::size_t count, std::uint64_t seed) {
    SampleGenerator gen(seed);
    std::vector<PhasePoint> out;
    out.reserve(count);
    for (const auto& v : sample_cube(6, count, -1.0, 1.0, gen)) out.push_back(PhasePoint::from_flat(v));
    return out;
}

}  // namespace kyano::multipole
