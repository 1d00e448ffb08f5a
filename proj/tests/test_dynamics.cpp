#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "kyano/dynamics.hpp"
#include "kyano/kysym.hpp"
#include "kyano/sampling.hpp"

using namespace kyano;
using namespace kyano::dynamics;
using geometry::Chart;
using geometry::MetricSpec;

namespace {

PhasePoint random_point(SampleGenerator& gen, std::size_t n) {
    PhasePoint z;
    for (std::size_t i = 0; i < n; ++i) z.x.push_back(gen.uniform(-1, 1));
    for (std::size_t i = 0; i < n; ++i) z.p.push_back(gen.uniform(-1, 1));
    return z;
}

// Random polynomial in x1..x3, p1..p3 of the given degree, as source text.
std::string random_polynomial(SampleGenerator& gen, int degree) {
    const std::array<const char*, 6> v{"x1", "x2", "x3", "p1", "p2", "p3"};
    std::ostringstream s;
    s.precision(17);
    s << gen.uniform(-1, 1);
    for (int term = 0; term < 8; ++term) {
        s << " + " << gen.uniform(-1, 1);
        const int d = 1 + static_cast<int>(gen.uniform() * degree) % degree;
        for (int k = 0; k < d; ++k) s << "*" << v[static_cast<std::size_t>(gen.uniform() * 6) % 6];
    }
    return s.str();
}

// Bracket {F, G} as a function of the flat phase vector, differentiated by central differences.
double fd_bracket_derivative(const PhaseFunction& F, const PhaseFunction& G, PhasePoint z, std::size_t var) {
    const double h = 1e-5;
    auto shift = [&](double d) {
        PhasePoint w = z;
        (var < w.dim() ? w.x[var] : w.p[var - w.dim()]) += d;
        return poisson_bracket(F, G, w);
    };
    return (shift(h) - shift(-h)) / (2 * h);
}

double jacobi_term(const PhaseFunction& A, const PhaseFunction& B, const PhaseFunction& C, const PhasePoint& z) {
    // {A, {B, C}} with the inner bracket differentiated numerically
    const Jet a = A.jet(z);
    const std::size_t n = z.dim();
    double out = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out += a.d(i) * fd_bracket_derivative(B, C, z, n + i) - a.d(n + i) * fd_bracket_derivative(B, C, z, i);
    }
    return out;
}

Jet coord(std::span<const Jet> x, std::size_t i) { return x[i]; }

}  // namespace

TEST(Poisson, CanonicalExamples) {
    SampleGenerator gen(1);
    const PhasePoint z = random_point(gen, 3);
    EXPECT_EQ(poisson_bracket(PhaseFunction::coordinate(3, 2), PhaseFunction::momentum(3, 2), z), 1.0);
    EXPECT_EQ(poisson_bracket(PhaseFunction::coordinate(3, 0), PhaseFunction::momentum(3, 2), z), 0.0);
}

TEST(Poisson, FlatKillingYanoComponents) {
    // f_12 = x3, f~_12 = p3, f~_13 = -p2
    const kysym::KYPair ref = kysym::flat_ky_pair(3, std::vector<double>{0, 0, 1}, std::vector<double>{0, 0, 1});
    ASSERT_EQ(ref.f(0, 1), 1.0);
    const auto f12 = PhaseFunction::parse(3, "x3");
    const auto ft12 = PhaseFunction::parse(3, "p3");
    const auto ft13 = PhaseFunction::parse(3, "-p2");
    SampleGenerator gen(2);
    for (int t = 0; t < 10; ++t) {
        const PhasePoint z = random_point(gen, 3);
        const kysym::KYPair pair = kysym::flat_ky_pair(3, z.x, z.p);
        EXPECT_EQ(f12.value(z), pair.f(0, 1));
        EXPECT_EQ(ft12.value(z), pair.f_tilde(0, 1));
        EXPECT_EQ(ft13.value(z), pair.f_tilde(0, 2));
        EXPECT_EQ(poisson_bracket(f12, ft12, z), 1.0);
        EXPECT_EQ(poisson_bracket(f12, ft13, z), 0.0);
    }
}

TEST(Poisson, DomainViolation) {
    const auto H = PhaseFunction::hamiltonian(MetricSpec::taub_nut(1.0));
    PhasePoint z{{0.0, 1.0, 0.0, 0.0}, {1, 0, 0, 0}};
    EXPECT_THROW(poisson_bracket(H, PhaseFunction::coordinate(4, 0), z), DomainError);
}

// Property: {F, G} = -{G, F} exactly.
TEST(Property, BracketAntisymmetry) {
    SampleGenerator gen(3);
    for (int t = 0; t < 50; ++t) {
        const auto F = PhaseFunction::parse(3, random_polynomial(gen, 3));
        const auto G = PhaseFunction::parse(3, random_polynomial(gen, 3));
        const PhasePoint z = random_point(gen, 3);
        EXPECT_EQ(poisson_bracket(F, G, z), -poisson_bracket(G, F, z));
    }
}

// Property: {FG, H} = F{G, H} + G{F, H}.
TEST(Property, BracketLeibniz) {
    SampleGenerator gen(4);
    for (int t = 0; t < 50; ++t) {
        const auto F = PhaseFunction::parse(3, random_polynomial(gen, 2));
        const auto G = PhaseFunction::parse(3, random_polynomial(gen, 2));
        const auto H = PhaseFunction::parse(3, random_polynomial(gen, 2));
        const PhasePoint z = random_point(gen, 3);
        const double lhs = poisson_bracket(F * G, H, z);
        const double rhs = F.value(z) * poisson_bracket(G, H, z) + G.value(z) * poisson_bracket(F, H, z);
        EXPECT_NEAR(lhs, rhs, 1e-10);
    }
}

// Property: {A,{B,C}} + {B,{C,A}} + {C,{A,B}} = 0 for cubic polynomials.
TEST(Property, BracketJacobi) {
    SampleGenerator gen(5);
    for (int t = 0; t < 30; ++t) {
        const auto A = PhaseFunction::parse(3, random_polynomial(gen, 3));
        const auto B = PhaseFunction::parse(3, random_polynomial(gen, 3));
        const auto C = PhaseFunction::parse(3, random_polynomial(gen, 3));
        const PhasePoint z = random_point(gen, 3);
        const double sum = jacobi_term(A, B, C, z) + jacobi_term(B, C, A, z) + jacobi_term(C, A, B, z);
        EXPECT_LE(std::abs(sum), 1e-8);
    }
}

TEST(Nambu, Examples) {
    const std::vector<double> pt{0.3, -0.7, 1.1};
    const ScalarFn x1 = [](std::span<const Jet> x) { return coord(x, 0); };
    const ScalarFn x2 = [](std::span<const Jet> x) { return coord(x, 1); };
    const ScalarFn x3 = [](std::span<const Jet> x) { return coord(x, 2); };
    const ScalarFn x1x2 = [](std::span<const Jet> x) { return x[0] * x[1]; };
    EXPECT_EQ(nambu_bracket(x1, x2, x3, pt), 1.0);
    EXPECT_EQ(nambu_bracket(x1, x1, x3, pt), 0.0);
    EXPECT_EQ(nambu_bracket(x1, x2, x1x2, pt), 0.0);
    EXPECT_THROW(nambu_bracket(x1, x2, x3, std::vector<double>{1, 2}), ShapeError);
}

// Property: the sign follows the permutation parity exactly.
TEST(Property, NambuTotalAntisymmetry) {
    SampleGenerator gen(6);
    for (int t = 0; t < 50; ++t) {
        std::array<expr::Expression, 3> e;
        for (auto& x : e) {
            std::ostringstream s;
            s.precision(17);
            s << "sin(" << gen.uniform(-2, 2) << "*x1 + x2*x3) + " << gen.uniform(-2, 2) << "*x1*x2^2 + exp("
              << gen.uniform(-1, 1) << "*x3)";
            x = expr::parse_expression(s.str(), 3);
        }
        std::array<ScalarFn, 3> f;
        for (std::size_t i = 0; i < 3; ++i) f[i] = [e = e[i]](std::span<const Jet> x) { return e.evaluate<Jet>(x); };
        const std::vector<double> pt{gen.uniform(-1, 1), gen.uniform(-1, 1), gen.uniform(-1, 1)};
        std::array<std::size_t, 3> perm{0, 1, 2};
        const double base = nambu_bracket(f[0], f[1], f[2], pt);
        do {
            int inversions = 0;
            for (std::size_t i = 0; i < 3; ++i) {
                for (std::size_t j = i + 1; j < 3; ++j) inversions += perm[i] > perm[j];
            }
            const double sign = inversions % 2 == 0 ? 1.0 : -1.0;
            EXPECT_EQ(nambu_bracket(f[perm[0]], f[perm[1]], f[perm[2]], pt), sign * base);
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
}

TEST(Geodesic, FlatStraightLine) {
    const PhasePoint z0{{1, 0, 0}, {0, 1, 0}};
    const Trajectory tr = geodesic_integrate(MetricSpec::flat(3), z0, 0.01, 100);
    ASSERT_EQ(tr.z.size(), 101u);
    EXPECT_EQ(tr.steps, 100u);
    EXPECT_EQ(tr.dt, 0.01);
    for (std::size_t k = 0; k < tr.z.size(); ++k) {
        EXPECT_NEAR(tr.z[k].x[0], 1.0, 1e-12);
        EXPECT_NEAR(tr.z[k].x[1], tr.t[k], 1e-12);
        EXPECT_NEAR(tr.z[k].x[2], 0.0, 1e-12);
        if (k > 0) EXPECT_GT(tr.t[k], tr.t[k - 1]);
    }
    EXPECT_LE(conservation_monitor(tr, PhaseFunction::hamiltonian(MetricSpec::flat(3))).max_abs, 1e-15);
}

TEST(Geodesic, ConstantCurvatureHamiltonianDrift) {
    SampleGenerator gen(7);
    const auto spec = MetricSpec::const_curvature(1.0);
    const auto H = PhaseFunction::hamiltonian(spec);
    for (int t = 0; t < 3; ++t) {
        PhasePoint z0{sample_chart_points(spec, 1, gen).front(), {}};
        for (int i = 0; i < 3; ++i) z0.p.push_back(gen.uniform(-1, 1));
        const Drift d = conservation_monitor(geodesic_integrate(spec, z0, 1e-3, 10000), H);
        EXPECT_LE(d.max_rel, 1e-8);
        // step halving: fourth-order scheme shrinks the drift
        const Drift half = conservation_monitor(geodesic_integrate(spec, z0, 5e-4, 20000), H);
        EXPECT_LE(half.max_abs, d.max_abs / 4 + 1e-15);
    }
}

TEST(Conservation, FlatKillingAndAngularMomentum) {
    const auto spec = MetricSpec::flat(3);
    const PhasePoint z0{{0.3, -0.5, 0.8}, {0.7, 0.2, -0.4}};
    const Trajectory tr = geodesic_integrate(spec, z0, 1e-3, 10000);
    const auto K = PhaseFunction::killing_quadratic(spec, kysym::flat_ky_field(3));
    EXPECT_LE(conservation_monitor(tr, K).max_rel, 1e-10);
    EXPECT_LE(conservation_monitor(tr, PhaseFunction::angular_momentum(2)).max_abs, 1e-12);
    const Drift x1 = conservation_monitor(tr, PhaseFunction::coordinate(3, 0));
    EXPECT_GT(x1.max_abs, 1e-3);
    EXPECT_EQ(x1.initial, 0.3);
}

TEST(Conservation, RelativeFallsBackToAbsoluteAtZero) {
    const PhasePoint z0{{0, 0, 0}, {1, 0, 0}};
    const Trajectory tr = geodesic_integrate(MetricSpec::flat(3), z0, 0.1, 10);
    const Drift d = conservation_monitor(tr, PhaseFunction::coordinate(3, 0));
    EXPECT_EQ(d.initial, 0.0);
    EXPECT_EQ(d.max_rel, d.max_abs);
    EXPECT_NEAR(d.max_abs, 1.0, 1e-12);
}

TEST(Conservation, KillingQuadraticMatchesContraction) {
    const PhasePoint z{{0.2, 0.4, -0.1}, {0.3, -0.6, 0.5}};
    const auto K = PhaseFunction::killing_quadratic(MetricSpec::flat(3), kysym::flat_ky_field(3));
    double r2 = 0, xp = 0, p2 = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        r2 += z.x[i] * z.x[i];
        xp += z.x[i] * z.p[i];
        p2 += z.p[i] * z.p[i];
    }
    EXPECT_NEAR(K.value(z), xp * xp - r2 * p2, 1e-15);
}

// Property: bracket with H vanishing at samples implies small drift along catalog geodesics.
TEST(Property, VanishingBracketMeansConserved) {
    SampleGenerator gen(8);
    struct Case {
        MetricSpec spec;
        std::vector<PhaseFunction> candidates;
    };
    std::vector<Case> cases;
    cases.push_back({MetricSpec::flat(3),
                     {PhaseFunction::angular_momentum(0), PhaseFunction::angular_momentum(1),
                      PhaseFunction::angular_momentum(2),
                      PhaseFunction::killing_quadratic(MetricSpec::flat(3), kysym::flat_ky_field(3)),
                      PhaseFunction::coordinate(3, 0), PhaseFunction::momentum(3, 1)}});
    cases.push_back({MetricSpec::const_curvature(1.0),
                     {PhaseFunction::angular_momentum(0), PhaseFunction::angular_momentum(2),
                      PhaseFunction::momentum(3, 0)}});
    const auto tn = MetricSpec::taub_nut(1.0);
    cases.push_back({tn,
                     {PhaseFunction::killing_quadratic(tn, kysym::taubnut_ky_field(1, 1.0)),
                      PhaseFunction::momentum(4, 3), PhaseFunction::momentum(4, 2), PhaseFunction::momentum(4, 0)}});
    std::size_t conserved = 0;
    for (const auto& c : cases) {
        const auto H = PhaseFunction::hamiltonian(c.spec);
        const std::size_t n = c.spec.dim();
        std::vector<PhasePoint> probes;
        for (const auto& x : sample_chart_points(c.spec, 10, gen)) {
            PhasePoint z{x, {}};
            for (std::size_t i = 0; i < n; ++i) z.p.push_back(gen.uniform(-0.5, 0.5));
            probes.push_back(z);
        }
        for (const auto& Q : c.candidates) {
            double worst = 0.0;
            for (const auto& z : probes) worst = std::max(worst, std::abs(poisson_bracket(Q, H, z)));
            if (worst > 1e-10) continue;
            ++conserved;
            const Trajectory tr = geodesic_integrate(c.spec, probes.front(), 1e-3, 2000);
            EXPECT_LE(conservation_monitor(tr, Q).max_abs, 1e-7) << c.spec.name() << " " << Q.label();
        }
    }
    EXPECT_GE(conserved, 8u);
}

TEST(Geodesic, ZeroMomentumIsConstant) {
    const auto spec = MetricSpec::const_curvature(0.5);
    const PhasePoint z0{{0.2, 0.3, -0.1}, {0, 0, 0}};
    const Trajectory tr = geodesic_integrate(spec, z0, 0.1, 50);
    for (const auto& z : tr.z) {
        EXPECT_EQ(z.x, z0.x);
        EXPECT_EQ(z.p, z0.p);
    }
}

TEST(Geodesic, DomainExitKeepsPartialTrajectory) {
    // radial infall towards r = 0 on Taub-NUT
    const auto spec = MetricSpec::taub_nut(1.0);
    const PhasePoint z0{{0.5, 1.0, 0.3, 0.0}, {-3.0, 0, 0, 0}};
    try {
        geodesic_integrate(spec, z0, 0.01, 10000);
        FAIL() << "expected DomainExit";
    } catch (const DomainExit& e) {
        const Trajectory& part = e.partial();
        ASSERT_FALSE(part.z.empty());
        EXPECT_LT(part.z.size(), 10001u);
        for (const auto& z : part.z) EXPECT_NO_THROW(spec.check_domain(z.x));
    }
    EXPECT_THROW(geodesic_integrate(spec, PhasePoint{{-1, 1, 0, 0}, {0, 0, 0, 0}}, 0.01, 1), DomainError);
    EXPECT_THROW(geodesic_integrate(MetricSpec::flat(3), PhasePoint{{0, 0}, {0, 0}}, 0.01, 1), ShapeError);
}

TEST(Unified, HarmonicOscillatorPeriod) {
    for (std::size_t n : {1u, 3u}) {
        const auto H = PhaseFunction::parse(n, n == 1 ? "0.5*(x1^2 + p1^2)" : "0.5*(x1^2 + x2^2 + x3^2 + p1^2 + p2^2 + p3^2)");
        PhasePoint z0{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
        z0.x[0] = 1.0;
        const std::size_t steps = 10000;
        const double dt = 2 * std::numbers::pi / steps;
        const Trajectory tr = unified_hamilton_flow(H, z0, dt, steps);
        EXPECT_NEAR(tr.z.back().x[0], 1.0, 1e-10);
        EXPECT_NEAR(tr.z.back().p[0], 0.0, 1e-10);
        // quarter period: f -> 0, f~ -> 1 under zdot = J grad H with the (f~, f) ordering
        const PhasePoint& q = tr.z[steps / 4];
        EXPECT_NEAR(q.x[0], 0.0, 1e-10);
        EXPECT_NEAR(std::abs(q.p[0]), 1.0, 1e-10);
        EXPECT_EQ(tr.method, "rk4 (unified J grad H)");
    }
}

TEST(Unified, ConstantHamiltonianIsFixedPoint) {
    const auto H = PhaseFunction::parse(2, "3.5");
    const PhasePoint z0{{0.1, 0.2}, {0.3, 0.4}};
    const Trajectory tr = unified_hamilton_flow(H, z0, 0.1, 20);
    for (const auto& z : tr.z) {
        EXPECT_EQ(z.x, z0.x);
        EXPECT_EQ(z.p, z0.p);
    }
}

TEST(Unified, MatchesGeodesicThroughFlatIdentification) {
    const PhasePoint z0{{0.3, -0.2, 0.5}, {0.4, 0.1, -0.7}};
    const Trajectory geo = geodesic_integrate(MetricSpec::flat(3), z0, 1e-3, 1000);
    // (f_12, f_13, f_23) = (x3, -x2, x1) and the same with p
    auto to_ky = [](const std::vector<double>& v) {
        const Tensor<double> t = kysym::flat_ky_tensor(v);
        return std::vector<double>{t(0, 1), t(0, 2), t(1, 2)};
    };
    const PhasePoint u0{to_ky(z0.x), to_ky(z0.p)};
    const auto H = PhaseFunction::parse(3, "0.5*(p1^2 + p2^2 + p3^2)");
    const Trajectory uni = unified_hamilton_flow(H, u0, 1e-3, 1000);
    ASSERT_EQ(uni.z.size(), geo.z.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < geo.z.size(); ++k) {
        const auto fx = to_ky(geo.z[k].x);
        const auto fp = to_ky(geo.z[k].p);
        for (std::size_t i = 0; i < 3; ++i) {
            worst = std::max(worst, std::abs(fx[i] - uni.z[k].x[i]));
            worst = std::max(worst, std::abs(fp[i] - uni.z[k].p[i]));
        }
    }
    EXPECT_LE(worst, 1e-10);
}

TEST(PhasePointLayout, FlatRoundTrip) {
    const PhasePoint z{{1, 2}, {3, 4}};
    EXPECT_EQ(z.flat(), (std::vector<double>{1, 2, 3, 4}));
    const PhasePoint back = PhasePoint::from_flat(z.flat());
    EXPECT_EQ(back.x, z.x);
    EXPECT_EQ(back.p, z.p);
    EXPECT_THROW(PhasePoint::from_flat(std::vector<double>{1, 2, 3}), ShapeError);
}
