#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "kyano/kysym.hpp"
#include "kyano/sampling.hpp"
#include "oracles.hpp"

using namespace kyano;
using namespace kyano::kysym;
using geometry::Chart;
using geometry::MetricSpec;

namespace {

std::vector<std::size_t> ix(std::initializer_list<std::size_t> l) { return l; }

AntisymTensorField expr_field(std::size_t n, std::map<std::vector<std::size_t>, std::string> comps) {
    std::map<std::vector<std::size_t>, expr::Expression> parsed;
    for (const auto& [k, v] : comps) parsed.emplace(k, expr::parse_expression(v, n));
    return AntisymTensorField::from_expressions(n, 2, parsed, "test field");
}

Matrix block_form(std::size_t n, std::initializer_list<std::pair<std::pair<std::size_t, std::size_t>, double>> e) {
    Matrix f(n, 2);
    for (const auto& [ij, v] : e) {
        f(ij.first, ij.second) = v;
        f(ij.second, ij.first) = -v;
    }
    return f;
}

}  // namespace

TEST(FlatPair, ThreeDimensionalExamples) {
    const std::vector<double> x{0, 0, 1};
    const std::vector<double> p{0, 1, 0};
    const KYPair pair = flat_ky_pair(3, x, p);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            const double fx = (i == 0 && j == 1) ? 1.0 : (i == 1 && j == 0) ? -1.0 : 0.0;
            const double fp = (i == 0 && j == 2) ? -1.0 : (i == 2 && j == 0) ? 1.0 : 0.0;
            EXPECT_EQ(pair.f(i, j), fx);
            EXPECT_EQ(pair.f_tilde(i, j), fp);
        }
    }
}

TEST(FlatPair, FourDimensionalPattern) {
    const std::vector<double> e1{1, 0, 0, 0};
    const Tensor<double> f = flat_ky_tensor(e1);
    ASSERT_EQ(f.rank(), 3u);
    for (std::size_t k = 0; k < f.size(); ++k) {
        auto idx = f.unravel(k);
        std::vector<std::size_t> full{0};
        full.insert(full.end(), idx.begin(), idx.end());
        EXPECT_EQ(f.data()[k], levi_civita(full));
    }
    EXPECT_EQ(f[ix({1, 2, 3})], 1.0);
    EXPECT_EQ(f[ix({2, 1, 3})], -1.0);
    EXPECT_EQ(f[ix({0, 2, 3})], 0.0);
}

TEST(FlatPair, DimensionMismatch) {
    const std::vector<double> a{1, 2, 3};
    const std::vector<double> b{1, 2};
    EXPECT_THROW(flat_ky_pair(3, a, b), ShapeError);
    EXPECT_THROW(flat_ky_pair(2, a, a), ShapeError);
}

TEST(Reconstruct, Examples) {
    const std::vector<double> x{0, 0, 1};
    EXPECT_EQ(reconstruct_position(flat_ky_tensor(x)), x);
    EXPECT_EQ(reconstruct_position(Tensor<double>(3, 2)), (std::vector<double>{0, 0, 0}));
    const std::vector<double> y{2, -1, 0.5};
    const auto back = reconstruct_position(flat_ky_tensor(y));
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(back[i], y[i], 1e-15);
    EXPECT_EQ(reconstruct_momentum(flat_ky_tensor(y)), back);
}

TEST(Reconstruct, RejectsNonAntisymmetric) {
    Matrix f(3, 2);
    f(0, 1) = 1.0;
    EXPECT_THROW(reconstruct_position(f), ShapeError);
    EXPECT_THROW(reconstruct_position(Tensor<double>(4, 2)), ShapeError);
}

// Property: round trip exact to 1e-15 over 1000 points for n = 2..6.
TEST(Property, ReconstructionRoundTrip) {
    SampleGenerator gen(1);
    for (std::size_t n = 2; n <= 6; ++n) {
        for (const auto& x : sample_cube(n, 1000, -1, 1, gen)) {
            const auto back = reconstruct_position(flat_ky_tensor(x));
            for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(back[i], x[i], 1e-15);
        }
    }
}

// Property: adjacent swaps flip the sign exactly.
TEST(Property, FieldAntisymmetryExact) {
    SampleGenerator gen(2);
    const std::vector<std::pair<MetricSpec, AntisymTensorField>> cases = {
        {MetricSpec::flat(4), flat_ky_field(4)},
        {MetricSpec::taub_nut(1.0), taubnut_ky_field(2, 1.0)},
        {MetricSpec::const_curvature(1.0, Chart::Spherical), constcurv_ky_field(Side::Position, 1.0)},
    };
    for (const auto& [spec, field] : cases) {
        for (const auto& p : sample_chart_points(spec, 20, gen)) {
            const Tensor<Jet> f = field.evaluate_at(p);
            for (std::size_t k = 0; k < f.size(); ++k) {
                auto idx = f.unravel(k);
                for (std::size_t a = 0; a + 1 < idx.size(); ++a) {
                    auto sw = idx;
                    std::swap(sw[a], sw[a + 1]);
                    EXPECT_EQ(f.data()[k].value(), -f[sw].value());
                    for (std::size_t d = 0; d < spec.dim(); ++d) EXPECT_EQ(f.data()[k].d(d), -f[sw].d(d));
                }
            }
        }
    }
}

TEST(KYResidual, FlatLinearFieldIsKillingYano) {
    SampleGenerator gen(3);
    for (const auto& p : sample_cube(3, 20, -2, 2, gen)) {
        EXPECT_LE(max_abs(ky_residual(MetricSpec::flat(3), flat_ky_field(3), p)), 1e-14);
    }
}

TEST(KYResidual, NonKillingYanoField) {
    // f_12 = x1: R_{112} = 2 d_1 f_12, R_{121} = d_1 f_21
    const auto field = expr_field(3, {{{0, 1}, "x1"}});
    const auto R = ky_residual(MetricSpec::flat(3), field, std::vector<double>{0.2, 0.3, 0.4});
    EXPECT_EQ(R(0, 0, 1), 2.0);
    EXPECT_EQ(R(0, 1, 0), -1.0);
    const auto report = verify_ky(MetricSpec::flat(3), field, std::vector<std::vector<double>>{{0.2, 0.3, 0.4}});
    EXPECT_FALSE(report.is_ky);
    EXPECT_EQ(report.max_ky_residual, 2.0);
}

TEST(KYResidual, TaubNutFirstForm) {
    SampleGenerator gen(4);
    const auto spec = MetricSpec::taub_nut(1.0);
    for (const auto& p : sample_chart_points(spec, 20, gen)) {
        EXPECT_LE(max_abs(ky_residual(spec, taubnut_ky_field(1, 1.0), p)), 1e-8);
    }
}

TEST(CovariantConstancy, Examples) {
    const std::vector<double> p{0.5, 0.1, -0.9};
    const auto c = AntisymTensorField::constant(block_form(3, {{{0, 2}, 1.5}}));
    EXPECT_EQ(max_abs(covariant_constancy_residual(MetricSpec::flat(3), c, p)), 0.0);
    EXPECT_EQ(max_abs(covariant_constancy_residual(MetricSpec::flat(3), flat_ky_field(3), p)), 1.0);

    SampleGenerator gen(5);
    const auto spec = MetricSpec::taub_nut(1.0);
    for (const auto& q : sample_chart_points(spec, 20, gen)) {
        EXPECT_LE(max_abs(covariant_constancy_residual(spec, taubnut_ky_field(2, 1.0), q)), 1e-8);
    }
}

TEST(TaubNut, AllFormsConstantAndNondegenerate) {
    SampleGenerator gen(6);
    for (double m : {0.25, 1.0, 2.0}) {
        const auto spec = MetricSpec::taub_nut(m);
        const auto pts = sample_chart_points(spec, 20, gen);
        for (int i = 1; i <= 3; ++i) {
            const KYReport r = verify_ky(spec, taubnut_ky_field(i, m), pts);
            EXPECT_TRUE(r.is_covariant_constant) << "m=" << m << " f_" << i << " " << r.max_covariant_constancy_residual;
            EXPECT_TRUE(r.is_ky);
            EXPECT_TRUE(r.is_nondegenerate);
            for (double d : r.determinants) EXPECT_GT(std::abs(d), 1e-6);
        }
    }
}

TEST(TaubNut, OtherNormalizationFails) {
    SampleGenerator gen(7);
    const auto spec = MetricSpec::taub_nut(1.0, geometry::TaubNutNormalization::SixteenMSquared);
    const KYReport r = verify_ky(spec, taubnut_ky_field(1, 1.0), sample_chart_points(spec, 20, gen));
    EXPECT_FALSE(r.is_covariant_constant);
    EXPECT_GT(r.max_covariant_constancy_residual, 1e-2);
}

TEST(TaubNut, MassToZeroLeavesFlatBlock) {
    // m = 0: f_3 = -2 dx_1 ^ dx_2 in Cartesian terms; check against the pulled-back wedge.
    const std::vector<double> p{1.3, 0.9, 0.4, 1.0};
    const Matrix f = taubnut_ky(3, p, 0.0);
    const double r = p[0], th = p[1], ph = p[2];
    const double dx[2][4] = {{std::sin(th) * std::cos(ph), r * std::cos(th) * std::cos(ph), -r * std::sin(th) * std::sin(ph), 0},
                             {std::sin(th) * std::sin(ph), r * std::cos(th) * std::sin(ph), r * std::sin(th) * std::cos(ph), 0}};
    for (std::size_t a = 0; a < 4; ++a) {
        for (std::size_t b = 0; b < 4; ++b) {
            EXPECT_NEAR(f(a, b), -(dx[0][a] * dx[1][b] - dx[1][a] * dx[0][b]) * 2.0, 1e-14);
        }
    }
    for (std::size_t a = 0; a < 4; ++a) EXPECT_EQ(f(a, 3), 0.0);
}

TEST(TaubNut, ChartGuards) {
    EXPECT_THROW(taubnut_ky(1, std::vector<double>{0.0, 1.0, 0.0, 0.0}, 1.0), DomainError);
    EXPECT_THROW(taubnut_ky(1, std::vector<double>{1.0, 0.0, 0.0, 0.0}, 1.0), DomainError);
    EXPECT_THROW(taubnut_ky(4, std::vector<double>{1.0, 1.0, 0.0, 0.0}, 1.0), ShapeError);
}

TEST(Killing, FlatExamples) {
    const auto spec = MetricSpec::flat(3);
    const Matrix K = killing_from_ky(spec, flat_ky_field(3), std::vector<double>{0, 0, 1});
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            const double want = (i == j && i < 2) ? -1.0 : 0.0;
            EXPECT_EQ(K(i, j), want);
        }
    }
    EXPECT_EQ(max_abs(killing_from_ky(spec, flat_ky_field(3), std::vector<double>{0, 0, 0})), 0.0);
}

TEST(Killing, MatchesDirectFormulaAndIsSymmetric) {
    SampleGenerator gen(8);
    for (const auto& x : sample_cube(3, 100, -1, 1, gen)) {
        const Matrix K = killing_from_ky(MetricSpec::flat(3), flat_ky_field(3), x);
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) {
                EXPECT_EQ(K(i, j), K(j, i));
                EXPECT_NEAR(K(i, j), oracle::killing_flat(x, i, j), 1e-15);
            }
        }
    }
}

// Property: a Killing-Yano input yields a Killing tensor.
TEST(Property, KillingEquationHolds) {
    SampleGenerator gen(9);
    const auto flat = MetricSpec::flat(3);
    for (const auto& p : sample_chart_points(flat, 30, gen)) {
        ASSERT_LE(max_abs(ky_residual(flat, flat_ky_field(3), p)), 1e-10);
        EXPECT_LE(max_abs(killing_equation_residual(flat, flat_ky_field(3), p)), 1e-8);
    }
    const auto tn = MetricSpec::taub_nut(1.0);
    for (int i = 1; i <= 3; ++i) {
        for (const auto& p : sample_chart_points(tn, 10, gen)) {
            ASSERT_LE(max_abs(ky_residual(tn, taubnut_ky_field(i, 1.0), p)), 1e-10);
            EXPECT_LE(max_abs(killing_equation_residual(tn, taubnut_ky_field(i, 1.0), p)), 1e-8);
        }
    }
}

TEST(Killing, NegativeControl) {
    const auto field = expr_field(3, {{{0, 1}, "x1^2"}});
    EXPECT_GT(max_abs(killing_equation_residual(MetricSpec::flat(3), field, std::vector<double>{0.5, 0.2, 0.1})),
              1e-3);
    EXPECT_THROW(killing_from_ky(MetricSpec::flat(4), flat_ky_field(4), std::vector<double>{0, 0, 0, 0}),
                 ShapeError);
}

TEST(Nondegeneracy, Examples) {
    Matrix odd = block_form(3, {{{0, 1}, 1.2}, {{0, 2}, -0.4}, {{1, 2}, 3.0}});
    EXPECT_EQ(antisymmetric_determinant(odd), 0.0);
    const auto odd_field = AntisymTensorField::constant(odd);
    const auto nd = nondegeneracy(odd_field, MetricSpec::flat(3), std::vector<double>{0, 0, 0});
    EXPECT_EQ(nd.determinant, 0.0);
    EXPECT_FALSE(nd.nondegenerate);

    const Matrix blocks = block_form(4, {{{0, 1}, 1.0}, {{2, 3}, 1.0}});
    EXPECT_EQ(antisymmetric_determinant(blocks), 1.0);
    EXPECT_TRUE(nondegeneracy(AntisymTensorField::constant(blocks), MetricSpec::flat(4), std::vector<double>(4, 0.0))
                    .nondegenerate);

    const std::vector<double> q{1.2, 0.9, 0.3, 0.0};
    EXPECT_GT(std::abs(nondegeneracy(taubnut_ky_field(1, 1.0), MetricSpec::taub_nut(1.0), q).determinant), 1e-6);
}

TEST(Nondegeneracy, PfaffianAgreesWithLU) {
    SampleGenerator gen(10);
    for (std::size_t n : {2u, 4u, 6u}) {
        for (int t = 0; t < 20; ++t) {
            Matrix f(n, 2);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = i + 1; j < n; ++j) {
                    f(i, j) = gen.uniform(-1, 1);
                    f(j, i) = -f(i, j);
                }
            }
            EXPECT_NEAR(antisymmetric_determinant(f), determinant(f), 1e-12);
            EXPECT_GE(antisymmetric_determinant(f), 0.0);
        }
    }
}

TEST(Symplectic, AcceptsConstantBlockForm) {
    const auto field = AntisymTensorField::constant(block_form(4, {{{0, 1}, 1.0}, {{2, 3}, 1.0}}));
    SampleGenerator gen(11);
    const auto pts = sample_chart_points(MetricSpec::flat(4), 10, gen);
    const SymplecticForm s = symplectic_from_ky(MetricSpec::flat(4), field, pts);
    EXPECT_EQ(s.max_covariant_constancy(), 0.0);
    EXPECT_EQ(s.max_closedness(), 0.0);
    EXPECT_EQ(s.min_abs_determinant(), 1.0);
}

TEST(Symplectic, RejectionReasons) {
    using Reason = SymplecticError::Reason;
    auto reason_of = [](auto&& fn) {
        try {
            fn();
        } catch (const SymplecticError& e) {
            return e.reason();
        }
        ADD_FAILURE() << "no SymplecticError";
        return Reason::RankMismatch;
    };
    const std::vector<std::vector<double>> p3{{0.1, 0.2, 0.3}};
    const std::vector<std::vector<double>> p4{{0.1, 0.2, 0.3, 0.4}};
    EXPECT_EQ(reason_of([&] { symplectic_from_ky(MetricSpec::flat(3), flat_ky_field(3), p3); }), Reason::OddDimension);
    EXPECT_EQ(reason_of([&] { symplectic_from_ky(MetricSpec::flat(4), flat_ky_field(4), p4); }), Reason::RankMismatch);
    const auto degenerate = AntisymTensorField::constant(block_form(4, {{{0, 1}, 1.0}}));
    EXPECT_EQ(reason_of([&] { symplectic_from_ky(MetricSpec::flat(4), degenerate, p4); }), Reason::Degenerate);
    // x3 dx1^dx2 + dx3^dx4 - not covariantly constant, and d f = dx3^dx1^dx2 != 0
    std::map<std::vector<std::size_t>, expr::Expression> comps{{{0, 1}, expr::parse_expression("2 + x3", 4)},
                                                               {{2, 3}, expr::parse_expression("1", 4)}};
    const auto varying = AntisymTensorField::from_expressions(4, 2, comps, "varying");
    EXPECT_EQ(reason_of([&] { symplectic_from_ky(MetricSpec::flat(4), varying, p4); }), Reason::NotCovariantConstant);
    SymplecticTolerances loose;
    loose.covariant_constancy = 10.0;
    EXPECT_EQ(reason_of([&] { symplectic_from_ky(MetricSpec::flat(4), varying, p4, loose); }), Reason::NotClosed);
}

TEST(Symplectic, TaubNutForms) {
    SampleGenerator gen(12);
    const auto spec = MetricSpec::taub_nut(1.0);
    const auto pts = sample_chart_points(spec, 20, gen);
    for (int i = 1; i <= 3; ++i) {
        const SymplecticForm s = symplectic_from_ky(spec, taubnut_ky_field(i, 1.0), pts);
        EXPECT_LE(s.max_covariant_constancy(), 1e-8);
        EXPECT_LE(s.max_closedness(), 1e-8);
        EXPECT_GT(s.min_abs_determinant(), 1e-6);
    }
}

TEST(ConstCurvature, PrintedComponentAtSample) {
    const Matrix f = constcurv_ky(Side::Position, std::vector<double>{1.0, std::numbers::pi / 2, std::numbers::pi / 2}, 0.0);
    EXPECT_DOUBLE_EQ(f(0, 1), 1.0 / 16.0);
    EXPECT_DOUBLE_EQ(f(1, 0), -1.0 / 16.0);
    const Matrix ft = constcurv_ky(Side::Momentum, std::vector<double>{1.0, std::numbers::pi / 2, std::numbers::pi / 2}, 0.0);
    EXPECT_DOUBLE_EQ(ft(0, 1), 16.0);
}

TEST(ConstCurvature, ComponentsNeverVanishTogetherAwayFromOrigin) {
    SampleGenerator gen(13);
    const auto spec = MetricSpec::const_curvature(1.0, Chart::Spherical);
    for (const auto& p : sample_chart_points(spec, 200, gen)) {
        const Matrix f = constcurv_ky(Side::Position, p, 1.0);
        EXPECT_GT(std::abs(f(0, 1)) + std::abs(f(0, 2)), 0.0);
    }
    EXPECT_THROW(constcurv_ky(Side::Position, std::vector<double>{0.0, 1.0, 1.0}, 1.0), DomainError);
}

// The printed field is fed to the residual; the measured value is recorded, not assumed.
TEST(ConstCurvature, PrintedFieldResidualIsMeasured) {
    SampleGenerator gen(14);
    const auto spec = MetricSpec::const_curvature(1.0, Chart::Spherical);
    const auto pts = sample_chart_points(spec, 20, gen);
    const KYReport pos = verify_ky(spec, constcurv_ky_field(Side::Position, 1.0), pts);
    const KYReport mom = verify_ky(spec.dual(), constcurv_ky_field(Side::Momentum, 1.0), pts);
    EXPECT_EQ(pos.samples, 20u);
    EXPECT_GT(pos.max_ky_residual, 1e-3);
    EXPECT_FALSE(pos.is_ky);
    EXPECT_FALSE(mom.is_ky);
}

// Property: the dual run with the momentum twin is a pure relabeling.
TEST(Property, DualSymmetry) {
    SampleGenerator gen(15);
    const std::vector<std::pair<MetricSpec, AntisymTensorField>> cases = {
        {MetricSpec::flat(3), flat_ky_field(3)},
        {MetricSpec::taub_nut(1.0), taubnut_ky_field(3, 1.0)},
        {MetricSpec::const_curvature(1.0, Chart::Spherical), constcurv_ky_field(Side::Position, 1.0)},
    };
    for (const auto& [spec, field] : cases) {
        const auto pts = sample_chart_points(spec, 20, gen);
        const KYReport a = verify_ky(spec, field, pts);
        const KYReport b = verify_ky(geometry::dual_metric(spec), field, pts);
        EXPECT_NEAR(a.max_ky_residual, b.max_ky_residual, 1e-12);
        EXPECT_NEAR(a.max_covariant_constancy_residual, b.max_covariant_constancy_residual, 1e-12);
    }
}

TEST(VerifyReport, FlagsFollowMaxima) {
    SampleGenerator gen(16);
    const auto spec = MetricSpec::flat(3);
    const auto pts = sample_chart_points(spec, 10, gen);
    KYTolerances tol;
    const KYReport r = verify_ky(spec, flat_ky_field(3), pts, tol);
    EXPECT_EQ(r.is_ky, r.max_ky_residual <= tol.ky);
    EXPECT_EQ(r.is_covariant_constant, r.max_covariant_constancy_residual <= tol.covariant_constancy);
    EXPECT_FALSE(r.is_nondegenerate);
    EXPECT_EQ(r.determinants.size(), pts.size());
    const KYReport rank3 = verify_ky(MetricSpec::flat(4), flat_ky_field(4), sample_chart_points(MetricSpec::flat(4), 5, gen));
    EXPECT_TRUE(rank3.determinants.empty());
    EXPECT_TRUE(rank3.is_ky);
}

TEST(Ansatz, FlatThreeLinearBasis) {
    SampleGenerator gen(17);
    const auto spec = MetricSpec::flat(3);
    std::vector<expr::Expression> basis;
    for (const char* s : {"1", "x1", "x2", "x3"}) basis.push_back(expr::parse_expression(s, 3));
    const AnsatzResult res = ky_solve_ansatz(spec, basis, sample_chart_points(spec, 10, gen));
    // three constant forms plus eps.x
    EXPECT_EQ(res.dimension(), 4u);
    EXPECT_FALSE(res.underdetermined);
    const auto fresh = sample_chart_points(spec, 50, gen);
    for (const auto& f : res.fields) EXPECT_LE(verify_ky(spec, f, fresh).max_ky_residual, 1e-8);
    // eps.x lies in the returned span
    Eigen::MatrixXd span(12, static_cast<Eigen::Index>(res.coefficients.size()));
    for (std::size_t c = 0; c < res.coefficients.size(); ++c) {
        for (std::size_t k = 0; k < 12; ++k) span(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = res.coefficients[c][k];
    }
    Eigen::VectorXd target = Eigen::VectorXd::Zero(12);
    // components (12, 13, 23) = (x3, -x2, x1); basis order (1, x1, x2, x3)
    target(0 * 4 + 3) = 1;
    target(1 * 4 + 2) = -1;
    target(2 * 4 + 1) = 1;
    const Eigen::VectorXd proj = span * (span.transpose() * target);
    EXPECT_LE((proj - target).norm(), 1e-10);
    // orthonormal
    const Eigen::MatrixXd gram = span.transpose() * span;
    EXPECT_LE((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).norm(), 1e-12);
}

TEST(Ansatz, FlatTwoConstantBasis) {
    SampleGenerator gen(18);
    const auto spec = MetricSpec::flat(2);
    const AnsatzResult res = ky_solve_ansatz(spec, {expr::parse_expression("1", 2)}, sample_chart_points(spec, 4, gen));
    EXPECT_EQ(res.dimension(), 1u);
}

TEST(Ansatz, EmptyNullSpaceIsValid) {
    SampleGenerator gen(19);
    const auto spec = MetricSpec::flat(3);
    const AnsatzResult res =
        ky_solve_ansatz(spec, {expr::parse_expression("x1^2", 3)}, sample_chart_points(spec, 10, gen));
    EXPECT_EQ(res.dimension(), 0u);
}

TEST(Ansatz, UnderdeterminedIsFlagged) {
    const auto spec = MetricSpec::flat(3);
    std::vector<expr::Expression> basis;
    for (const char* s : {"1", "x1", "x2", "x3"}) basis.push_back(expr::parse_expression(s, 3));
    const AnsatzResult res = ky_solve_ansatz(spec, basis, std::vector<std::vector<double>>{{0.1, 0.2, 0.3}});
    EXPECT_TRUE(res.underdetermined);
}

// Stereographic 3-sphere: quadratic polynomials over (1 + K r^2/4)^3 span four Killing-Yano two-forms.
TEST(Ansatz, ConstantCurvatureDimension) {
    SampleGenerator gen(20);
    const double K = 1.0;
    const auto spec = MetricSpec::const_curvature(K);
    std::vector<expr::Expression> basis;
    for (const char* m : {"1", "x1", "x2", "x3", "x1*x1", "x1*x2", "x1*x3", "x2*x2", "x2*x3", "x3*x3"}) {
        basis.push_back(expr::parse_expression(std::string(m) + "/(1 + 0.25*(x1^2 + x2^2 + x3^2))^3", 3));
    }
    const AnsatzResult res = ky_solve_ansatz(spec, basis, sample_chart_points(spec, 20, gen));
    EXPECT_EQ(res.dimension(), 4u);
    const auto fresh = sample_chart_points(spec, 50, gen);
    for (const auto& f : res.fields) EXPECT_LE(verify_ky(spec, f, fresh).max_ky_residual, 1e-8);
}

// Property: every returned field passes the residual check at 50 fresh points.
TEST(Property, AnsatzSolutionsVerifyAtFreshPoints) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        SampleGenerator gen(seed);
        const auto spec = MetricSpec::flat(3);
        std::vector<expr::Expression> basis;
        for (const char* s : {"1", "x1", "x2", "x3", "x1*x2", "x3^2"}) basis.push_back(expr::parse_expression(s, 3));
        const AnsatzResult res = ky_solve_ansatz(spec, basis, sample_chart_points(spec, 12, gen));
        EXPECT_EQ(res.dimension(), 4u);
        const auto fresh = sample_chart_points(spec, 50, gen);
        for (const auto& f : res.fields) EXPECT_LE(verify_ky(spec, f, fresh).max_ky_residual, 1e-8);
    }
}
