// Killing-Yano machinery: residuals of the Killing-Yano equation, Killing
// tensors built from Killing-Yano forms, covariant constancy, symplectic
// forms, the catalog fields and a linear-ansatz solver.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kyano/expr.hpp"
#include "kyano/field.hpp"
#include "kyano/geometry.hpp"
#include "kyano/tensor.hpp"

namespace kyano::kysym {

using geometry::MetricSpec;

// ---------------------------------------------------------------------------
// Flat space pair f = eps . x, f~ = eps . p (rank n-1)
// ---------------------------------------------------------------------------

struct KYPair {
    Tensor<double> f;
    Tensor<double> f_tilde;
};

// f_{i1..i(n-1)} = eps_{k i1..i(n-1)} x_k, and the same with p for f~.
KYPair flat_ky_pair(std::size_t n, std::span<const double> x, std::span<const double> p);
Tensor<double> flat_ky_tensor(std::span<const double> v);

// The field x -> eps . x on an n-dimensional chart (rank n-1).
AntisymTensorField flat_ky_field(std::size_t n);

// x_i = 1/(n-1)! eps_{i i1..i(n-1)} f_{i1..i(n-1)}; throws ShapeError if f is not antisymmetric.
std::vector<double> reconstruct_position(const Tensor<double>& f);
std::vector<double> reconstruct_momentum(const Tensor<double>& f_tilde);

// ---------------------------------------------------------------------------
// Residuals
// ---------------------------------------------------------------------------

// R_{lambda mu1 mu2..} = D_lambda f_{mu1 mu2..} + D_mu1 f_{lambda mu2..}; zero iff Killing-Yano.
Tensor<double> ky_residual(const MetricSpec& spec, const AntisymTensorField& field, std::span<const double> point);
// D_lambda f_{mu..}; zero iff covariantly constant.
Tensor<double> covariant_constancy_residual(const MetricSpec& spec, const AntisymTensorField& field,
                                            std::span<const double> point);

// ---------------------------------------------------------------------------
// Killing tensors
// ---------------------------------------------------------------------------

using KillingTensorValue = Matrix;

// K_{mu nu} = f_{mu lambda} g^{lambda sigma} f_{sigma nu}. In flat 3-space with
// f = eps . x this is x_i x_j - r^2 delta_ij.
KillingTensorValue killing_from_ky(const MetricSpec& spec, const AntisymTensorField& field,
                                   std::span<const double> point);
// Same contraction carried through jets, so derivatives follow the inputs.
Tensor<Jet> killing_from_ky_jet(const MetricSpec& spec, const AntisymTensorField& field, std::span<const Jet> x);
// D_lambda K_{mu nu} + D_mu K_{nu lambda} + D_nu K_{lambda mu}.
Tensor<double> killing_equation_residual(const MetricSpec& spec, const AntisymTensorField& field,
                                         std::span<const double> point);

// ---------------------------------------------------------------------------
// Non-degeneracy and symplectic forms
// ---------------------------------------------------------------------------

inline constexpr double kNondegeneracyTol = 1e-12;

struct Nondegeneracy {
    double determinant = 0.0;
    bool nondegenerate = false;
};

// Determinant of an antisymmetric matrix via its Pfaffian (exactly 0 in odd dimension).
double antisymmetric_determinant(const Matrix& f);
Nondegeneracy nondegeneracy(const AntisymTensorField& field, const MetricSpec& spec, std::span<const double> point);

class SymplecticError : public Error {
public:
    enum class Reason { RankMismatch, OddDimension, Degenerate, NotCovariantConstant, NotClosed };
    SymplecticError(Reason reason, const std::string& what) : Error(what), reason_(reason) {}
    Reason reason() const { return reason_; }

private:
    Reason reason_;
};

struct SymplecticTolerances {
    double covariant_constancy = 1e-8;
    double closedness = 1e-8;
    double determinant = kNondegeneracyTol;
};

// A rank-2 field validated as closed, non-degenerate and covariantly constant.
class SymplecticForm {
public:
    const AntisymTensorField& field() const { return field_; }
    const MetricSpec& metric() const { return metric_; }
    double max_covariant_constancy() const { return max_cc_; }
    double max_closedness() const { return max_closed_; }
    double min_abs_determinant() const { return min_det_; }

private:
    friend SymplecticForm symplectic_from_ky(const MetricSpec&, const AntisymTensorField&,
                                             std::span<const std::vector<double>>, const SymplecticTolerances&);
    SymplecticForm(AntisymTensorField f, MetricSpec m) : field_(std::move(f)), metric_(std::move(m)) {}
    AntisymTensorField field_;
    MetricSpec metric_;
    double max_cc_ = 0.0;
    double max_closed_ = 0.0;
    double min_det_ = 0.0;
};

// Coordinate exterior derivative d_lambda f_{mu nu} + d_mu f_{nu lambda} + d_nu f_{lambda mu}.
Tensor<double> exterior_derivative_2form(const AntisymTensorField& field, std::span<const double> point);

SymplecticForm symplectic_from_ky(const MetricSpec& spec, const AntisymTensorField& field,
                                  std::span<const std::vector<double>> sample_points,
                                  const SymplecticTolerances& tol = {});

// ---------------------------------------------------------------------------
// Catalog fields
// ---------------------------------------------------------------------------

enum class Side { Position, Momentum };

// Printed constant-curvature components in the spherical chart (r, theta, phi),
// transcribed verbatim including the 1/16 versus 16 prefactors.
Matrix constcurv_ky(Side side, std::span<const double> point, double K);
AntisymTensorField constcurv_ky_field(Side side, double K);

// f_i = 4m (dpsi + cos theta dphi) ^ dx_i - eps_ijk (1 + 2m/r) dx_j ^ dx_k on (r, theta, phi, psi),
// with a ^ b = a (x) b - b (x) a and dx_i the Cartesian differentials.
Matrix taubnut_ky(int index, std::span<const double> point, double m);
AntisymTensorField taubnut_ky_field(int index, double m);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct KYTolerances {
    double ky = 1e-10;
    double covariant_constancy = 1e-8;
    double determinant = kNondegeneracyTol;
};

struct KYReport {
    std::string metric;
    std::string field;
    std::size_t samples = 0;
    double max_ky_residual = 0.0;
    double max_covariant_constancy_residual = 0.0;
    std::vector<double> determinants;  // empty unless rank 2
    KYTolerances tolerances;
    bool is_ky = false;
    bool is_covariant_constant = false;
    bool is_nondegenerate = false;
};

KYReport verify_ky(const MetricSpec& spec, const AntisymTensorField& field,
                   std::span<const std::vector<double>> points, const KYTolerances& tol = {});

// ---------------------------------------------------------------------------
// Linear-ansatz solver
// ---------------------------------------------------------------------------

inline constexpr double kNullSpaceRelTol = 1e-8;

struct AnsatzResult {
    std::vector<AntisymTensorField> fields;
    // Orthonormal coefficient vectors; entry (component t, basis a) at t * basis_size + a.
    std::vector<std::vector<double>> coefficients;
    std::vector<double> singular_values;  // descending
    std::size_t unknowns = 0;
    std::size_t equations = 0;
    bool underdetermined = false;
    std::size_t dimension() const { return fields.size(); }
};

// Solves ky_residual = 0 for f_{mu nu} = sum_a c_a phi_a(x) per independent component.
AnsatzResult ky_solve_ansatz(const MetricSpec& spec, const std::vector<expr::Expression>& basis,
                             std::span<const std::vector<double>> sample_points,
                             double rel_tol = kNullSpaceRelTol);

}  // namespace kyano::kysym
