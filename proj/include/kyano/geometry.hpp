// Riemannian metrics on a single chart: catalog families and user metrics,
// Levi-Civita connection, covariant derivatives of antisymmetric fields,
// curvature, and the momentum-space (dual) metric.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "kyano/autodiff.hpp"
#include "kyano/expr.hpp"
#include "kyano/field.hpp"
#include "kyano/tensor.hpp"

namespace kyano::geometry {

enum class Chart { Cartesian, Spherical };

// Factor in front of V^-1 (dpsi + cos(theta) dphi)^2 in the self-dual Taub-NUT metric.
enum class TaubNutNormalization { FourMSquared, SixteenMSquared };

struct Flat {
    std::size_t n;
    bool operator==(const Flat&) const = default;
};

// ds^2 = (1 + K r^2/4)^-2 sum (dq^i)^2, in Cartesian q or spherical (r, theta, phi).
struct ConstCurvature3 {
    double K;
    Chart chart = Chart::Cartesian;
    bool operator==(const ConstCurvature3&) const = default;
};

// ds^2 = V (dr^2 + r^2 dtheta^2 + r^2 sin^2 theta dphi^2) + c^2 V^-1 (dpsi + cos theta dphi)^2,
// V = 1 + 2m/r, coordinates (r, theta, phi, psi).
struct TaubNUT {
    double m;
    TaubNutNormalization normalization = TaubNutNormalization::FourMSquared;
    bool operator==(const TaubNUT&) const = default;
};

struct Custom {
    std::size_t n;
    std::vector<std::vector<expr::Expression>> metric;  // n x n, symmetric
    std::vector<std::string> names;
    bool operator==(const Custom&) const = default;
};

using MetricKind = std::variant<Flat, ConstCurvature3, TaubNUT, Custom>;

// Axis-aligned sampling region, already shrunk away from singular loci.
struct SampleBox {
    std::vector<std::pair<double, double>> ranges;
};

class MetricSpec {
public:
    static MetricSpec flat(std::size_t n);
    static MetricSpec const_curvature(double K, Chart chart = Chart::Cartesian);
    static MetricSpec taub_nut(double m, TaubNutNormalization norm = TaubNutNormalization::FourMSquared);
    // Validates shape and textual symmetry of the component matrix.
    static MetricSpec custom(std::vector<std::vector<expr::Expression>> metric, std::vector<std::string> names = {});

    std::size_t dim() const;
    const MetricKind& kind() const { return kind_; }
    bool momentum_space() const { return momentum_; }
    std::vector<std::string> coordinate_names() const;
    std::string name() const;

    // Throws DomainError when the point lies on a chart singularity.
    void check_domain(std::span<const double> point) const;
    SampleBox sample_box() const;

    // Covariant components, differentiable through S (double, Jet or Dual2).
    template <typename S>
    Tensor<S> components(std::span<const S> x) const;

    MetricSpec dual() const;

    bool operator==(const MetricSpec& o) const { return kind_ == o.kind_ && momentum_ == o.momentum_; }

private:
    explicit MetricSpec(MetricKind kind) : kind_(std::move(kind)) {}

    MetricKind kind_;
    bool momentum_ = false;
};

using MetricValue = Matrix;
// Gamma^lambda_{mu nu} stored as (lambda, mu, nu).
using ChristoffelValue = Tensor<double>;

struct CurvatureValue {
    Tensor<double> riemann;  // R^rho_{sigma mu nu} as (rho, sigma, mu, nu)
    Matrix ricci;            // R_{sigma nu} = R^rho_{sigma rho nu}
    double scalar = 0.0;     // g^{sigma nu} R_{sigma nu}
};

MetricValue metric_at(const MetricSpec& spec, std::span<const double> point);
Matrix inverse_metric_at(const MetricSpec& spec, std::span<const double> point);
ChristoffelValue christoffel_at(const MetricSpec& spec, std::span<const double> point);

// Metric components with first derivatives (g_{ab}.d(c) = partial_c g_{ab}).
Tensor<Jet> metric_jet(const MetricSpec& spec, std::span<const double> point);

// D_lambda f_{mu1..mur} for a field of any supported rank; index 0 is lambda.
Tensor<double> covariant_derivative(const MetricSpec& spec, const AntisymTensorField& field,
                                    std::span<const double> point);
// Rank-2 specialisation: D_lambda f_{mu nu} as (lambda, mu, nu).
Tensor<double> covariant_derivative_2form(const MetricSpec& spec, const AntisymTensorField& field,
                                          std::span<const double> point);

CurvatureValue curvature_at(const MetricSpec& spec, std::span<const double> point);

MetricSpec dual_metric(const MetricSpec& spec);

// D_lambda t_{mu1..mur} for an all-lower-index tensor whose entries carry
// chart partials; index 0 of the result is lambda.
Tensor<double> covariant_derivative_lower(const Tensor<Jet>& t, const ChristoffelValue& gamma);

}  // namespace kyano::geometry
