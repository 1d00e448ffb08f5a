// Phase-space calculus: Poisson and Nambu brackets, geodesic integration,
// drift monitoring and the unified flow on (f, f~) vectors.

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kyano/autodiff.hpp"
#include "kyano/expr.hpp"
#include "kyano/field.hpp"
#include "kyano/geometry.hpp"

namespace kyano::dynamics {

using geometry::MetricSpec;

struct PhasePoint {
    std::vector<double> x;
    std::vector<double> p;

    std::size_t dim() const { return x.size(); }
    // (x1..xn, p1..pn)
    std::vector<double> flat() const;
    static PhasePoint from_flat(std::span<const double> z);
};

// Scalar on phase space with exact first derivatives in all 2n variables.
// Variables are ordered x1..xn, p1..pn.
class PhaseFunction {
public:
    using Fn = std::function<Jet(std::span<const Jet>)>;

    PhaseFunction(std::size_t n, Fn fn, std::string label);

    // Expression over the names x1..xn, p1..pn.
    static PhaseFunction from_expression(std::size_t n, const expr::Expression& e, std::string label = "");
    static PhaseFunction parse(std::size_t n, std::string_view source);

    static PhaseFunction coordinate(std::size_t n, std::size_t i);
    static PhaseFunction momentum(std::size_t n, std::size_t i);
    // H = 1/2 g^{mu nu}(x) p_mu p_nu
    static PhaseFunction hamiltonian(const MetricSpec& spec);
    // K^{mu nu} p_mu p_nu with K_{mu nu} built from a rank-2 Killing-Yano field.
    static PhaseFunction killing_quadratic(const MetricSpec& spec, const AntisymTensorField& field);
    // Component i of x cross p (n = 3).
    static PhaseFunction angular_momentum(std::size_t i);

    std::size_t dim() const { return n_; }
    const std::string& label() const { return label_; }

    double value(const PhasePoint& z) const;
    Jet jet(const PhasePoint& z) const;
    Jet operator()(std::span<const Jet> z) const { return fn_(z); }

    PhaseFunction operator*(const PhaseFunction& o) const;
    PhaseFunction operator+(const PhaseFunction& o) const;

private:
    std::size_t n_;
    Fn fn_;
    std::string label_;
};

// sum_i dF/dx_i dG/dp_i - dF/dp_i dG/dx_i
double poisson_bracket(const PhaseFunction& F, const PhaseFunction& G, const PhasePoint& z);

// Jacobian determinant eps_ijk d_i F1 d_j F2 d_k F3 of three functions of three variables.
using ScalarFn = std::function<Jet(std::span<const Jet>)>;
double nambu_bracket(const ScalarFn& F1, const ScalarFn& F2, const ScalarFn& F3, std::span<const double> point);

struct Trajectory {
    std::vector<double> t;
    std::vector<PhasePoint> z;
    double dt = 0.0;
    std::size_t steps = 0;
    std::string method = "rk4";
};

// Raised when integration leaves the chart domain; carries the samples computed so far.
class DomainExit : public DomainError {
public:
    DomainExit(const std::string& what, Trajectory partial) : DomainError(what), partial_(std::move(partial)) {}
    const Trajectory& partial() const { return partial_; }

private:
    Trajectory partial_;
};

// Classic RK4 on Hamilton's equations for H = 1/2 g^{mu nu} p p.
Trajectory geodesic_integrate(const MetricSpec& spec, const PhasePoint& z0, double dt, std::size_t steps);
// Same scheme for an arbitrary Hamiltonian.
Trajectory hamilton_integrate(const PhaseFunction& H, const PhasePoint& z0, double dt, std::size_t steps,
                              const MetricSpec* domain = nullptr);

struct Drift {
    double max_abs = 0.0;
    // max_abs / |Q(z0)|, or max_abs itself when Q(z0) == 0.
    double max_rel = 0.0;
    double initial = 0.0;
};

Drift conservation_monitor(const Trajectory& traj, const PhaseFunction& Q);

// Integrates zdot = J grad H with J = [[0, -I], [I, 0]], the state ordered as (f~, f)
// and grad H ordered as (dH/df~, dH/df), which is Hamilton's flow with f as position.
// H takes 2n variables ordered (f1..fn, f~1..f~n); z0 uses the same ordering and so
// does the returned trajectory (x holds f, p holds f~).
Trajectory unified_hamilton_flow(const PhaseFunction& H, const PhasePoint& z0, double dt, std::size_t steps);

}  // namespace kyano::dynamics
