// Multipole and dynamical-symmetry tensors of a point particle, each in a
// direct (x, p) form and in a Killing-Yano form built from f = eps.x and
// f~ = eps.p, plus an identity suite that adjudicates each printed relation.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "kyano/dynamics.hpp"
#include "kyano/tensor.hpp"

namespace kyano::multipole {

using dynamics::PhasePoint;
using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;
using Tensor3 = std::array<Mat3, 3>;

struct MultipoleSet {
    // direct forms, from (x, p)
    Vec3 d_dot{};
    double r2 = 0.0;
    double p2 = 0.0;
    Vec3 L{};
    double D = 0.0;
    Mat3 Q_direct{};
    Mat3 S{};
    Vec3 T_dipole_direct{};
    Vec3 T_dipole_transversal_direct{};  // 1/2 x_i D
    Vec3 C{};
    Vec3 C_tilde{};  // C with x and p exchanged
    Vec3 A{};
    Vec3 A_tilde_swap{};  // A with x and p exchanged
    Mat3 mu_quad_direct{};
    Mat3 T_quad_transversal_direct{};  // Q_direct D
    Tensor3 octupole_direct{};

    // Killing-Yano forms, from (f, f~) only
    double r2_ky = 0.0;
    double p2_ky = 0.0;
    Vec3 mu_ky{};
    double D_ky = 0.0;
    Mat3 Q_ky_printed{};
    Mat3 Q_ky_corrected{};
    Vec3 T_dipole_ky{};
    Vec3 T_dipole_transversal{};
    Vec3 C_ky{};
    Vec3 A_tilde_ky{};
    Vec3 A_ky{};        // twin of A~ with f and f~ exchanged
    Vec3 C_tilde_ky{};  // twin of C with f and f~ exchanged
    Vec3 toroid_from_generators{};  // (2 A~ + C) D
    Mat3 mu_quad_ky{};
    Mat3 T_quad_ky{};               // quarter trace subtraction
    Mat3 T_quad_transversal{};      // third trace subtraction, 1/8 prefactor
};

MultipoleSet evaluate_multipoles(const PhasePoint& z);

// Q_corrected coefficients a (ff)_ij + b delta_ij f^2.
inline constexpr double kQuadrupoleA = 1.0;
inline constexpr double kQuadrupoleB = 1.0 / 3.0;

struct QuadrupoleFit {
    double a = 0.0;
    double b = 0.0;
    double max_residual = 0.0;
};
// Least-squares fit of a (ff)_ij + b delta_ij f^2 against Q_direct.
QuadrupoleFit fit_quadrupole(const std::vector<PhasePoint>& points);

enum class Verdict { Holds, Fails, HoldsAfterCorrection };
const char* to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);

inline constexpr double kHoldsTol = 1e-10;

struct IdentityResult {
    std::string id;      // e.g. "4", "10-printed"
    std::string anchor;  // tensor family the relation belongs to
    std::string lhs;
    std::string rhs;
    double residual = 0.0;
    Verdict verdict = Verdict::Fails;
    std::string correction;  // id of the corrected form, when one exists
};

struct IdentityReport {
    std::size_t samples = 0;
    std::vector<IdentityResult> identities;
    std::vector<std::string> notes;

    const IdentityResult& at(const std::string& id) const;
    std::string table() const;
};

IdentityReport identity_suite(const std::vector<PhasePoint>& points);

// Expected verdicts; the suite doubles as a regression harness against this table.
struct Expectation {
    const char* id;
    Verdict verdict;
};
const std::vector<Expectation>& expectation_table();

struct ExpectationMismatch {
    std::string id;
    std::string expected;
    std::string actual;
};
std::vector<ExpectationMismatch> compare_with_expectations(const IdentityReport& report);

enum class Pairing { Printed, Swapped };

struct GeneratorReconstruction {
    Mat3 f{};
    Mat3 f_tilde{};
    Pairing pairing = Pairing::Swapped;
};

// Evaluates f_jk = -eps_ijk (...) for both pairings and returns the one matching eps.x / eps.p.
GeneratorReconstruction reconstruct_ky_from_generators(const PhasePoint& z);

std::vector<PhasePoint> sample_phase_points(std::size_t count, std::uint64_t seed);

}  // namespace kyano::multipole
