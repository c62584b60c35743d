#pragma once

#include <span>
#include <variant>
#include <vector>

#include "contdyn/dynamics.hpp"

namespace contdyn::quantum {

/// H(t) = [[E1(t), delta], [delta, E2(t)]] with constant coupling.
struct TwoLevelEnergies {
    ScalarFunction e1;
    ScalarFunction e2;
    double delta = 0.0;
};

/// H(t) = delta(t) sigma_x + epsilon(t) sigma_z = [[eps, delta], [delta, -eps]].
struct DrivenTwoLevel {
    ScalarFunction epsilon;
    ScalarFunction delta;
};

using TwoLevelParams = std::variant<TwoLevelEnergies, DrivenTwoLevel>;

[[nodiscard]] ComplexGenerator two_level_hamiltonian(const TwoLevelEnergies& params);
[[nodiscard]] ComplexGenerator driven_two_level(ScalarFunction epsilon, ScalarFunction delta);
[[nodiscard]] ComplexGenerator hamiltonian(const TwoLevelParams& params);

/// Closed-form det H(t): E1 E2 - delta^2, or -eps^2 - delta^2 for the driven form.
[[nodiscard]] ScalarFunction hamiltonian_det(const TwoLevelParams& params);

/// i hbar dU/dt = H(t) U, U(t0) = U0.
struct QuantumProblem {
    ComplexGenerator H;
    double hbar = 1.0;
    ComplexMatrix U0; // empty means identity
    double t0 = 0.0;
    double tf = 1.0;

    /// Throws ParameterError for hbar <= 0, t0 >= tf, or U0 not unitary to 1e-10.
    void validate() const;
};

/// A(t) = -(i/hbar) H(t), B = 0, f = 0, M0 = U0.
[[nodiscard]] EvolutionProblem<Complex> schrodinger_problem(const QuantumProblem& q);

/// det U(t_k) = exp(-(i/hbar) int_{t0}^{t_k} Tr H) on each grid point, adaptive Simpson
/// on the real and imaginary parts of Tr H separately.
[[nodiscard]] std::vector<Complex> exact_det_U(const ComplexGenerator& H, double hbar, double t0,
                                               std::span<const double> grid, double tol = 1e-12);

struct UnitarityReport {
    double max_unitarity_defect = 0.0;    // max_k ||U*U - I||_F
    double max_det_modulus_defect = 0.0;  // max_k | |det U| - 1 |
    double tolerance = 0.0;
    bool passes = true;
    std::vector<double> unitarity_defect; // per sample
};

[[nodiscard]] UnitarityReport unitarity_check(const Trajectory<Complex>& traj, double tolerance = 1e-8);

[[nodiscard]] double unitarity_defect(const ComplexMatrix& u);

/// Times where det H changes sign (or is exactly zero) on the grid, each
/// refined by bisection until the bracket is narrower than `resolution`.
[[nodiscard]] std::vector<double> find_crossings(const ScalarFunction& det_h,
                                                 std::span<const double> grid,
                                                 double resolution = 1e-10);

} // namespace contdyn::quantum
