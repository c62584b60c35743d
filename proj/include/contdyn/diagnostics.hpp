#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "contdyn/dynamics.hpp"

namespace contdyn {

enum class DerivativeMode { AnalyticJacobi, FiniteDifference };

struct DiagnosticsConfig {
    double alpha = 1.0;
    DerivativeMode derivative_mode = DerivativeMode::AnalyticJacobi;
    /// Step of the directional difference used for det rates near singularity.
    /// Zero selects 1e-5 times the trajectory time span.
    double fd_step = 0.0;
    /// Absolute |det| below which a sample is flagged near-singular.
    double near_singular_threshold = 1e-8;

    void validate() const;
};

/// Per-sample singularity-proximity metrics. Undefined entries are empty optionals.
struct DiagnosticsSeries {
    std::vector<double> times;
    std::vector<double> abs_det;
    std::vector<double> continuity_functional;
    std::vector<std::optional<double>> relative_rate_norm;
    std::vector<double> det_rate;            // real part for complex trajectories
    std::vector<std::optional<double>> lyapunov_value;
    std::vector<std::optional<double>> lyapunov_signed;
    std::vector<double> lyapunov_rate;
    std::vector<bool> near_singular;
    /// Set when a complex determinant forced the modulus into the Lyapunov log.
    bool lyapunov_uses_modulus = false;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
};

/// |det| + alpha * |d det/dt|^2. Never negative; throws ParameterError for alpha < 0.
template <Field T>
[[nodiscard]] double continuity_functional(T det_m, T det_rate, double alpha);

/// ||M^{-1} Mdot||_F, or nullopt when |det M| <= near_singular_threshold.
template <Field T>
[[nodiscard]] std::optional<double> relative_rate_norm(const Matrix<T>& m, const Matrix<T>& mdot,
                                                       double near_singular_threshold = 1e-8);

/// det(M) * Tr[M^{-1} Mdot]. Throws SingularityError for numerically singular M.
template <Field T>
[[nodiscard]] T det_rate_jacobi(const Matrix<T>& m, const Matrix<T>& mdot);

/// (det(M + h Mdot) - det(M - h Mdot)) / 2h; defined for singular M too.
template <Field T>
[[nodiscard]] T det_rate_directional(const Matrix<T>& m, const Matrix<T>& mdot, double h);

struct LyapunovValue {
    double value = 0.0;       // |log det|
    double signed_log = 0.0;  // log det (log |det| when the modulus was used)
    bool modulus_used = false;
};

/// V = |log det M| from a determinant value. Real det <= 0 throws DomainError;
/// a complex det falls back to its modulus and sets `modulus_used`.
[[nodiscard]] LyapunovValue lyapunov_value(Real det_m);
[[nodiscard]] LyapunovValue lyapunov_value(Complex det_m);

template <Field T>
[[nodiscard]] LyapunovValue lyapunov_value(const Matrix<T>& m) {
    return lyapunov_value(det(m));
}

/// Rate of the signed log det predicted by the determinant law: tau + gamma n det.
[[nodiscard]] inline double lyapunov_rate(double tau, double gamma, std::size_t n, double det_m) {
    return tau + gamma * static_cast<double>(n) * det_m;
}

/**
 * Per-sample diagnostics for a trajectory of `problem`.
 *
 * AnalyticJacobi takes Mdot from rhs() and the det rate from Jacobi's formula
 * (directional difference where the sample is near-singular). FiniteDifference
 * uses central differences of the stored states and dets.
 */
template <Field T>
[[nodiscard]] DiagnosticsSeries annotate_trajectory(const Trajectory<T>& traj,
                                                    const EvolutionProblem<T>& problem,
                                                    const DiagnosticsConfig& config);

/// Finite-difference-only variant for trajectories without an attached generator.
template <Field T>
[[nodiscard]] DiagnosticsSeries annotate_trajectory(const Trajectory<T>& traj,
                                                    const DiagnosticsConfig& config);

} // namespace contdyn
