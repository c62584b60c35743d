#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "contdyn/linalg.hpp"
#include "contdyn/matrix.hpp"
#include "contdyn/quadrature.hpp"

namespace contdyn {

using TimeGrid = std::vector<double>;

/// n_steps + 1 equally spaced points t0 + k*(tf - t0)/n_steps.
[[nodiscard]] TimeGrid uniform_grid(double t0, double tf, std::size_t n_steps);

/**
 * A map t -> n x n matrix, optionally with its analytic time derivative.
 *
 * Evaluators must be pure functions of t; integrators and sweeps call them
 * from several threads.
 */
template <Field T>
struct TimeDependentMatrix {
    std::size_t dim = 0;
    std::function<Matrix<T>(double)> eval;
    std::function<Matrix<T>(double)> eval_derivative;

    /// Evaluates and checks the returned dimension.
    [[nodiscard]] Matrix<T> operator()(double t) const;
    [[nodiscard]] Matrix<T> derivative(double t) const;
    [[nodiscard]] bool has_derivative() const noexcept { return static_cast<bool>(eval_derivative); }

    [[nodiscard]] static TimeDependentMatrix constant(Matrix<T> m);
    [[nodiscard]] static TimeDependentMatrix zero(std::size_t n);
};

using RealGenerator = TimeDependentMatrix<Real>;
using ComplexGenerator = TimeDependentMatrix<Complex>;

/// Largest Frobenius distance between eval_derivative and a central difference
/// of eval with step h over the probe times. Zero when no derivative is attached.
template <Field T>
[[nodiscard]] double derivative_mismatch(const TimeDependentMatrix<T>& m,
                                         std::span<const double> probes, double h);

/// t -> Tr[A(t) + B(t)].
template <Field T>
[[nodiscard]] std::function<T(double)> trace_of_sum(const TimeDependentMatrix<T>& a,
                                                    const TimeDependentMatrix<T>& b);

enum class FeedbackVariant { None, InverseScaled, IdentityScaled, StateScaled, Regularized };

[[nodiscard]] std::string_view to_string(FeedbackVariant v);

/// The determinant-scaled feedback term f[M] added to the evolution equation.
struct Feedback {
    FeedbackVariant variant = FeedbackVariant::None;
    double gamma = 0.0;
    double epsilon = 0.0; // Regularized only

    [[nodiscard]] static Feedback none() { return {}; }
    /// gamma * det(M) * M^{-1}
    [[nodiscard]] static Feedback inverse_scaled(double gamma);
    /// gamma * det(M) * I
    [[nodiscard]] static Feedback identity_scaled(double gamma);
    /// gamma * det(M) * M; the only variant for which d det/dt = det (Tr[A+B] + gamma n det) holds exactly.
    [[nodiscard]] static Feedback state_scaled(double gamma);
    /// gamma * det(M) * (M* M + eps I)^{-1} M*
    [[nodiscard]] static Feedback regularized(double gamma, double epsilon);

    /// Throws ParameterError for a non-finite gamma or a non-positive Regularized epsilon.
    void validate() const;
};

/// dM/dt = A(t) M + M B(t) + f[M], M(t0) = M0 on [t0, tf].
template <Field T>
struct EvolutionProblem {
    TimeDependentMatrix<T> A;
    TimeDependentMatrix<T> B;
    Feedback feedback;
    Matrix<T> M0;
    double t0 = 0.0;
    double tf = 1.0;

    [[nodiscard]] std::size_t dim() const noexcept { return M0.dim(); }

    /// Checks t0 < tf, agreeing dimensions, a valid feedback and |det M0| > 0.
    void validate() const;
};

enum class Method { Rk4, Picard, TimeOrderedExp };

[[nodiscard]] std::string_view to_string(Method m);

/// Integration stopped because |det M| fell below the singular threshold.
struct SingularityEvent {
    double time = 0.0;
    double abs_det = 0.0;
};

template <Field T>
struct Trajectory {
    std::vector<double> times;
    std::vector<Matrix<T>> states;
    std::vector<T> dets; // det(states[k]) from contdyn::det
    double step_size = 0.0;
    Method method = Method::Rk4;
    std::optional<SingularityEvent> event;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
    [[nodiscard]] bool empty() const noexcept { return times.empty(); }

    void push(double t, Matrix<T> m);
};

template <Field T>
[[nodiscard]] Matrix<T> feedback_eval(const Feedback& kind, const Matrix<T>& m);

/// A(t) M + M B(t) + f[M].
template <Field T>
[[nodiscard]] Matrix<T> rhs(const EvolutionProblem<T>& problem, double t, const Matrix<T>& m);

/**
 * Classical fixed-step RK4 over a uniform grid of n_steps steps.
 *
 * With InverseScaled feedback the integration stops as soon as |det M| drops
 * below singular_threshold(M); the partial trajectory is returned with
 * `event` set. Throws NumericError when a state becomes non-finite.
 */
template <Field T>
[[nodiscard]] Trajectory<T> evolve(const EvolutionProblem<T>& problem, std::size_t n_steps);

template <Field T>
struct PicardResult {
    Trajectory<T> trajectory;
    /// sup over the grid of ||M_{k+1} - M_k||_F, one entry per iteration performed.
    std::vector<double> deltas;
};

/// (sup ||A||_F + sup ||B||_F) * (tf - t0) sampled on the grid. The Picard map is a
/// sup-norm contraction when this is below one.
template <Field T>
[[nodiscard]] double picard_contraction_bound(const EvolutionProblem<T>& problem,
                                              std::span<const double> grid);

/**
 * Picard iteration M_{k+1}(t) = M0 + int_{t0}^{t} [A M_k + M_k B] ds on the
 * given grid, trapezoidal quadrature, starting from M_0(t) = M0.
 *
 * Requires feedback None. Stops early once a delta is <= `tolerance`.
 * Throws ContractionError when the delta grows three iterations in a row.
 */
template <Field T>
[[nodiscard]] PicardResult<T> picard_solve(const EvolutionProblem<T>& problem,
                                           std::size_t n_iterations,
                                           std::span<const double> grid,
                                           double tolerance = 0.0);

/// Ordered product of midpoint step exponentials,
/// U_k = exp(A(m_k) h) ... exp(A(m_1) h), U_0 = I. Requires a uniform grid.
template <Field T>
[[nodiscard]] std::vector<Matrix<T>> time_ordered_propagator(const TimeDependentMatrix<T>& a,
                                                             std::span<const double> grid);

struct BlowUpEvent {
    double last_time = 0.0;      // last grid time with a finite value under the guard
    double last_value = 0.0;
    double time_estimate = 0.0;  // extrapolated pole location
};

struct ScalarTrajectory {
    std::vector<double> times;
    std::vector<double> values;
    std::optional<BlowUpEvent> blow_up;
};

inline constexpr double kDefaultOverflowGuard = 1e12;

/**
 * RK4 on d det/dt = det (tau(t) + gamma n det) across the grid points.
 *
 * When |det| exceeds `overflow_guard` (or a stage goes non-finite) the
 * integration stops and a BlowUpEvent is attached. Its time estimate
 * integrates the Bernoulli equation exactly from the last good sample,
 * freezing tau at that time.
 */
[[nodiscard]] ScalarTrajectory det_ode_solve(const ScalarFunction& tau, double gamma,
                                             std::size_t n, double det0,
                                             std::span<const double> grid,
                                             double overflow_guard = kDefaultOverflowGuard);

/// det0 * exp(int_{t0}^{t} tau) with adaptive Simpson at tolerance `tol`.
[[nodiscard]] double liouville_closed_form(const ScalarFunction& tau, double det0, double t0,
                                           double t, double tol = 1e-10);

struct TraceConditionReport {
    std::vector<double> times;
    std::vector<double> cumulative; // |int_{t0}^{t_k} Tr[A+B]|
    double max_abs_integral = 0.0;
    bool passes = true;
    std::optional<double> first_crossing; // linear interpolation between grid points
};

/// Tracks |int Tr[A+B]| along the grid against `bound`.
template <Field T>
[[nodiscard]] TraceConditionReport trace_condition_check(const TimeDependentMatrix<T>& a,
                                                         const TimeDependentMatrix<T>& b,
                                                         std::span<const double> grid,
                                                         double bound);

} // namespace contdyn
