#include "contdyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <type_traits>
#include <limits>
#include <string>

namespace contdyn {

TimeGrid uniform_grid(double t0, double tf, std::size_t n_steps) {
    if (n_steps == 0)
        throw ParameterError("uniform_grid: n_steps must be at least 1");
    if (!(tf > t0))
        throw ParameterError("uniform_grid: tf must exceed t0");
    TimeGrid grid(n_steps + 1);
    const double h = (tf - t0) / static_cast<double>(n_steps);
    for (std::size_t k = 0; k < n_steps; ++k)
        grid[k] = t0 + static_cast<double>(k) * h;
    grid[n_steps] = tf;
    return grid;
}

// ---------------------------------------------------------------------------
// TimeDependentMatrix

template <Field T>
Matrix<T> TimeDependentMatrix<T>::operator()(double t) const {
    Matrix<T> m = eval(t);
    if (m.dim() != dim)
        throw ParameterError("time-dependent matrix returned the wrong dimension");
    return m;
}

template <Field T>
Matrix<T> TimeDependentMatrix<T>::derivative(double t) const {
    if (!eval_derivative)
        throw ParameterError("time-dependent matrix has no analytic derivative");
    Matrix<T> m = eval_derivative(t);
    if (m.dim() != dim)
        throw ParameterError("time-dependent matrix derivative returned the wrong dimension");
    return m;
}

template <Field T>
TimeDependentMatrix<T> TimeDependentMatrix<T>::constant(Matrix<T> m) {
    const std::size_t n = m.dim();
    TimeDependentMatrix r;
    r.dim = n;
    r.eval = [m = std::move(m)](double) { return m; };
    r.eval_derivative = [n](double) { return Matrix<T>::zero(n); };
    return r;
}

template <Field T>
TimeDependentMatrix<T> TimeDependentMatrix<T>::zero(std::size_t n) {
    return constant(Matrix<T>::zero(n));
}

template <Field T>
double derivative_mismatch(const TimeDependentMatrix<T>& m, std::span<const double> probes,
                           double h) {
    if (!m.has_derivative())
        return 0.0;
    double worst = 0.0;
    for (double t : probes) {
        Matrix<T> fd = (m(t + h) - m(t - h)) * T{0.5 / h};
        worst = std::max(worst, frobenius_norm(fd - m.derivative(t)));
    }
    return worst;
}

template <Field T>
std::function<T(double)> trace_of_sum(const TimeDependentMatrix<T>& a,
                                      const TimeDependentMatrix<T>& b) {
    return [a, b](double t) { return trace(a(t)) + trace(b(t)); };
}

// ---------------------------------------------------------------------------
// Feedback

std::string_view to_string(FeedbackVariant v) {
    switch (v) {
    case FeedbackVariant::None: return "none";
    case FeedbackVariant::InverseScaled: return "inverse_scaled";
    case FeedbackVariant::IdentityScaled: return "identity_scaled";
    case FeedbackVariant::StateScaled: return "state_scaled";
    case FeedbackVariant::Regularized: return "regularized";
    }
    return "unknown";
}

Feedback Feedback::inverse_scaled(double gamma) {
    return {FeedbackVariant::InverseScaled, gamma, 0.0};
}

Feedback Feedback::identity_scaled(double gamma) {
    return {FeedbackVariant::IdentityScaled, gamma, 0.0};
}

Feedback Feedback::state_scaled(double gamma) {
    return {FeedbackVariant::StateScaled, gamma, 0.0};
}

Feedback Feedback::regularized(double gamma, double epsilon) {
    Feedback f{FeedbackVariant::Regularized, gamma, epsilon};
    f.validate();
    return f;
}

void Feedback::validate() const {
    if (!std::isfinite(gamma))
        throw ParameterError("feedback gamma must be finite");
    if (variant == FeedbackVariant::Regularized && !(epsilon > 0.0 && std::isfinite(epsilon)))
        throw ParameterError("regularized feedback requires epsilon > 0");
}

template <Field T>
Matrix<T> feedback_eval(const Feedback& kind, const Matrix<T>& m) {
    const std::size_t n = m.dim();
    switch (kind.variant) {
    case FeedbackVariant::None:
        return Matrix<T>::zero(n);
    case FeedbackVariant::InverseScaled:
        return inverse(m) * (T{kind.gamma} * det(m));
    case FeedbackVariant::IdentityScaled:
        return Matrix<T>::identity(n) * (T{kind.gamma} * det(m));
    case FeedbackVariant::StateScaled:
        return m * (T{kind.gamma} * det(m));
    case FeedbackVariant::Regularized:
        return regularized_inverse(m, kind.epsilon) * (T{kind.gamma} * det(m));
    }
    throw ParameterError("unknown feedback variant");
}

// ---------------------------------------------------------------------------
// EvolutionProblem

template <Field T>
void EvolutionProblem<T>::validate() const {
    if (!(tf > t0))
        throw ParameterError("evolution problem requires t0 < tf");
    const std::size_t n = M0.dim();
    if (n == 0)
        throw ParameterError("initial matrix is empty");
    if (A.dim != n || B.dim != n)
        throw ParameterError("generator dimensions do not match the initial matrix");
    if (!A.eval || !B.eval)
        throw ParameterError("generator evaluators must be set");
    feedback.validate();
    if (std::abs(det(M0)) == 0.0)
        throw SingularityError("initial matrix is singular", 0.0);
}

std::string_view to_string(Method m) {
    switch (m) {
    case Method::Rk4: return "rk4";
    case Method::Picard: return "picard";
    case Method::TimeOrderedExp: return "time_ordered_exp";
    }
    return "unknown";
}

template <Field T>
void Trajectory<T>::push(double t, Matrix<T> m) {
    dets.push_back(det(m));
    times.push_back(t);
    states.push_back(std::move(m));
}

template <Field T>
Matrix<T> rhs(const EvolutionProblem<T>& problem, double t, const Matrix<T>& m) {
    Matrix<T> out = problem.A(t) * m;
    out += m * problem.B(t);
    if (problem.feedback.variant != FeedbackVariant::None)
        out += feedback_eval(problem.feedback, m);
    return out;
}

// ---------------------------------------------------------------------------
// RK4

template <Field T>
Trajectory<T> evolve(const EvolutionProblem<T>& problem, std::size_t n_steps) {
    problem.validate();
    const TimeGrid grid = uniform_grid(problem.t0, problem.tf, n_steps);
    const double h = (problem.tf - problem.t0) / static_cast<double>(n_steps);
    const bool watch_singular = problem.feedback.variant == FeedbackVariant::InverseScaled;

    Trajectory<T> traj;
    traj.step_size = h;
    traj.method = Method::Rk4;
    traj.times.reserve(grid.size());
    traj.states.reserve(grid.size());
    traj.dets.reserve(grid.size());

    Matrix<T> m = problem.M0;
    traj.push(grid[0], m);
    const T half_h{0.5 * h};
    const T full_h{h};
    const T sixth_h{h / 6.0};
    const T two{2.0};

    for (std::size_t k = 0; k < n_steps; ++k) {
        const double t = grid[k];
        if (watch_singular) {
            const double abs_det = std::abs(traj.dets.back());
            if (abs_det <= singular_threshold(m)) {
                traj.event = SingularityEvent{t, abs_det};
                return traj;
            }
        }
        try {
            const Matrix<T> k1 = rhs(problem, t, m);
            const Matrix<T> k2 = rhs(problem, t + 0.5 * h, m + k1 * half_h);
            const Matrix<T> k3 = rhs(problem, t + 0.5 * h, m + k2 * half_h);
            const Matrix<T> k4 = rhs(problem, t + h, m + k3 * full_h);
            m += (k1 + k2 * two + k3 * two + k4) * sixth_h;
        } catch (const SingularityError& e) {
            traj.event = SingularityEvent{t, e.abs_det()};
            return traj;
        }
        if (!m.all_finite())
            throw NumericError("evolve: state became non-finite at t = " + std::to_string(grid[k + 1]));
        if (watch_singular) {
            // A sign change means the step jumped across the singular set.
            const T d_prev = traj.dets.back();
            const T d_next = det(m);
            if constexpr (std::is_same_v<T, Real>) {
                if (d_prev * d_next < 0.0) {
                    const double frac = d_prev / (d_prev - d_next);
                    traj.event = SingularityEvent{t + frac * h, std::min(std::abs(d_prev), std::abs(d_next))};
                    return traj;
                }
            }
        }
        traj.push(grid[k + 1], m);
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Picard

template <Field T>
double picard_contraction_bound(const EvolutionProblem<T>& problem, std::span<const double> grid) {
    double a_max = 0.0;
    double b_max = 0.0;
    for (double t : grid) {
        a_max = std::max(a_max, frobenius_norm(problem.A(t)));
        b_max = std::max(b_max, frobenius_norm(problem.B(t)));
    }
    const double span = grid.empty() ? 0.0 : grid.back() - grid.front();
    return (a_max + b_max) * span;
}

template <Field T>
PicardResult<T> picard_solve(const EvolutionProblem<T>& problem, std::size_t n_iterations,
                             std::span<const double> grid, double tolerance) {
    problem.validate();
    if (problem.feedback.variant != FeedbackVariant::None)
        throw ParameterError("picard_solve supports only feedback None");
    if (grid.size() < 2)
        throw ParameterError("picard_solve needs at least two grid points");
    if (n_iterations == 0)
        throw ParameterError("picard_solve needs at least one iteration");
    for (std::size_t j = 1; j < grid.size(); ++j)
        if (!(grid[j] > grid[j - 1]))
            throw ParameterError("picard_solve grid must be strictly increasing");

    const std::size_t np = grid.size();
    std::vector<Matrix<T>> a_samples;
    std::vector<Matrix<T>> b_samples;
    a_samples.reserve(np);
    b_samples.reserve(np);
    for (double t : grid) {
        a_samples.push_back(problem.A(t));
        b_samples.push_back(problem.B(t));
    }

    std::vector<Matrix<T>> current(np, problem.M0);
    std::vector<Matrix<T>> next(np);
    std::vector<Matrix<T>> integrand(np);
    PicardResult<T> result;
    int growth_streak = 0;

    for (std::size_t it = 0; it < n_iterations; ++it) {
        for (std::size_t j = 0; j < np; ++j)
            integrand[j] = a_samples[j] * current[j] + current[j] * b_samples[j];
        next[0] = problem.M0;
        for (std::size_t j = 1; j < np; ++j) {
            const T half_dt{0.5 * (grid[j] - grid[j - 1])};
            next[j] = next[j - 1] + (integrand[j - 1] + integrand[j]) * half_dt;
        }
        double delta = 0.0;
        for (std::size_t j = 0; j < np; ++j)
            delta = std::max(delta, frobenius_norm(next[j] - current[j]));
        if (!std::isfinite(delta))
            throw NumericError("picard_solve: iterate became non-finite");

        if (!result.deltas.empty() && delta > result.deltas.back())
            ++growth_streak;
        else
            growth_streak = 0;
        result.deltas.push_back(delta);
        std::swap(current, next);
        if (growth_streak >= 3)
            throw ContractionError("picard_solve: deltas grew for 3 consecutive iterations");
        if (delta <= tolerance)
            break;
    }

    Trajectory<T>& traj = result.trajectory;
    traj.method = Method::Picard;
    traj.step_size = grid[1] - grid[0];
    for (std::size_t j = 0; j < np; ++j)
        traj.push(grid[j], current[j]);
    return result;
}

// ---------------------------------------------------------------------------
// Time-ordered exponential

template <Field T>
std::vector<Matrix<T>> time_ordered_propagator(const TimeDependentMatrix<T>& a,
                                               std::span<const double> grid) {
    if (grid.size() < 2)
        throw ParameterError("time_ordered_propagator needs at least two grid points");
    const double h = grid[1] - grid[0];
    if (!(h > 0.0))
        throw ParameterError("time_ordered_propagator grid must be increasing");
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (std::abs((grid[k] - grid[k - 1]) - h) >
            1e-9 * std::max({1.0, std::abs(grid.front()), std::abs(grid.back())}))
            throw ParameterError("time_ordered_propagator requires a uniform grid");

    std::vector<Matrix<T>> out;
    out.reserve(grid.size());
    out.push_back(Matrix<T>::identity(a.dim));
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const double step = grid[k] - grid[k - 1];
        const double mid = 0.5 * (grid[k] + grid[k - 1]);
        out.push_back(matrix_exp(a(mid) * T{step}) * out.back());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scalar determinant law

namespace {

double bernoulli_pole(double tau, double coupling, double value) {
    // y' = tau y + c y^2; z = 1/y satisfies z' = -tau z - c, which vanishes after
    // ln(1 + tau z / c) / tau (limit z / c as tau -> 0).
    const double z = 1.0 / value;
    if (std::abs(tau) * std::abs(z) < 1e-12 * std::abs(coupling))
        return z / coupling;
    const double arg = 1.0 + tau * z / coupling;
    if (!(arg > 0.0))
        return std::numeric_limits<double>::infinity();
    return std::log(arg) / tau;
}

} // namespace

ScalarTrajectory det_ode_solve(const ScalarFunction& tau, double gamma, std::size_t n,
                               double det0, std::span<const double> grid,
                               double overflow_guard) {
    if (grid.empty())
        throw ParameterError("det_ode_solve: empty grid");
    if (!std::isfinite(det0) || !std::isfinite(gamma))
        throw ParameterError("det_ode_solve: det0 and gamma must be finite");
    const double coupling = gamma * static_cast<double>(n);
    auto f = [&](double t, double y) { return y * (tau(t) + coupling * y); };

    ScalarTrajectory out;
    out.times.reserve(grid.size());
    out.values.reserve(grid.size());
    out.times.push_back(grid[0]);
    out.values.push_back(det0);
    double y = det0;
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const double t = grid[k - 1];
        const double h = grid[k] - t;
        const double k1 = f(t, y);
        const double k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
        const double k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
        const double k4 = f(t + h, y + h * k3);
        const double next = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!std::isfinite(next) || std::abs(next) > overflow_guard) {
            BlowUpEvent ev;
            ev.last_time = t;
            ev.last_value = y;
            ev.time_estimate = coupling != 0.0 ? t + bernoulli_pole(tau(t), coupling, y) : grid[k];
            if (!std::isfinite(ev.time_estimate))
                ev.time_estimate = grid[k];
            out.blow_up = ev;
            return out;
        }
        y = next;
        out.times.push_back(grid[k]);
        out.values.push_back(y);
    }
    return out;
}

double liouville_closed_form(const ScalarFunction& tau, double det0, double t0, double t,
                             double tol) {
    const double integral = adaptive_simpson(tau, t0, t, tol);
    const double value = det0 * std::exp(integral);
    if (!std::isfinite(value))
        throw NumericError("liouville_closed_form: result overflowed");
    return value;
}

template <Field T>
TraceConditionReport trace_condition_check(const TimeDependentMatrix<T>& a,
                                           const TimeDependentMatrix<T>& b,
                                           std::span<const double> grid, double bound) {
    TraceConditionReport report;
    if (grid.empty())
        return report;
    const auto tr = trace_of_sum(a, b);
    const ScalarFunction re = [&tr](double t) { return std::real(tr(t)); };
    const ScalarFunction im = [&tr](double t) { return std::imag(tr(t)); };

    Complex running{0.0, 0.0};
    report.times.push_back(grid[0]);
    report.cumulative.push_back(0.0);
    for (std::size_t k = 1; k < grid.size(); ++k) {
        running += Complex{adaptive_simpson(re, grid[k - 1], grid[k], 1e-12),
                           is_complex<T>::value ? adaptive_simpson(im, grid[k - 1], grid[k], 1e-12)
                                                : 0.0};
        const double value = std::abs(running);
        const double prev = report.cumulative.back();
        if (!report.first_crossing && value >= bound) {
            // linear interpolation inside [t_{k-1}, t_k]
            const double frac = value > prev ? (bound - prev) / (value - prev) : 1.0;
            report.first_crossing = grid[k - 1] + std::clamp(frac, 0.0, 1.0) * (grid[k] - grid[k - 1]);
            report.passes = false;
        }
        report.times.push_back(grid[k]);
        report.cumulative.push_back(value);
        report.max_abs_integral = std::max(report.max_abs_integral, value);
    }
    return report;
}

// ---------------------------------------------------------------------------

#define CONTDYN_INSTANTIATE(T)                                                                 \
    template struct TimeDependentMatrix<T>;                                                    \
    template double derivative_mismatch(const TimeDependentMatrix<T>&, std::span<const double>, \
                                        double);                                               \
    template std::function<T(double)> trace_of_sum(const TimeDependentMatrix<T>&,              \
                                                   const TimeDependentMatrix<T>&);             \
    template Matrix<T> feedback_eval(const Feedback&, const Matrix<T>&);                       \
    template struct EvolutionProblem<T>;                                                       \
    template struct Trajectory<T>;                                                             \
    template Matrix<T> rhs(const EvolutionProblem<T>&, double, const Matrix<T>&);              \
    template Trajectory<T> evolve(const EvolutionProblem<T>&, std::size_t);                    \
    template double picard_contraction_bound(const EvolutionProblem<T>&,                       \
                                             std::span<const double>);                        \
    template PicardResult<T> picard_solve(const EvolutionProblem<T>&, std::size_t,             \
                                          std::span<const double>, double);                    \
    template std::vector<Matrix<T>> time_ordered_propagator(const TimeDependentMatrix<T>&,     \
                                                            std::span<const double>);          \
    template TraceConditionReport trace_condition_check(const TimeDependentMatrix<T>&,         \
                                                        const TimeDependentMatrix<T>&,         \
                                                        std::span<const double>, double);

CONTDYN_INSTANTIATE(Real)
CONTDYN_INSTANTIATE(Complex)

#undef CONTDYN_INSTANTIATE

} // namespace contdyn
