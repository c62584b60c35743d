#include "contdyn/diagnostics.hpp"

#include <cmath>

namespace contdyn {

void DiagnosticsConfig::validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw ParameterError("diagnostics alpha must be finite and >= 0");
    if (!(fd_step >= 0.0) || !std::isfinite(fd_step))
        throw ParameterError("diagnostics fd_step must be positive (or 0 for the default)");
    if (!(near_singular_threshold > 0.0))
        throw ParameterError("diagnostics near_singular_threshold must be positive");
}

template <Field T>
double continuity_functional(T det_m, T det_rate, double alpha) {
    if (!(alpha >= 0.0))
        throw ParameterError("continuity_functional: alpha must be >= 0");
    return std::abs(det_m) + alpha * abs2(det_rate);
}

template <Field T>
std::optional<double> relative_rate_norm(const Matrix<T>& m, const Matrix<T>& mdot,
                                         double near_singular_threshold) {
    const LuFactorization<T> lu(m);
    if (lu.singular() || std::abs(lu.determinant()) <= near_singular_threshold)
        return std::nullopt;
    return frobenius_norm(lu.solve(mdot));
}

template <Field T>
T det_rate_jacobi(const Matrix<T>& m, const Matrix<T>& mdot) {
    return det(m) * trace(inverse(m) * mdot);
}

template <Field T>
T det_rate_directional(const Matrix<T>& m, const Matrix<T>& mdot, double h) {
    if (!(h > 0.0))
        throw ParameterError("det_rate_directional: step must be positive");
    const T step{h};
    return (det(m + mdot * step) - det(m - mdot * step)) / T{2.0 * h};
}

LyapunovValue lyapunov_value(Real det_m) {
    if (!(det_m > 0.0))
        throw DomainError("lyapunov_value: log det needs det > 0 over the reals");
    const double s = std::log(det_m);
    return {std::abs(s), s, false};
}

LyapunovValue lyapunov_value(Complex det_m) {
    const double mod = std::abs(det_m);
    if (!(mod > 0.0))
        throw DomainError("lyapunov_value: determinant is zero");
    const double s = std::log(mod);
    return {std::abs(s), s, true};
}

namespace {

template <Field T>
void fill_lyapunov(DiagnosticsSeries& out, T d) {
    try {
        const LyapunovValue v = lyapunov_value(d);
        out.lyapunov_value.emplace_back(v.value);
        out.lyapunov_signed.emplace_back(v.signed_log);
        out.lyapunov_uses_modulus = out.lyapunov_uses_modulus || v.modulus_used;
    } catch (const DomainError&) {
        out.lyapunov_value.emplace_back(std::nullopt);
        out.lyapunov_signed.emplace_back(std::nullopt);
    }
}

template <Field T>
std::vector<Matrix<T>> central_difference_states(const Trajectory<T>& traj) {
    const std::size_t n = traj.size();
    std::vector<Matrix<T>> out;
    out.reserve(n);
    if (n == 1) {
        out.push_back(Matrix<T>::zero(traj.states[0].dim()));
        return out;
    }
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t lo = k == 0 ? 0 : k - 1;
        const std::size_t hi = k + 1 == n ? k : k + 1;
        const double dt = traj.times[hi] - traj.times[lo];
        out.push_back((traj.states[hi] - traj.states[lo]) * T{1.0 / dt});
    }
    return out;
}

template <Field T>
std::vector<T> central_difference_dets(const Trajectory<T>& traj) {
    const std::size_t n = traj.size();
    std::vector<T> out(n, T{});
    if (n == 1)
        return out;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t lo = k == 0 ? 0 : k - 1;
        const std::size_t hi = k + 1 == n ? k : k + 1;
        out[k] = (traj.dets[hi] - traj.dets[lo]) / T{traj.times[hi] - traj.times[lo]};
    }
    return out;
}

template <Field T>
DiagnosticsSeries annotate_impl(const Trajectory<T>& traj, const EvolutionProblem<T>* problem,
                                const DiagnosticsConfig& config) {
    config.validate();
    if (traj.empty())
        throw ParameterError("annotate_trajectory: empty trajectory");

    const bool analytic = problem != nullptr && config.derivative_mode == DerivativeMode::AnalyticJacobi;
    const double span = traj.times.back() - traj.times.front();
    const double fd_step = config.fd_step > 0.0 ? config.fd_step : 1e-5 * (span > 0.0 ? span : 1.0);
    const std::size_t n = traj.states.front().dim();

    std::vector<Matrix<T>> fd_states;
    std::vector<T> fd_dets;
    if (!analytic) {
        fd_states = central_difference_states(traj);
        fd_dets = central_difference_dets(traj);
    }

    double gamma = 0.0;
    std::function<T(double)> tau = [](double) { return T{}; };
    if (problem != nullptr) {
        if (problem->feedback.variant != FeedbackVariant::None)
            gamma = problem->feedback.gamma;
        tau = trace_of_sum(problem->A, problem->B);
    }

    DiagnosticsSeries out;
    const std::size_t count = traj.size();
    out.times = traj.times;
    out.abs_det.reserve(count);
    out.continuity_functional.reserve(count);
    out.relative_rate_norm.reserve(count);
    out.det_rate.reserve(count);
    out.lyapunov_value.reserve(count);
    out.lyapunov_signed.reserve(count);
    out.lyapunov_rate.reserve(count);
    out.near_singular.reserve(count);

    for (std::size_t k = 0; k < count; ++k) {
        const Matrix<T>& m = traj.states[k];
        const T d = traj.dets[k];
        const double abs_d = std::abs(d);
        const bool near = abs_d < config.near_singular_threshold;

        Matrix<T> mdot;
        T rate{};
        if (analytic) {
            mdot = rhs(*problem, traj.times[k], m);
            if (near)
                rate = det_rate_directional(m, mdot, fd_step);
            else {
                try {
                    rate = det_rate_jacobi(m, mdot);
                } catch (const SingularityError&) {
                    rate = det_rate_directional(m, mdot, fd_step);
                }
            }
        } else {
            mdot = fd_states[k];
            rate = fd_dets[k];
        }

        out.abs_det.push_back(abs_d);
        out.det_rate.push_back(std::real(rate));
        out.continuity_functional.push_back(continuity_functional(d, rate, config.alpha));
        out.relative_rate_norm.push_back(relative_rate_norm(m, mdot, config.near_singular_threshold));
        fill_lyapunov(out, d);
        out.lyapunov_rate.push_back(
            std::real(tau(traj.times[k]) + T{gamma * static_cast<double>(n)} * d));
        out.near_singular.push_back(near);
    }
    return out;
}

} // namespace

template <Field T>
DiagnosticsSeries annotate_trajectory(const Trajectory<T>& traj, const EvolutionProblem<T>& problem,
                                      const DiagnosticsConfig& config) {
    return annotate_impl(traj, &problem, config);
}

template <Field T>
DiagnosticsSeries annotate_trajectory(const Trajectory<T>& traj, const DiagnosticsConfig& config) {
    return annotate_impl<T>(traj, nullptr, config);
}

#define CONTDYN_INSTANTIATE(T)                                                                    \
    template double continuity_functional(T, T, double);                                          \
    template std::optional<double> relative_rate_norm(const Matrix<T>&, const Matrix<T>&, double); \
    template T det_rate_jacobi(const Matrix<T>&, const Matrix<T>&);                               \
    template T det_rate_directional(const Matrix<T>&, const Matrix<T>&, double);                  \
    template DiagnosticsSeries annotate_trajectory(const Trajectory<T>&,                          \
                                                   const EvolutionProblem<T>&,                    \
                                                   const DiagnosticsConfig&);                     \
    template DiagnosticsSeries annotate_trajectory(const Trajectory<T>&, const DiagnosticsConfig&);

CONTDYN_INSTANTIATE(Real)
CONTDYN_INSTANTIATE(Complex)

#undef CONTDYN_INSTANTIATE

} // namespace contdyn
