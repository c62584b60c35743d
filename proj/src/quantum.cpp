#include "contdyn/quantum.hpp"

#include <algorithm>
#include <cmath>

namespace contdyn::quantum {

ComplexGenerator two_level_hamiltonian(const TwoLevelEnergies& params) {
    ComplexGenerator h;
    h.dim = 2;
    h.eval = [params](double t) {
        const Complex d{params.delta, 0.0};
        return ComplexMatrix{{Complex{params.e1(t), 0.0}, d}, {d, Complex{params.e2(t), 0.0}}};
    };
    return h;
}

ComplexGenerator driven_two_level(ScalarFunction epsilon, ScalarFunction delta) {
    ComplexGenerator h;
    h.dim = 2;
    h.eval = [epsilon = std::move(epsilon), delta = std::move(delta)](double t) {
        const double e = epsilon(t);
        const Complex d{delta(t), 0.0};
        return ComplexMatrix{{Complex{e, 0.0}, d}, {d, Complex{-e, 0.0}}};
    };
    return h;
}

ComplexGenerator hamiltonian(const TwoLevelParams& params) {
    if (const auto* e = std::get_if<TwoLevelEnergies>(&params))
        return two_level_hamiltonian(*e);
    const auto& d = std::get<DrivenTwoLevel>(params);
    return driven_two_level(d.epsilon, d.delta);
}

ScalarFunction hamiltonian_det(const TwoLevelParams& params) {
    if (const auto* e = std::get_if<TwoLevelEnergies>(&params)) {
        return [p = *e](double t) { return p.e1(t) * p.e2(t) - p.delta * p.delta; };
    }
    return [p = std::get<DrivenTwoLevel>(params)](double t) {
        const double eps = p.epsilon(t);
        const double del = p.delta(t);
        return -eps * eps - del * del;
    };
}

double unitarity_defect(const ComplexMatrix& u) {
    return frobenius_norm(u.adjoint() * u - ComplexMatrix::identity(u.dim()));
}

void QuantumProblem::validate() const {
    if (!(hbar > 0.0) || !std::isfinite(hbar))
        throw ParameterError("quantum problem: hbar must be positive");
    if (!(tf > t0))
        throw ParameterError("quantum problem: t0 must be below tf");
    if (H.dim == 0 || !H.eval)
        throw ParameterError("quantum problem: Hamiltonian is not set");
    if (!U0.empty()) {
        if (U0.dim() != H.dim)
            throw ParameterError("quantum problem: U0 dimension does not match H");
        if (unitarity_defect(U0) > 1e-10)
            throw ParameterError("quantum problem: U0 is not unitary");
    }
}

EvolutionProblem<Complex> schrodinger_problem(const QuantumProblem& q) {
    q.validate();
    EvolutionProblem<Complex> p;
    const Complex factor{0.0, -1.0 / q.hbar};
    p.A.dim = q.H.dim;
    p.A.eval = [h = q.H, factor](double t) { return h(t) * factor; };
    if (q.H.has_derivative())
        p.A.eval_derivative = [h = q.H, factor](double t) { return h.derivative(t) * factor; };
    p.B = ComplexGenerator::zero(q.H.dim);
    p.feedback = Feedback::none();
    p.M0 = q.U0.empty() ? ComplexMatrix::identity(q.H.dim) : q.U0;
    p.t0 = q.t0;
    p.tf = q.tf;
    return p;
}

std::vector<Complex> exact_det_U(const ComplexGenerator& H, double hbar, double t0,
                                 std::span<const double> grid, double tol) {
    if (!(hbar > 0.0))
        throw ParameterError("exact_det_U: hbar must be positive");
    const ScalarFunction tr_re = [&H](double t) { return trace(H(t)).real(); };
    const ScalarFunction tr_im = [&H](double t) { return trace(H(t)).imag(); };

    std::vector<Complex> out;
    out.reserve(grid.size());
    double re = 0.0;
    double im = 0.0;
    double prev = t0;
    for (double t : grid) {
        re += adaptive_simpson(tr_re, prev, t, tol);
        im += adaptive_simpson(tr_im, prev, t, tol);
        prev = t;
        // exp(-(i/hbar)(re + i im)) = exp(im/hbar) * exp(-i re/hbar)
        out.push_back(std::exp(im / hbar) * std::polar(1.0, -re / hbar));
    }
    return out;
}

UnitarityReport unitarity_check(const Trajectory<Complex>& traj, double tolerance) {
    UnitarityReport r;
    r.tolerance = tolerance;
    r.unitarity_defect.reserve(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double defect = unitarity_defect(traj.states[k]);
        r.unitarity_defect.push_back(defect);
        r.max_unitarity_defect = std::max(r.max_unitarity_defect, defect);
        r.max_det_modulus_defect =
            std::max(r.max_det_modulus_defect, std::abs(std::abs(traj.dets[k]) - 1.0));
    }
    r.passes = r.max_unitarity_defect <= tolerance && r.max_det_modulus_defect <= tolerance;
    return r;
}

std::vector<double> find_crossings(const ScalarFunction& det_h, std::span<const double> grid,
                                   double resolution) {
    std::vector<double> roots;
    if (grid.empty())
        return roots;
    double a = grid[0];
    double fa = det_h(a);
    if (fa == 0.0)
        roots.push_back(a);
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const double b = grid[k];
        const double fb = det_h(b);
        if (fb == 0.0) {
            roots.push_back(b);
        } else if (fa != 0.0 && std::signbit(fa) != std::signbit(fb)) {
            double lo = a;
            double hi = b;
            double flo = fa;
            while (hi - lo > resolution) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi)
                    break;
                const double fm = det_h(mid);
                if (fm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if (std::signbit(fm) == std::signbit(flo)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push_back(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    return roots;
}

} // namespace contdyn::quantum
