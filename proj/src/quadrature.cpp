#include "contdyn/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include "contdyn/errors.hpp"

namespace contdyn {

namespace {

double eval_finite(const ScalarFunction& f, double x) {
    const double y = f(x);
    if (!std::isfinite(y))
        throw QuadratureError("adaptive_simpson: integrand is not finite");
    return y;
}

double simpson_step(const ScalarFunction& f, double a, double fa, double b, double fb,
                    double m, double fm, double whole, double tol, int depth, int forced) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = eval_finite(f, lm);
    const double frm = eval_finite(f, rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    const double floor = 64.0 * 2.220446049250313e-16 * (std::abs(left) + std::abs(right));
    if (forced <= 0 && std::abs(delta) <= 15.0 * std::max(tol, floor))
        return left + right + delta / 15.0;
    if (depth <= 0)
        throw QuadratureError("adaptive_simpson: maximum recursion depth reached");
    return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1, forced - 1) +
           simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1, forced - 1);
}

} // namespace

double adaptive_simpson(const ScalarFunction& f, double a, double b, double tol,
                        int max_depth) {
    if (a == b)
        return 0.0;
    const double fa = eval_finite(f, a);
    const double fb = eval_finite(f, b);
    const double m = 0.5 * (a + b);
    const double fm = eval_finite(f, m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // A few forced bisections guard against symmetric integrands fooling the
    // three-point estimate on the first level.
    return simpson_step(f, a, fa, b, fb, m, fm, whole, tol, max_depth, 3);
}

std::vector<double> cumulative_integral(const ScalarFunction& f, std::span<const double> grid,
                                        double tol) {
    std::vector<double> out;
    out.reserve(grid.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (k > 0)
            sum += adaptive_simpson(f, grid[k - 1], grid[k], tol);
        out.push_back(sum);
    }
    return out;
}

} // namespace contdyn
