#pragma once

#include <functional>
#include <span>
#include <vector>

namespace contdyn {

using ScalarFunction = std::function<double(double)>;

/// Adaptive Simpson quadrature of f over [a, b] with Richardson correction.
///
/// `tol` is an absolute tolerance on the whole interval, split in half at each
/// bisection. Throws QuadratureError when the recursion exceeds `max_depth`
/// without meeting the tolerance or when f returns a non-finite value.
[[nodiscard]] double adaptive_simpson(const ScalarFunction& f, double a, double b,
                                      double tol = 1e-10, int max_depth = 50);

/// Running integrals int_{grid[0]}^{grid[k]} f, one adaptive Simpson pass per grid interval.
[[nodiscard]] std::vector<double> cumulative_integral(const ScalarFunction& f,
                                                      std::span<const double> grid,
                                                      double tol = 1e-12);

} // namespace contdyn
