#pragma once

// Test-only reference computations. Nothing here calls into the LU, Pade or
// RK4 code paths it is used to check.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "contdyn/matrix.hpp"

namespace oracle {

using contdyn::Complex;
using contdyn::ComplexMatrix;
using contdyn::RealMatrix;

/// Uniform [-1, 1) entries from a seeded mt19937_64.
inline RealMatrix random_real(std::size_t n, std::uint64_t seed, double scale = 1.0, double shift = 0.0) {
    std::mt19937_64 rng(seed);
    RealMatrix m(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            m(i, j) = scale * (2.0 * u - 1.0) + (i == j ? shift : 0.0);
        }
    return m;
}

inline ComplexMatrix random_complex(std::size_t n, std::uint64_t seed, double scale = 1.0) {
    const RealMatrix re = random_real(n, seed, scale);
    const RealMatrix im = random_real(n, seed ^ 0x9e3779b97f4a7c15ULL, scale);
    ComplexMatrix m(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            m(i, j) = {re(i, j), im(i, j)};
    return m;
}

/// Random Hermitian matrix (X + X*)/2.
inline ComplexMatrix random_hermitian(std::size_t n, std::uint64_t seed, double scale = 1.0) {
    const ComplexMatrix x = random_complex(n, seed, scale);
    return (x + x.adjoint()) * Complex{0.5};
}

template <typename T>
Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> to_eigen(const contdyn::Matrix<T>& m) {
    Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> e(m.dim(), m.dim());
    for (std::size_t i = 0; i < m.dim(); ++i)
        for (std::size_t j = 0; j < m.dim(); ++j)
            e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
    return e;
}

template <typename T>
contdyn::Matrix<T> from_eigen(const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& e) {
    contdyn::Matrix<T> m(static_cast<std::size_t>(e.rows()));
    for (Eigen::Index i = 0; i < e.rows(); ++i)
        for (Eigen::Index j = 0; j < e.cols(); ++j)
            m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = e(i, j);
    return m;
}

/// Determinant by cofactor expansion along the first row (n <= 8 is fine).
template <typename T>
T cofactor_det(const contdyn::Matrix<T>& m) {
    const std::size_t n = m.dim();
    if (n == 1)
        return m(0, 0);
    if (n == 2)
        return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    T sum{};
    for (std::size_t col = 0; col < n; ++col) {
        contdyn::Matrix<T> minor(n - 1);
        for (std::size_t i = 1; i < n; ++i) {
            std::size_t jj = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == col)
                    continue;
                minor(i - 1, jj++) = m(i, j);
            }
        }
        const T sign = (col % 2 == 0) ? T{1} : T{-1};
        sum += sign * m(0, col) * cofactor_det(minor);
    }
    return sum;
}

template <typename T>
double rel_frobenius(const contdyn::Matrix<T>& a, const contdyn::Matrix<T>& b) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < a.entries().size(); ++k) {
        num += std::norm(Complex(a.entries()[k]) - Complex(b.entries()[k]));
        den += std::norm(Complex(b.entries()[k]));
    }
    return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

template <typename T>
double max_abs_diff(const contdyn::Matrix<T>& a, const contdyn::Matrix<T>& b) {
    double worst = 0.0;
    for (std::size_t k = 0; k < a.entries().size(); ++k)
        worst = std::max(worst, std::abs(a.entries()[k] - b.entries()[k]));
    return worst;
}

/// Least-squares slope of log(err) against log(h).
inline double loglog_slope(const std::vector<double>& h, const std::vector<double>& err) {
    const std::size_t n = h.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::log(h[i]);
        const double y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (static_cast<double>(n) * sxy - sx * sy) / (static_cast<double>(n) * sxx - sx * sx);
}

/// Composite Simpson with a fixed large panel count, for smooth integrands.
template <typename F>
double simpson(F f, double a, double b, int panels = 20000) {
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int i = 1; i < panels; ++i)
        s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

} // namespace oracle
