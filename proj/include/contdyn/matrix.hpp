#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <type_traits>
#include <vector>

#include "contdyn/errors.hpp"

namespace contdyn {

using Real = double;
using Complex = std::complex<double>;

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};

/// Scalar fields the library is instantiated for.
template <typename T>
concept Field = std::is_same_v<T, Real> || std::is_same_v<T, Complex>;

template <Field T>
[[nodiscard]] inline T conj(T x) {
    if constexpr (is_complex<T>::value)
        return std::conj(x);
    else
        return x;
}

template <Field T>
[[nodiscard]] inline bool is_finite(T x) {
    if constexpr (is_complex<T>::value)
        return std::isfinite(x.real()) && std::isfinite(x.imag());
    else
        return std::isfinite(x);
}

/// |x|^2 without the square root.
template <Field T>
[[nodiscard]] inline double abs2(T x) {
    if constexpr (is_complex<T>::value)
        return std::norm(x);
    else
        return x * x;
}

/**
 * Dense square matrix with row-major storage.
 *
 * Construction from explicit entries rejects non-square sizes and non-finite
 * values. Arithmetic operators do not re-check finiteness; the numerical
 * kernels (det, inverse, exp, integrators) do.
 */
template <Field T>
class Matrix {
public:
    using value_type = T;

    Matrix() = default;

    /// n x n zero matrix.
    explicit Matrix(std::size_t n) : n_(n), data_(n * n, T{}) {}

    Matrix(std::size_t n, std::vector<T> entries) : n_(n), data_(std::move(entries)) {
        if (data_.size() != n_ * n_)
            throw ParameterError("matrix entry count does not equal dim^2");
        if (!all_finite())
            throw NumericError("matrix entries must be finite");
    }

    /// Row-major nested initializer: Matrix<double>{{1, 2}, {3, 4}}.
    Matrix(std::initializer_list<std::initializer_list<T>> rows) : n_(rows.size()) {
        data_.reserve(n_ * n_);
        for (const auto& row : rows) {
            if (row.size() != n_)
                throw ParameterError("matrix rows must all have length dim");
            data_.insert(data_.end(), row.begin(), row.end());
        }
        if (!all_finite())
            throw NumericError("matrix entries must be finite");
    }

    [[nodiscard]] static Matrix zero(std::size_t n) { return Matrix(n); }

    [[nodiscard]] static Matrix identity(std::size_t n) {
        Matrix m(n);
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = T{1};
        return m;
    }

    [[nodiscard]] static Matrix diagonal(std::span<const T> diag) {
        Matrix m(diag.size());
        for (std::size_t i = 0; i < diag.size(); ++i)
            m(i, i) = diag[i];
        return m;
    }

    [[nodiscard]] std::size_t dim() const noexcept { return n_; }
    [[nodiscard]] bool empty() const noexcept { return n_ == 0; }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

    [[nodiscard]] std::span<T> entries() noexcept { return data_; }
    [[nodiscard]] std::span<const T> entries() const noexcept { return data_; }

    [[nodiscard]] bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](T x) { return is_finite(x); });
    }

    /// Conjugate transpose (plain transpose for real matrices).
    [[nodiscard]] Matrix adjoint() const {
        Matrix r(n_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                r(j, i) = contdyn::conj((*this)(i, j));
        return r;
    }

    Matrix& operator+=(const Matrix& o) {
        check_same_dim(o);
        for (std::size_t k = 0; k < data_.size(); ++k)
            data_[k] += o.data_[k];
        return *this;
    }

    Matrix& operator-=(const Matrix& o) {
        check_same_dim(o);
        for (std::size_t k = 0; k < data_.size(); ++k)
            data_[k] -= o.data_[k];
        return *this;
    }

    Matrix& operator*=(T s) {
        for (auto& x : data_)
            x *= s;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator-(Matrix a) { return a *= T{-1}; }
    friend Matrix operator*(Matrix a, T s) { return a *= s; }
    friend Matrix operator*(T s, Matrix a) { return a *= s; }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        a.check_same_dim(b);
        const std::size_t n = a.n_;
        Matrix r(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) {
                const T aik = a(i, k);
                if (aik == T{})
                    continue;
                for (std::size_t j = 0; j < n; ++j)
                    r(i, j) += aik * b(k, j);
            }
        return r;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    void check_same_dim(const Matrix& o) const {
        if (o.n_ != n_)
            throw ParameterError("matrix dimensions do not agree");
    }

    std::size_t n_ = 0;
    std::vector<T> data_;
};

using RealMatrix = Matrix<Real>;
using ComplexMatrix = Matrix<Complex>;

/// Embed a real matrix in the complex field.
[[nodiscard]] inline ComplexMatrix to_complex(const RealMatrix& m) {
    ComplexMatrix r(m.dim());
    for (std::size_t i = 0; i < m.dim(); ++i)
        for (std::size_t j = 0; j < m.dim(); ++j)
            r(i, j) = m(i, j);
    return r;
}

} // namespace contdyn
