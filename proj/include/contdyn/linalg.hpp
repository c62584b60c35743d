#pragma once

#include <cstddef>
#include <vector>

#include "contdyn/matrix.hpp"

namespace contdyn {

/// Relative singular tolerance used by inverse() and the integrators.
inline constexpr double kDefaultSingularTol = 1e-12;

/**
 * LU factorization with partial pivoting, P*M = L*U.
 *
 * L (unit diagonal) and U are packed into one matrix. A zero pivot column
 * marks the factorization singular; determinant() then returns exactly zero
 * and solve() refuses to run.
 */
template <Field T>
class LuFactorization {
public:
    explicit LuFactorization(const Matrix<T>& m);

    [[nodiscard]] T determinant() const;
    [[nodiscard]] bool singular() const noexcept { return singular_; }

    /// Solves M X = rhs column by column.
    [[nodiscard]] Matrix<T> solve(const Matrix<T>& rhs) const;

    [[nodiscard]] Matrix<T> inverse() const { return solve(Matrix<T>::identity(lu_.dim())); }

private:
    Matrix<T> lu_;
    std::vector<std::size_t> perm_;
    int sign_ = 1;
    bool singular_ = false;
};

[[nodiscard]] double frobenius_norm(const Matrix<Real>& m);
[[nodiscard]] double frobenius_norm(const Matrix<Complex>& m);

template <Field T>
[[nodiscard]] T trace(const Matrix<T>& m) {
    T s{};
    for (std::size_t i = 0; i < m.dim(); ++i)
        s += m(i, i);
    return s;
}

/// Determinant via LU with partial pivoting. Throws NumericError on non-finite input or result.
template <Field T>
[[nodiscard]] T det(const Matrix<T>& m);

/// The |det| below which `m` counts as singular: rel_tol * (||m||_F / sqrt(n))^n.
///
/// The scale factor is homogeneous of degree n, like det itself, so the test
/// is invariant under m -> c*m.
template <Field T>
[[nodiscard]] double singular_threshold(const Matrix<T>& m, double rel_tol = kDefaultSingularTol);

/// Inverse via LU. Throws SingularityError (carrying |det|) when |det m| <= singular_threshold(m, rel_tol).
template <Field T>
[[nodiscard]] Matrix<T> inverse(const Matrix<T>& m, double rel_tol = kDefaultSingularTol);

/// Tikhonov-regularized inverse (M* M + eps I)^{-1} M*, with * the conjugate transpose.
/// Defined for every M, singular or not. Throws ParameterError when eps <= 0.
template <Field T>
[[nodiscard]] Matrix<T> regularized_inverse(const Matrix<T>& m, double eps);

/// Matrix exponential by scaling and squaring around a diagonal Pade approximant
/// (degree chosen from the 1-norm, up to 13). Accurate to ~1e-13 relative for ||m|| <= 10.
template <Field T>
[[nodiscard]] Matrix<T> matrix_exp(const Matrix<T>& m);

/// Maximum absolute column sum.
template <Field T>
[[nodiscard]] double one_norm(const Matrix<T>& m);

} // namespace contdyn
