#include "contdyn/linalg.hpp"

#include <array>
#include <cmath>
#include <string>

namespace contdyn {

namespace {

template <Field T>
void require_finite(const Matrix<T>& m, const char* op) {
    if (!m.all_finite())
        throw NumericError(std::string(op) + ": non-finite matrix entry");
}

} // namespace

template <Field T>
LuFactorization<T>::LuFactorization(const Matrix<T>& m) : lu_(m), perm_(m.dim()) {
    require_finite(m, "lu");
    const std::size_t n = m.dim();
    for (std::size_t i = 0; i < n; ++i)
        perm_[i] = i;

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(lu_(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(lu_(i, k));
            if (v > best) {
                best = v;
                p = i;
            }
        }
        if (best == 0.0) {
            singular_ = true;
            continue;
        }
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j)
                std::swap(lu_(k, j), lu_(p, j));
            std::swap(perm_[k], perm_[p]);
            sign_ = -sign_;
        }
        const T pivot = lu_(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const T factor = lu_(i, k) / pivot;
            lu_(i, k) = factor;
            if (factor == T{})
                continue;
            for (std::size_t j = k + 1; j < n; ++j)
                lu_(i, j) -= factor * lu_(k, j);
        }
    }
}

template <Field T>
T LuFactorization<T>::determinant() const {
    if (singular_)
        return T{};
    T d = static_cast<T>(static_cast<double>(sign_));
    for (std::size_t i = 0; i < lu_.dim(); ++i)
        d *= lu_(i, i);
    if (!is_finite(d))
        throw NumericError("det: determinant overflowed");
    return d;
}

template <Field T>
Matrix<T> LuFactorization<T>::solve(const Matrix<T>& rhs) const {
    if (singular_)
        throw SingularityError("lu solve: matrix is exactly singular", 0.0);
    const std::size_t n = lu_.dim();
    if (rhs.dim() != n)
        throw ParameterError("lu solve: dimension mismatch");
    Matrix<T> x(n);
    for (std::size_t col = 0; col < n; ++col) {
        // forward substitution on the permuted column, then back substitution
        std::vector<T> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            T s = rhs(perm_[i], col);
            for (std::size_t j = 0; j < i; ++j)
                s -= lu_(i, j) * y[j];
            y[i] = s;
        }
        for (std::size_t ii = n; ii-- > 0;) {
            T s = y[ii];
            for (std::size_t j = ii + 1; j < n; ++j)
                s -= lu_(ii, j) * x(j, col);
            x(ii, col) = s / lu_(ii, ii);
        }
    }
    if (!x.all_finite())
        throw NumericError("lu solve: non-finite result");
    return x;
}

double frobenius_norm(const Matrix<Real>& m) {
    double s = 0.0;
    for (Real x : m.entries())
        s += x * x;
    return std::sqrt(s);
}

double frobenius_norm(const Matrix<Complex>& m) {
    double s = 0.0;
    for (Complex x : m.entries())
        s += std::norm(x);
    return std::sqrt(s);
}

template <Field T>
T det(const Matrix<T>& m) {
    return LuFactorization<T>(m).determinant();
}

template <Field T>
double singular_threshold(const Matrix<T>& m, double rel_tol) {
    const std::size_t n = m.dim();
    if (n == 0)
        return 0.0;
    const double scale = frobenius_norm(m) / std::sqrt(static_cast<double>(n));
    return rel_tol * std::pow(scale, static_cast<double>(n));
}

template <Field T>
Matrix<T> inverse(const Matrix<T>& m, double rel_tol) {
    LuFactorization<T> lu(m);
    const double abs_det = std::abs(lu.determinant());
    if (lu.singular() || abs_det <= singular_threshold(m, rel_tol))
        throw SingularityError("inverse: matrix is numerically singular (|det| = " +
                                   std::to_string(abs_det) + ")",
                               abs_det);
    return lu.inverse();
}

template <Field T>
Matrix<T> regularized_inverse(const Matrix<T>& m, double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps))
        throw ParameterError("regularized_inverse: epsilon must be positive and finite");
    require_finite(m, "regularized_inverse");
    const Matrix<T> mh = m.adjoint();
    Matrix<T> gram = mh * m;
    for (std::size_t i = 0; i < m.dim(); ++i)
        gram(i, i) += T{eps};
    return LuFactorization<T>(gram).solve(mh);
}

template <Field T>
double one_norm(const Matrix<T>& m) {
    double best = 0.0;
    for (std::size_t j = 0; j < m.dim(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m.dim(); ++i)
            s += std::abs(m(i, j));
        best = std::max(best, s);
    }
    return best;
}

namespace {

// Pade coefficients b_0..b_m and the 1-norm bounds theta_m below which the
// degree-m approximant is accurate to unit roundoff in double precision.
constexpr std::array<double, 4> kPade3 = {120.0, 60.0, 12.0, 1.0};
constexpr std::array<double, 6> kPade5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr std::array<double, 8> kPade7 = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                          25200.0,    1512.0,    56.0,      1.0};
constexpr std::array<double, 10> kPade9 = {17643225600.0, 8821612800.0, 2075673600.0,
                                           302702400.0,   30270240.0,   2162160.0,
                                           110880.0,      3960.0,       90.0,
                                           1.0};
constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};

constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

template <Field T, std::size_t N>
Matrix<T> pade_low_order(const Matrix<T>& a, const std::array<double, N>& b) {
    const std::size_t n = a.dim();
    const Matrix<T> a2 = a * a;
    Matrix<T> u_inner = Matrix<T>::identity(n) * T{b[1]};
    Matrix<T> v = Matrix<T>::identity(n) * T{b[0]};
    Matrix<T> power = Matrix<T>::identity(n);
    for (std::size_t k = 2; k < N; k += 2) {
        power = power * a2;
        v += power * T{b[k]};
        u_inner += power * T{b[k + 1]};
    }
    const Matrix<T> u = a * u_inner;
    return LuFactorization<T>(v - u).solve(v + u);
}

template <Field T>
Matrix<T> pade13(const Matrix<T>& a) {
    const auto& b = kPade13;
    const std::size_t n = a.dim();
    const Matrix<T> id = Matrix<T>::identity(n);
    const Matrix<T> a2 = a * a;
    const Matrix<T> a4 = a2 * a2;
    const Matrix<T> a6 = a4 * a2;
    const Matrix<T> u_hi = a6 * (a6 * T{b[13]} + a4 * T{b[11]} + a2 * T{b[9]});
    const Matrix<T> u = a * (u_hi + a6 * T{b[7]} + a4 * T{b[5]} + a2 * T{b[3]} + id * T{b[1]});
    const Matrix<T> v_hi = a6 * (a6 * T{b[12]} + a4 * T{b[10]} + a2 * T{b[8]});
    const Matrix<T> v = v_hi + a6 * T{b[6]} + a4 * T{b[4]} + a2 * T{b[2]} + id * T{b[0]};
    return LuFactorization<T>(v - u).solve(v + u);
}

} // namespace

template <Field T>
Matrix<T> matrix_exp(const Matrix<T>& m) {
    require_finite(m, "matrix_exp");
    const double norm1 = one_norm(m);
    Matrix<T> r;
    try {
        if (norm1 <= kTheta3)
            r = pade_low_order(m, kPade3);
        else if (norm1 <= kTheta5)
            r = pade_low_order(m, kPade5);
        else if (norm1 <= kTheta7)
            r = pade_low_order(m, kPade7);
        else if (norm1 <= kTheta9)
            r = pade_low_order(m, kPade9);
        else {
            const int squarings =
                std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / kTheta13))));
            r = pade13(m * T{std::ldexp(1.0, -squarings)});
            for (int k = 0; k < squarings; ++k) {
                r = r * r;
                if (!r.all_finite())
                    break;
            }
        }
    } catch (const SingularityError&) {
        throw NumericError("matrix_exp: Pade denominator is singular");
    }
    if (!r.all_finite())
        throw NumericError("matrix_exp: result overflowed");
    return r;
}

template class LuFactorization<Real>;
template class LuFactorization<Complex>;
template Real det(const Matrix<Real>&);
template Complex det(const Matrix<Complex>&);
template double singular_threshold(const Matrix<Real>&, double);
template double singular_threshold(const Matrix<Complex>&, double);
template Matrix<Real> inverse(const Matrix<Real>&, double);
template Matrix<Complex> inverse(const Matrix<Complex>&, double);
template Matrix<Real> regularized_inverse(const Matrix<Real>&, double);
template Matrix<Complex> regularized_inverse(const Matrix<Complex>&, double);
template Matrix<Real> matrix_exp(const Matrix<Real>&);
template Matrix<Complex> matrix_exp(const Matrix<Complex>&);
template double one_norm(const Matrix<Real>&);
template double one_norm(const Matrix<Complex>&);

} // namespace contdyn
