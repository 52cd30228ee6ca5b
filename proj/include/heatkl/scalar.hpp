#pragma once

#include <Eigen/Core>
#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/eigen.hpp>

#include <cmath>
#include <cstdint>

namespace heatkl {

/// Exact rational scalar. Expression templates are off so values interoperate
/// cleanly with Eigen containers.
using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend,
                                               boost::multiprecision::et_off>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Symmetric d×d matrix. Symmetry is an invariant checked by the owners
/// (CurvatureJet, ParametrixJet), not by the storage type.
template <typename Scalar>
using SymMatrix = Matrix<Scalar>;

/// n/m in the requested arithmetic.
template <typename Scalar>
Scalar frac(std::int64_t n, std::int64_t m) {
    return Scalar(n) / Scalar(m);
}

/// s·M entrywise. Avoids the mixed Eigen/multiprecision operator overloads.
template <typename Derived>
typename Derived::PlainObject scaled(const Eigen::MatrixBase<Derived>& M, const typename Derived::Scalar& s) {
    return M.unaryExpr([&s](const typename Derived::Scalar& x) { return x * s; });
}

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.template convert_to<double>(); }

template <typename To, typename From>
To scalar_cast(const From& x) {
    if constexpr (std::is_same_v<To, double>) {
        return to_double(x);
    } else {
        return To(x);
    }
}

template <typename Scalar>
Scalar abs_value(const Scalar& x) {
    using std::abs;
    using boost::multiprecision::abs;
    return abs(x);
}

}  // namespace heatkl
