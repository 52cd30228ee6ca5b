#pragma once

// Moments of the standard Gaussian on R^d and integration of polynomials in
// Y^1..Y^d against it.
//
//   nu^{i1..ik} = E[Y^i1 ... Y^ik]
//   mu^{i1..ik} = E[Y^i1 ... Y^ik · |Y|^2 / 2]
//
// Moments scale as sigma^{k/2} for covariance sigma·I; only sigma = 1 is
// provided here.

#include "heatkl/errors.hpp"
#include "heatkl/scalar.hpp"
#include "heatkl/tensors.hpp"

#include <cmath>
#include <cstddef>
#include <map>
#include <vector>

namespace heatkl {

using MultiIndex = std::vector<int>;

enum class Moment { nu, mu };
enum class Weight { plain, half_norm_sq };

/// E[y^p] for y ~ N(0,1): 0 for odd p, (p−1)!! for even p.
inline Rational moment_1d(unsigned p) {
    if (p % 2 == 1) return Rational(0);
    boost::multiprecision::cpp_int m = 1;
    for (unsigned k = p; k > 1; k -= 2) m *= (k - 1);
    return Rational(m);
}

namespace detail {

inline std::vector<unsigned> multiplicities(const MultiIndex& idx, int d) {
    if (d < 1) throw InvalidInput("moment: dimension must be positive");
    std::vector<unsigned> m(std::size_t(d), 0u);
    for (int i : idx) {
        if (i < 0 || i >= d) throw InvalidInput("moment: index out of range");
        ++m[std::size_t(i)];
    }
    return m;
}

inline Rational plain_moment(const std::vector<unsigned>& exps) {
    Rational r(1);
    for (unsigned e : exps) {
        if (e % 2 == 1) return Rational(0);
        r *= moment_1d(e);
    }
    return r;
}

// E[Y^α |Y|^2 / 2] = 1/2 sum_j E[Y^(α + 2 e_j)].
inline Rational half_norm_moment(const std::vector<unsigned>& exps) {
    for (unsigned e : exps)
        if (e % 2 == 1) return Rational(0);
    std::vector<Rational> single(exps.size());
    Rational all(1);
    for (std::size_t c = 0; c < exps.size(); ++c) {
        single[c] = moment_1d(exps[c]);
        all *= single[c];
    }
    Rational sum(0);
    for (std::size_t j = 0; j < exps.size(); ++j) sum += all / single[j] * moment_1d(exps[j] + 2);
    return sum / 2;
}

// Pairs items[0] with each equal partner and recurses on the remainder.
inline std::uint64_t count_pairings(const std::vector<int>& items) {
    if (items.empty()) return 1;
    const int first = items.front();
    std::uint64_t total = 0;
    for (std::size_t p = 1; p < items.size(); ++p) {
        if (items[p] != first) continue;
        std::vector<int> rest;
        rest.reserve(items.size() - 2);
        for (std::size_t q = 1; q < items.size(); ++q)
            if (q != p) rest.push_back(items[q]);
        total += count_pairings(rest);
    }
    return total;
}

}  // namespace detail

/// nu^{idx}: product over coordinates of the 1-D moment of its multiplicity.
inline Rational nu(const MultiIndex& idx, int d) { return detail::plain_moment(detail::multiplicities(idx, d)); }

/// mu^{idx} = 1/2 sum_j nu^{idx j j}.
inline Rational mu(const MultiIndex& idx, int d) { return detail::half_norm_moment(detail::multiplicities(idx, d)); }

inline Rational moment(const MultiIndex& idx, int d, Moment kind) {
    return kind == Moment::nu ? nu(idx, d) : mu(idx, d);
}

/// Brute-force Isserlis sum: number of perfect pairings of idx in which every
/// pair carries equal indices. Independent of nu(); used only as an oracle.
inline Rational isserlis_oracle(const MultiIndex& idx, int d) {
    for (int i : idx)
        if (i < 0 || i >= d) throw InvalidInput("isserlis_oracle: index out of range");
    if (idx.size() % 2 == 1) return Rational(0);
    return Rational(detail::count_pairings(idx));
}

/// Polynomial in Y^1..Y^d. Exponent vectors have length d; zero
/// coefficients are never stored.
template <typename Scalar>
class PolynomialY {
public:
    using Exponents = std::vector<unsigned>;
    using Terms = std::map<Exponents, Scalar>;

    explicit PolynomialY(int dim) : dim_(dim) {
        if (dim < 1) throw InvalidInput("PolynomialY: dimension must be positive");
    }

    static PolynomialY constant(int dim, const Scalar& c) {
        PolynomialY p(dim);
        p.add_term(Exponents(std::size_t(dim), 0u), c);
        return p;
    }

    /// Y^i for a single coordinate.
    static PolynomialY coordinate(int dim, int i) {
        PolynomialY p(dim);
        Exponents e(std::size_t(dim), 0u);
        e.at(std::size_t(i)) = 1;
        p.add_term(e, Scalar(1));
        return p;
    }

    /// M_ij Y^i Y^j.
    static PolynomialY quadratic(const Matrix<Scalar>& M) {
        const int d = int(M.rows());
        PolynomialY p(d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                Exponents e(std::size_t(d), 0u);
                ++e[std::size_t(i)];
                ++e[std::size_t(j)];
                p.add_term(e, M(i, j));
            }
        return p;
    }

    /// T_ijkl Y^i Y^j Y^k Y^l.
    static PolynomialY quartic(const Tensor4<Scalar>& T) {
        const int d = T.dim();
        PolynomialY p(d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k)
                    for (int l = 0; l < d; ++l) {
                        Exponents e(std::size_t(d), 0u);
                        ++e[std::size_t(i)];
                        ++e[std::size_t(j)];
                        ++e[std::size_t(k)];
                        ++e[std::size_t(l)];
                        p.add_term(e, T(i, j, k, l));
                    }
        return p;
    }

    int dim() const noexcept { return dim_; }
    const Terms& terms() const noexcept { return terms_; }
    bool is_zero() const noexcept { return terms_.empty(); }

    void add_term(const Exponents& e, const Scalar& c) {
        if (int(e.size()) != dim_) throw InvalidInput("PolynomialY: exponent vector has wrong length");
        if (c == Scalar(0)) return;
        auto [it, inserted] = terms_.try_emplace(e, c);
        if (!inserted) {
            it->second += c;
            if (it->second == Scalar(0)) terms_.erase(it);
        }
    }

    Scalar coefficient(const Exponents& e) const {
        auto it = terms_.find(e);
        return it == terms_.end() ? Scalar(0) : it->second;
    }

    Scalar evaluate(const Vector<Scalar>& y) const {
        Scalar sum(0);
        for (const auto& [e, c] : terms_) {
            Scalar m = c;
            for (int i = 0; i < dim_; ++i)
                for (unsigned k = 0; k < e[std::size_t(i)]; ++k) m *= y[i];
            sum += m;
        }
        return sum;
    }

    PolynomialY& operator+=(const PolynomialY& o) {
        require_same(o);
        for (const auto& [e, c] : o.terms_) add_term(e, c);
        return *this;
    }
    PolynomialY& operator-=(const PolynomialY& o) {
        require_same(o);
        for (const auto& [e, c] : o.terms_) add_term(e, -c);
        return *this;
    }
    PolynomialY& operator*=(const Scalar& s) {
        if (s == Scalar(0)) {
            terms_.clear();
            return *this;
        }
        for (auto& [e, c] : terms_) c *= s;
        return *this;
    }

    friend PolynomialY operator+(PolynomialY a, const PolynomialY& b) { return a += b; }
    friend PolynomialY operator-(PolynomialY a, const PolynomialY& b) { return a -= b; }
    friend PolynomialY operator*(PolynomialY a, const Scalar& s) { return a *= s; }
    friend PolynomialY operator*(const Scalar& s, PolynomialY a) { return a *= s; }

    friend PolynomialY operator*(const PolynomialY& a, const PolynomialY& b) {
        a.require_same(b);
        PolynomialY out(a.dim_);
        for (const auto& [ea, ca] : a.terms_)
            for (const auto& [eb, cb] : b.terms_) {
                Exponents e(ea);
                for (std::size_t i = 0; i < e.size(); ++i) e[i] += eb[i];
                out.add_term(e, ca * cb);
            }
        return out;
    }

    friend bool operator==(const PolynomialY& a, const PolynomialY& b) {
        return a.dim_ == b.dim_ && a.terms_ == b.terms_;
    }

private:
    void require_same(const PolynomialY& o) const {
        if (o.dim_ != dim_) throw InvalidInput("PolynomialY: dimension mismatch");
    }

    int dim_;
    Terms terms_;
};

/// E[p(Y)] (plain) or E[p(Y) |Y|^2/2] (half_norm_sq) for Y ~ N(0, I_d).
template <typename Scalar>
Scalar integrate_polynomial(const PolynomialY<Scalar>& p, Weight weight) {
    Scalar sum(0);
    for (const auto& [e, c] : p.terms()) {
        const Rational m = weight == Weight::plain ? detail::plain_moment(e) : detail::half_norm_moment(e);
        if (m != 0) sum += c * scalar_cast<Scalar>(m);
    }
    return sum;
}

/// Moment arrays nu^{ij} / mu^{ij} as a d×d matrix.
template <typename Scalar>
Matrix<Scalar> moment_matrix(int d, Moment kind) {
    Matrix<Scalar> m = Matrix<Scalar>::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = scalar_cast<Scalar>(moment({i, j}, d, kind));
    return m;
}

/// Moment arrays nu^{ijkl} / mu^{ijkl}.
template <typename Scalar>
Tensor4<Scalar> moment_tensor(int d, Moment kind) {
    Tensor4<Scalar> m(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) m(i, j, k, l) = scalar_cast<Scalar>(moment({i, j, k, l}, d, kind));
    return m;
}

/// Full Einstein sum T_ij · (nu|mu)^{ij}.
template <typename Scalar>
Scalar contract2(const Matrix<Scalar>& T, Moment kind) {
    const int d = int(T.rows());
    if (d < 1 || T.cols() != d) throw InvalidInput("contract2: expected a square matrix");
    return T.cwiseProduct(moment_matrix<Scalar>(d, kind)).sum();
}

/// Full Einstein sum R_ijkl · (nu|mu)^{ijkl}.
template <typename Scalar>
Scalar contract4(const Tensor4<Scalar>& R, Moment kind) {
    const Tensor4<Scalar> m = moment_tensor<Scalar>(R.dim(), kind);
    Scalar s(0);
    for (Eigen::Index n = 0; n < R.size(); ++n) s += R.flat()[n] * m.flat()[n];
    return s;
}

/// |E[p] − E[p · 1{|Y| ≤ ε/√t}]|. Each monomial Y^α splits into an angular
/// factor times a radial integral of r^{|α|+d−1} e^{−r²/2}, so the
/// complement of the ball contributes E[Y^α] times the radial tail fraction.
/// The tail is integrated by composite Gauss–Legendre beyond the radius.
double truncation_defect(const PolynomialY<double>& p, double epsilon, double t);

/// Fraction of ∫_0^∞ r^n e^{−r²/2} dr lying beyond radius rho.
double radial_tail_fraction(unsigned n, double rho);

}  // namespace heatkl
