#pragma once

// Dense small-dimension tensors and pointwise curvature data in normal
// coordinates. Everything is templated on the scalar so identities can be
// checked exactly (Rational) and pipelines run in double.

#include "heatkl/errors.hpp"
#include "heatkl/scalar.hpp"

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>

namespace heatkl {

/// Generic 4-index array of dimension dim^4, row-major (i,j,k,l).
template <typename Scalar>
class Tensor4 {
public:
    Tensor4() = default;

    explicit Tensor4(int dim) : dim_(dim), data_(Vector<Scalar>::Zero(std::size_t(dim) * dim * dim * dim)) {
        if (dim < 1) throw InvalidInput("Tensor4: dimension must be positive");
    }

    static Tensor4 Zero(int dim) { return Tensor4(dim); }

    int dim() const noexcept { return dim_; }
    Eigen::Index size() const noexcept { return data_.size(); }

    Scalar& operator()(int i, int j, int k, int l) { return data_[offset(i, j, k, l)]; }
    const Scalar& operator()(int i, int j, int k, int l) const { return data_[offset(i, j, k, l)]; }

    const Vector<Scalar>& flat() const noexcept { return data_; }
    Vector<Scalar>& flat() noexcept { return data_; }

    template <typename To>
    Tensor4<To> cast() const {
        Tensor4<To> out(dim_);
        for (Eigen::Index n = 0; n < data_.size(); ++n) out.flat()[n] = scalar_cast<To>(data_[n]);
        return out;
    }

    Tensor4& operator+=(const Tensor4& o) {
        require_same(o);
        for (Eigen::Index n = 0; n < data_.size(); ++n) data_[n] += o.data_[n];
        return *this;
    }
    Tensor4& operator-=(const Tensor4& o) {
        require_same(o);
        for (Eigen::Index n = 0; n < data_.size(); ++n) data_[n] -= o.data_[n];
        return *this;
    }
    Tensor4& operator*=(const Scalar& s) {
        for (Eigen::Index n = 0; n < data_.size(); ++n) data_[n] *= s;
        return *this;
    }

    friend Tensor4 operator+(Tensor4 a, const Tensor4& b) { return a += b; }
    friend Tensor4 operator-(Tensor4 a, const Tensor4& b) { return a -= b; }
    friend Tensor4 operator*(Tensor4 a, const Scalar& s) { return a *= s; }
    friend Tensor4 operator*(const Scalar& s, Tensor4 a) { return a *= s; }

    /// Largest absolute entry (0 for an empty tensor).
    Scalar max_abs() const {
        Scalar m(0);
        for (Eigen::Index n = 0; n < data_.size(); ++n) m = std::max(m, abs_value(data_[n]));
        return m;
    }

private:
    std::size_t offset(int i, int j, int k, int l) const {
        return ((std::size_t(i) * dim_ + j) * dim_ + k) * dim_ + l;
    }
    void require_same(const Tensor4& o) const {
        if (o.dim_ != dim_) throw InvalidInput("Tensor4: dimension mismatch");
    }

    int dim_ = 0;
    Vector<Scalar> data_;
};

/// Pointwise curvature data at z in normal coordinates.
///
/// `riemann` holds R_ijkl, `ric_d2` holds Ric_ij;kl. `ric`, `sc` and `sc_hess`
/// are derived (Ric_uv = R_iuiv, Sc = tr Ric, Sc_;kl = Ric_ii;kl); use
/// make_curvature_jet to keep them consistent. `bianchi` records that the first
/// Bianchi identity and the contracted identity Ric_ij;ij = Sc_;ii / 2 hold.
template <typename Scalar>
struct CurvatureJet {
    int dim = 0;
    Tensor4<Scalar> riemann;
    SymMatrix<Scalar> ric;
    Scalar sc{0};
    Vector<Scalar> sc_grad;
    SymMatrix<Scalar> sc_hess;
    Tensor4<Scalar> ric_d2;
    bool bianchi = false;

    template <typename To>
    CurvatureJet<To> cast() const {
        CurvatureJet<To> out;
        out.dim = dim;
        out.riemann = riemann.template cast<To>();
        out.ric = ric.unaryExpr([](const Scalar& x) { return scalar_cast<To>(x); });
        out.sc = scalar_cast<To>(sc);
        out.sc_grad = sc_grad.unaryExpr([](const Scalar& x) { return scalar_cast<To>(x); });
        out.sc_hess = sc_hess.unaryExpr([](const Scalar& x) { return scalar_cast<To>(x); });
        out.ric_d2 = ric_d2.template cast<To>();
        out.bianchi = bianchi;
        return out;
    }
};

/// Ric_uv = sum_i R_iuiv.
template <typename Scalar>
SymMatrix<Scalar> ricci_from_riemann(const Tensor4<Scalar>& R) {
    const int d = R.dim();
    if (d < 1) throw InvalidInput("ricci_from_riemann: empty tensor");
    SymMatrix<Scalar> ric = SymMatrix<Scalar>::Zero(d, d);
    for (int u = 0; u < d; ++u)
        for (int v = 0; v < d; ++v) {
            Scalar s(0);
            for (int i = 0; i < d; ++i) s += R(i, u, i, v);
            ric(u, v) = s;
        }
    return ric;
}

/// Space-form curvature R_ijkl = K (δ_ik δ_jl − δ_il δ_jk). Positive K gives
/// positive Ricci curvature under ricci_from_riemann.
template <typename Scalar>
Tensor4<Scalar> constant_curvature_riemann(const Scalar& K, int d) {
    if (d < 2) throw InvalidInput("constant_curvature_riemann: d must be >= 2");
    Tensor4<Scalar> R(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (i == j) continue;
            R(i, j, i, j) = K;
            R(i, j, j, i) = -K;
        }
    return R;
}

/// Sc_;kl = sum_i Ric_ii;kl.
template <typename Scalar>
SymMatrix<Scalar> trace_ric_d2(const Tensor4<Scalar>& ric_d2) {
    const int d = ric_d2.dim();
    SymMatrix<Scalar> h = SymMatrix<Scalar>::Zero(d, d);
    for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
            Scalar s(0);
            for (int i = 0; i < d; ++i) s += ric_d2(i, i, k, l);
            h(k, l) = s;
        }
    return h;
}

/// Assembles a jet from its primary data, deriving Ric, Sc and Sc_;kl.
template <typename Scalar>
CurvatureJet<Scalar> make_curvature_jet(Tensor4<Scalar> riemann, Vector<Scalar> sc_grad, Tensor4<Scalar> ric_d2,
                                        bool bianchi) {
    const int d = riemann.dim();
    if (d < 1 || ric_d2.dim() != d || sc_grad.size() != d)
        throw InvalidInput("make_curvature_jet: inconsistent dimensions");
    CurvatureJet<Scalar> jet;
    jet.dim = d;
    jet.ric = ricci_from_riemann(riemann);
    jet.sc = jet.ric.trace();
    jet.sc_hess = trace_ric_d2(ric_d2);
    jet.riemann = std::move(riemann);
    jet.sc_grad = std::move(sc_grad);
    jet.ric_d2 = std::move(ric_d2);
    jet.bianchi = bianchi;
    return jet;
}

template <typename Scalar>
CurvatureJet<Scalar> flat_jet(int d) {
    return make_curvature_jet(Tensor4<Scalar>(d), Vector<Scalar>(Vector<Scalar>::Zero(d)), Tensor4<Scalar>(d), true);
}

/// Jet of a space form of curvature K: all covariant derivatives vanish.
template <typename Scalar>
CurvatureJet<Scalar> constant_curvature_jet(const Scalar& K, int d) {
    return make_curvature_jet(constant_curvature_riemann(K, d), Vector<Scalar>(Vector<Scalar>::Zero(d)),
                              Tensor4<Scalar>(d), true);
}

/// Largest violation of each jet invariant. All zero for an exact jet.
template <typename Scalar>
struct JetDefects {
    Scalar antisym_first{0};   // R_ijkl + R_jikl
    Scalar antisym_second{0};  // R_ijkl + R_ijlk
    Scalar pair_symmetry{0};   // R_ijkl − R_klij
    Scalar bianchi{0};         // R_ijkl + R_iklj + R_iljk
    Scalar ricci{0};           // ric − contraction of riemann
    Scalar scalar{0};          // sc − tr ric
    Scalar ric_symmetry{0};    // ric − ricᵀ
    Scalar hess_trace{0};      // sc_hess − sum_i ric_d2[i][i]
    Scalar hess_symmetry{0};   // sc_hess − sc_hessᵀ
    Scalar ric_d2_symmetry{0}; // ric_d2[i][j] − ric_d2[j][i]
    Scalar contracted_bianchi{0};  // Ric_ij;ij − Sc_;ii / 2

    /// Max over the defects that must vanish for every valid jet.
    Scalar structural() const {
        return std::max({antisym_first, antisym_second, pair_symmetry, ricci, scalar, ric_symmetry, hess_trace,
                         hess_symmetry, ric_d2_symmetry});
    }
};

template <typename Scalar>
JetDefects<Scalar> jet_defects(const CurvatureJet<Scalar>& jet) {
    const int d = jet.dim;
    if (d < 1 || jet.riemann.dim() != d || jet.ric_d2.dim() != d || jet.ric.rows() != d || jet.ric.cols() != d ||
        jet.sc_hess.rows() != d || jet.sc_hess.cols() != d || jet.sc_grad.size() != d)
        throw InvalidInput("jet_defects: inconsistent dimensions");
    JetDefects<Scalar> e;
    auto bump = [](Scalar& slot, const Scalar& v) { slot = std::max(slot, abs_value(v)); };
    const auto& R = jet.riemann;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) {
                    bump(e.antisym_first, R(i, j, k, l) + R(j, i, k, l));
                    bump(e.antisym_second, R(i, j, k, l) + R(i, j, l, k));
                    bump(e.pair_symmetry, R(i, j, k, l) - R(k, l, i, j));
                    bump(e.bianchi, R(i, j, k, l) + R(i, k, l, j) + R(i, l, j, k));
                    bump(e.ric_d2_symmetry, jet.ric_d2(i, j, k, l) - jet.ric_d2(j, i, k, l));
                }
    const SymMatrix<Scalar> ric = ricci_from_riemann(R);
    const SymMatrix<Scalar> hess = trace_ric_d2(jet.ric_d2);
    Scalar ric_d2_ijij(0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) ric_d2_ijij += jet.ric_d2(i, j, i, j);
    for (int u = 0; u < d; ++u)
        for (int v = 0; v < d; ++v) {
            bump(e.ricci, jet.ric(u, v) - ric(u, v));
            bump(e.ric_symmetry, jet.ric(u, v) - jet.ric(v, u));
            bump(e.hess_trace, jet.sc_hess(u, v) - hess(u, v));
            bump(e.hess_symmetry, jet.sc_hess(u, v) - jet.sc_hess(v, u));
        }
    bump(e.scalar, jet.sc - jet.ric.trace());
    bump(e.contracted_bianchi, ric_d2_ijij - jet.sc_hess.trace() / Scalar(2));
    return e;
}

/// Throws InvalidInput when a structural invariant (or, for jets flagged
/// `bianchi`, a Bianchi identity) is violated by more than `tol`.
template <typename Scalar>
void validate_jet(const CurvatureJet<Scalar>& jet, const Scalar& tol) {
    const auto e = jet_defects(jet);
    if (e.structural() > tol) throw InvalidInput("curvature jet violates symmetry/contraction invariants");
    if (jet.bianchi && std::max(e.bianchi, e.contracted_bianchi) > tol)
        throw InvalidInput("curvature jet flagged bianchi but violates a Bianchi identity");
}

/// Projection onto tensors with R_ijkl = −R_jikl = −R_ijlk = R_klij (group
/// average over the 8 symmetry operations).
template <typename Scalar>
Tensor4<Scalar> curvature_symmetrize(const Tensor4<Scalar>& T) {
    const int d = T.dim();
    Tensor4<Scalar> R(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l)
                    R(i, j, k, l) = (T(i, j, k, l) - T(j, i, k, l) - T(i, j, l, k) + T(j, i, l, k) + T(k, l, i, j) -
                                     T(l, k, i, j) - T(k, l, j, i) + T(l, k, j, i)) /
                                    Scalar(8);
    return R;
}

/// Removes the cyclic part: for a tensor with curvature symmetries it is
/// totally antisymmetric, so the result keeps those symmetries and satisfies
/// the first Bianchi identity.
template <typename Scalar>
Tensor4<Scalar> bianchi_project(const Tensor4<Scalar>& R) {
    const int d = R.dim();
    Tensor4<Scalar> out(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l)
                    out(i, j, k, l) =
                        R(i, j, k, l) - (R(i, j, k, l) + R(i, k, l, j) + R(i, l, j, k)) / Scalar(3);
    return out;
}

/// Deterministic pseudo-random jet. Entries are multiples of 1/100 in
/// [−1, 1], so the same seed gives the same jet in every arithmetic.
template <typename Scalar>
CurvatureJet<Scalar> random_curvature_jet(std::uint64_t seed, int d, bool enforce_bianchi) {
    if (d < 2) throw InvalidInput("random_curvature_jet: d must be >= 2");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> draw(-100, 100);
    auto sample = [&] { return Scalar(draw(rng)) / Scalar(100); };

    Tensor4<Scalar> raw(d);
    for (Eigen::Index n = 0; n < raw.size(); ++n) raw.flat()[n] = sample();
    Tensor4<Scalar> R = curvature_symmetrize(raw);
    if (enforce_bianchi) R = bianchi_project(R);

    Vector<Scalar> grad(d);
    for (int i = 0; i < d; ++i) grad[i] = sample();

    // Ric_ij;kl: symmetric in (i,j) and in (k,l) so that Sc_;kl is symmetric.
    Tensor4<Scalar> noise(d);
    for (Eigen::Index n = 0; n < noise.size(); ++n) noise.flat()[n] = sample();
    Tensor4<Scalar> d2(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l)
                    d2(i, j, k, l) =
                        (noise(i, j, k, l) + noise(j, i, k, l) + noise(i, j, l, k) + noise(j, i, l, k)) / Scalar(4);

    if (enforce_bianchi) {
        // Shift by α(δ_ik δ_jl + δ_il δ_jk) so that Ric_ij;ij = Sc_;ii / 2.
        Scalar ijij(0), iikk(0);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                ijij += d2(i, j, i, j);
                iikk += d2(i, i, j, j);
            }
        const Scalar alpha = (iikk / Scalar(2) - ijij) / Scalar(d * d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                d2(i, j, i, j) += alpha;
                d2(i, j, j, i) += alpha;
            }
    }
    return make_curvature_jet(std::move(R), std::move(grad), std::move(d2), enforce_bianchi);
}

/// Block-diagonal jet of a Riemannian product.
template <typename Scalar>
CurvatureJet<Scalar> direct_sum_jet(const CurvatureJet<Scalar>& a, const CurvatureJet<Scalar>& b) {
    const int da = a.dim, db = b.dim, d = da + db;
    Tensor4<Scalar> R(d), d2(d);
    auto copy_block = [](Tensor4<Scalar>& dst, const Tensor4<Scalar>& src, int off) {
        const int n = src.dim();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) dst(i + off, j + off, k + off, l + off) = src(i, j, k, l);
    };
    copy_block(R, a.riemann, 0);
    copy_block(R, b.riemann, da);
    copy_block(d2, a.ric_d2, 0);
    copy_block(d2, b.ric_d2, da);
    Vector<Scalar> grad(d);
    grad << a.sc_grad, b.sc_grad;
    return make_curvature_jet(std::move(R), std::move(grad), std::move(d2), a.bianchi && b.bianchi);
}

}  // namespace heatkl
