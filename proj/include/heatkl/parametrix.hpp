#pragma once

// Taylor coefficients at y = 0, in normal coordinates, of
//
//   u_0(0,y)     = 1 + A2(y) + A4(y) + ...
//   u_1(0,y)     = B0 + B1(y) + B2(y) + ...
//   u_2(0,y)     = C0 + ...
//   sqrt(det g)  = 1 + E2(y) + E4(y) + ...
//
// for the heat equation ∂_t q = ½Δq. The B and C levels carry the 1/2 and 1/4
// factors relative to the ∂_t = Δ normalization; u_0 and sqrt(det g) are
// unaffected. Odd-degree terms A3, E3 are structurally zero here: they only
// ever enter Gaussian integrals of odd integrands.

#include "heatkl/errors.hpp"
#include "heatkl/scalar.hpp"
#include "heatkl/tensors.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace heatkl {

template <typename Scalar>
struct ParametrixJet {
    int dim = 0;
    SymMatrix<Scalar> E2;
    Tensor4<Scalar> E4;  // as written, not symmetrized
    SymMatrix<Scalar> A2;
    Tensor4<Scalar> A4;  // as written, not symmetrized
    Scalar B0{0};
    Vector<Scalar> B1;
    SymMatrix<Scalar> B2;
    Scalar C0{0};
};

namespace detail {

// Σ_{u,v} R_iujv R_kulv
template <typename Scalar>
Tensor4<Scalar> riemann_square_ijkl(const Tensor4<Scalar>& R) {
    const int d = R.dim();
    Tensor4<Scalar> out(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) {
                    Scalar s(0);
                    for (int u = 0; u < d; ++u)
                        for (int v = 0; v < d; ++v) s += R(i, u, j, v) * R(k, u, l, v);
                    out(i, j, k, l) = s;
                }
    return out;
}

}  // namespace detail

template <typename Scalar>
ParametrixJet<Scalar> parametrix_from_jet(const CurvatureJet<Scalar>& jet) {
    validate_jet(jet, std::is_same_v<Scalar, double> ? Scalar(1e-10) : Scalar(0));
    const int d = jet.dim;
    const auto& R = jet.riemann;
    const auto& Ric = jet.ric;
    const auto& D2 = jet.ric_d2;
    const Tensor4<Scalar> RR = detail::riemann_square_ijkl(R);

    ParametrixJet<Scalar> p;
    p.dim = d;
    p.E2 = scaled(Ric, frac<Scalar>(-1, 6));
    p.A2 = scaled(Ric, frac<Scalar>(1, 12));
    p.E4 = Tensor4<Scalar>(d);
    p.A4 = Tensor4<Scalar>(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) {
                    const Scalar& d2 = D2(i, j, k, l);
                    const Scalar rr = Ric(i, j) * Ric(k, l);
                    const Scalar& q = RR(i, j, k, l);
                    p.E4(i, j, k, l) =
                        frac<Scalar>(1, 144) * (frac<Scalar>(-18, 5) * d2 + Scalar(2) * rr - frac<Scalar>(4, 5) * q);
                    p.A4(i, j, k, l) = frac<Scalar>(1, 24) *
                                       (frac<Scalar>(3, 10) * d2 + frac<Scalar>(1, 12) * rr + frac<Scalar>(1, 15) * q);
                }

    p.B0 = jet.sc * frac<Scalar>(1, 12);
    p.B1 = scaled(jet.sc_grad, frac<Scalar>(1, 24));

    p.B2 = SymMatrix<Scalar>::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            Scalar lap_ric(0), ric_sq(0), ric_r(0), r_sq(0);
            for (int u = 0; u < d; ++u) {
                lap_ric += D2(i, j, u, u);
                ric_sq += Ric(i, u) * Ric(j, u);
                for (int v = 0; v < d; ++v) {
                    ric_r += Ric(u, v) * R(i, u, j, v);
                    for (int w = 0; w < d; ++w) r_sq += R(i, u, v, w) * R(j, u, v, w);
                }
            }
            p.B2(i, j) = frac<Scalar>(1, 720) * (Scalar(9) * jet.sc_hess(i, j) + Scalar(3) * lap_ric +
                                                 Scalar(5) * jet.sc * Ric(i, j) - Scalar(4) * ric_sq +
                                                 Scalar(2) * ric_r + Scalar(2) * r_sq);
        }

    Scalar lap_sc(0), lap_trace(0), ric_norm(0), ric_r(0), r_norm(0);
    for (int i = 0; i < d; ++i) {
        lap_sc += jet.sc_hess(i, i);
        for (int u = 0; u < d; ++u) {
            lap_trace += D2(i, i, u, u);
            ric_norm += Ric(i, u) * Ric(i, u);
            for (int v = 0; v < d; ++v) {
                ric_r += Ric(u, v) * R(i, u, i, v);
                for (int w = 0; w < d; ++w) r_norm += R(i, u, v, w) * R(i, u, v, w);
            }
        }
    }
    p.C0 = frac<Scalar>(1, 1440) * (Scalar(9) * lap_sc + Scalar(3) * lap_trace + Scalar(5) * jet.sc * jet.sc -
                                    Scalar(4) * ric_norm + Scalar(2) * ric_r + Scalar(2) * r_norm);
    return p;
}

/// 1 + E2(y) + E4(y).
template <typename Scalar>
Scalar sqrt_det_g_taylor(const ParametrixJet<Scalar>& p, const Vector<Scalar>& y) {
    const int d = p.dim;
    if (y.size() != d) throw InvalidInput("sqrt_det_g_taylor: point has wrong dimension");
    Scalar quartic(0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) quartic += p.E4(i, j, k, l) * y[i] * y[j] * y[k] * y[l];
    return Scalar(1) + y.dot(p.E2 * y) + quartic;
}

/// Full symmetrization over the 24 permutations of (i,j,k,l).
template <typename Scalar>
Tensor4<Scalar> symmetrize_full(const Tensor4<Scalar>& T) {
    const int d = T.dim();
    Tensor4<Scalar> out(d);
    std::array<int, 4> idx{};
    for (idx[0] = 0; idx[0] < d; ++idx[0])
        for (idx[1] = 0; idx[1] < d; ++idx[1])
            for (idx[2] = 0; idx[2] < d; ++idx[2])
                for (idx[3] = 0; idx[3] < d; ++idx[3]) {
                    std::array<int, 4> perm{0, 1, 2, 3};
                    Scalar s(0);
                    do {
                        s += T(idx[perm[0]], idx[perm[1]], idx[perm[2]], idx[perm[3]]);
                    } while (std::next_permutation(perm.begin(), perm.end()));
                    out(idx[0], idx[1], idx[2], idx[3]) = s / Scalar(24);
                }
    return out;
}

/// Residuals of u_0² · sqrt(det g) = 1 at orders 2 and 4 (max-abs entries).
template <typename Scalar>
struct CancellationDefects {
    Scalar order2{0};
    Scalar order4{0};
};

template <typename Scalar>
CancellationDefects<Scalar> cancellation_defects(const ParametrixJet<Scalar>& p) {
    const int d = p.dim;
    CancellationDefects<Scalar> out;
    const SymMatrix<Scalar> two = scaled(p.A2, Scalar(2)) + p.E2;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out.order2 = std::max(out.order2, abs_value(two(i, j)));

    Tensor4<Scalar> four(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l)
                    four(i, j, k, l) = Scalar(2) * p.A4(i, j, k, l) + p.E4(i, j, k, l) + p.A2(i, j) * p.A2(k, l) +
                                       Scalar(2) * p.A2(i, j) * p.E2(k, l);
    out.order4 = symmetrize_full(four).max_abs();
    return out;
}

}  // namespace heatkl
