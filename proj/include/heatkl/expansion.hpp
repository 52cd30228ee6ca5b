#pragma once

// Small-time expansion of the relative entropy of the heat kernel with
// respect to the normalized volume:
//
//   D_KL(t) = −(d/2) ln(2πt) + ln Vol + c0 + c1 t + c2 t² + o(t²)
//
// The coefficients are computed two ways that share no contraction code:
// closed-form curvature polynomials, and Gaussian integration of the
// polynomials P_i, Q_i built from the parametrix jet:
//
//   c_i = E[−P_i(Y) |Y|²/2 + Q_i(Y)],  Y ~ N(0, I_d).

#include "heatkl/errors.hpp"
#include "heatkl/parametrix.hpp"
#include "heatkl/scalar.hpp"
#include "heatkl/tensors.hpp"
#include "heatkl/wick.hpp"

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace heatkl {

inline constexpr int kMaxExpansionOrder = 2;

enum class ExpansionMethod { closed_form, wick };

struct ExpansionResult {
    int d = 0;
    double vol = 1.0;
    std::vector<double> c;  // c0..c_n
    ExpansionMethod method = ExpansionMethod::closed_form;
    std::map<std::string, double> breakdown;
};

template <typename Scalar>
Scalar c0(int d) {
    if (d < 1) throw InvalidInput("c0: dimension must be positive");
    return Scalar(-d) / Scalar(2);
}

template <typename Scalar>
Scalar c1(const CurvatureJet<Scalar>& jet) {
    return jet.sc / Scalar(4);
}

/// Curvature invariants entering c2, each a full Einstein sum.
template <typename Scalar>
struct C2Invariants {
    Scalar lap_sc{0};         // Sc_;ii
    Scalar ric_norm{0};       // Ric_ij Ric_ij
    Scalar div_div_ric{0};    // Ric_ij;ij
    Scalar riem_norm{0};      // R_iujv R_iujv
    Scalar riem_twisted{0};   // R_iujv R_juiv
};

template <typename Scalar>
C2Invariants<Scalar> c2_invariants(const CurvatureJet<Scalar>& jet) {
    const int d = jet.dim;
    const auto& R = jet.riemann;
    C2Invariants<Scalar> v;
    for (int i = 0; i < d; ++i) {
        v.lap_sc += jet.sc_hess(i, i);
        for (int j = 0; j < d; ++j) {
            v.ric_norm += jet.ric(i, j) * jet.ric(i, j);
            v.div_div_ric += jet.ric_d2(i, j, i, j);
            for (int u = 0; u < d; ++u)
                for (int w = 0; w < d; ++w) {
                    v.riem_norm += R(i, u, j, w) * R(i, u, j, w);
                    v.riem_twisted += R(i, u, j, w) * R(j, u, i, w);
                }
        }
    }
    return v;
}

template <typename Scalar>
Scalar c2_closed(const CurvatureJet<Scalar>& jet) {
    const Scalar d(jet.dim);
    const auto v = c2_invariants(jet);
    return -(Scalar(3) * d - Scalar(22)) / Scalar(480) * v.lap_sc - v.ric_norm / Scalar(48) +
           (d + Scalar(6)) / Scalar(80) * v.div_div_ric - (d - Scalar(14)) / Scalar(1440) * v.riem_norm +
           (d + Scalar(6)) / Scalar(720) * v.riem_twisted;
}

template <typename Scalar>
struct PQPair {
    PolynomialY<Scalar> P;
    PolynomialY<Scalar> Q;
};

/// P_i, Q_i: terms of degree p in t and q in y (q even, p + q/2 = i) of
/// F = sqrt(det g) Σ t^k u_k and G = F log Σ t^k u_k, with y = √t Y.
template <typename Scalar>
PQPair<Scalar> build_P_Q(const ParametrixJet<Scalar>& pj, int order) {
    if (order < 0) throw InvalidInput("build_P_Q: order must be non-negative");
    if (order > kMaxExpansionOrder) throw UnsupportedOrder("build_P_Q: Taylor data available through order 2 only");
    const int d = pj.dim;
    using Poly = PolynomialY<Scalar>;
    if (order == 0) return {Poly::constant(d, Scalar(1)), Poly(d)};

    const Poly A2 = Poly::quadratic(pj.A2);
    const Poly E2 = Poly::quadratic(pj.E2);
    const Poly B0 = Poly::constant(d, pj.B0);
    if (order == 1) return {B0 + A2 + E2, B0 + A2};

    const Poly B2 = Poly::quadratic(pj.B2);
    const Poly A4 = Poly::quartic(pj.A4);
    const Poly E4 = Poly::quartic(pj.E4);
    const Poly C0 = Poly::constant(d, pj.C0);
    const Poly E2A2 = E2 * A2;
    Poly P = C0 + B2 + pj.B0 * E2 + A4 + E2A2 + E4;
    Poly Q = C0 + Poly::constant(d, pj.B0 * pj.B0 / Scalar(2)) + B2 + pj.B0 * A2 + pj.B0 * E2 + A4 +
             (A2 * A2) * (Scalar(1) / Scalar(2)) + E2A2;
    return {std::move(P), std::move(Q)};
}

template <typename Scalar>
Scalar c_i_via_wick(const ParametrixJet<Scalar>& pj, int order) {
    const auto pq = build_P_Q(pj, order);
    return -integrate_polynomial(pq.P, Weight::half_norm_sq) + integrate_polynomial(pq.Q, Weight::plain);
}

/// c0..c_order by the requested route, in double precision.
ExpansionResult expand(const CurvatureJet<double>& jet, double vol, ExpansionMethod method,
                       int order = kMaxExpansionOrder);

/// −(d/2) ln(2πt) + ln vol + Σ_{i ≤ order} c_i t^i.
double kl_asymptotic(double t, int d, double vol, const ExpansionResult& coeffs, int order);

std::string to_string(ExpansionMethod m);
void to_json(nlohmann::json& j, const ExpansionResult& r);
void from_json(const nlohmann::json& j, ExpansionResult& r);

}  // namespace heatkl
