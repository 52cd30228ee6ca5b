#include "heatkl/expansion.hpp"

#include <cmath>
#include <numbers>

namespace heatkl {

ExpansionResult expand(const CurvatureJet<double>& jet, double vol, ExpansionMethod method, int order) {
    if (!(vol > 0.0)) throw InvalidInput("expand: volume must be positive");
    if (order < 0) throw InvalidInput("expand: order must be non-negative");
    if (order > kMaxExpansionOrder) throw UnsupportedOrder("expand: coefficients available through c2 only");
    validate_jet(jet, 1e-10);

    ExpansionResult r;
    r.d = jet.dim;
    r.vol = vol;
    r.method = method;
    if (method == ExpansionMethod::closed_form) {
        const double all[] = {c0<double>(jet.dim), c1(jet), c2_closed(jet)};
        r.c.assign(all, all + order + 1);
        const auto v = c2_invariants(jet);
        r.breakdown = {{"sc", jet.sc},
                       {"lap_sc", v.lap_sc},
                       {"ric_norm", v.ric_norm},
                       {"div_div_ric", v.div_div_ric},
                       {"riem_norm", v.riem_norm},
                       {"riem_twisted", v.riem_twisted}};
    } else {
        const ParametrixJet<double> pj = parametrix_from_jet(jet);
        for (int i = 0; i <= order; ++i) {
            const auto pq = build_P_Q(pj, i);
            const double p_part = integrate_polynomial(pq.P, Weight::half_norm_sq);
            const double q_part = integrate_polynomial(pq.Q, Weight::plain);
            r.c.push_back(-p_part + q_part);
            r.breakdown["P" + std::to_string(i) + "_half_norm"] = p_part;
            r.breakdown["Q" + std::to_string(i) + "_plain"] = q_part;
        }
    }
    return r;
}

double kl_asymptotic(double t, int d, double vol, const ExpansionResult& coeffs, int order) {
    if (!(t > 0.0)) throw InvalidInput("kl_asymptotic: t must be positive");
    if (!(vol > 0.0)) throw InvalidInput("kl_asymptotic: volume must be positive");
    if (order < 0 || order >= int(coeffs.c.size())) throw InvalidInput("kl_asymptotic: order not available");
    double value = -0.5 * d * std::log(2.0 * std::numbers::pi * t) + std::log(vol);
    double tp = 1.0;
    for (int i = 0; i <= order; ++i, tp *= t) value += coeffs.c[std::size_t(i)] * tp;
    return value;
}

std::string to_string(ExpansionMethod m) { return m == ExpansionMethod::closed_form ? "closed_form" : "wick"; }

void to_json(nlohmann::json& j, const ExpansionResult& r) {
    j = nlohmann::json{{"d", r.d}, {"vol", r.vol}, {"c", r.c}, {"method", to_string(r.method)}};
}

void from_json(const nlohmann::json& j, ExpansionResult& r) {
    r.d = j.at("d").get<int>();
    r.vol = j.at("vol").get<double>();
    r.c = j.at("c").get<std::vector<double>>();
    const auto m = j.at("method").get<std::string>();
    if (m == "closed_form")
        r.method = ExpansionMethod::closed_form;
    else if (m == "wick")
        r.method = ExpansionMethod::wick;
    else
        throw InvalidInput("ExpansionResult: unknown method '" + m + "'");
    r.breakdown.clear();
}

}  // namespace heatkl
