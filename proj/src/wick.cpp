#include "heatkl/wick.hpp"

#include "heatkl/quadrature.hpp"

#include <cmath>

namespace heatkl {

double radial_tail_fraction(unsigned n, double rho) {
    if (rho <= 0.0) return 1.0;
    // ∫_0^∞ r^n e^{−r²/2} dr = 2^{(n−1)/2} Γ((n+1)/2)
    const double full = std::exp(0.5 * (n - 1.0) * std::log(2.0) + std::lgamma(0.5 * (n + 1.0)));
    // The integrand is negligible 40 units past max(rho, sqrt(n)).
    const double upper = std::max(rho, std::sqrt(double(n))) + 40.0;
    const auto f = [n](double r) { return std::exp(n * std::log(r) - 0.5 * r * r); };
    const double tail = integrate_composite(f, rho, upper, 64, 32);
    return tail / full;
}

double truncation_defect(const PolynomialY<double>& p, double epsilon, double t) {
    if (!(t > 0.0)) throw InvalidInput("truncation_defect: t must be positive");
    if (!(epsilon > 0.0)) throw InvalidInput("truncation_defect: epsilon must be positive");
    const double rho = epsilon / std::sqrt(t);
    const int d = p.dim();
    double defect = 0.0;
    for (const auto& [e, c] : p.terms()) {
        const double m = to_double(detail::plain_moment(e));
        if (m == 0.0) continue;
        unsigned degree = 0;
        for (unsigned k : e) degree += k;
        defect += c * m * radial_tail_fraction(degree + unsigned(d) - 1u, rho);
    }
    return std::abs(defect);
}

}  // namespace heatkl
