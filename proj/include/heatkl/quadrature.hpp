#pragma once

#include <Eigen/Core>

#include <functional>

namespace heatkl {

/// Gauss–Legendre rule on [−1, 1].
struct GaussLegendre {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

/// n-point rule, nodes ascending. Cached per n; safe to call concurrently.
const GaussLegendre& gauss_legendre(int n);

/// ∫_a^b f by composite Gauss–Legendre on `panels` equal panels.
double integrate_composite(const std::function<double(double)>& f, double a, double b, int panels, int nodes);

}  // namespace heatkl
