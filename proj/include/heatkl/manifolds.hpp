#pragma once

// Reference manifolds with exactly known heat kernels for ∂_t q = ½Δq:
// round spheres S^d (d ≤ 3), flat tori, and Riemannian products of these.
//
// Spectral eigenvalues are halved relative to Δ, and wrapped Gaussians on
// the torus have variance t.

#include "heatkl/tensors.hpp"

#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace heatkl {

struct Sphere {
    int d = 2;
    double radius = 1.0;
};

struct FlatTorus {
    std::vector<double> lengths;
};

struct ManifoldSpec;

struct Product {
    std::shared_ptr<const ManifoldSpec> left;
    std::shared_ptr<const ManifoldSpec> right;
};

struct ManifoldSpec {
    std::variant<Sphere, FlatTorus, Product> shape;
};

ManifoldSpec make_sphere(int d, double radius);
ManifoldSpec make_torus(std::vector<double> lengths);
ManifoldSpec make_product(ManifoldSpec left, ManifoldSpec right);

/// Throws InvalidInput on non-positive radius or lengths, unsupported sphere
/// dimension, or a product with a missing factor.
void validate(const ManifoldSpec& spec);

/// Grammar: `sphere:d=2,r=1`, `torus:L=6.28` (several axes: `torus:L=6.28,3.14`,
/// or `torus:d=2,L=6.28`), `product(A;B)`.
ManifoldSpec parse_manifold(const std::string& text);
std::string to_string(const ManifoldSpec& spec);

int dimension(const ManifoldSpec& spec);
double volume(const ManifoldSpec& spec);

/// Curvature jet at any base point (all reference spaces are homogeneous).
CurvatureJet<double> curvature_jet(const ManifoldSpec& spec);

/// Number of coordinates heat_kernel expects for a point: 1 for a sphere
/// (geodesic distance), one signed displacement per torus axis, and the
/// concatenation for products.
int point_arity(const ManifoldSpec& spec);

enum class TorusSeries { automatic, wrapped, spectral };

/// Crossover t/L² above which the torus switches to the spectral sum.
inline constexpr double kTorusCrossover = 0.15;
inline constexpr double kDefaultKernelTol = 1e-12;

struct KernelEval {
    double t = 0.0;
    std::vector<double> point;
    double q = 0.0;
    int terms = 0;
    /// Bound on the truncation error relative to the series envelope
    /// (the sum of the absolute term bounds, at least the on-diagonal value).
    double tail_bound = 0.0;
};

/// Heat kernel q(t, z, w) as a function of the point coordinates of w.
KernelEval heat_kernel(const ManifoldSpec& spec, double t, std::span<const double> point,
                       double tol = kDefaultKernelTol, TorusSeries series = TorusSeries::automatic);

/// Sphere kernel at geodesic distance s.
KernelEval sphere_kernel(const Sphere& sphere, double t, double s, double tol = kDefaultKernelTol);

/// One torus axis of length L at displacement x, |x| ≤ L/2.
KernelEval circle_kernel(double length, double t, double x, double tol = kDefaultKernelTol,
                         TorusSeries series = TorusSeries::automatic);

/// (sin(s/r) / (s/r))^{d−1}: volume density of the sphere in normal
/// coordinates at distance s, 0 ≤ s < πr.
double sqrt_det_g_normal(const Sphere& sphere, double s);

/// Dimension of the degree-l eigenspace of the Laplacian on S^d.
double sphere_eigenspace_dimension(int d, int l);

}  // namespace heatkl
