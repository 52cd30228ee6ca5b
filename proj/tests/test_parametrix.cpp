#include "heatkl/manifolds.hpp"
#include "heatkl/parametrix.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>

using namespace heatkl;

namespace {

// Taylor coefficients a, b of g(u) = 1 + a u + b u² + …, u = s², from samples
// of the closed-form density at u = h, 2h, 3h, 4h (cubic interpolation through g(0) = 1).
std::pair<double, double> taylor_fit(const Sphere& sphere, double h) {
    Eigen::Matrix4d V;
    Eigen::Vector4d rhs;
    for (int k = 0; k < 4; ++k) {
        const double u = (k + 1) * h;
        for (int p = 0; p < 4; ++p) V(k, p) = std::pow(u, p + 1);
        rhs[k] = sqrt_det_g_normal(sphere, std::sqrt(u)) - 1.0;
    }
    const Eigen::Vector4d c = V.partialPivLu().solve(rhs);
    return {c[0], c[1]};
}

template <typename S>
S quartic_along(const Tensor4<S>& T, const Vector<S>& y) {
    S s(0);
    const int d = T.dim();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) s += T(i, j, k, l) * y[i] * y[j] * y[k] * y[l];
    return s;
}

}  // namespace

TEST(Parametrix, SpaceFormQuadraticTerms) {
    for (int d = 2; d <= 4; ++d) {
        const Rational K(3, 2);
        const auto p = parametrix_from_jet(constant_curvature_jet(K, d));
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                const Rational diag = i == j ? Rational(1) : Rational(0);
                EXPECT_EQ(p.E2(i, j), -K * (d - 1) / 6 * diag);
                EXPECT_EQ(p.A2(i, j), K * (d - 1) / 12 * diag);
            }
        EXPECT_EQ(p.B0, K * d * (d - 1) / 12);
        EXPECT_TRUE(p.B1.isZero());
    }
}

TEST(Parametrix, ScalarGradientEntersB1) {
    const auto jet = random_curvature_jet<Rational>(2, 3, false);
    const auto p = parametrix_from_jet(jet);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(p.B1[i], jet.sc_grad[i] / 24);
}

TEST(Parametrix, CancellationIsExactInRationals) {
    for (int d = 2; d <= 4; ++d)
        for (std::uint64_t seed = 0; seed < 5; ++seed)
            for (bool b : {false, true}) {
                const auto p = parametrix_from_jet(random_curvature_jet<Rational>(seed, d, b));
                const auto e = cancellation_defects(p);
                EXPECT_EQ(e.order2, 0);
                EXPECT_EQ(e.order4, 0);
            }
}

TEST(Parametrix, CancellationAlongDirectionsInDouble) {
    // (1 + A2 + A4)² (1 + E2 + E4) = 1 + O(|y|⁶)
    std::mt19937_64 rng(8);
    std::normal_distribution<double> N(0, 1);
    for (int d = 2; d <= 5; ++d) {
        const auto p = parametrix_from_jet(random_curvature_jet<double>(40 + d, d, false));
        for (int n = 0; n < 10; ++n) {
            Vector<double> y(d);
            for (int i = 0; i < d; ++i) y[i] = N(rng);
            const double a2 = y.dot(p.A2 * y), a4 = quartic_along(p.A4, y);
            const double e2 = y.dot(p.E2 * y), e4 = quartic_along(p.E4, y);
            EXPECT_NEAR(2 * a2 + e2, 0.0, 1e-13);
            EXPECT_NEAR(2 * a4 + a2 * a2 + 2 * a2 * e2 + e4, 0.0, 1e-12 * (1 + std::abs(e4)));
        }
    }
}

TEST(Parametrix, MutatedE4FailsCancellation) {
    auto p = parametrix_from_jet(constant_curvature_jet(1.0, 3));
    p.E4 = p.E4 * -1.0;
    EXPECT_GT(cancellation_defects(p).order4, 1e-3);
}

TEST(Parametrix, RejectsInvalidJet) {
    auto jet = constant_curvature_jet(1.0, 2);
    jet.ric(0, 0) += 0.5;
    EXPECT_THROW(parametrix_from_jet(jet), InvalidInput);
}

TEST(VolumeDensity, ClosedFormValues) {
    EXPECT_EQ(sqrt_det_g_normal(Sphere{2, 1.0}, 0.0), 1.0);
    EXPECT_NEAR(sqrt_det_g_normal(Sphere{2, 1.0}, std::numbers::pi / 2), 2.0 / std::numbers::pi, 1e-15);
    EXPECT_EQ(sqrt_det_g_normal(Sphere{1, 1.0}, 1.0), 1.0);
    EXPECT_THROW(sqrt_det_g_normal(Sphere{2, 1.0}, std::numbers::pi), InvalidInput);
    EXPECT_THROW(sqrt_det_g_normal(Sphere{2, 1.0}, -0.1), InvalidInput);
}

TEST(VolumeDensity, TaylorFitMatchesParametrixContractions) {
    // S³: 1 − s²/3 + 2s⁴/45; S²: 1 − s²/6 + s⁴/120 (sin s / s)
    for (const auto& [d, a_exact, b_exact] : {std::tuple{3, -1.0 / 3, 2.0 / 45}, std::tuple{2, -1.0 / 6, 1.0 / 120}}) {
        for (double r : {1.0, 2.0}) {
            const Sphere sphere{d, r};
            const auto [a, b] = taylor_fit(sphere, 2e-3 * r * r);
            const auto p = parametrix_from_jet(curvature_jet(ManifoldSpec{sphere}));
            Vector<double> e = Vector<double>::Zero(d);
            e[0] = 1.0;
            const double K = 1.0 / (r * r);
            EXPECT_NEAR(a, a_exact * K, 1e-9);
            EXPECT_NEAR(b, b_exact * K * K, 1e-5 * K * K);
            EXPECT_NEAR(e.dot(p.E2 * e), a_exact * K, 1e-15);
            EXPECT_NEAR(quartic_along(p.E4, e), b_exact * K * K, 1e-15);
        }
    }
}

TEST(VolumeDensity, TruncatedSeriesApproximatesClosedFormToSixthOrder) {
    const Sphere sphere{3, 1.0};
    const auto p = parametrix_from_jet(curvature_jet(ManifoldSpec{sphere}));
    Vector<double> y(3);
    y << 0.6, -0.8, 0.0;
    for (double s : {0.2, 0.1, 0.05}) {
        const double err = std::abs(sqrt_det_g_taylor(p, Vector<double>(s * y)) - sqrt_det_g_normal(sphere, s));
        EXPECT_LT(err, 0.01 * std::pow(s, 6));
    }
}

TEST(SymmetrizeFull, InvariantUnderPermutationAndIdempotent) {
    Tensor4<Rational> T(2);
    for (Eigen::Index k = 0; k < T.size(); ++k) T.flat()[k] = Rational(int(k) * 3 - 7, 5);
    const auto S = symmetrize_full(T);
    EXPECT_EQ(S(0, 1, 1, 0), S(1, 0, 0, 1));
    EXPECT_EQ(S(0, 0, 1, 1), S(1, 0, 1, 0));
    EXPECT_TRUE(symmetrize_full(S).flat() == S.flat());
}
