#include "heatkl/quadrature.hpp"
#include "heatkl/wick.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

using namespace heatkl;

namespace {

// E[f(Y)] for Y ~ N(0, I_d), d ≤ 3: tensorized composite Gauss–Legendre,
// four panels on [−12, 12] per axis.
double gaussian_expectation(int d, const std::function<double(const std::vector<double>&)>& f) {
    const auto& gl = gauss_legendre(24);
    std::vector<double> nodes, weights;
    for (int panel = 0; panel < 4; ++panel) {
        const double lo = -12.0 + 6.0 * panel, half = 3.0;
        for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
            const double y = lo + half * (gl.nodes[k] + 1.0);
            nodes.push_back(y);
            weights.push_back(half * gl.weights[k] * std::exp(-0.5 * y * y) / std::sqrt(2.0 * std::numbers::pi));
        }
    }
    std::vector<double> x(static_cast<std::size_t>(d));
    double sum = 0.0;
    const int n = int(nodes.size());
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    while (true) {
        double w = 1.0;
        for (int c = 0; c < d; ++c) {
            x[std::size_t(c)] = nodes[std::size_t(idx[std::size_t(c)])];
            w *= weights[std::size_t(idx[std::size_t(c)])];
        }
        sum += w * f(x);
        int c = 0;
        while (c < d && ++idx[std::size_t(c)] == n) idx[std::size_t(c++)] = 0;
        if (c == d) break;
    }
    return sum;
}

}  // namespace

TEST(Moment1d, DoubleFactorials) {
    EXPECT_EQ(moment_1d(0), 1);
    EXPECT_EQ(moment_1d(2), 1);
    EXPECT_EQ(moment_1d(4), 3);
    EXPECT_EQ(moment_1d(6), 15);
    EXPECT_EQ(moment_1d(8), 105);
    EXPECT_EQ(moment_1d(7), 0);
}

TEST(Nu, ClosedFormSecondAndFourthMoments) {
    for (int d = 1; d <= 4; ++d)
        for (int i = 0; i < d; ++i) {
            EXPECT_EQ(nu({i, i}, d), 1);
            EXPECT_EQ(nu({i, i, i, i}, d), 3);
            for (int j = 0; j < d; ++j)
                if (j != i) EXPECT_EQ(nu({i, j}, d), 0);
        }
    EXPECT_EQ(nu({0, 1, 2}, 3), 0);
    EXPECT_EQ(nu({}, 2), 1);
}

TEST(Mu, ClosedFormSecondAndFourthMoments) {
    for (int d = 1; d <= 5; ++d) {
        EXPECT_EQ(mu({0, 0}, d), Rational(d + 2, 2));
        EXPECT_EQ(mu({0, 0, 0, 0}, d), Rational(3 * d + 12, 2));
        if (d > 1) {
            EXPECT_EQ(mu({0, 1}, d), 0);
            EXPECT_EQ(mu({0, 0, 1, 1}, d), Rational(d + 4, 2));
        }
    }
}

TEST(Mu, EqualsHalfSumOfNuWithAppendedPair) {
    std::mt19937 rng(3);
    for (int d = 1; d <= 4; ++d)
        for (int trial = 0; trial < 40; ++trial) {
            std::uniform_int_distribution<int> len(0, 6), coord(0, d - 1);
            MultiIndex idx(static_cast<std::size_t>(len(rng)));
            for (int& i : idx) i = coord(rng);
            Rational s(0);
            for (int j = 0; j < d; ++j) {
                MultiIndex ext = idx;
                ext.push_back(j);
                ext.push_back(j);
                s += isserlis_oracle(ext, d);
            }
            EXPECT_EQ(mu(idx, d), s / 2);
        }
}

TEST(Moments, RejectOutOfRangeIndices) {
    EXPECT_THROW(nu({0, 3}, 3), InvalidInput);
    EXPECT_THROW(mu({-1}, 3), InvalidInput);
    EXPECT_THROW(isserlis_oracle({4, 4}, 2), InvalidInput);
    EXPECT_THROW(nu({0}, 0), InvalidInput);
}

TEST(Isserlis, MatchesNuOnLengthSixOverThreeCoordinates) {
    MultiIndex idx(6, 0);
    while (true) {
        EXPECT_EQ(nu(idx, 3), isserlis_oracle(idx, 3));
        int p = 0;
        while (p < 6 && ++idx[std::size_t(p)] == 3) idx[std::size_t(p++)] = 0;
        if (p == 6) break;
    }
}

TEST(Moments, AgreeWithNumericalGaussianIntegration) {
    const std::vector<MultiIndex> cases = {{0, 0}, {0, 0, 1, 1}, {0, 0, 0, 0}, {0, 1, 1, 2, 2, 0}, {1, 1, 1, 1, 2, 2}};
    for (const auto& idx : cases) {
        auto mono = [&](const std::vector<double>& y) {
            double m = 1.0;
            for (int i : idx) m *= y[std::size_t(i)];
            return m;
        };
        auto mono_norm = [&](const std::vector<double>& y) {
            double r2 = 0.0;
            for (double v : y) r2 += v * v;
            return mono(y) * r2 / 2.0;
        };
        EXPECT_NEAR(gaussian_expectation(3, mono), nu(idx, 3).convert_to<double>(), 1e-10);
        EXPECT_NEAR(gaussian_expectation(3, mono_norm), mu(idx, 3).convert_to<double>(), 1e-9);
    }
}

TEST(Contractions, IdentityMatrixExamples) {
    const Matrix<Rational> I = Matrix<Rational>::Identity(3, 3);
    EXPECT_EQ(contract2(I, Moment::nu), 3);
    EXPECT_EQ(contract2(I, Moment::mu), Rational(15, 2));
}

TEST(Contractions, TraceIdentitiesExactlyInRationals) {
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> draw(-50, 50);
    for (int d = 2; d <= 5; ++d)
        for (int n = 0; n < 10; ++n) {
            Tensor4<Rational> R(d);
            for (Eigen::Index k = 0; k < R.size(); ++k) R.flat()[k] = Rational(draw(rng), 7);
            Matrix<Rational> T(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) T(i, j) = Rational(draw(rng), 3);
            Rational s3(0);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) s3 += R(i, i, j, j) + R(i, j, i, j) + R(i, j, j, i);
            EXPECT_EQ(contract4(R, Moment::mu), Rational(d + 4, 2) * s3);
            EXPECT_EQ(contract4(R, Moment::nu), s3);
            EXPECT_EQ(contract2(T, Moment::mu), Rational(d + 2, 2) * T.trace());
            EXPECT_EQ(contract2(T, Moment::nu), T.trace());
        }
}

TEST(Contractions, RandomDoubleTensorMatchesDirectLoops) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(-1, 1);
    const int d = 3;
    Tensor4<double> R(d);
    for (Eigen::Index k = 0; k < R.size(); ++k) R.flat()[k] = U(rng);
    double s3 = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) s3 += R(i, i, j, j) + R(i, j, i, j) + R(i, j, j, i);
    EXPECT_NEAR(contract4(R, Moment::mu), 3.5 * s3, 1e-12 * (1 + std::abs(s3)));
}

TEST(PolynomialY, ArithmeticAndEvaluation) {
    using P = PolynomialY<Rational>;
    const P y0 = P::coordinate(2, 0), y1 = P::coordinate(2, 1);
    const P p = y0 * y0 + Rational(2) * y0 * y1 - P::constant(2, Rational(1));
    Vector<Rational> y(2);
    y << Rational(3), Rational(-1, 2);
    EXPECT_EQ(p.evaluate(y), Rational(9) - Rational(3) - Rational(1));
    EXPECT_TRUE((p - p).is_zero());
    EXPECT_EQ(p.coefficient({1, 1}), 2);
    EXPECT_THROW(P::coordinate(2, 0) + P::coordinate(3, 0), InvalidInput);
    Matrix<Rational> M(2, 2);
    M << 1, 2, 2, 5;
    EXPECT_EQ(P::quadratic(M).coefficient({1, 1}), 4);
}

TEST(PolynomialY, IntegrationMatchesMoments) {
    using P = PolynomialY<Rational>;
    const P y0 = P::coordinate(3, 0), y2 = P::coordinate(3, 2);
    const P p = y0 * y0 * y2 * y2 + Rational(5) * y0 * y0 * y0 * y0 + Rational(7) * y0;
    EXPECT_EQ(integrate_polynomial(p, Weight::plain), nu({0, 0, 2, 2}, 3) + 5 * nu({0, 0, 0, 0}, 3));
    EXPECT_EQ(integrate_polynomial(p, Weight::half_norm_sq), mu({0, 0, 2, 2}, 3) + 5 * mu({0, 0, 0, 0}, 3));
}

TEST(PolynomialY, IntegrationIsLinear) {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> draw(-9, 9);
    using P = PolynomialY<Rational>;
    for (int trial = 0; trial < 20; ++trial) {
        Tensor4<Rational> A(2), B(2);
        for (Eigen::Index k = 0; k < A.size(); ++k) {
            A.flat()[k] = draw(rng);
            B.flat()[k] = draw(rng);
        }
        const P a = P::quartic(A), b = P::quartic(B);
        const Rational s(draw(rng), 5);
        for (Weight w : {Weight::plain, Weight::half_norm_sq})
            EXPECT_EQ(integrate_polynomial(a + s * b, w), integrate_polynomial(a, w) + s * integrate_polynomial(b, w));
    }
}

TEST(RadialTail, KnownClosedForms) {
    // n = 1: tail fraction e^{−ρ²/2}
    for (double rho : {0.0, 0.5, 2.0, 5.0}) EXPECT_NEAR(radial_tail_fraction(1, rho), std::exp(-rho * rho / 2), 1e-13);
    // n = 0: erfc(ρ/√2)
    EXPECT_NEAR(radial_tail_fraction(0, 1.3), std::erfc(1.3 / std::sqrt(2.0)), 1e-13);
    // n = 3: (1 + ρ²/2) e^{−ρ²/2}
    EXPECT_NEAR(radial_tail_fraction(3, 2.0), 3.0 * std::exp(-2.0), 1e-13);
}

TEST(TruncationDefect, MatchesPolarCubatureForModerateRadius) {
    // Y₁² in d = 2 at ε/√t = 2: polar cubature over the ball complement.
    using P = PolynomialY<double>;
    const P p = P::coordinate(2, 0) * P::coordinate(2, 0);
    const double rho = 2.0;
    const auto& gl = gauss_legendre(40);
    double outside = 0.0;
    for (int panel = 0; panel < 4; ++panel) {
        const double lo = rho + 3.0 * panel;
        for (std::size_t a = 0; a < gl.nodes.size(); ++a) {
            const double r = lo + 1.5 * (gl.nodes[a] + 1.0);
            for (std::size_t b = 0; b < gl.nodes.size(); ++b) {
                const double th = std::numbers::pi * (gl.nodes[b] + 1.0);
                const double y1 = r * std::cos(th);
                outside += 1.5 * gl.weights[a] * std::numbers::pi * gl.weights[b] * r * y1 * y1 *
                           std::exp(-0.5 * r * r) / (2.0 * std::numbers::pi);
            }
        }
    }
    EXPECT_NEAR(truncation_defect(p, 1.0, 0.25), outside, 1e-12);
    // exact: E[Y₁² 1{|Y|>ρ}] = ½ E[|Y|² 1{|Y|>ρ}] = ½(ρ² + 2)e^{−ρ²/2}
    EXPECT_NEAR(truncation_defect(p, 1.0, 0.25), 0.5 * (rho * rho + 2) * std::exp(-rho * rho / 2), 1e-12);
}

TEST(TruncationDefect, DecaysFasterThanTSquared) {
    using P = PolynomialY<double>;
    for (int d = 1; d <= 3; ++d) {
        const P p = P::coordinate(d, 0) * P::coordinate(d, 0);
        EXPECT_LT(truncation_defect(p, 1.0, 0.025) / truncation_defect(p, 1.0, 0.1), 1.0 / 16.0);
    }
}

TEST(TruncationDefect, RejectsNonPositiveArguments) {
    const auto p = PolynomialY<double>::constant(1, 1.0);
    EXPECT_THROW(truncation_defect(p, 1.0, 0.0), InvalidInput);
    EXPECT_THROW(truncation_defect(p, -1.0, 0.1), InvalidInput);
}
