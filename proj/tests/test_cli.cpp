#include "cli.hpp"

#include "heatkl/numeric.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

using namespace heatkl;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) { return ::testing::TempDir() + name; }

}  // namespace

TEST(Cli, CoeffsBothOnTwoSphere) {
    const auto r = run({"coeffs", "--manifold", "sphere:d=2,r=1", "--method", "both"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["c"][0], -1.0);
    EXPECT_EQ(j["c"][1], 0.5);
    EXPECT_NEAR(j["c"][2].get<double>(), 1.0 / 72, 1e-15);
    EXPECT_LT(j["discrepancy"].get<double>(), 1e-12);
    EXPECT_EQ(j["c_wick"].size(), 3u);
}

TEST(Cli, CoeffsOnTorusAndJetFile) {
    const auto r = run({"coeffs", "--manifold", "torus:L=6.283185307"});
    ASSERT_EQ(r.code, kExitOk);
    EXPECT_EQ(nlohmann::json::parse(r.out)["c"], (std::vector<double>{-0.5, 0.0, 0.0}));

    const std::string path = temp_path("flat3.json");
    {
        std::ofstream f(path);
        f << R"({"dim": 3, "riemann": [], "sc_grad": [0, 0, 0]})";
    }
    const auto rj = run({"coeffs", "--jet", path, "--method", "wick"});
    ASSERT_EQ(rj.code, kExitOk) << rj.err;
    const auto j = nlohmann::json::parse(rj.out);
    EXPECT_EQ(j["c"], (std::vector<double>{-1.5, 0.0, 0.0}));
    EXPECT_EQ(j["method"], "wick");
    std::remove(path.c_str());
}

TEST(Cli, CoeffsUsageErrors) {
    EXPECT_EQ(run({"coeffs"}).code, kExitUsage);
    EXPECT_EQ(run({"coeffs", "--manifold", "sphere:d=2,r=1", "--jet", "x.json"}).code, kExitUsage);
    EXPECT_EQ(run({"coeffs", "--manifold", "cube:L=1"}).code, kExitUsage);
    EXPECT_EQ(run({"coeffs", "--manifold", "sphere:d=2,r=1", "--method", "guess"}).code, kExitUsage);
    EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
    EXPECT_EQ(run({}).code, kExitUsage);
    const std::string path = temp_path("broken.json");
    {
        std::ofstream f(path);
        f << R"({"dim": 2, "riemann": [[0,1,0,1,1.0]]})";
    }
    const auto r = run({"coeffs", "--jet", path});
    EXPECT_EQ(r.code, kExitUsage);
    EXPECT_FALSE(r.err.empty());
    std::remove(path.c_str());
}

TEST(Cli, HelpExitsCleanly) {
    const auto r = run({"--help"});
    EXPECT_EQ(r.code, kExitOk);
    EXPECT_NE(r.out.find("sweep"), std::string::npos);
    // hidden mutation flag stays out of the help text
    EXPECT_EQ(run({"validate", "--help"}).out.find("inject"), std::string::npos);
}

TEST(Cli, KlPrintsOneRealMatchingLibrary) {
    const auto r = run({"kl", "--manifold", "sphere:d=2,r=1", "--t", "0.01"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const double v = std::stod(r.out);
    EXPECT_EQ(v, kl_numeric(make_sphere(2, 1.0), 0.01));
    EXPECT_EQ(r.out.back(), '\n');
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1);
}

TEST(Cli, KlNumericErrorsMapToExitFour) {
    const auto r = run({"kl", "--manifold", "sphere:d=2", "--t", "1e-3", "--panels", "1", "--nodes", "2", "--quad-tol",
                        "1e-12"});
    EXPECT_EQ(r.code, kExitNumeric);
    EXPECT_NE(r.err.find("tolerance"), std::string::npos);
    EXPECT_EQ(run({"kl", "--manifold", "sphere:d=2", "--t", "-1"}).code, kExitUsage);
}

TEST(Cli, KernelJson) {
    const auto r = run({"kernel", "--manifold", "torus:L=6.283185307179586", "--t", "200", "--point", "1.0"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_NEAR(j["q"].get<double>(), 1 / (2 * std::numbers::pi), 1e-15);
    EXPECT_LE(j["tail_bound"].get<double>(), 1e-12);
    const auto p = run({"kernel", "--manifold", "product(sphere:d=2,r=1;torus:L=3)", "--t", "0.1", "--point", "0.2,0.5"});
    ASSERT_EQ(p.code, kExitOk) << p.err;
    EXPECT_EQ(nlohmann::json::parse(p.out)["point"].size(), 2u);
    EXPECT_EQ(run({"kernel", "--manifold", "sphere:d=2,r=1", "--t", "0.1", "--point", "4"}).code, kExitUsage);
}

TEST(Cli, SweepThenFit) {
    const std::string csv = temp_path("s.csv");
    const auto s = run({"sweep", "--manifold", "torus:L=6.283", "--tmin", "1e-3", "--tmax", "5e-2", "--points", "20",
                        "--out", csv});
    ASSERT_EQ(s.code, kExitOk) << s.err;
    EXPECT_TRUE(s.out.empty());
    std::ifstream f(csv);
    const auto rows = read_sweep_csv(f);
    EXPECT_EQ(rows.size(), 20u);

    const auto fit = run({"fit", "--in", csv, "--order", "2", "--pin-c0"});
    ASSERT_EQ(fit.code, kExitOk) << fit.err;
    const auto j = nlohmann::json::parse(fit.out);
    const auto direct = fit_coefficients(rows, 1, 6.283, FitOptions{2, true, std::nullopt});
    EXPECT_EQ(j["coefficients"].get<std::vector<double>>(), direct.coefficients);
    EXPECT_EQ(j["d"], 1);

    const auto windowed = run({"fit", "--in", csv, "--order", "1", "--tmax", "0.01"});
    ASSERT_EQ(windowed.code, kExitOk) << windowed.err;
    EXPECT_LT(nlohmann::json::parse(windowed.out)["t"].size(), 20u);
    std::remove(csv.c_str());
}

TEST(Cli, SequentialPinningOnTwoSphere) {
    const std::string csv = temp_path("s2.csv");
    ASSERT_EQ(run({"sweep", "--manifold", "sphere:d=2,r=1", "--out", csv}).code, kExitOk);
    const auto fit = run({"fit", "--in", csv, "--order", "3", "--pin-c0", "--pin-c1", "sequential"});
    ASSERT_EQ(fit.code, kExitOk) << fit.err;
    const auto c = nlohmann::json::parse(fit.out)["coefficients"].get<std::vector<double>>();
    EXPECT_NEAR(c[2], 1.0 / 72, 0.1 / 72);
    EXPECT_EQ(run({"fit", "--in", csv, "--pin-c1", "abc"}).code, kExitUsage);
    EXPECT_EQ(run({"fit", "--in", csv, "--order", "5"}).code, kExitUsage);
    EXPECT_EQ(run({"fit", "--in", temp_path("missing.csv")}).code, kExitUsage);
    std::remove(csv.c_str());
}

TEST(Cli, OutputIsDeterministic) {
    const std::vector<std::string> args = {"sweep", "--manifold", "product(sphere:d=2,r=1;torus:L=2)", "--points", "4"};
    EXPECT_EQ(run(args).out, run(args).out);
}

TEST(Cli, ValidateQuickAndMutation) {
    const auto ok = run({"validate", "--quick"});
    EXPECT_EQ(ok.code, kExitOk) << ok.out;
    EXPECT_NE(ok.out.find("PASS  1"), std::string::npos);
    const auto bad = run({"validate", "--quick", "--inject-e4-sign-flip"});
    EXPECT_EQ(bad.code, kExitValidation);
    EXPECT_NE(bad.out.find("FAIL  5"), std::string::npos);
}
