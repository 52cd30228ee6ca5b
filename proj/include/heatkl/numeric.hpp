#pragma once

// Numerical relative entropy of the exact heat kernel with respect to the
// normalized volume, sweeps over t, and weighted least-squares extraction of
// the expansion coefficients from a sweep.

#include "heatkl/manifolds.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace heatkl {

struct QuadratureConfig {
    int panels = 16;          // per region (near origin / far)
    int nodes = 32;           // Gauss–Legendre nodes per panel
    double near_scale = 16.0; // near region is [0, near_scale·√t]
    double tolerance = 1e-9;  // self-convergence target under panel doubling
    double kernel_tol = kDefaultKernelTol;

    /// Throws InvalidInput unless all fields are positive and tolerance ≤ 1e−4.
    void validate() const;
};

struct KLEstimate {
    double value = 0.0;
    double error = 0.0;  // |difference| under panel doubling
};

/// ∫ q ln(q·Vol) dVol by radial quadrature; products are sums of factor KLs.
/// Throws AccuracyError if panel doubling moves the value by more than the
/// tolerance.
KLEstimate kl_numeric_estimate(const ManifoldSpec& spec, double t, const QuadratureConfig& cfg = {});
double kl_numeric(const ManifoldSpec& spec, double t, const QuadratureConfig& cfg = {});

/// ∫ q dVol over the same nodes (products multiply factor masses).
double total_mass(const ManifoldSpec& spec, double t, const QuadratureConfig& cfg = {});

/// Nodes and weights on [0, extent] used for one radial factor: the near
/// region [0, min(near_scale√t, extent)] and the remainder, `panels` panels each.
struct RadialRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
RadialRule radial_rule(double t, double extent, const QuadratureConfig& cfg, int panels);

struct SweepRow {
    double t = 0.0;
    double kl = 0.0;
    double asym[3] = {0.0, 0.0, 0.0};
    double residual = 0.0;
    std::optional<std::string> error;  // set when the row could not be computed
};

/// n log-spaced points in [tmin, tmax] (n = 1 gives tmin).
std::vector<double> log_grid(double tmin, double tmax, int n);

/// Worker count: HEATKL_THREADS if set and positive, else the hardware count.
unsigned worker_threads();

/// Rows in t-order. Per-row failures are recorded in `error`, values become NaN.
/// The grid must consist of positive, finite t.
std::vector<SweepRow> sweep(const ManifoldSpec& spec, const std::vector<double>& grid,
                            const QuadratureConfig& cfg = {});

/// CSV with header t,kl_numeric,kl_asym0,kl_asym1,kl_asym2,residual; all
/// numbers with 17 significant digits, failed rows as nan.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_csv(std::istream& in);

struct FitOptions {
    int order = 2;                  // 1..3
    bool pin_c0 = false;            // ĉ₀ = −d/2
    std::optional<double> pin_c1;   // requires order ≥ 2
};

struct FitReport {
    int d = 0;
    double vol = 1.0;
    int order = 0;
    std::vector<double> t;
    std::vector<double> rho;        // KL + (d/2)ln(2πt) − ln Vol
    std::vector<double> coefficients;
    std::vector<double> std_errors; // 0 for pinned coefficients
    std::vector<bool> pinned;
    std::vector<double> fit_residuals;  // rho − fitted polynomial
    double condition = 0.0;         // of the column-scaled weighted design
    double weighted_rms = 0.0;
};

/// Weighted least squares of rho(t) on {1, t, …, t^order} with weights 1/t².
/// Requires at least order + 2 rows with strictly increasing t > 0.
/// Throws ConditioningError on a rank-deficient design.
FitReport fit_coefficients(const std::vector<SweepRow>& rows, int d, double vol, const FitOptions& options);

/// d and Vol recovered from the asym0 column, which is −(d/2)ln(2πt) + ln Vol − d/2.
std::pair<int, double> infer_dimension_volume(const std::vector<SweepRow>& rows);

void to_json(nlohmann::json& j, const FitReport& r);

}  // namespace heatkl
