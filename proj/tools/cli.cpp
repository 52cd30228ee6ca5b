#include "cli.hpp"

#include "heatkl/acceptance.hpp"
#include "heatkl/errors.hpp"
#include "heatkl/expansion.hpp"
#include "heatkl/jet_io.hpp"
#include "heatkl/manifolds.hpp"
#include "heatkl/numeric.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace heatkl {

namespace {

std::string fmt17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Signals a documented exit code with a one-line message.
struct CliFailure {
    int code;
    std::string message;
};

void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw CliFailure{kExitUsage, "cannot open '" + path + "' for writing"};
    f << text;
    if (!f) throw CliFailure{kExitUsage, "write to '" + path + "' failed"};
}

struct QuadFlags {
    QuadratureConfig cfg;

    void attach(CLI::App* sub) {
        sub->add_option("--tol", cfg.kernel_tol, "Kernel series tolerance")->capture_default_str();
        sub->add_option("--panels", cfg.panels, "Quadrature panels per region")->capture_default_str();
        sub->add_option("--nodes", cfg.nodes, "Gauss-Legendre nodes per panel")->capture_default_str();
        sub->add_option("--near-scale", cfg.near_scale, "Near region width in units of sqrt(t)")->capture_default_str();
        sub->add_option("--quad-tol", cfg.tolerance, "Quadrature self-convergence tolerance")->capture_default_str();
    }
};

int cmd_coeffs(const std::string& manifold, const std::string& jet_path, double vol_flag, bool vol_given,
               const std::string& method, std::ostream& out) {
    CurvatureJet<double> jet;
    double vol = 1.0;
    if (!manifold.empty()) {
        if (vol_given) throw CliFailure{kExitUsage, "--vol applies to --jet input only"};
        const ManifoldSpec spec = parse_manifold(manifold);
        jet = curvature_jet(spec);
        vol = volume(spec);
    } else {
        jet = read_jet_file(jet_path);
        vol = vol_flag;
    }
    const bool both = method == "both";
    const ExpansionResult closed = expand(jet, vol, ExpansionMethod::closed_form);
    nlohmann::json j;
    int code = kExitOk;
    if (method == "wick") {
        j = expand(jet, vol, ExpansionMethod::wick);
    } else {
        j = closed;
    }
    if (both) {
        const ExpansionResult wick = expand(jet, vol, ExpansionMethod::wick);
        double disc = 0.0;
        for (std::size_t i = 0; i < closed.c.size(); ++i) disc = std::max(disc, std::abs(closed.c[i] - wick.c[i]));
        j["method"] = "both";
        j["c_wick"] = wick.c;
        j["discrepancy"] = disc;
        if (!(disc <= 1e-8)) code = kExitInconsistent;
    }
    out << j.dump(2) << '\n';
    return code;
}

int cmd_kernel(const std::string& manifold, double t, const std::vector<double>& point, double tol,
               const std::string& series, std::ostream& out) {
    const ManifoldSpec spec = parse_manifold(manifold);
    const TorusSeries mode = series == "wrapped"    ? TorusSeries::wrapped
                             : series == "spectral" ? TorusSeries::spectral
                                                    : TorusSeries::automatic;
    const KernelEval k = heat_kernel(spec, t, point, tol, mode);
    nlohmann::json j{{"manifold", to_string(spec)}, {"t", k.t},         {"point", k.point},
                     {"q", k.q},                    {"terms", k.terms}, {"tail_bound", k.tail_bound}};
    out << j.dump(2) << '\n';
    return kExitOk;
}

int cmd_fit(const std::string& in_path, int order, bool pin_c0, const std::string& pin_c1,
            const std::string& manifold, double tmin, double tmax, const std::string& out_path, std::ostream& out) {
    std::vector<SweepRow> rows;
    {
        std::ifstream f(in_path);
        if (!f) throw CliFailure{kExitUsage, "cannot open '" + in_path + "'"};
        rows = read_sweep_csv(f);
    }
    std::erase_if(rows, [&](const SweepRow& r) { return r.t < tmin || r.t > tmax; });
    int d = 0;
    double vol = 1.0;
    if (!manifold.empty()) {
        const ManifoldSpec spec = parse_manifold(manifold);
        d = dimension(spec);
        vol = volume(spec);
    } else {
        std::tie(d, vol) = infer_dimension_volume(rows);
    }
    FitOptions opts{order, pin_c0, std::nullopt};
    if (!pin_c1.empty()) {
        if (pin_c1 == "sequential") {
            // c1 from the order-2 fit with c0 pinned
            opts.pin_c1 = fit_coefficients(rows, d, vol, FitOptions{2, true, std::nullopt}).coefficients[1];
        } else {
            std::size_t used = 0;
            try {
                opts.pin_c1 = std::stod(pin_c1, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != pin_c1.size())
                throw CliFailure{kExitUsage, "--pin-c1 expects a number or 'sequential'"};
        }
    }
    const FitReport rep = fit_coefficients(rows, d, vol, opts);
    const nlohmann::json j = rep;
    emit(j.dump(2) + "\n", out_path, out);
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Small-time relative entropy of Riemannian heat kernels"};
    app.name("heatkl");
    app.require_subcommand(1);

    // coeffs
    auto* coeffs = app.add_subcommand("coeffs", "Expansion coefficients c0..c2 as JSON");
    std::string manifold, jet_path, method = "closed";
    double vol = 1.0;
    auto* opt_manifold = coeffs->add_option("--manifold", manifold, "Manifold spec, e.g. sphere:d=2,r=1");
    auto* opt_jet = coeffs->add_option("--jet", jet_path, "Curvature jet JSON file")->check(CLI::ExistingFile);
    opt_manifold->excludes(opt_jet);
    auto* opt_vol = coeffs->add_option("--vol", vol, "Volume used with --jet")->capture_default_str();
    coeffs->add_option("--method", method, "closed, wick or both")
        ->check(CLI::IsMember({"closed", "wick", "both"}))
        ->capture_default_str();

    // kernel
    auto* kernel = app.add_subcommand("kernel", "Heat kernel value");
    std::string k_manifold, series = "auto";
    double k_t = 0.0, k_tol = kDefaultKernelTol;
    std::vector<double> point;
    kernel->add_option("--manifold", k_manifold, "Manifold spec")->required();
    kernel->add_option("--t", k_t, "Time")->required();
    kernel->add_option("--point", point, "Geodesic distance (sphere) or displacements")->required()->delimiter(',');
    kernel->add_option("--tol", k_tol, "Kernel series tolerance")->capture_default_str();
    kernel->add_option("--series", series, "Torus series: auto, wrapped or spectral")
        ->check(CLI::IsMember({"auto", "wrapped", "spectral"}))
        ->capture_default_str();

    // kl
    auto* kl = app.add_subcommand("kl", "Numerical relative entropy at one t");
    std::string kl_manifold;
    double kl_t = 0.0;
    QuadFlags kl_quad;
    kl->add_option("--manifold", kl_manifold, "Manifold spec")->required();
    kl->add_option("--t", kl_t, "Time")->required();
    kl_quad.attach(kl);

    // sweep
    auto* sw = app.add_subcommand("sweep", "CSV table of numeric and asymptotic KL");
    std::string sw_manifold, sw_out;
    double sw_tmin = 1e-3, sw_tmax = 5e-2;
    int sw_points = 20;
    QuadFlags sw_quad;
    sw->add_option("--manifold", sw_manifold, "Manifold spec")->required();
    sw->add_option("--tmin", sw_tmin, "Smallest t")->capture_default_str();
    sw->add_option("--tmax", sw_tmax, "Largest t")->capture_default_str();
    sw->add_option("--points", sw_points, "Number of log-spaced points")->capture_default_str();
    sw->add_option("--out", sw_out, "Output path (default: standard output)");
    sw_quad.attach(sw);

    // fit
    auto* fit = app.add_subcommand("fit", "Least-squares coefficients from a sweep CSV");
    std::string fit_in, fit_pin_c1, fit_manifold, fit_out;
    int fit_order = 2;
    bool fit_pin_c0 = false;
    double fit_tmin = 0.0, fit_tmax = HUGE_VAL;
    fit->add_option("--in", fit_in, "Sweep CSV")->required();
    fit->add_option("--order", fit_order, "Polynomial order 1..3")->check(CLI::Range(1, 3))->capture_default_str();
    fit->add_flag("--pin-c0", fit_pin_c0, "Fix c0 = -d/2");
    fit->add_option("--pin-c1", fit_pin_c1, "Fix c1 to a value, or 'sequential' to take it from a pinned order-2 fit");
    fit->add_option("--manifold", fit_manifold, "Manifold spec supplying d and Vol (default: inferred from the CSV)");
    fit->add_option("--tmin", fit_tmin, "Fit window lower bound");
    fit->add_option("--tmax", fit_tmax, "Fit window upper bound");
    fit->add_option("--out", fit_out, "Output path (default: standard output)");

    // validate
    auto* val = app.add_subcommand("validate", "Run the acceptance checks");
    bool quick = false, flip = false;
    val->add_flag("--quick", quick, "Fast subset");
    val->add_flag("--inject-e4-sign-flip", flip)->group("");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*coeffs) {
            if (manifold.empty() == jet_path.empty())
                throw CliFailure{kExitUsage, "coeffs needs exactly one of --manifold or --jet"};
            return cmd_coeffs(manifold, jet_path, vol, opt_vol->count() > 0, method, out);
        }
        if (*kernel) return cmd_kernel(k_manifold, k_t, point, k_tol, series, out);
        if (*kl) {
            out << fmt17(kl_numeric(parse_manifold(kl_manifold), kl_t, kl_quad.cfg)) << '\n';
            return kExitOk;
        }
        if (*sw) {
            const ManifoldSpec spec = parse_manifold(sw_manifold);
            const auto rows = sweep(spec, log_grid(sw_tmin, sw_tmax, sw_points), sw_quad.cfg);
            std::ostringstream csv;
            write_sweep_csv(csv, rows);
            emit(csv.str(), sw_out, out);
            int code = kExitOk;
            for (const auto& r : rows)
                if (r.error) {
                    err << "heatkl: t=" << fmt17(r.t) << ": " << *r.error << '\n';
                    code = kExitNumeric;
                }
            return code;
        }
        if (*fit)
            return cmd_fit(fit_in, fit_order, fit_pin_c0, fit_pin_c1, fit_manifold, fit_tmin, fit_tmax, fit_out, out);
        if (*val) {
            const auto results = run_acceptance(AcceptanceOptions{quick, flip});
            return print_acceptance(out, results) ? kExitOk : kExitValidation;
        }
    } catch (const CliFailure& f) {
        err << "heatkl: " << f.message << '\n';
        return f.code;
    } catch (const InvalidInput& e) {
        err << "heatkl: " << e.what() << '\n';
        return kExitUsage;
    } catch (const nlohmann::json::exception& e) {
        err << "heatkl: " << e.what() << '\n';
        return kExitUsage;
    } catch (const AccuracyError& e) {
        err << "heatkl: " << e.what() << " (estimate " << fmt17(e.estimate()) << ", achieved " << fmt17(e.achieved())
            << ")\n";
        return kExitNumeric;
    } catch (const ConditioningError& e) {
        err << "heatkl: " << e.what() << " (condition " << fmt17(e.condition()) << ")\n";
        return kExitNumeric;
    } catch (const UnsupportedOrder& e) {
        err << "heatkl: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace heatkl
