#include "heatkl/numeric.hpp"

#include "heatkl/errors.hpp"
#include "heatkl/expansion.hpp"
#include "heatkl/quadrature.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

namespace heatkl {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kClamp = 1e-300;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Accumulated {
    double kl = 0.0;
    double mass = 0.0;
};

// Unit-sphere surface area of S^{n}.
double unit_sphere_area(int n) {
    const double m = n + 1.0;
    return 2.0 * std::pow(kPi, 0.5 * m) / std::tgamma(0.5 * m);
}

void append_panels(RadialRule& rule, double a, double b, int panels, int nodes) {
    if (!(b > a)) return;
    const GaussLegendre& gl = gauss_legendre(nodes);
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        for (int k = 0; k < nodes; ++k) {
            rule.nodes.push_back(lo + 0.5 * h * (gl.nodes[k] + 1.0));
            rule.weights.push_back(0.5 * h * gl.weights[k]);
        }
    }
}

Accumulated integrate_sphere(const Sphere& s, double t, const QuadratureConfig& cfg, int panels) {
    const double r = s.radius;
    const double vol = volume(ManifoldSpec{s});
    const double area = unit_sphere_area(s.d - 1) * std::pow(r, s.d - 1);
    const RadialRule rule = radial_rule(t, kPi * r, cfg, panels);
    Accumulated acc;
    for (std::size_t n = 0; n < rule.nodes.size(); ++n) {
        const double x = rule.nodes[n];
        const double a = area * std::pow(std::sin(x / r), s.d - 1);
        const double q = std::max(sphere_kernel(s, t, x, cfg.kernel_tol).q, kClamp);
        acc.kl += rule.weights[n] * a * q * std::log(q * vol);
        acc.mass += rule.weights[n] * a * q;
    }
    return acc;
}

Accumulated integrate_circle(double L, double t, const QuadratureConfig& cfg, int panels) {
    const RadialRule rule = radial_rule(t, 0.5 * L, cfg, panels);
    Accumulated acc;
    for (std::size_t n = 0; n < rule.nodes.size(); ++n) {
        const double q = std::max(circle_kernel(L, t, rule.nodes[n], cfg.kernel_tol).q, kClamp);
        acc.kl += 2.0 * rule.weights[n] * q * std::log(q * L);
        acc.mass += 2.0 * rule.weights[n] * q;
    }
    return acc;
}

// KL values add over factors, masses multiply.
Accumulated integrate(const ManifoldSpec& spec, double t, const QuadratureConfig& cfg, int panels) {
    if (const auto* s = std::get_if<Sphere>(&spec.shape)) return integrate_sphere(*s, t, cfg, panels);
    Accumulated acc{0.0, 1.0};
    auto combine = [&acc](const Accumulated& f) {
        acc.kl += f.kl;
        acc.mass *= f.mass;
    };
    if (const auto* tor = std::get_if<FlatTorus>(&spec.shape)) {
        for (double L : tor->lengths) combine(integrate_circle(L, t, cfg, panels));
        return acc;
    }
    const auto& p = std::get<Product>(spec.shape);
    combine(integrate(*p.left, t, cfg, panels));
    combine(integrate(*p.right, t, cfg, panels));
    return acc;
}

std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_cell(const std::string& cell) {
    if (cell == "nan") return kNaN;
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &used);
    } catch (const std::exception&) {
        throw InvalidInput("sweep CSV: bad number '" + cell + "'");
    }
    if (used != cell.size()) throw InvalidInput("sweep CSV: bad number '" + cell + "'");
    return v;
}

}  // namespace

void QuadratureConfig::validate() const {
    if (panels < 1 || nodes < 1) throw InvalidInput("quadrature: panels and nodes must be positive");
    if (!(near_scale > 0.0)) throw InvalidInput("quadrature: near_scale must be positive");
    if (!(tolerance > 0.0) || tolerance > 1e-4) throw InvalidInput("quadrature: tolerance must lie in (0, 1e-4]");
    if (!(kernel_tol > 0.0)) throw InvalidInput("quadrature: kernel tolerance must be positive");
}

RadialRule radial_rule(double t, double extent, const QuadratureConfig& cfg, int panels) {
    RadialRule rule;
    const double near_end = std::min(cfg.near_scale * std::sqrt(t), extent);
    append_panels(rule, 0.0, near_end, panels, cfg.nodes);
    append_panels(rule, near_end, extent, panels, cfg.nodes);
    return rule;
}

KLEstimate kl_numeric_estimate(const ManifoldSpec& spec, double t, const QuadratureConfig& cfg) {
    cfg.validate();
    validate(spec);
    if (!(t > 0.0) || !std::isfinite(t)) throw InvalidInput("kl_numeric: t must be positive and finite");
    const double coarse = integrate(spec, t, cfg, cfg.panels).kl;
    const double fine = integrate(spec, t, cfg, 2 * cfg.panels).kl;
    KLEstimate est{fine, std::abs(fine - coarse)};
    if (!(est.error <= cfg.tolerance))
        throw AccuracyError("kl_numeric: quadrature tolerance not met", est.value, est.error);
    return est;
}

double kl_numeric(const ManifoldSpec& spec, double t, const QuadratureConfig& cfg) {
    return kl_numeric_estimate(spec, t, cfg).value;
}

double total_mass(const ManifoldSpec& spec, double t, const QuadratureConfig& cfg) {
    cfg.validate();
    validate(spec);
    if (!(t > 0.0) || !std::isfinite(t)) throw InvalidInput("total_mass: t must be positive and finite");
    return integrate(spec, t, cfg, 2 * cfg.panels).mass;
}

std::vector<double> log_grid(double tmin, double tmax, int n) {
    if (n < 0) throw InvalidInput("log_grid: negative point count");
    if (n == 0) return {};
    if (!(tmin > 0.0) || !(tmax >= tmin)) throw InvalidInput("log_grid: need 0 < tmin <= tmax");
    if (n > 1 && !(tmax > tmin)) throw InvalidInput("log_grid: need tmin < tmax for several points");
    std::vector<double> g(static_cast<std::size_t>(n));
    const double a = std::log(tmin), b = std::log(tmax);
    for (int k = 0; k < n; ++k) g[std::size_t(k)] = n == 1 ? tmin : std::exp(a + (b - a) * k / (n - 1));
    if (n > 1) g.back() = tmax;
    return g;
}

unsigned worker_threads() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("HEATKL_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) n = unsigned(v);
    }
    return n;
}

std::vector<SweepRow> sweep(const ManifoldSpec& spec, const std::vector<double>& grid, const QuadratureConfig& cfg) {
    cfg.validate();
    validate(spec);
    for (double t : grid)
        if (!(t > 0.0) || !std::isfinite(t)) throw InvalidInput("sweep: grid values must be positive and finite");

    const int d = dimension(spec);
    const double vol = volume(spec);
    const ExpansionResult coeffs = expand(curvature_jet(spec), vol, ExpansionMethod::closed_form);

    std::vector<SweepRow> rows(grid.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k = next++; k < grid.size(); k = next++) {
            SweepRow& row = rows[k];
            row.t = grid[k];
            for (int i = 0; i < 3; ++i) row.asym[i] = kl_asymptotic(row.t, d, vol, coeffs, i);
            try {
                row.kl = kl_numeric(spec, row.t, cfg);
                row.residual = row.kl + 0.5 * d * std::log(2.0 * kPi * row.t) - std::log(vol);
            } catch (const std::exception& e) {
                row.kl = row.residual = kNaN;
                row.error = e.what();
            }
        }
    };
    const unsigned n_threads = std::min<unsigned>(worker_threads(), unsigned(std::max<std::size_t>(1, grid.size())));
    if (n_threads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < n_threads; ++k) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) { return a.t < b.t; });
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "t,kl_numeric,kl_asym0,kl_asym1,kl_asym2,residual\n";
    for (const auto& r : rows)
        out << fmt(r.t) << ',' << fmt(r.kl) << ',' << fmt(r.asym[0]) << ',' << fmt(r.asym[1]) << ','
            << fmt(r.asym[2]) << ',' << fmt(r.residual) << '\n';
}

std::vector<SweepRow> read_sweep_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput("sweep CSV: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t,kl_numeric,kl_asym0,kl_asym1,kl_asym2,residual") throw InvalidInput("sweep CSV: unexpected header");
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(parse_cell(cell));
        if (cells.size() != 6) throw InvalidInput("sweep CSV: expected 6 columns");
        SweepRow r;
        r.t = cells[0];
        r.kl = cells[1];
        for (int i = 0; i < 3; ++i) r.asym[i] = cells[std::size_t(2 + i)];
        r.residual = cells[5];
        if (std::isnan(r.kl)) r.error = "missing value";
        rows.push_back(r);
    }
    return rows;
}

FitReport fit_coefficients(const std::vector<SweepRow>& rows, int d, double vol, const FitOptions& options) {
    const int order = options.order;
    if (order < 1 || order > 3) throw InvalidInput("fit: order must be 1, 2 or 3");
    if (d < 1) throw InvalidInput("fit: dimension must be positive");
    if (!(vol > 0.0)) throw InvalidInput("fit: volume must be positive");
    if (options.pin_c1 && order < 2) throw InvalidInput("fit: pinning c1 needs order >= 2");
    if (int(rows.size()) < order + 2) throw InvalidInput("fit: need at least order + 2 rows");
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (!(rows[k].t > 0.0) || !std::isfinite(rows[k].t)) throw InvalidInput("fit: t must be positive");
        if (k > 0 && !(rows[k].t > rows[k - 1].t)) throw InvalidInput("fit: grid must be strictly increasing");
        if (!std::isfinite(rows[k].kl)) throw InvalidInput("fit: row without a KL value");
    }

    FitReport rep;
    rep.d = d;
    rep.vol = vol;
    rep.order = order;
    rep.coefficients.assign(std::size_t(order + 1), 0.0);
    rep.std_errors.assign(std::size_t(order + 1), 0.0);
    rep.pinned.assign(std::size_t(order + 1), false);
    if (options.pin_c0) {
        rep.pinned[0] = true;
        rep.coefficients[0] = -0.5 * d;
    }
    if (options.pin_c1) {
        rep.pinned[1] = true;
        rep.coefficients[1] = *options.pin_c1;
    }
    std::vector<int> free;
    for (int j = 0; j <= order; ++j)
        if (!rep.pinned[std::size_t(j)]) free.push_back(j);

    const auto n = Eigen::Index(rows.size());
    const auto p = Eigen::Index(free.size());
    Eigen::MatrixXd A(n, p);
    Eigen::VectorXd b(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double t = rows[std::size_t(k)].t;
        const double rho = rows[std::size_t(k)].kl + 0.5 * d * std::log(2.0 * kPi * t) - std::log(vol);
        rep.t.push_back(t);
        rep.rho.push_back(rho);
        double target = rho;
        for (int j = 0; j <= order; ++j)
            if (rep.pinned[std::size_t(j)]) target -= rep.coefficients[std::size_t(j)] * std::pow(t, j);
        const double sw = 1.0 / t;  // sqrt of the 1/t² weight
        b[k] = sw * target;
        for (Eigen::Index c = 0; c < p; ++c) A(k, c) = sw * std::pow(t, free[std::size_t(c)]);
    }

    Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(p);
    if (p > 0) {
        const Eigen::VectorXd scale = A.colwise().norm().transpose();
        for (Eigen::Index c = 0; c < p; ++c)
            if (!(scale[c] > 0.0)) throw ConditioningError("fit: zero design column", std::numeric_limits<double>::infinity());
        const Eigen::MatrixXd As = A * scale.cwiseInverse().asDiagonal();
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(As, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::VectorXd& sv = svd.singularValues();
        rep.condition = sv[p - 1] > 0.0 ? sv[0] / sv[p - 1] : std::numeric_limits<double>::infinity();
        if (!(sv[p - 1] > 1e-12 * sv[0]))
            throw ConditioningError("fit: rank-deficient design matrix", rep.condition);
        const Eigen::VectorXd ys = svd.solve(b);
        coeffs = ys.cwiseQuotient(scale);

        const Eigen::VectorXd res = b - A * coeffs;
        const double dof = double(n - p);
        const double sigma2 = dof > 0 ? res.squaredNorm() / dof : 0.0;
        // cov = σ² V Σ^{-2} Vᵀ in scaled variables
        const Eigen::MatrixXd VS = svd.matrixV() * sv.cwiseInverse().asDiagonal();
        const Eigen::MatrixXd cov = sigma2 * VS * VS.transpose();
        for (Eigen::Index c = 0; c < p; ++c) {
            rep.coefficients[std::size_t(free[std::size_t(c)])] = coeffs[c];
            rep.std_errors[std::size_t(free[std::size_t(c)])] = std::sqrt(std::max(cov(c, c), 0.0)) / scale[c];
        }
    }

    double wss = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double t = rep.t[std::size_t(k)];
        double fitted = 0.0;
        for (int j = order; j >= 0; --j) fitted = fitted * t + rep.coefficients[std::size_t(j)];
        const double r = rep.rho[std::size_t(k)] - fitted;
        rep.fit_residuals.push_back(r);
        wss += r * r / (t * t);
    }
    rep.weighted_rms = std::sqrt(wss / double(n));
    return rep;
}

std::pair<int, double> infer_dimension_volume(const std::vector<SweepRow>& rows) {
    if (rows.size() < 2) throw InvalidInput("infer dimension: need at least two rows");
    // asym0 = −(d/2)(ln(2πt) + 1) + ln Vol
    const double x0 = std::log(2.0 * kPi * rows.front().t) + 1.0;
    const double x1 = std::log(2.0 * kPi * rows.back().t) + 1.0;
    if (!(x1 != x0)) throw InvalidInput("infer dimension: need distinct t values");
    const double half_d = -(rows.back().asym[0] - rows.front().asym[0]) / (x1 - x0);
    const double d_real = 2.0 * half_d;
    const int d = int(std::lround(d_real));
    if (d < 1 || std::abs(d_real - d) > 1e-6) throw InvalidInput("infer dimension: asym0 column is not consistent");
    const double log_vol = rows.front().asym[0] + 0.5 * d * x0;
    return {d, std::exp(log_vol)};
}

void to_json(nlohmann::json& j, const FitReport& r) {
    j = nlohmann::json{{"d", r.d},
                       {"vol", r.vol},
                       {"order", r.order},
                       {"t", r.t},
                       {"rho", r.rho},
                       {"coefficients", r.coefficients},
                       {"std_errors", r.std_errors},
                       {"pinned", r.pinned},
                       {"fit_residuals", r.fit_residuals},
                       {"condition", r.condition},
                       {"weighted_rms", r.weighted_rms}};
}

}  // namespace heatkl
