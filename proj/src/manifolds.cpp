#include "heatkl/manifolds.hpp"

#include "heatkl/errors.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace heatkl {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kTermCap = 200000;
// Safety factor applied to the geometric tail estimate.
constexpr double kTailSafety = 10.0;

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\n");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, const std::string& context) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw InvalidInput("manifold spec: bad number '" + text + "' in " + context);
    }
    if (used != text.size()) throw InvalidInput("manifold spec: bad number '" + text + "' in " + context);
    return v;
}

// Series bookkeeping shared by all spectral/image sums: b_next is the bound of
// the first neglected term and ratio the bound ratio after it. Ratios are
// non-increasing for every series used here, so the tail is geometric.
bool tail_converged(double b_next, double ratio, double envelope, double tol, double& tail_out) {
    if (b_next == 0.0) {
        tail_out = 0.0;
        return true;
    }
    if (!(ratio < 1.0)) return false;
    const double tail = kTailSafety * b_next / (1.0 - ratio) / envelope;
    if (tail <= tol) {
        tail_out = tail;
        return true;
    }
    return false;
}

void check_t(double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw InvalidInput("heat kernel: t must be positive and finite");
}

KernelEval wrapped_circle(double L, double t, double x, double tol) {
    const double norm = 1.0 / std::sqrt(2.0 * kPi * t);
    auto image = [&](int n) { return norm * std::exp(-(x + n * L) * (x + n * L) / (2.0 * t)); };
    KernelEval out;
    out.q = image(0);
    out.terms = 1;
    for (int n = 1; n <= kTermCap; ++n) {
        const double plus = image(n), minus = image(-n);
        out.q += plus + minus;
        out.terms += 2;
        const double next = image(n + 1) + image(-n - 1);
        const double after = image(n + 2) + image(-n - 2);
        const double ratio = next > 0.0 ? after / next : 0.0;
        if (tail_converged(next, ratio, out.q, tol, out.tail_bound)) return out;
    }
    throw AccuracyError("wrapped Gaussian: tolerance unreachable within term cap", out.q, 1.0);
}

KernelEval spectral_circle(double L, double t, double x, double tol) {
    const double w = 2.0 * kPi / L;
    auto bound = [&](int k) { return 2.0 / L * std::exp(-0.5 * (w * k) * (w * k) * t); };
    KernelEval out;
    out.q = 1.0 / L;
    out.terms = 1;
    double envelope = 1.0 / L;
    for (int k = 1; k <= kTermCap; ++k) {
        const double b = bound(k);
        out.q += b * std::cos(w * k * x);
        envelope += b;
        ++out.terms;
        const double next = bound(k + 1);
        const double ratio = next > 0.0 ? bound(k + 2) / next : 0.0;
        if (tail_converged(next, ratio, envelope, tol, out.tail_bound)) return out;
    }
    throw AccuracyError("circle spectral sum: tolerance unreachable within term cap", out.q, 1.0);
}

}  // namespace

ManifoldSpec make_sphere(int d, double radius) {
    ManifoldSpec s{Sphere{d, radius}};
    validate(s);
    return s;
}

ManifoldSpec make_torus(std::vector<double> lengths) {
    ManifoldSpec s{FlatTorus{std::move(lengths)}};
    validate(s);
    return s;
}

ManifoldSpec make_product(ManifoldSpec left, ManifoldSpec right) {
    ManifoldSpec s{Product{std::make_shared<const ManifoldSpec>(std::move(left)),
                           std::make_shared<const ManifoldSpec>(std::move(right))}};
    validate(s);
    return s;
}

void validate(const ManifoldSpec& spec) {
    if (const auto* s = std::get_if<Sphere>(&spec.shape)) {
        if (s->d < 1 || s->d > 3) throw InvalidInput("sphere: dimension must be 1, 2 or 3");
        if (!(s->radius > 0.0) || !std::isfinite(s->radius)) throw InvalidInput("sphere: radius must be positive");
    } else if (const auto* t = std::get_if<FlatTorus>(&spec.shape)) {
        if (t->lengths.empty()) throw InvalidInput("torus: need at least one axis length");
        for (double L : t->lengths)
            if (!(L > 0.0) || !std::isfinite(L)) throw InvalidInput("torus: lengths must be positive");
    } else {
        const auto& p = std::get<Product>(spec.shape);
        if (!p.left || !p.right) throw InvalidInput("product: missing factor");
        validate(*p.left);
        validate(*p.right);
    }
}

ManifoldSpec parse_manifold(const std::string& raw) {
    const std::string text = trim(raw);
    if (text.rfind("product(", 0) == 0) {
        if (text.back() != ')') throw InvalidInput("manifold spec: unterminated product(...)");
        const std::string inner = text.substr(8, text.size() - 9);
        int depth = 0;
        for (std::size_t i = 0; i < inner.size(); ++i) {
            if (inner[i] == '(') ++depth;
            if (inner[i] == ')') --depth;
            if (inner[i] == ';' && depth == 0)
                return make_product(parse_manifold(inner.substr(0, i)), parse_manifold(inner.substr(i + 1)));
        }
        throw InvalidInput("manifold spec: product needs two factors separated by ';'");
    }
    const auto colon = text.find(':');
    const std::string kind = trim(text.substr(0, colon));
    std::vector<std::pair<std::string, std::vector<std::string>>> fields;
    if (colon != std::string::npos) {
        std::stringstream ss(text.substr(colon + 1));
        std::string token;
        while (std::getline(ss, token, ',')) {
            token = trim(token);
            if (token.empty()) throw InvalidInput("manifold spec: empty field in '" + text + "'");
            const auto eq = token.find('=');
            if (eq == std::string::npos) {
                // continuation of a list-valued key, e.g. L=1,2
                if (fields.empty()) throw InvalidInput("manifold spec: expected key=value in '" + text + "'");
                fields.back().second.push_back(token);
            } else {
                fields.push_back({trim(token.substr(0, eq)), {trim(token.substr(eq + 1))}});
            }
        }
    }
    if (kind == "sphere") {
        Sphere s;
        for (const auto& [key, values] : fields) {
            if (values.size() != 1) throw InvalidInput("sphere: '" + key + "' takes a single value");
            const double v = parse_number(values.front(), text);
            if (key == "d") {
                if (v != std::floor(v)) throw InvalidInput("sphere: d must be an integer");
                s.d = int(v);
            } else if (key == "r") {
                s.radius = v;
            } else {
                throw InvalidInput("sphere: unknown key '" + key + "'");
            }
        }
        return make_sphere(s.d, s.radius);
    }
    if (kind == "torus") {
        int d = 0;
        std::vector<double> lengths;
        for (const auto& [key, values] : fields) {
            if (key == "d") {
                if (values.size() != 1) throw InvalidInput("torus: 'd' takes a single value");
                const double v = parse_number(values.front(), text);
                if (v != std::floor(v) || v < 1) throw InvalidInput("torus: d must be a positive integer");
                d = int(v);
            } else if (key == "L") {
                for (const auto& v : values) lengths.push_back(parse_number(v, text));
            } else {
                throw InvalidInput("torus: unknown key '" + key + "'");
            }
        }
        if (lengths.empty()) throw InvalidInput("torus: missing L");
        if (d > 0) {
            if (lengths.size() == 1)
                lengths.assign(std::size_t(d), lengths.front());
            else if (int(lengths.size()) != d)
                throw InvalidInput("torus: d disagrees with the number of lengths");
        }
        return make_torus(std::move(lengths));
    }
    throw InvalidInput("manifold spec: unknown manifold '" + kind + "'");
}

std::string to_string(const ManifoldSpec& spec) {
    if (const auto* s = std::get_if<Sphere>(&spec.shape))
        return "sphere:d=" + std::to_string(s->d) + ",r=" + format_double(s->radius);
    if (const auto* t = std::get_if<FlatTorus>(&spec.shape)) {
        std::string out = "torus:L=";
        for (std::size_t i = 0; i < t->lengths.size(); ++i) {
            if (i) out += ',';
            out += format_double(t->lengths[i]);
        }
        return out;
    }
    const auto& p = std::get<Product>(spec.shape);
    return "product(" + to_string(*p.left) + ";" + to_string(*p.right) + ")";
}

int dimension(const ManifoldSpec& spec) {
    if (const auto* s = std::get_if<Sphere>(&spec.shape)) return s->d;
    if (const auto* t = std::get_if<FlatTorus>(&spec.shape)) return int(t->lengths.size());
    const auto& p = std::get<Product>(spec.shape);
    return dimension(*p.left) + dimension(*p.right);
}

double volume(const ManifoldSpec& spec) {
    if (const auto* s = std::get_if<Sphere>(&spec.shape)) {
        const double n = s->d + 1.0;
        return 2.0 * std::pow(kPi, 0.5 * n) * std::pow(s->radius, s->d) / std::tgamma(0.5 * n);
    }
    if (const auto* t = std::get_if<FlatTorus>(&spec.shape)) {
        double v = 1.0;
        for (double L : t->lengths) v *= L;
        return v;
    }
    const auto& p = std::get<Product>(spec.shape);
    return volume(*p.left) * volume(*p.right);
}

CurvatureJet<double> curvature_jet(const ManifoldSpec& spec) {
    if (const auto* s = std::get_if<Sphere>(&spec.shape)) {
        if (s->d == 1) return flat_jet<double>(1);
        return constant_curvature_jet(1.0 / (s->radius * s->radius), s->d);
    }
    if (const auto* t = std::get_if<FlatTorus>(&spec.shape)) return flat_jet<double>(int(t->lengths.size()));
    const auto& p = std::get<Product>(spec.shape);
    return direct_sum_jet(curvature_jet(*p.left), curvature_jet(*p.right));
}

int point_arity(const ManifoldSpec& spec) {
    if (std::holds_alternative<Sphere>(spec.shape)) return 1;
    if (const auto* t = std::get_if<FlatTorus>(&spec.shape)) return int(t->lengths.size());
    const auto& p = std::get<Product>(spec.shape);
    return point_arity(*p.left) + point_arity(*p.right);
}

double sphere_eigenspace_dimension(int d, int l) {
    if (d < 1 || l < 0) throw InvalidInput("sphere_eigenspace_dimension: bad arguments");
    if (d == 1) return l == 0 ? 1.0 : 2.0;
    // (2l + d − 1)/(d − 1) · C(l + d − 2, d − 2)
    double binom = 1.0;
    for (int k = 1; k <= d - 2; ++k) binom = binom * (l + k) / k;
    return (2.0 * l + d - 1.0) / (d - 1.0) * binom;
}

KernelEval sphere_kernel(const Sphere& sphere, double t, double s, double tol) {
    validate(ManifoldSpec{sphere});
    check_t(t);
    const double r = sphere.radius;
    if (!(s >= 0.0) || s > kPi * r * (1.0 + 1e-12)) throw InvalidInput("sphere kernel: distance outside [0, πr]");
    if (!(tol > 0.0)) throw InvalidInput("heat kernel: tolerance must be positive");
    const int d = sphere.d;
    const double x = std::cos(std::min(s / r, kPi));
    const double decay = t / (2.0 * r * r);
    const double vol = volume(ManifoldSpec{sphere});
    const double lambda = 0.5 * (d - 1);

    auto bound = [&](int l) {
        return sphere_eigenspace_dimension(d, l) * std::exp(-double(l) * (l + d - 1) * decay) / vol;
    };

    // Normalized zonal functions G_l(x) = C_l^λ(x) / C_l^λ(1); Chebyshev T_l for λ = 0.
    double g_prev = 1.0, g_cur = x;           // λ = 0
    double c_prev = 1.0, c_cur = 2.0 * lambda * x;  // λ > 0, at x
    double n_prev = 1.0, n_cur = 2.0 * lambda;      // λ > 0, at 1

    KernelEval out;
    out.t = t;
    out.point = {s};
    double envelope = 0.0;
    for (int l = 0; l <= kTermCap; ++l) {
        double G;
        if (l == 0) {
            G = 1.0;
        } else if (lambda == 0.0) {
            if (l > 1) {
                const double next = 2.0 * x * g_cur - g_prev;
                g_prev = g_cur;
                g_cur = next;
            }
            G = g_cur;
        } else {
            if (l > 1) {
                const double k = l - 1;
                const double next_c = (2.0 * (k + lambda) * x * c_cur - (k + 2.0 * lambda - 1.0) * c_prev) / (k + 1.0);
                const double next_n = (2.0 * (k + lambda) * n_cur - (k + 2.0 * lambda - 1.0) * n_prev) / (k + 1.0);
                c_prev = c_cur;
                c_cur = next_c;
                n_prev = n_cur;
                n_cur = next_n;
            }
            G = c_cur / n_cur;
        }
        const double b = bound(l);
        out.q += b * G;
        envelope += b;
        out.terms = l + 1;
        const double next = bound(l + 1);
        const double ratio = next > 0.0 ? bound(l + 2) / next : 0.0;
        if (tail_converged(next, ratio, envelope, tol, out.tail_bound)) return out;
    }
    throw AccuracyError("sphere kernel: tolerance unreachable within term cap", out.q, 1.0);
}

KernelEval circle_kernel(double length, double t, double x, double tol, TorusSeries series) {
    check_t(t);
    if (!(length > 0.0)) throw InvalidInput("torus kernel: length must be positive");
    if (!(std::abs(x) <= 0.5 * length * (1.0 + 1e-12))) throw InvalidInput("torus kernel: |x| must not exceed L/2");
    if (!(tol > 0.0)) throw InvalidInput("heat kernel: tolerance must be positive");
    if (series == TorusSeries::automatic)
        series = t / (length * length) > kTorusCrossover ? TorusSeries::spectral : TorusSeries::wrapped;
    KernelEval out = series == TorusSeries::wrapped ? wrapped_circle(length, t, x, tol) : spectral_circle(length, t, x, tol);
    out.t = t;
    out.point = {x};
    return out;
}

KernelEval heat_kernel(const ManifoldSpec& spec, double t, std::span<const double> point, double tol,
                       TorusSeries series) {
    if (int(point.size()) != point_arity(spec)) throw InvalidInput("heat kernel: wrong number of point coordinates");
    if (const auto* s = std::get_if<Sphere>(&spec.shape)) return sphere_kernel(*s, t, point[0], tol);
    KernelEval out;
    out.t = t;
    out.point.assign(point.begin(), point.end());
    out.q = 1.0;
    if (const auto* tor = std::get_if<FlatTorus>(&spec.shape)) {
        for (std::size_t a = 0; a < tor->lengths.size(); ++a) {
            const KernelEval axis = circle_kernel(tor->lengths[a], t, point[a], tol, series);
            out.q *= axis.q;
            out.terms += axis.terms;
            out.tail_bound += axis.tail_bound;
        }
        return out;
    }
    const auto& p = std::get<Product>(spec.shape);
    const auto n_left = std::size_t(point_arity(*p.left));
    const KernelEval a = heat_kernel(*p.left, t, point.subspan(0, n_left), tol, series);
    const KernelEval b = heat_kernel(*p.right, t, point.subspan(n_left), tol, series);
    out.q = a.q * b.q;
    out.terms = a.terms + b.terms;
    out.tail_bound = a.tail_bound + b.tail_bound;
    return out;
}

double sqrt_det_g_normal(const Sphere& sphere, double s) {
    validate(ManifoldSpec{sphere});
    if (!(s >= 0.0) || !(s < kPi * sphere.radius)) throw InvalidInput("sqrt_det_g_normal: s must lie in [0, πr)");
    if (sphere.d == 1) return 1.0;
    const double theta = s / sphere.radius;
    const double ratio = theta == 0.0 ? 1.0 : std::sin(theta) / theta;
    return std::pow(ratio, sphere.d - 1);
}

}  // namespace heatkl
