#include "heatkl/jet_io.hpp"

#include "heatkl/errors.hpp"

#include <cmath>
#include <fstream>

namespace heatkl {

namespace {

constexpr double kConsistencyTol = 1e-12;

nlohmann::json sparse_tensor(const Tensor4<double>& T) {
    auto out = nlohmann::json::array();
    const int d = T.dim();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l)
                    if (T(i, j, k, l) != 0.0) out.push_back({i, j, k, l, T(i, j, k, l)});
    return out;
}

Tensor4<double> parse_sparse_tensor(const nlohmann::json& j, int d, const char* name) {
    Tensor4<double> T(d);
    if (!j.is_array()) throw InvalidInput(std::string(name) + ": expected a list of [i,j,k,l,value]");
    for (const auto& e : j) {
        if (!e.is_array() || e.size() != 5) throw InvalidInput(std::string(name) + ": entries must be [i,j,k,l,value]");
        int idx[4];
        for (int n = 0; n < 4; ++n) {
            idx[n] = e[std::size_t(n)].get<int>();
            if (idx[n] < 0 || idx[n] >= d) throw InvalidInput(std::string(name) + ": index out of range");
        }
        T(idx[0], idx[1], idx[2], idx[3]) += e[4].get<double>();
    }
    return T;
}

nlohmann::json dense_matrix(const Matrix<double>& M) {
    auto out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j) out.push_back(M(i, j));
    return out;
}

Matrix<double> parse_dense_matrix(const nlohmann::json& j, int d, const char* name) {
    if (!j.is_array() || int(j.size()) != d * d)
        throw InvalidInput(std::string(name) + ": expected a dense row-major list of dim*dim values");
    Matrix<double> M(d, d);
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) M(i, k) = j[std::size_t(i * d + k)].get<double>();
    return M;
}

Vector<double> parse_vector(const nlohmann::json& j, int d, const char* name) {
    if (!j.is_array() || int(j.size()) != d) throw InvalidInput(std::string(name) + ": expected dim values");
    Vector<double> v(d);
    for (int i = 0; i < d; ++i) v[i] = j[std::size_t(i)].get<double>();
    return v;
}

nlohmann::json vector_json(const Vector<double>& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

int parse_dim(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("dim")) throw InvalidInput("jet: missing 'dim'");
    const int d = j.at("dim").get<int>();
    if (d < 1) throw InvalidInput("jet: 'dim' must be positive");
    return d;
}

}  // namespace

nlohmann::json jet_to_json(const CurvatureJet<double>& jet) {
    return {{"dim", jet.dim},
            {"riemann", sparse_tensor(jet.riemann)},
            {"sc_grad", vector_json(jet.sc_grad)},
            {"sc_hess", dense_matrix(jet.sc_hess)},
            {"ric_d2", sparse_tensor(jet.ric_d2)},
            {"ric", dense_matrix(jet.ric)},
            {"sc", jet.sc}};
}

CurvatureJet<double> jet_from_json(const nlohmann::json& j) {
    try {
        const int d = parse_dim(j);
        if (!j.contains("riemann")) throw InvalidInput("jet: missing 'riemann'");
        Tensor4<double> R = parse_sparse_tensor(j.at("riemann"), d, "riemann");
        Vector<double> grad = j.contains("sc_grad") ? parse_vector(j.at("sc_grad"), d, "sc_grad")
                                                    : Vector<double>(Vector<double>::Zero(d));
        Tensor4<double> d2 = j.contains("ric_d2") ? parse_sparse_tensor(j.at("ric_d2"), d, "ric_d2") : Tensor4<double>(d);

        CurvatureJet<double> jet = make_curvature_jet(std::move(R), std::move(grad), std::move(d2), false);
        auto mismatch = [](const Matrix<double>& a, const Matrix<double>& b) {
            return (a - b).cwiseAbs().maxCoeff() > kConsistencyTol * (1.0 + b.cwiseAbs().maxCoeff());
        };
        if (j.contains("sc_hess") && mismatch(parse_dense_matrix(j.at("sc_hess"), d, "sc_hess"), jet.sc_hess))
            throw InvalidInput("jet: 'sc_hess' disagrees with the trace of 'ric_d2'");
        if (j.contains("ric") && mismatch(parse_dense_matrix(j.at("ric"), d, "ric"), jet.ric))
            throw InvalidInput("jet: 'ric' disagrees with the contraction of 'riemann'");
        if (j.contains("sc") && std::abs(j.at("sc").get<double>() - jet.sc) > kConsistencyTol * (1.0 + std::abs(jet.sc)))
            throw InvalidInput("jet: 'sc' disagrees with the trace of the Ricci tensor");

        validate_jet(jet, kConsistencyTol);
        const auto e = jet_defects(jet);
        jet.bianchi = e.bianchi <= kConsistencyTol && e.contracted_bianchi <= kConsistencyTol;
        return jet;
    } catch (const nlohmann::json::exception& ex) {
        throw InvalidInput(std::string("jet: malformed JSON: ") + ex.what());
    }
}

CurvatureJet<double> read_jet_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open jet file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw InvalidInput("jet file '" + path + "': " + ex.what());
    }
    return jet_from_json(j);
}

void write_jet_file(const std::string& path, const CurvatureJet<double>& jet) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write jet file '" + path + "'");
    out << jet_to_json(jet).dump(2) << '\n';
}

nlohmann::json parametrix_to_json(const ParametrixJet<double>& p) {
    return {{"dim", p.dim},
            {"E2", dense_matrix(p.E2)},
            {"E4", sparse_tensor(p.E4)},
            {"A2", dense_matrix(p.A2)},
            {"A4", sparse_tensor(p.A4)},
            {"B0", p.B0},
            {"B1", vector_json(p.B1)},
            {"B2", dense_matrix(p.B2)},
            {"C0", p.C0}};
}

ParametrixJet<double> parametrix_from_json(const nlohmann::json& j) {
    try {
        ParametrixJet<double> p;
        p.dim = parse_dim(j);
        const int d = p.dim;
        p.E2 = parse_dense_matrix(j.at("E2"), d, "E2");
        p.E4 = parse_sparse_tensor(j.at("E4"), d, "E4");
        p.A2 = parse_dense_matrix(j.at("A2"), d, "A2");
        p.A4 = parse_sparse_tensor(j.at("A4"), d, "A4");
        p.B0 = j.at("B0").get<double>();
        p.B1 = parse_vector(j.at("B1"), d, "B1");
        p.B2 = parse_dense_matrix(j.at("B2"), d, "B2");
        p.C0 = j.at("C0").get<double>();
        return p;
    } catch (const nlohmann::json::exception& ex) {
        throw InvalidInput(std::string("parametrix jet: malformed JSON: ") + ex.what());
    }
}

}  // namespace heatkl
