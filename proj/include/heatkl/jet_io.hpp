#pragma once

// JSON layout shared by curvature and parametrix jets:
//   4-tensors  sparse list of [i, j, k, l, value] (0-based, nonzero entries)
//   matrices   dense row-major list
//   vectors    plain list

#include "heatkl/parametrix.hpp"
#include "heatkl/tensors.hpp"

#include "json.hpp"

#include <string>

namespace heatkl {

nlohmann::json jet_to_json(const CurvatureJet<double>& jet);

/// Parses a jet. `riemann` is required; `sc_grad`, `ric_d2` default to zero
/// and `sc_hess` to the trace of `ric_d2`. Derived fields are recomputed, and
/// supplied `ric`, `sc` or `sc_hess` that disagree with them are rejected.
/// The Bianchi flag is set when both identities hold to 1e−12.
CurvatureJet<double> jet_from_json(const nlohmann::json& j);

CurvatureJet<double> read_jet_file(const std::string& path);
void write_jet_file(const std::string& path, const CurvatureJet<double>& jet);

nlohmann::json parametrix_to_json(const ParametrixJet<double>& p);
ParametrixJet<double> parametrix_from_json(const nlohmann::json& j);

}  // namespace heatkl
