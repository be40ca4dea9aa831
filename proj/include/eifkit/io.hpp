#pragma once

// JSON encodings of distributions, parameter specs and run configs, and the
// CSV layout of an influence-function table. Every parse failure throws
// ConfigError.
//
// Distribution, inline form:
//   {"variables": [{"name": "W", "levels": [0, 1, 2], "role": "covariate"}, ...],
//    "factors": [{"child": "W", "rows": [{"parents": [], "probs": [...]}]},
//                {"child": "A", "rows": [{"parents": [0], "probs": [...]}, ...]}, ...],
//    "positivity_floor": 0.001}
// Factors follow variable order; "parents" holds the level values of every
// earlier variable and each configuration appears exactly once. "joint" (a
// flat table over the outcome space, variable 0 most significant) may
// replace "factors". A string is read as the path of a file holding the
// inline form; {"generator": {"shape": ..., "seed": ...}}
// draws one of the generator shapes.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "eifkit/dist.hpp"
#include "eifkit/eif.hpp"
#include "eifkit/estimate.hpp"
#include "eifkit/params.hpp"
#include "eifkit/suite.hpp"

namespace eifkit {

using Json = nlohmann::json;

// Reads and parses a JSON file.
Json read_json_file(const std::filesystem::path& path);

FactorizedDistribution distribution_from_json(const Json& j, const std::filesystem::path& base_dir = {});
nlohmann::ordered_json distribution_to_json(const FactorizedDistribution& p);

// Parameter objects carry "type" plus type-specific fields:
//   cdf_square: optional "grid": {"points", "weights", "lower", "upper"}
//   tsm, vte, att: nothing
//   transport_sde: "a", "a_star", "s_star" (level indices), "model"
//     ("unrestricted" | "restricted"), "intervention" ("from_p" |
//     {"supplied": rows} | {"random": seed})
//   longitudinal: "g_star": one row list per treatment, or {"random": seed}
//   survival: "t0", "rule": level index per W configuration, or {"random": seed}
// and an optional "label". The spec is validated against p.
struct LabeledParameter {
  std::string label;
  ParameterSpec spec;
};
LabeledParameter parameter_from_json(const Json& j, const FactorizedDistribution& p);
nlohmann::ordered_json parameter_to_json(const ParameterSpec& spec);

CheckSuiteConfig suite_from_json(const Json& j);

struct StudyConfig {
  std::size_t n = 1000;
  std::size_t replications = 2000;
  std::uint64_t seed = 1;
  StudyOptions options;
};
StudyConfig study_from_json(const Json& j);

struct SampleConfig {
  std::size_t n = 100;
  std::uint64_t seed = 1;
};
SampleConfig sample_from_json(const Json& j);

// One row per outcome point and parameter: parameter, the level value of each
// variable, p, total, then one column per component name (union over the
// parameters; empty where a parameter has no such component).
struct LabeledInfluence {
  std::string label;
  InfluenceFunction f;
};
std::string eif_table_csv(const FactorizedDistribution& p, const std::vector<LabeledInfluence>& fs);

}  // namespace eifkit
