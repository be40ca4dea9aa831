#include "eifkit/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "eifkit/error.hpp"
#include "eifkit/generate.hpp"

namespace eifkit {

namespace {

namespace fs = std::filesystem;
using OJson = nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

void require_object(const Json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
}

void allow_keys(const Json& j, std::initializer_list<const char*> keys, const std::string& where) {
  require_object(j, where);
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* allowed : keys) known = known || k == allowed;
    if (!known) fail(where, "unknown key \"" + k + "\"");
  }
}

const Json& required(const Json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing key \"") + key + "\"");
  return *it;
}

std::uint64_t as_count(const Json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  fail(where, "expected a non-negative integer");
}

double as_number(const Json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

bool as_bool(const Json& v, const std::string& where) {
  if (!v.is_boolean()) fail(where, "expected true or false");
  return v.get<bool>();
}

std::string as_string(const Json& v, const std::string& where) {
  if (!v.is_string()) fail(where, "expected a string");
  return v.get<std::string>();
}

std::vector<double> as_numbers(const Json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

// A list of rows flattened into one conditional table.
Table as_rows(const Json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of rows");
  Table out;
  for (std::size_t r = 0; r < v.size(); ++r) {
    const auto row = as_numbers(v[r], where + "[" + std::to_string(r) + "]");
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

OJson rows_json(std::span<const double> table, std::size_t card) {
  OJson rows = OJson::array();
  for (std::size_t r = 0; r < table.size() / card; ++r) {
    rows.push_back(std::vector<double>(table.begin() + r * card, table.begin() + (r + 1) * card));
  }
  return rows;
}

// Optional {"random": seed} convenience form.
std::optional<std::uint64_t> random_seed(const Json& v, const std::string& where) {
  if (!v.is_object()) return std::nullopt;
  allow_keys(v, {"random"}, where);
  return as_count(required(v, "random", where), where + ".random");
}

// One factor: {"child": name, "rows": [{"parents": [values of earlier
// variables], "probs": [...]}, ...]} with every parent configuration listed once.
Table factor_table(const Json& f, const std::vector<VariableSpec>& variables, const OutcomeSpace& space, std::size_t i,
                   const std::string& where) {
  allow_keys(f, {"child", "rows"}, where);
  const std::string child = as_string(required(f, "child", where), where + ".child");
  if (child != variables[i].name) fail(where, "child must be \"" + variables[i].name + "\" (factors follow variable order)");
  const Json& rows = required(f, "rows", where);
  if (!rows.is_array()) fail(where + ".rows", "expected an array");
  const std::size_t card = variables[i].cardinality();
  Table table(space.prefix_count(i + 1), 0.0);
  std::vector<bool> seen(space.prefix_count(i), false);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string w = where + ".rows[" + std::to_string(r) + "]";
    allow_keys(rows[r], {"parents", "probs"}, w);
    const auto parents = rows[r].contains("parents") ? as_numbers(rows[r]["parents"], w + ".parents") : std::vector<double>{};
    if (parents.size() != i) fail(w + ".parents", "expected " + std::to_string(i) + " values");
    std::vector<std::size_t> levels;
    for (std::size_t k = 0; k < i; ++k) {
      const auto& lv = variables[k].levels;
      const auto it = std::find(lv.begin(), lv.end(), parents[k]);
      if (it == lv.end()) fail(w + ".parents", "value " + fmt(parents[k]) + " is not a level of " + variables[k].name);
      levels.push_back(static_cast<std::size_t>(it - lv.begin()));
    }
    const std::size_t parent = space.prefix_index(levels);
    if (seen[parent]) fail(w, "duplicate parent configuration");
    seen[parent] = true;
    const auto probs = as_numbers(required(rows[r], "probs", w), w + ".probs");
    if (probs.size() != card) fail(w + ".probs", "expected " + std::to_string(card) + " entries");
    std::copy(probs.begin(), probs.end(), table.begin() + static_cast<std::ptrdiff_t>(parent * card));
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) fail(where, "a parent configuration has no row");
  return table;
}

FactorizedDistribution inline_distribution(const Json& j) {
  const std::string where = "distribution";
  allow_keys(j, {"variables", "factors", "joint", "positivity_floor"}, where);
  const Json& vars = required(j, "variables", where);
  if (!vars.is_array() || vars.empty()) fail(where, "\"variables\" must be a non-empty array");
  std::vector<VariableSpec> variables;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const std::string w = where + ".variables[" + std::to_string(i) + "]";
    allow_keys(vars[i], {"name", "levels", "role"}, w);
    VariableSpec v;
    v.name = as_string(required(vars[i], "name", w), w + ".name");
    v.levels = as_numbers(required(vars[i], "levels", w), w + ".levels");
    if (vars[i].contains("role")) v.role = as_string(vars[i]["role"], w + ".role");
    variables.push_back(std::move(v));
  }
  const double floor = j.contains("positivity_floor") ? as_number(j["positivity_floor"], where + ".positivity_floor")
                                                      : FactorizedDistribution::kDefaultPositivityFloor;
  const bool has_factors = j.contains("factors");
  if (has_factors == j.contains("joint")) fail(where, "give exactly one of \"factors\" and \"joint\"");
  try {
    if (!has_factors) return refactorize(as_numbers(j["joint"], where + ".joint"), std::move(variables), floor);
    const Json& fs_json = j["factors"];
    if (!fs_json.is_array() || fs_json.size() != variables.size()) {
      fail(where, "\"factors\" needs one entry per variable");
    }
    std::vector<std::size_t> cards;
    for (const auto& v : variables) cards.push_back(v.cardinality());
    const OutcomeSpace space(cards);
    std::vector<Table> factors;
    for (std::size_t i = 0; i < fs_json.size(); ++i) {
      factors.push_back(factor_table(fs_json[i], variables, space, i, where + ".factors[" + std::to_string(i) + "]"));
    }
    return FactorizedDistribution(std::move(variables), std::move(factors), floor);
  } catch (const DomainError& e) {
    fail(where, e.what());
  }
}

}  // namespace

Json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

FactorizedDistribution distribution_from_json(const Json& j, const fs::path& base_dir) {
  if (j.is_string()) {
    fs::path path = j.get<std::string>();
    if (path.is_relative()) path = base_dir / path;
    return inline_distribution(read_json_file(path));
  }
  require_object(j, "distribution");
  if (j.contains("generator")) {
    allow_keys(j, {"generator"}, "distribution");
    const Json& g = j["generator"];
    allow_keys(g, {"shape", "seed"}, "distribution.generator");
    const std::string shape = as_string(required(g, "shape", "distribution.generator"), "distribution.generator.shape");
    const std::uint64_t seed = as_count(required(g, "seed", "distribution.generator"), "distribution.generator.seed");
    return generate_shape(shape, seed);
  }
  return inline_distribution(j);
}

OJson distribution_to_json(const FactorizedDistribution& p) {
  OJson j;
  OJson vars = OJson::array();
  for (const auto& v : p.variables()) {
    OJson o;
    o["name"] = v.name;
    o["levels"] = v.levels;
    if (!v.role.empty()) o["role"] = v.role;
    vars.push_back(o);
  }
  j["variables"] = vars;
  OJson factors = OJson::array();
  for (std::size_t i = 0; i < p.num_variables(); ++i) {
    OJson rows = OJson::array();
    for (std::size_t parent = 0; parent < p.space().prefix_count(i); ++parent) {
      std::vector<double> parents;
      for (std::size_t k = 0; k < i; ++k) {
        parents.push_back(p.variable(k).levels[p.space().level_of(parent * p.space().stride(i), k)]);
      }
      const auto row = p.row(i, parent);
      rows.push_back({{"parents", parents}, {"probs", std::vector<double>(row.begin(), row.end())}});
    }
    factors.push_back({{"child", p.variable(i).name}, {"rows", rows}});
  }
  j["factors"] = factors;
  j["positivity_floor"] = p.positivity_floor();
  return j;
}

LabeledParameter parameter_from_json(const Json& j, const FactorizedDistribution& p) {
  const std::string where = "parameter";
  require_object(j, where);
  const std::string type = as_string(required(j, "type", where), where + ".type");
  LabeledParameter out;
  out.label = j.contains("label") ? as_string(j["label"], where + ".label") : type;
  const std::string w = where + "(" + type + ")";
  if (type == "cdf_square") {
    allow_keys(j, {"type", "label", "grid"}, w);
    CdfSquareSpec s;
    if (j.contains("grid")) {
      const Json& g = j["grid"];
      allow_keys(g, {"points", "weights", "lower", "upper"}, w + ".grid");
      try {
        s.grid.emplace(as_numbers(required(g, "points", w), w + ".grid.points"),
                       as_numbers(required(g, "weights", w), w + ".grid.weights"),
                       as_number(required(g, "lower", w), w + ".grid.lower"),
                       as_number(required(g, "upper", w), w + ".grid.upper"));
      } catch (const DomainError& e) {
        fail(w + ".grid", e.what());
      }
    }
    out.spec = s;
  } else if (type == "tsm" || type == "vte" || type == "att") {
    allow_keys(j, {"type", "label"}, w);
    if (type == "tsm") out.spec = TsmSpec{};
    if (type == "vte") out.spec = VteSpec{};
    if (type == "att") out.spec = AttSpec{};
  } else if (type == "transport_sde") {
    allow_keys(j, {"type", "label", "a", "a_star", "s_star", "model", "intervention"}, w);
    TransportSdeSpec s;
    if (j.contains("a")) s.a = as_count(j["a"], w + ".a");
    if (j.contains("a_star")) s.a_star = as_count(j["a_star"], w + ".a_star");
    if (j.contains("s_star")) s.s_star = as_count(j["s_star"], w + ".s_star");
    if (j.contains("model")) {
      const std::string m = as_string(j["model"], w + ".model");
      if (m == "unrestricted") {
        s.model = TransportModel::unrestricted;
      } else if (m == "restricted") {
        s.model = TransportModel::restricted;
      } else {
        fail(w + ".model", "expected \"unrestricted\" or \"restricted\"");
      }
    }
    if (j.contains("intervention")) {
      const Json& iv = j["intervention"];
      if (iv.is_string()) {
        if (iv.get<std::string>() != "from_p") fail(w + ".intervention", "expected \"from_p\"");
        s.intervention = InterventionFromP{};
      } else if (iv.is_object() && iv.contains("supplied")) {
        allow_keys(iv, {"supplied"}, w + ".intervention");
        s.intervention = InterventionSupplied{as_rows(iv["supplied"], w + ".intervention.supplied")};
      } else if (auto seed = random_seed(iv, w + ".intervention")) {
        s.intervention = random_supplied_intervention(p, *seed);
      }
    }
    out.spec = s;
  } else if (type == "longitudinal") {
    allow_keys(j, {"type", "label", "g_star"}, w);
    const Json& g = required(j, "g_star", w);
    LongitudinalSpec s;
    if (auto seed = random_seed(g, w + ".g_star")) {
      s = random_g_star(p, *seed);
    } else {
      if (!g.is_array()) fail(w + ".g_star", "expected one row list per treatment");
      for (std::size_t i = 0; i < g.size(); ++i) s.g_star.push_back(as_rows(g[i], w + ".g_star[" + std::to_string(i) + "]"));
    }
    out.spec = s;
  } else if (type == "survival") {
    allow_keys(j, {"type", "label", "rule", "t0"}, w);
    const std::size_t t0 = as_count(required(j, "t0", w), w + ".t0");
    const Json& r = required(j, "rule", w);
    SurvivalSpec s;
    if (auto seed = random_seed(r, w + ".rule")) {
      try {
        s = random_survival_rule(p, *seed, t0);
      } catch (const DomainError& e) {
        fail(w, e.what());
      }
    } else {
      if (!r.is_array()) fail(w + ".rule", "expected a level index per W configuration");
      for (std::size_t i = 0; i < r.size(); ++i) s.rule.push_back(as_count(r[i], w + ".rule"));
      s.t0 = t0;
    }
    out.spec = s;
  } else {
    fail(where + ".type", "unknown parameter type \"" + type + "\"");
  }
  try {
    validate_parameter(p, out.spec);
  } catch (const DomainError& e) {
    fail(w, e.what());
  }
  return out;
}

OJson parameter_to_json(const ParameterSpec& spec) {
  OJson j;
  j["type"] = parameter_type(spec);
  if (const auto* c = std::get_if<CdfSquareSpec>(&spec); c && c->grid) {
    j["grid"] = {{"points", c->grid->points()},
                 {"weights", c->grid->weights()},
                 {"lower", c->grid->lower()},
                 {"upper", c->grid->upper()}};
  } else if (const auto* t = std::get_if<TransportSdeSpec>(&spec)) {
    j["a"] = t->a;
    j["a_star"] = t->a_star;
    j["s_star"] = t->s_star;
    j["model"] = t->model == TransportModel::restricted ? "restricted" : "unrestricted";
    if (const auto* s = std::get_if<InterventionSupplied>(&t->intervention)) {
      j["intervention"] = {{"supplied", rows_json(s->table, 2)}};
    } else {
      j["intervention"] = "from_p";
    }
  } else if (const auto* l = std::get_if<LongitudinalSpec>(&spec)) {
    // Rows are concatenated on read, so one flat row per treatment round-trips.
    OJson g = OJson::array();
    for (const auto& t : l->g_star) g.push_back(OJson::array({t}));
    j["g_star"] = g;
  } else if (const auto* s = std::get_if<SurvivalSpec>(&spec)) {
    j["rule"] = s->rule;
    j["t0"] = s->t0;
  }
  return j;
}

CheckSuiteConfig suite_from_json(const Json& j) {
  const std::string where = "suite";
  allow_keys(j, {"master_seed", "n_distributions", "n_scores", "h", "families", "efficiency", "cross_checks",
                 "order_cases", "order_h", "order_ratio", "order_floor", "corruption", "tolerances"},
             where);
  CheckSuiteConfig c;
  if (j.contains("master_seed")) c.master_seed = as_count(j["master_seed"], where + ".master_seed");
  if (j.contains("n_distributions")) c.n_distributions = as_count(j["n_distributions"], where + ".n_distributions");
  if (j.contains("n_scores")) c.n_scores = as_count(j["n_scores"], where + ".n_scores");
  if (j.contains("h")) c.h = as_number(j["h"], where + ".h");
  if (j.contains("families")) {
    const Json& f = j["families"];
    if (!f.is_array()) fail(where + ".families", "expected an array of names");
    for (const auto& name : f) c.families.push_back(as_string(name, where + ".families"));
  }
  if (j.contains("efficiency")) c.efficiency = as_bool(j["efficiency"], where + ".efficiency");
  if (j.contains("cross_checks")) c.cross_checks = as_bool(j["cross_checks"], where + ".cross_checks");
  if (j.contains("order_cases")) c.order_cases = as_count(j["order_cases"], where + ".order_cases");
  if (j.contains("order_h")) c.order_h = as_number(j["order_h"], where + ".order_h");
  if (j.contains("order_ratio")) c.order_ratio = as_number(j["order_ratio"], where + ".order_ratio");
  if (j.contains("order_floor")) c.order_floor = as_number(j["order_floor"], where + ".order_floor");
  if (j.contains("corruption")) c.corruption = corruption_from_name(as_string(j["corruption"], where + ".corruption"));
  if (j.contains("tolerances")) {
    const Json& t = j["tolerances"];
    const std::string w = where + ".tolerances";
    allow_keys(t, {"riesz", "mean_zero", "component_sum", "orthogonality", "membership", "decomposition",
                   "restricted", "cross_check", "efficiency"},
               w);
    auto set = [&](const char* key, double& field) {
      if (t.contains(key)) field = as_number(t[key], w + "." + key);
    };
    set("riesz", c.tol.riesz);
    set("mean_zero", c.tol.mean_zero);
    set("component_sum", c.tol.component_sum);
    set("orthogonality", c.tol.orthogonality);
    set("membership", c.tol.membership);
    set("decomposition", c.tol.decomposition);
    set("restricted", c.tol.restricted);
    set("cross_check", c.tol.cross_check);
    set("efficiency", c.tol.efficiency);
  }
  c.validate();
  return c;
}

StudyConfig study_from_json(const Json& j) {
  const std::string where = "study";
  allow_keys(j, {"n", "replications", "seed", "smoothing", "oracle_nuisance"}, where);
  StudyConfig c;
  c.n = as_count(required(j, "n", where), where + ".n");
  c.replications = as_count(required(j, "replications", where), where + ".replications");
  if (j.contains("seed")) c.seed = as_count(j["seed"], where + ".seed");
  if (j.contains("smoothing")) c.options.smoothing = as_number(j["smoothing"], where + ".smoothing");
  if (j.contains("oracle_nuisance")) c.options.oracle_nuisance = as_bool(j["oracle_nuisance"], where + ".oracle_nuisance");
  if (c.n < 1) fail(where + ".n", "must be at least 1");
  if (c.replications < 1) fail(where + ".replications", "must be at least 1");
  if (!(c.options.smoothing >= 0.0)) fail(where + ".smoothing", "must be >= 0");
  return c;
}

SampleConfig sample_from_json(const Json& j) {
  const std::string where = "sample";
  allow_keys(j, {"n", "seed"}, where);
  SampleConfig c;
  c.n = as_count(required(j, "n", where), where + ".n");
  if (j.contains("seed")) c.seed = as_count(j["seed"], where + ".seed");
  if (c.n < 1) fail(where + ".n", "must be at least 1");
  return c;
}

std::string eif_table_csv(const FactorizedDistribution& p, const std::vector<LabeledInfluence>& fs) {
  std::vector<std::string> names;
  for (const auto& lf : fs) {
    for (const auto& c : lf.f.components) {
      if (std::find(names.begin(), names.end(), c.name) == names.end()) names.push_back(c.name);
    }
  }
  std::ostringstream out;
  out << "parameter";
  for (const auto& v : p.variables()) out << ',' << v.name;
  out << ",p,total";
  for (const auto& n : names) out << ",D_" << n;
  out << '\n';
  for (const auto& lf : fs) {
    for (std::size_t idx = 0; idx < lf.f.total.size(); ++idx) {
      out << lf.label;
      for (std::size_t v = 0; v < p.num_variables(); ++v) {
        out << ',' << fmt(p.variable(v).levels[p.space().level_of(idx, v)]);
      }
      out << ',' << fmt(p.joint()[idx]) << ',' << fmt(lf.f.total[idx]);
      for (const auto& n : names) {
        out << ',';
        if (const EifComponent* c = lf.f.find(n)) out << fmt(c->values[idx]);
      }
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace eifkit
