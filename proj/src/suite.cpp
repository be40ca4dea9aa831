#include "eifkit/suite.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <map>

#include "json.hpp"

#include "eifkit/error.hpp"
#include "eifkit/generate.hpp"
#include "eifkit/layout.hpp"
#include "eifkit/rng.hpp"

namespace eifkit {

namespace {

// FNV-1a, so group seeds do not depend on which other families are enabled.
std::uint64_t name_key(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

constexpr const char* kEfficiency = "efficiency_bound";
constexpr const char* kCross = "cross_checks";

struct Recorder {
  std::vector<CheckRecord>* out;
  std::string group;
  std::size_t distribution;
  std::uint64_t seed;

  // Passes iff value <= tolerance.
  void add(const std::string& check, double value, double tolerance, long score = -1,
           std::uint64_t score_seed = 0) {
    out->push_back({group, check, distribution, score, score < 0 ? seed : score_seed, value, tolerance,
                    value <= tolerance});
  }
};

void family_checks(const CheckSuiteConfig& cfg, const std::string& family, std::size_t d,
                   std::vector<CheckRecord>& out) {
  const std::uint64_t seed = distribution_seed(cfg.master_seed, family, d);
  Recorder rec{&out, family, d, seed};
  const FamilyCase c = make_family_case(family, seed);
  const InfluenceFunction f = eif(c.p, c.spec);
  const Table gradient = corrupt(c.p, f, cfg.corruption);
  const PsiFunction psi_fn = [&](const FactorizedDistribution& q) { return psi(q, c.spec); };

  for (std::size_t j = 0; j < cfg.n_scores; ++j) {
    const std::uint64_t sseed = score_seed(cfg.master_seed, family, d, j);
    const ScoreFunction s = family_score(c, sseed);
    const RieszResult r = riesz_check(c.p, psi_fn, gradient, s, cfg.h, c.path, cfg.tol.riesz);
    rec.add("riesz", r.abs_error, cfg.tol.riesz, static_cast<long>(j), sseed);
  }

  rec.add("mean_zero", mean_zero_check(c.p, f.total), cfg.tol.mean_zero);
  rec.add("component_sum", component_sum_check(f), cfg.tol.component_sum);
  rec.add("orthogonality", max_off_diagonal(orthogonality_check(c.p, f.components)), cfg.tol.orthogonality);
  double membership = 0.0;
  for (const auto& comp : f.components) membership = std::max(membership, tangent_membership_check(c.p, comp));
  rec.add("tangent_membership", membership, cfg.tol.membership);
  {
    const ScoreFunction s = random_score(c.p, derive_seed(seed, {0xdec0u}));
    rec.add("decomposition", decomposition_check(c.p, s), cfg.tol.decomposition);
  }

  if (const auto* t = std::get_if<TransportSdeSpec>(&c.spec); t && t->model == TransportModel::restricted) {
    const TransportParts parts = transport_parts(c.p, *t);
    const Table py = project_to_restricted(c.p, parts.y, Restriction::outcome);
    double err = 0.0;
    for (std::size_t i = 0; i < py.size(); ++i) err = std::max(err, std::abs(py[i] - parts.y_r[i]));
    rec.add("restricted_outcome", err, cfg.tol.restricted);
    if (t->fixed()) {
      const Table pm = project_to_restricted(c.p, parts.m, Restriction::mediator);
      double errm = 0.0;
      for (std::size_t i = 0; i < pm.size(); ++i) errm = std::max(errm, std::abs(pm[i] - parts.m_r[i]));
      rec.add("restricted_mediator", errm, cfg.tol.restricted);
    }
  }

  if (d < cfg.order_cases) {
    const std::uint64_t sseed = score_seed(cfg.master_seed, family, d, 0);
    const ScoreFunction s = family_score(c, sseed);
    const double e1 = riesz_check(c.p, psi_fn, gradient, s, cfg.order_h, c.path).abs_error;
    const double e2 = riesz_check(c.p, psi_fn, gradient, s, cfg.order_h / 2, c.path).abs_error;
    rec.add("order", e2, cfg.order_ratio * e1 + cfg.order_floor, 0, sseed);
  }
}

void efficiency_checks(const CheckSuiteConfig& cfg, std::size_t d, std::vector<CheckRecord>& out) {
  const std::uint64_t seed = distribution_seed(cfg.master_seed, kEfficiency, d);
  Recorder rec{&out, kEfficiency, d, seed};
  const FactorizedDistribution p = make_family_case("tsm", seed).p;
  const EfficiencyResult e = efficiency_bound_check(p);
  rec.add("variance_bound", e.var_eif - e.var_ipw, cfg.tol.efficiency);
  const Table ipw = ipw_gradient(p);
  const PsiFunction psi_fn = [](const FactorizedDistribution& q) { return psi_tsm(q); };
  for (std::size_t j = 0; j < cfg.n_scores; ++j) {
    const std::uint64_t sseed = score_seed(cfg.master_seed, kEfficiency, d, j);
    const ScoreFunction raw = random_score(p, sseed);
    const ScoreFunction s(p, restrict_score_outcome_covariates(p, raw.values()));
    const RieszResult r = riesz_check(p, psi_fn, ipw, s, cfg.h, PathKind::joint, cfg.tol.riesz);
    rec.add("ipw_riesz", r.abs_error, cfg.tol.riesz, static_cast<long>(j), sseed);
  }
}

void cross_checks(const CheckSuiteConfig& cfg, std::size_t d, std::vector<CheckRecord>& out) {
  const std::uint64_t seed = distribution_seed(cfg.master_seed, kCross, d);
  Recorder rec{&out, kCross, d, seed};
  {
    const FactorizedDistribution p = random_longitudinal(derive_seed(seed, {1}), 0);
    const std::size_t a = longitudinal_layout(p).treatments[0];
    Table g(p.factor(a).size(), 0.0);
    for (std::size_t r = 0; r < g.size() / 2; ++r) g[r * 2 + 1] = 1.0;
    const InfluenceFunction lf = eif_longitudinal(p, {g});
    const InfluenceFunction tf = eif_tsm(p);
    double err = std::abs(lf.psi - tf.psi);
    for (std::size_t i = 0; i < lf.total.size(); ++i) err = std::max(err, std::abs(lf.total[i] - tf.total[i]));
    rec.add("longitudinal_k0_vs_tsm", err, cfg.tol.cross_check);
  }
  {
    const FactorizedDistribution p = random_survival(derive_seed(seed, {2}), 3, false);
    const SurvivalSpec spec = random_survival_rule(p, derive_seed(seed, {3}), 1);
    const InfluenceFunction sf = eif_survival(p, spec.rule, 1);
    const Table reduced = survival_as_tsm(p, spec.rule);
    double err = 0.0;
    for (std::size_t i = 0; i < reduced.size(); ++i) {
      if (p.joint()[i] > 0.0) err = std::max(err, std::abs(sf.total[i] - reduced[i]));
    }
    rec.add("survival_t1_vs_tsm", err, cfg.tol.cross_check);
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<std::string> suite_families() {
  return {"cdf_square",
          "tsm",
          "vte",
          "att",
          "transport_unrestricted_supplied",
          "transport_unrestricted_fixed",
          "transport_restricted_supplied",
          "transport_restricted_fixed",
          "longitudinal_k0",
          "longitudinal_k1",
          "longitudinal_k2",
          "survival_t1",
          "survival_t2",
          "survival_t3"};
}

void CheckSuiteConfig::validate() const {
  if (!(h > 0.0 && h <= 1e-2)) throw ConfigError("suite: h must lie in (0, 1e-2]");
  if (!(order_h > 0.0 && order_h <= 1e-2)) throw ConfigError("suite: order_h must lie in (0, 1e-2]");
  if (n_scores < 1) throw ConfigError("suite: n_scores must be at least 1");
  const auto known = suite_families();
  for (const auto& f : families) {
    if (std::find(known.begin(), known.end(), f) == known.end()) {
      throw ConfigError("suite: unknown family '" + f + "'");
    }
  }
}

std::uint64_t distribution_seed(std::uint64_t master, const std::string& group, std::size_t d) {
  return derive_seed(master, {name_key(group), d});
}

std::uint64_t score_seed(std::uint64_t master, const std::string& group, std::size_t d, std::size_t j) {
  return derive_seed(master, {name_key(group), d, 0x5c0e0000u + j});
}

FamilyCase make_family_case(const std::string& family, std::uint64_t seed) {
  if (family == "cdf_square") return {random_univariate(seed, 4 + seed % 3), CdfSquareSpec{}};
  if (family == "tsm" || family == "vte" || family == "att") {
    std::vector<std::size_t> w_cards = seed % 2 == 0 ? std::vector<std::size_t>{3} : std::vector<std::size_t>{2, 2};
    FactorizedDistribution p = random_point_treatment(seed, w_cards);
    ParameterSpec spec = family == "tsm" ? ParameterSpec{TsmSpec{}}
                         : family == "vte" ? ParameterSpec{VteSpec{}}
                                           : ParameterSpec{AttSpec{}};
    return {std::move(p), std::move(spec)};
  }
  if (family.rfind("transport_", 0) == 0) {
    const bool restricted = family.find("_restricted_") != std::string::npos;
    const bool fixed = family.size() >= 6 && family.compare(family.size() - 6, 6, "_fixed") == 0;
    FactorizedDistribution p = random_transport(seed, restricted);
    Rng rng(derive_seed(seed, {0x7a}));
    TransportSdeSpec spec;
    spec.a = rng.below(2);
    spec.a_star = rng.below(2);
    spec.s_star = rng.below(2);
    spec.model = restricted ? TransportModel::restricted : TransportModel::unrestricted;
    if (!fixed) spec.intervention = random_supplied_intervention(p, derive_seed(seed, {0x7b}));
    return {std::move(p), spec, restricted ? PathKind::factors : PathKind::joint, restricted};
  }
  if (family.rfind("longitudinal_k", 0) == 0) {
    const std::size_t k = std::stoul(family.substr(14));
    FactorizedDistribution p = random_longitudinal(seed, k);
    LongitudinalSpec spec = random_g_star(p, derive_seed(seed, {0x6a}));
    return {std::move(p), std::move(spec)};
  }
  if (family.rfind("survival_t", 0) == 0) {
    const std::size_t t0 = std::stoul(family.substr(10));
    FactorizedDistribution p = random_survival(seed, 3, true);
    SurvivalSpec spec = random_survival_rule(p, derive_seed(seed, {0x5a}), t0);
    return {std::move(p), std::move(spec)};
  }
  throw ConfigError("unknown family '" + family + "'");
}

ScoreFunction family_score(const FamilyCase& c, std::uint64_t seed) {
  ScoreFunction s = random_score(c.p, seed);
  if (!c.restricted_scores) return s;
  return ScoreFunction(c.p, restrict_score_transport(c.p, s.values()));
}

const CheckSummary* VerificationReport::summary(const std::string& group, const std::string& check) const {
  for (const auto& s : summaries) {
    if (s.group == group && s.check == check) return &s;
  }
  return nullptr;
}

VerificationReport run_suite(const CheckSuiteConfig& config, Execution exec) {
  config.validate();
  const std::vector<std::string> families = config.families.empty() ? suite_families() : config.families;

  struct Task {
    int kind;  // 0 family, 1 efficiency, 2 cross checks
    std::string family;
    std::size_t d;
  };
  std::vector<Task> tasks;
  for (const auto& fam : families) {
    for (std::size_t d = 0; d < config.n_distributions; ++d) tasks.push_back({0, fam, d});
  }
  if (config.efficiency) {
    for (std::size_t d = 0; d < config.n_distributions; ++d) tasks.push_back({1, kEfficiency, d});
  }
  if (config.cross_checks) {
    for (std::size_t d = 0; d < config.n_distributions; ++d) tasks.push_back({2, kCross, d});
  }

  std::vector<std::vector<CheckRecord>> results(tasks.size());
  for_each_task(tasks.size(), exec, [&](std::size_t i) {
    const Task& t = tasks[i];
    if (t.kind == 0) family_checks(config, t.family, t.d, results[i]);
    if (t.kind == 1) efficiency_checks(config, t.d, results[i]);
    if (t.kind == 2) cross_checks(config, t.d, results[i]);
  });

  VerificationReport report;
  report.config = config;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (auto& batch : results) {
    for (auto& r : batch) {
      const auto key = std::make_pair(r.group, r.check);
      auto it = index.find(key);
      if (it == index.end()) {
        it = index.emplace(key, report.summaries.size()).first;
        report.summaries.push_back({r.group, r.check, 0, 0, 0.0, r.tolerance});
      }
      CheckSummary& s = report.summaries[it->second];
      ++s.count;
      if (!r.pass) {
        ++s.failures;
        ++report.failures;
      }
      s.max_value = std::max(s.max_value, r.value);
      s.tolerance = std::max(s.tolerance, r.tolerance);
      report.records.push_back(std::move(r));
    }
  }
  return report;
}

std::string report_json(const VerificationReport& report) {
  using nlohmann::ordered_json;
  const CheckSuiteConfig& c = report.config;
  ordered_json j;
  j["pass"] = report.pass();
  j["failures"] = report.failures;
  j["checks"] = report.records.size();
  ordered_json cfg;
  cfg["master_seed"] = c.master_seed;
  cfg["n_distributions"] = c.n_distributions;
  cfg["n_scores"] = c.n_scores;
  cfg["h"] = c.h;
  cfg["families"] = c.families.empty() ? suite_families() : c.families;
  cfg["efficiency"] = c.efficiency;
  cfg["cross_checks"] = c.cross_checks;
  cfg["order_cases"] = c.order_cases;
  cfg["order_h"] = c.order_h;
  cfg["corruption"] = corruption_name(c.corruption);
  cfg["tolerances"] = {{"riesz", c.tol.riesz},
                       {"mean_zero", c.tol.mean_zero},
                       {"component_sum", c.tol.component_sum},
                       {"orthogonality", c.tol.orthogonality},
                       {"membership", c.tol.membership},
                       {"decomposition", c.tol.decomposition},
                       {"restricted", c.tol.restricted},
                       {"cross_check", c.tol.cross_check},
                       {"efficiency", c.tol.efficiency}};
  j["config"] = cfg;
  ordered_json groups = ordered_json::array();
  for (const auto& s : report.summaries) {
    groups.push_back({{"group", s.group},
                      {"check", s.check},
                      {"count", s.count},
                      {"failures", s.failures},
                      {"max_value", s.max_value},
                      {"tolerance", s.tolerance}});
  }
  j["summaries"] = groups;
  return j.dump(2) + "\n";
}

std::string checks_csv(const VerificationReport& report) {
  std::string out = "group,check,distribution,score,seed,value,tolerance,pass\n";
  for (const auto& r : report.records) {
    char seed[24];
    std::snprintf(seed, sizeof seed, "%" PRIu64, r.seed);
    out += r.group + "," + r.check + "," + std::to_string(r.distribution) + "," +
           (r.score < 0 ? std::string() : std::to_string(r.score)) + "," + seed + "," + fmt(r.value) + "," +
           fmt(r.tolerance) + "," + (r.pass ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace eifkit
