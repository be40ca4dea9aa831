#include "eifkit/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"

#include "eifkit/eif.hpp"
#include "eifkit/error.hpp"
#include "eifkit/rng.hpp"
#include "eifkit/tangent.hpp"

namespace eifkit {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

OutcomePoint Dataset::row(std::size_t i) const {
  std::vector<std::size_t> cards;
  for (const auto& v : variables) cards.push_back(v.cardinality());
  return OutcomeSpace(cards).point_at(index[i]);
}

Dataset sample(const FactorizedDistribution& p, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("sample size must be at least 1");
  Dataset data{p.variables(), std::vector<std::size_t>(n), seed};
  Rng rng(seed);
  const OutcomeSpace& space = p.space();
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < p.num_variables(); ++i) {
      const auto row = p.row(i, idx);
      const double u = rng.uniform();
      std::size_t level = row.size();
      double cum = 0.0;
      for (std::size_t l = 0; l < row.size(); ++l) {
        cum += row[l];
        if (u < cum) {
          level = l;
          break;
        }
      }
      if (level == row.size()) {
        // u fell beyond the rounded cumulative sum: take the last supported level.
        level = row.size() - 1;
        while (level > 0 && row[level] == 0.0) --level;
      }
      idx = idx * space.cardinality(i) + level;
    }
    data.index[r] = idx;
  }
  return data;
}

FactorizedDistribution fit_empirical(const Dataset& data, const std::vector<VariableSpec>& variables,
                                     double smoothing) {
  if (!(smoothing >= 0.0)) throw DomainError("smoothing must be >= 0");
  std::vector<std::size_t> cards;
  std::size_t max_card = 1;
  for (const auto& v : variables) {
    cards.push_back(v.cardinality());
    max_card = std::max(max_card, v.cardinality());
  }
  const OutcomeSpace space(cards);
  Table counts(space.size(), 0.0);
  for (std::size_t idx : data.index) {
    if (idx >= space.size()) throw DomainError("dataset row outside the outcome space");
    counts[idx] += 1.0;
  }
  const std::size_t d = variables.size();
  std::vector<Table> prefix_counts(d + 1);
  prefix_counts[d] = counts;
  for (std::size_t k = d; k-- > 0;) {
    prefix_counts[k].assign(space.prefix_count(k), 0.0);
    for (std::size_t j = 0; j < prefix_counts[k + 1].size(); ++j) {
      prefix_counts[k][j / cards[k]] += prefix_counts[k + 1][j];
    }
  }
  std::vector<Table> factors(d);
  std::vector<NullRow> null_rows;
  for (std::size_t i = 0; i < d; ++i) {
    const std::size_t card = cards[i];
    factors[i].resize(space.prefix_count(i + 1));
    for (std::size_t parent = 0; parent < space.prefix_count(i); ++parent) {
      const double denom = prefix_counts[i][parent] + smoothing * static_cast<double>(card);
      for (std::size_t l = 0; l < card; ++l) {
        const std::size_t e = parent * card + l;
        factors[i][e] = denom > 0.0 ? (prefix_counts[i + 1][e] + smoothing) / denom : 1.0 / static_cast<double>(card);
      }
      if (prefix_counts[i][parent] == 0.0) null_rows.push_back({i, parent});
    }
  }
  const double n = static_cast<double>(data.size());
  const double floor = smoothing > 0.0
                           ? std::min(FactorizedDistribution::kDefaultPositivityFloor,
                                      smoothing / (n + smoothing * static_cast<double>(max_card)))
                           : FactorizedDistribution::kDefaultPositivityFloor;
  return FactorizedDistribution(variables, std::move(factors), floor, std::move(null_rows));
}

double plugin_estimate(const FactorizedDistribution& fitted, const ParameterSpec& spec) { return psi(fitted, spec); }

OneStepResult one_step_estimate(const FactorizedDistribution& fitted, const Dataset& data,
                                const ParameterSpec& spec) {
  if (data.size() == 0) throw DomainError("one-step estimate needs at least one observation");
  const InfluenceFunction f = eif(fitted, spec);
  const double n = static_cast<double>(data.size());
  double mean = 0.0;
  for (std::size_t idx : data.index) mean += f.total[idx];
  mean /= n;
  OneStepResult r;
  r.plugin = f.psi;
  r.correction = mean;
  r.estimate = f.psi + mean;
  if (data.size() < 2) {
    r.se = 0.0;
    r.se_degenerate = true;
    return r;
  }
  double ss = 0.0;
  for (std::size_t idx : data.index) ss += (f.total[idx] - mean) * (f.total[idx] - mean);
  r.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return r;
}

MCStudyReport mc_study(const FactorizedDistribution& p, const ParameterSpec& spec, std::size_t n,
                       std::size_t replications, std::uint64_t seed, const StudyOptions& options, Execution exec) {
  if (n < 1 || replications < 1) throw DomainError("mc_study: n and replications must be at least 1");
  MCStudyReport rep;
  rep.parameter = parameter_type(spec);
  rep.n = n;
  rep.replications = replications;
  rep.seed = seed;
  rep.oracle_nuisance = options.oracle_nuisance;
  rep.smoothing = options.smoothing;
  const InfluenceFunction truth = eif(p, spec);
  rep.truth = truth.psi;
  rep.eif_variance = inner_product(p, truth.total, truth.total);

  rep.estimates.resize(replications);
  for_each_task(replications, exec, [&](std::size_t r) {
    const Dataset data = sample(p, n, derive_seed(seed, {r}));
    if (options.oracle_nuisance) {
      rep.estimates[r] = one_step_estimate(p, data, spec);
    } else {
      rep.estimates[r] = one_step_estimate(fit_empirical(data, p.variables(), options.smoothing), data, spec);
    }
  });

  const double reps = static_cast<double>(replications);
  std::size_t covered = 0;
  for (const auto& e : rep.estimates) {
    rep.mean_plugin += e.plugin;
    rep.mean_onestep += e.estimate;
    rep.mean_se += e.se;
    if (std::abs(e.estimate - rep.truth) <= 1.96 * e.se) ++covered;
  }
  rep.mean_plugin /= reps;
  rep.mean_onestep /= reps;
  rep.mean_se /= reps;
  rep.coverage_95 = static_cast<double>(covered) / reps;
  if (replications > 1) {
    double ss = 0.0;
    for (const auto& e : rep.estimates) ss += (e.estimate - rep.mean_onestep) * (e.estimate - rep.mean_onestep);
    rep.var_onestep = ss / (reps - 1.0);
  }
  rep.mc_se_onestep = std::sqrt(rep.var_onestep / reps);
  return rep;
}

std::string study_csv(const MCStudyReport& r) {
  std::string out =
      "parameter,n,replications,seed,oracle_nuisance,smoothing,truth,mean_plugin,mean_onestep,var_onestep,"
      "eif_variance_over_n,mc_se_onestep,mean_se,coverage_95\n";
  out += r.parameter + "," + std::to_string(r.n) + "," + std::to_string(r.replications) + "," +
         std::to_string(r.seed) + "," + (r.oracle_nuisance ? "1" : "0") + "," + fmt(r.smoothing) + "," +
         fmt(r.truth) + "," + fmt(r.mean_plugin) + "," + fmt(r.mean_onestep) + "," + fmt(r.var_onestep) + "," +
         fmt(r.eif_variance / static_cast<double>(r.n)) + "," + fmt(r.mc_se_onestep) + "," + fmt(r.mean_se) + "," +
         fmt(r.coverage_95) + "\n";
  return out;
}

std::string study_json(const MCStudyReport& r) {
  nlohmann::ordered_json j;
  j["parameter"] = r.parameter;
  j["n"] = r.n;
  j["replications"] = r.replications;
  j["seed"] = r.seed;
  j["oracle_nuisance"] = r.oracle_nuisance;
  j["smoothing"] = r.smoothing;
  j["truth"] = r.truth;
  j["eif_variance"] = r.eif_variance;
  j["eif_variance_over_n"] = r.eif_variance / static_cast<double>(r.n);
  j["mean_plugin"] = r.mean_plugin;
  j["mean_onestep"] = r.mean_onestep;
  j["var_onestep"] = r.var_onestep;
  j["mc_se_onestep"] = r.mc_se_onestep;
  j["mean_se"] = r.mean_se;
  j["coverage_95"] = r.coverage_95;
  nlohmann::ordered_json est = nlohmann::ordered_json::array();
  for (const auto& e : r.estimates) {
    est.push_back({{"onestep", e.estimate}, {"plugin", e.plugin}, {"se", e.se}});
  }
  j["replicates"] = est;
  return j.dump(2) + "\n";
}

std::string dataset_csv(const Dataset& data) {
  std::string out;
  for (std::size_t v = 0; v < data.variables.size(); ++v) out += (v ? "," : "") + data.variables[v].name;
  out += "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const OutcomePoint o = data.row(i);
    for (std::size_t v = 0; v < o.levels.size(); ++v) {
      out += (v ? "," : "") + fmt(data.variables[v].levels[o.levels[v]]);
    }
    out += "\n";
  }
  return out;
}

}  // namespace eifkit
