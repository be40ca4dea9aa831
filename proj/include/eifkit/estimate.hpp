#pragma once

// Sampling, empirical fitting, plug-in and one-step estimators, and the Monte
// Carlo study harness.

#include <cstdint>
#include <string>
#include <vector>

#include "eifkit/dist.hpp"
#include "eifkit/execution.hpp"
#include "eifkit/params.hpp"

namespace eifkit {

struct Dataset {
  std::vector<VariableSpec> variables;
  std::vector<std::size_t> index;  // flat outcome index of each row
  std::uint64_t seed = 0;

  std::size_t size() const { return index.size(); }
  OutcomePoint row(std::size_t i) const;
};

// i.i.d. draws by sequential inverse-CDF over the factors. Throws DomainError
// for n = 0.
Dataset sample(const FactorizedDistribution& p, std::size_t n, std::uint64_t seed);

inline constexpr double kDefaultSmoothing = 0.5;

// Conditional tables from add-lambda smoothed counts. A parent cell with no
// data and lambda = 0 gets a uniform row and is recorded in null_rows(). The
// returned positivity floor is min(1e-3, lambda / (n + lambda * max_card)),
// the smallest probability smoothing can produce, so fitted tables always
// clear it when lambda > 0.
FactorizedDistribution fit_empirical(const Dataset& data, const std::vector<VariableSpec>& variables,
                                     double smoothing = kDefaultSmoothing);

double plugin_estimate(const FactorizedDistribution& fitted, const ParameterSpec& spec);

struct OneStepResult {
  double estimate = 0.0;
  double plugin = 0.0;
  double correction = 0.0;  // empirical mean of D*(P_hat)
  double se = 0.0;          // sample sd of D*(P_hat)(O_i) / sqrt(n)
  bool se_degenerate = false;  // n = 1: se reported as 0
};

OneStepResult one_step_estimate(const FactorizedDistribution& fitted, const Dataset& data,
                                const ParameterSpec& spec);

struct StudyOptions {
  double smoothing = kDefaultSmoothing;
  // Use the true P as the nuisance estimate instead of fitting it.
  bool oracle_nuisance = false;
};

struct MCStudyReport {
  std::string parameter;
  std::size_t n = 0;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  bool oracle_nuisance = false;
  double smoothing = kDefaultSmoothing;
  double truth = 0.0;
  double eif_variance = 0.0;  // Var_P D*(P)
  double mean_plugin = 0.0;
  double mean_onestep = 0.0;
  double var_onestep = 0.0;   // across replications
  double mc_se_onestep = 0.0;  // sqrt(var_onestep / replications)
  double mean_se = 0.0;
  double coverage_95 = 0.0;
  std::vector<OneStepResult> estimates;
};

// Replication r draws its dataset with seed derive_seed(seed, {r}).
MCStudyReport mc_study(const FactorizedDistribution& p, const ParameterSpec& spec, std::size_t n,
                       std::size_t replications, std::uint64_t seed, const StudyOptions& options = {},
                       Execution exec = Execution::parallel);

std::string study_csv(const MCStudyReport& report);
std::string study_json(const MCStudyReport& report);
std::string dataset_csv(const Dataset& data);

}  // namespace eifkit
