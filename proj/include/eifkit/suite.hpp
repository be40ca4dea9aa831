#pragma once

// The seeded verification suite: every check of verify.hpp fanned out over
// random distributions, random scores and parameter families.

#include <cstdint>
#include <string>
#include <vector>

#include "eifkit/execution.hpp"
#include "eifkit/verify.hpp"

namespace eifkit {

struct SuiteTolerances {
  double riesz = 1e-6;
  double mean_zero = 1e-10;
  double component_sum = 1e-12;
  double orthogonality = 1e-12;
  double membership = 1e-12;
  double decomposition = 1e-12;
  double restricted = 1e-10;
  double cross_check = 1e-12;
  double efficiency = 1e-12;
};

struct CheckSuiteConfig {
  std::uint64_t master_seed = 20240611;
  std::size_t n_distributions = 100;
  std::size_t n_scores = 20;
  double h = kDefaultStep;
  SuiteTolerances tol;
  std::vector<std::string> families;  // empty: all of suite_families()
  bool efficiency = true;
  bool cross_checks = true;
  // Order-of-accuracy diagnostic: on the first order_cases distributions of
  // each family, err(order_h / 2) <= order_ratio * err(order_h) + order_floor.
  std::size_t order_cases = 20;
  double order_h = 1e-2;
  double order_ratio = 0.3;
  double order_floor = 1e-12;
  Corruption corruption = Corruption::none;

  // Throws ConfigError: h in (0, 1e-2], n_scores >= 1, known families.
  void validate() const;
};

// cdf_square, tsm, vte, att, transport_{unrestricted,restricted}_{supplied,fixed},
// longitudinal_k{0,1,2}, survival_t{1,2,3}.
std::vector<std::string> suite_families();

// One seeded instance of a family.
struct FamilyCase {
  FactorizedDistribution p;
  ParameterSpec spec;
  PathKind path = PathKind::joint;
  bool restricted_scores = false;
};
FamilyCase make_family_case(const std::string& family, std::uint64_t seed);

// Seed of distribution d of a family, and of score j on it.
std::uint64_t distribution_seed(std::uint64_t master, const std::string& group, std::size_t d);
std::uint64_t score_seed(std::uint64_t master, const std::string& group, std::size_t d, std::size_t j);

// A score for a family case: random, then projected onto the model's tangent
// space when the model is restricted.
ScoreFunction family_score(const FamilyCase& c, std::uint64_t seed);

struct CheckRecord {
  std::string group;  // family, "efficiency_bound" or "cross_checks"
  std::string check;
  std::size_t distribution = 0;
  long score = -1;  // -1 when the check is not per score
  std::uint64_t seed = 0;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct CheckSummary {
  std::string group;
  std::string check;
  std::size_t count = 0;
  std::size_t failures = 0;
  double max_value = 0.0;
  double tolerance = 0.0;
};

struct VerificationReport {
  CheckSuiteConfig config;
  std::vector<CheckRecord> records;
  std::vector<CheckSummary> summaries;
  std::size_t failures = 0;
  bool pass() const { return failures == 0; }
  const CheckSummary* summary(const std::string& group, const std::string& check) const;
};

VerificationReport run_suite(const CheckSuiteConfig& config, Execution exec = Execution::parallel);

// Structured report (JSON) and flat CSV, one row per check. Both are pure
// functions of the report, so identical configs give identical bytes.
std::string report_json(const VerificationReport& report);
std::string checks_csv(const VerificationReport& report);

}  // namespace eifkit
