#pragma once

// Scores, one-dimensional paths and projections onto the factor tangent
// subspaces T_i = { f(o_0..o_i) : E[f | o_0..o_{i-1}] = 0 }.

#include <cstdint>
#include <span>
#include <vector>

#include "eifkit/dist.hpp"

namespace eifkit {

class ScoreFunction {
 public:
  static constexpr double kMeanTolerance = 1e-12;

  // Throws DomainError unless values are finite and E_P values = 0 within
  // kMeanTolerance * max(1, sup|values|).
  ScoreFunction(const FactorizedDistribution& p, Table values);

  const Table& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  double sup_norm() const;

 private:
  Table values_;
};

double inner_product(const FactorizedDistribution& p, std::span<const double> f, std::span<const double> g);

ScoreFunction center(const FactorizedDistribution& p, std::span<const double> f);

// Uniform[-1, 1] entries, centered, then rescaled only if the sup exceeds
// sup_bound. Deterministic in (P, seed).
ScoreFunction random_score(const FactorizedDistribution& p, std::uint64_t seed, double sup_bound = 10.0);

// Joint (1 + eps S) p, refactorized. Throws PreconditionError unless
// |eps| * sup|S| < 1.
FactorizedDistribution perturb_joint(const FactorizedDistribution& p, const ScoreFunction& s, double eps);

// E[f | prefix i+1] - E[f | prefix i].
Table project_onto_factor(const FactorizedDistribution& p, std::span<const double> f, std::size_t i);

// Projection onto T_first + ... + T_{last-1}: E[f | prefix last] - E[f | prefix first].
Table project_onto_factor_range(const FactorizedDistribution& p, std::span<const double> f, std::size_t first,
                                std::size_t last);

// One projection per factor; they sum to f - E f.
std::vector<Table> decompose_score(const FactorizedDistribution& p, std::span<const double> f);

// Fluctuates factor i only: p_i -> (1 + eps Pi(S | T_i)) p_i. Throws
// PreconditionError if a row leaves the simplex.
FactorizedDistribution perturb_factor(const FactorizedDistribution& p, std::size_t i, std::span<const double> s,
                                      double eps);

// Every factor fluctuated along its own projection of S. Agrees with
// perturb_joint to first order in eps.
FactorizedDistribution perturb_factors(const FactorizedDistribution& p, std::span<const double> s, double eps);

// E[f | parents, child] - E[f | parents] for an arbitrary set of parent
// variables; projection onto the tangent space of a factor whose
// conditioning set is restricted to `parents`.
Table project_restricted(const FactorizedDistribution& p, std::span<const double> f, std::size_t child,
                         std::span<const std::size_t> parents);

}  // namespace eifkit
