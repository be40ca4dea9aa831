#include "eifkit/tangent.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "eifkit/error.hpp"
#include "eifkit/rng.hpp"

namespace eifkit {

namespace {

double sup_abs(std::span<const double> f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

void require_size(const FactorizedDistribution& p, std::span<const double> f) {
  if (f.size() != p.space().size()) throw DomainError("function table does not match the outcome space");
}

}  // namespace

ScoreFunction::ScoreFunction(const FactorizedDistribution& p, Table values) : values_(std::move(values)) {
  require_size(p, values_);
  for (double v : values_) {
    if (!std::isfinite(v)) throw DomainError("score has a non-finite value");
  }
  const double mean = expectation(p, values_);
  if (std::abs(mean) > kMeanTolerance * std::max(1.0, sup_abs(values_))) {
    std::ostringstream msg;
    msg << "score is not centered: E_P S = " << mean;
    throw DomainError(msg.str());
  }
}

double ScoreFunction::sup_norm() const { return sup_abs(values_); }

double inner_product(const FactorizedDistribution& p, std::span<const double> f, std::span<const double> g) {
  require_size(p, f);
  require_size(p, g);
  const Table& joint = p.joint();
  double sum = 0.0;
  for (std::size_t i = 0; i < joint.size(); ++i) sum += f[i] * g[i] * joint[i];
  return sum;
}

ScoreFunction center(const FactorizedDistribution& p, std::span<const double> f) {
  require_size(p, f);
  const double mean = expectation(p, f);
  Table out(f.begin(), f.end());
  for (double& v : out) v -= mean;
  return ScoreFunction(p, std::move(out));
}

ScoreFunction random_score(const FactorizedDistribution& p, std::uint64_t seed, double sup_bound) {
  if (!(sup_bound > 0.0)) throw DomainError("sup_bound must be positive");
  Rng rng(seed);
  Table raw(p.space().size());
  for (double& v : raw) v = rng.uniform(-1.0, 1.0);
  const double mean = expectation(p, raw);
  for (double& v : raw) v -= mean;
  const double sup = sup_abs(raw);
  if (sup > sup_bound) {
    for (double& v : raw) v *= sup_bound / sup;
  }
  return ScoreFunction(p, std::move(raw));
}

FactorizedDistribution perturb_joint(const FactorizedDistribution& p, const ScoreFunction& s, double eps) {
  require_size(p, s.values());
  const double sup = s.sup_norm();
  if (eps == 0.0 || sup == 0.0) return p;
  if (!(std::abs(eps) * sup < 1.0)) throw PreconditionError("path leaves the simplex: |eps| * sup|S| >= 1");
  Table joint(p.joint().size());
  for (std::size_t i = 0; i < joint.size(); ++i) joint[i] = (1.0 + eps * s[i]) * p.joint()[i];
  return refactorize(joint, p.variables(), p.positivity_floor());
}

Table project_onto_factor(const FactorizedDistribution& p, std::span<const double> f, std::size_t i) {
  return project_onto_factor_range(p, f, i, i + 1);
}

Table project_onto_factor_range(const FactorizedDistribution& p, std::span<const double> f, std::size_t first,
                                std::size_t last) {
  require_size(p, f);
  if (first > last || last > p.num_variables()) throw DomainError("factor range out of bounds");
  const Table upper = conditional_expectation_table(p, f, last);
  const Table lower = conditional_expectation_table(p, f, first);
  Table out(upper.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = upper[j] - lower[j];
  return out;
}

std::vector<Table> decompose_score(const FactorizedDistribution& p, std::span<const double> f) {
  require_size(p, f);
  const std::size_t d = p.num_variables();
  std::vector<Table> levels(d + 1);
  for (std::size_t k = 0; k <= d; ++k) levels[k] = conditional_expectation_table(p, f, k);
  std::vector<Table> parts(d);
  for (std::size_t i = 0; i < d; ++i) {
    parts[i].resize(f.size());
    for (std::size_t j = 0; j < f.size(); ++j) parts[i][j] = levels[i + 1][j] - levels[i][j];
  }
  return parts;
}

namespace {

// Multiplies factor i by (1 + eps * component), where component is a function
// of the length-(i+1) prefix given on the whole space.
Table fluctuated_factor(const FactorizedDistribution& p, std::size_t i, std::span<const double> component,
                        double eps) {
  const OutcomeSpace& space = p.space();
  const std::size_t width = space.stride(i + 1);
  const std::size_t card = space.cardinality(i);
  Table t(p.factor(i).begin(), p.factor(i).end());
  for (std::size_t j = 0; j < t.size(); ++j) {
    const double w = 1.0 + eps * component[j * width];
    if (w < 0.0) throw PreconditionError("factor path leaves the simplex");
    t[j] *= w;
  }
  // The component has conditional mean zero, so rows already sum to one up
  // to rounding; renormalize to keep the row invariant exact.
  for (std::size_t parent = 0; parent < t.size() / card; ++parent) {
    double sum = 0.0;
    for (std::size_t l = 0; l < card; ++l) sum += t[parent * card + l];
    if (sum > 0.0) {
      for (std::size_t l = 0; l < card; ++l) t[parent * card + l] /= sum;
    }
  }
  return t;
}

}  // namespace

FactorizedDistribution perturb_factor(const FactorizedDistribution& p, std::size_t i, std::span<const double> s,
                                      double eps) {
  require_size(p, s);
  if (i >= p.num_variables()) throw DomainError("factor index out of range");
  if (eps == 0.0) return p;
  const Table component = project_onto_factor(p, s, i);
  return p.with_factor(i, fluctuated_factor(p, i, component, eps));
}

FactorizedDistribution perturb_factors(const FactorizedDistribution& p, std::span<const double> s, double eps) {
  require_size(p, s);
  if (eps == 0.0) return p;
  const std::vector<Table> parts = decompose_score(p, s);
  std::vector<Table> factors;
  factors.reserve(p.num_variables());
  for (std::size_t i = 0; i < p.num_variables(); ++i) factors.push_back(fluctuated_factor(p, i, parts[i], eps));
  return FactorizedDistribution(p.variables(), std::move(factors), p.positivity_floor(), p.null_rows());
}

Table project_restricted(const FactorizedDistribution& p, std::span<const double> f, std::size_t child,
                         std::span<const std::size_t> parents) {
  require_size(p, f);
  std::vector<std::size_t> with_child(parents.begin(), parents.end());
  with_child.push_back(child);
  std::sort(with_child.begin(), with_child.end());
  std::vector<std::size_t> without(parents.begin(), parents.end());
  std::sort(without.begin(), without.end());
  const Table upper = conditional_expectation_on(p, f, with_child);
  const Table lower = conditional_expectation_on(p, f, without);
  Table out(upper.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = upper[j] - lower[j];
  return out;
}

}  // namespace eifkit
