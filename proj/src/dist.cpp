#include "eifkit/dist.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "eifkit/error.hpp"

namespace eifkit {

// ---------------------------------------------------------------------------
// OutcomeSpace

OutcomeSpace::OutcomeSpace(std::vector<std::size_t> cardinalities) : cards_(std::move(cardinalities)) {
  strides_.assign(cards_.size() + 1, 1);
  for (std::size_t k = cards_.size(); k-- > 0;) {
    if (cards_[k] == 0) throw DomainError("variable with zero levels");
    strides_[k] = strides_[k + 1] * cards_[k];
  }
}

std::size_t OutcomeSpace::index_of(const OutcomePoint& point) const {
  if (point.levels.size() != cards_.size()) {
    throw DomainError("outcome point has " + std::to_string(point.levels.size()) + " coordinates, expected " +
                      std::to_string(cards_.size()));
  }
  return prefix_index(point.levels);
}

OutcomePoint OutcomeSpace::point_at(std::size_t index) const {
  OutcomePoint o;
  o.levels.resize(cards_.size());
  for (std::size_t v = 0; v < cards_.size(); ++v) o.levels[v] = level_of(index, v);
  return o;
}

std::size_t OutcomeSpace::prefix_index(std::span<const std::size_t> partial) const {
  if (partial.size() > cards_.size()) throw DomainError("prefix longer than the variable list");
  std::size_t idx = 0;
  for (std::size_t v = 0; v < partial.size(); ++v) {
    if (partial[v] >= cards_[v]) {
      throw DomainError("level index " + std::to_string(partial[v]) + " out of range for variable " +
                        std::to_string(v));
    }
    idx = idx * cards_[v] + partial[v];
  }
  return idx;
}

// ---------------------------------------------------------------------------
// FactorizedDistribution

namespace {

void validate_variables(const std::vector<VariableSpec>& variables) {
  std::set<std::string> names;
  for (const auto& v : variables) {
    if (v.levels.empty()) throw DomainError("variable '" + v.name + "' has no levels");
    for (std::size_t k = 1; k < v.levels.size(); ++k) {
      if (!(v.levels[k] > v.levels[k - 1])) {
        throw DomainError("levels of variable '" + v.name + "' are not strictly increasing");
      }
    }
    if (!names.insert(v.name).second) throw DomainError("duplicate variable name '" + v.name + "'");
  }
}

std::vector<std::size_t> cardinalities_of(const std::vector<VariableSpec>& variables) {
  std::vector<std::size_t> cards;
  cards.reserve(variables.size());
  for (const auto& v : variables) cards.push_back(v.levels.size());
  return cards;
}

}  // namespace

FactorizedDistribution::FactorizedDistribution(std::vector<VariableSpec> variables, std::vector<Table> factors,
                                               double positivity_floor, std::vector<NullRow> null_rows)
    : variables_(std::move(variables)),
      factors_(std::move(factors)),
      positivity_floor_(positivity_floor),
      null_rows_(std::move(null_rows)) {
  if (variables_.empty()) throw DomainError("distribution needs at least one variable");
  validate_variables(variables_);
  space_ = OutcomeSpace(cardinalities_of(variables_));
  if (!(positivity_floor_ >= 0.0)) throw DomainError("positivity floor must be >= 0");
  if (factors_.size() != variables_.size()) throw DomainError("one factor per variable required");

  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const std::size_t card = space_.cardinality(i);
    const std::size_t rows = space_.prefix_count(i);
    if (factors_[i].size() != rows * card) {
      throw DomainError("factor '" + variables_[i].name + "' has " + std::to_string(factors_[i].size()) +
                        " entries, expected " + std::to_string(rows * card));
    }
    for (std::size_t r = 0; r < rows; ++r) {
      double sum = 0.0;
      for (std::size_t l = 0; l < card; ++l) {
        const double q = factors_[i][r * card + l];
        if (!(q >= 0.0) || q > 1.0 + kRowTolerance) {
          throw DomainError("factor '" + variables_[i].name + "' has an entry outside [0,1]");
        }
        sum += q;
      }
      if (std::abs(sum - 1.0) > kRowTolerance) {
        std::ostringstream msg;
        msg << "factor '" << variables_[i].name << "' row " << r << " sums to " << sum;
        throw DomainError(msg.str());
      }
    }
  }

  // joint over prefix i+1 = joint over prefix i times factor i; the same
  // left-to-right product that joint_density() evaluates point by point.
  Table cur(factors_[0].begin(), factors_[0].end());
  for (std::size_t i = 1; i < factors_.size(); ++i) {
    const std::size_t card = space_.cardinality(i);
    Table next(factors_[i].size());
    for (std::size_t j = 0; j < next.size(); ++j) next[j] = cur[j / card] * factors_[i][j];
    cur = std::move(next);
  }
  joint_ = std::move(cur);

  const double total = std::accumulate(joint_.begin(), joint_.end(), 0.0);
  if (std::abs(total - 1.0) > kMassTolerance) throw DomainError("joint density does not sum to 1");
}

std::optional<std::size_t> FactorizedDistribution::find_variable(std::string_view name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (variables_[i].name == name) return i;
  }
  return std::nullopt;
}

std::span<const double> FactorizedDistribution::row(std::size_t i, std::size_t parent) const {
  const std::size_t card = space_.cardinality(i);
  return std::span<const double>(factors_[i]).subspan(parent * card, card);
}

void FactorizedDistribution::require_positive(double value, std::string_view what) const {
  if (value < positivity_floor_) {
    std::ostringstream msg;
    msg << "positivity violated: " << what << " = " << value << " < floor " << positivity_floor_;
    throw PositivityError(msg.str());
  }
}

FactorizedDistribution FactorizedDistribution::with_factor(std::size_t i, Table table) const {
  std::vector<Table> factors = factors_;
  factors.at(i) = std::move(table);
  return FactorizedDistribution(variables_, std::move(factors), positivity_floor_, null_rows_);
}

// ---------------------------------------------------------------------------
// QuadratureGrid

QuadratureGrid::QuadratureGrid(std::vector<double> points, std::vector<double> weights, double a, double b)
    : points_(std::move(points)), weights_(std::move(weights)), a_(a), b_(b) {
  if (!(a_ <= b_)) throw DomainError("quadrature bounds require a <= b");
  if (points_.size() != weights_.size()) throw DomainError("quadrature points and weights differ in length");
  for (double& x : points_) x = std::clamp(x, a_, b_);
  for (std::size_t k = 0; k < points_.size(); ++k) {
    if (!(weights_[k] > 0.0)) throw DomainError("quadrature weights must be positive");
    if (k > 0 && !(points_[k] > points_[k - 1])) {
      throw DomainError("quadrature points must be strictly increasing after clipping");
    }
  }
}

QuadratureGrid QuadratureGrid::unit_at_levels(std::span<const double> levels, double a, double b) {
  std::vector<double> pts;
  for (double x : levels) {
    if (x >= a && x <= b) pts.push_back(x);
  }
  std::vector<double> w(pts.size(), 1.0);
  return QuadratureGrid(std::move(pts), std::move(w), a, b);
}

// ---------------------------------------------------------------------------
// Operations

double joint_density(const FactorizedDistribution& p, const OutcomePoint& o) {
  const std::size_t idx = p.space().index_of(o);
  double density = 1.0;
  for (std::size_t i = 0; i < p.num_variables(); ++i) {
    density *= p.factor(i)[p.space().prefix_of(idx, i + 1)];
  }
  return density;
}

FactorizedDistribution refactorize(std::span<const double> joint, std::vector<VariableSpec> variables,
                                   double positivity_floor) {
  validate_variables(variables);
  const OutcomeSpace space(cardinalities_of(variables));
  if (joint.size() != space.size()) throw DomainError("joint table does not match the outcome space");
  double total = 0.0;
  for (double q : joint) {
    if (!(q >= 0.0)) throw DomainError("joint density must be nonnegative");
    total += q;
  }
  if (std::abs(total - 1.0) > FactorizedDistribution::kMassTolerance) {
    throw DomainError("joint density does not sum to 1");
  }

  const std::size_t d = variables.size();
  // masses[k] = mass of every length-k prefix, built from the full joint down.
  std::vector<Table> masses(d + 1);
  masses[d].assign(joint.begin(), joint.end());
  for (std::size_t k = d; k-- > 0;) {
    const std::size_t card = space.cardinality(k);
    masses[k].assign(space.prefix_count(k), 0.0);
    for (std::size_t j = 0; j < masses[k + 1].size(); ++j) masses[k][j / card] += masses[k + 1][j];
  }

  std::vector<Table> factors(d);
  std::vector<NullRow> null_rows;
  for (std::size_t i = 0; i < d; ++i) {
    const std::size_t card = space.cardinality(i);
    Table& t = factors[i];
    t.resize(masses[i + 1].size());
    for (std::size_t parent = 0; parent < masses[i].size(); ++parent) {
      const double denom = masses[i][parent];
      if (denom > 0.0) {
        for (std::size_t l = 0; l < card; ++l) t[parent * card + l] = masses[i + 1][parent * card + l] / denom;
      } else {
        for (std::size_t l = 0; l < card; ++l) t[parent * card + l] = 1.0 / static_cast<double>(card);
        null_rows.push_back({i, parent});
      }
    }
  }
  return FactorizedDistribution(std::move(variables), std::move(factors), positivity_floor, std::move(null_rows));
}

double expectation(const FactorizedDistribution& p, std::span<const double> f) {
  const Table& joint = p.joint();
  if (f.size() != joint.size()) throw DomainError("function table does not match the outcome space");
  double sum = 0.0;
  for (std::size_t i = 0; i < joint.size(); ++i) sum += f[i] * joint[i];
  return sum;
}

Table tabulate(const FactorizedDistribution& p, const std::function<double(const OutcomePoint&)>& f) {
  Table out(p.space().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(p.space().point_at(i));
  return out;
}

Table variable_values(const FactorizedDistribution& p, std::size_t var) {
  const auto& levels = p.variable(var).levels;
  Table out(p.space().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = levels[p.space().level_of(i, var)];
  return out;
}

double conditional_expectation(const FactorizedDistribution& p, std::span<const double> f,
                               std::span<const std::size_t> at) {
  const OutcomeSpace& space = p.space();
  if (f.size() != space.size()) throw DomainError("function table does not match the outcome space");
  const std::size_t k = at.size();
  const std::size_t block = space.prefix_index(at);
  const std::size_t width = space.stride(k);
  double num = 0.0;
  double mass = 0.0;
  for (std::size_t i = block * width; i < (block + 1) * width; ++i) {
    num += f[i] * p.joint()[i];
    mass += p.joint()[i];
  }
  if (!(mass > 0.0)) throw DomainError("conditioning event has zero mass");
  return num / mass;
}

Table prefix_marginal(const FactorizedDistribution& p, std::size_t k) {
  const OutcomeSpace& space = p.space();
  const std::size_t width = space.stride(k);
  Table out(space.prefix_count(k), 0.0);
  const Table& joint = p.joint();
  for (std::size_t b = 0; b < out.size(); ++b) {
    double mass = 0.0;
    for (std::size_t i = b * width; i < (b + 1) * width; ++i) mass += joint[i];
    out[b] = mass;
  }
  return out;
}

Table prefix_means(const FactorizedDistribution& p, std::span<const double> f, std::size_t k) {
  const OutcomeSpace& space = p.space();
  if (f.size() != space.size()) throw DomainError("function table does not match the outcome space");
  const std::size_t width = space.stride(k);
  Table out(space.prefix_count(k), 0.0);
  const Table& joint = p.joint();
  for (std::size_t b = 0; b < out.size(); ++b) {
    double num = 0.0;
    double mass = 0.0;
    for (std::size_t i = b * width; i < (b + 1) * width; ++i) {
      num += f[i] * joint[i];
      mass += joint[i];
    }
    out[b] = mass > 0.0 ? num / mass : 0.0;
  }
  return out;
}

Table broadcast_prefix(const OutcomeSpace& space, std::span<const double> prefix_table, std::size_t k) {
  if (prefix_table.size() != space.prefix_count(k)) throw DomainError("prefix table has the wrong size");
  Table out(space.size());
  const std::size_t width = space.stride(k);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = prefix_table[i / width];
  return out;
}

Table conditional_expectation_table(const FactorizedDistribution& p, std::span<const double> f, std::size_t k) {
  return broadcast_prefix(p.space(), prefix_means(p, f, k), k);
}

Table conditional_expectation_on(const FactorizedDistribution& p, std::span<const double> f,
                                 std::span<const std::size_t> vars) {
  const OutcomeSpace& space = p.space();
  if (f.size() != space.size()) throw DomainError("function table does not match the outcome space");
  std::size_t cells = 1;
  for (std::size_t v : vars) {
    if (v >= space.num_variables()) throw DomainError("conditioning variable out of range");
    cells *= space.cardinality(v);
  }
  auto cell_of = [&](std::size_t idx) {
    std::size_t c = 0;
    for (std::size_t v : vars) c = c * space.cardinality(v) + space.level_of(idx, v);
    return c;
  };
  Table num(cells, 0.0);
  Table mass(cells, 0.0);
  const Table& joint = p.joint();
  std::vector<std::size_t> cell(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    cell[i] = cell_of(i);
    num[cell[i]] += f[i] * joint[i];
    mass[cell[i]] += joint[i];
  }
  Table out(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    const double m = mass[cell[i]];
    out[i] = m > 0.0 ? num[cell[i]] / m : 0.0;
  }
  return out;
}

Table contract_last(std::span<const double> f, std::span<const double> conditional_table, std::size_t card) {
  if (f.size() != conditional_table.size() || card == 0 || f.size() % card != 0) {
    throw DomainError("contract_last: shape mismatch");
  }
  Table out(f.size() / card, 0.0);
  for (std::size_t parent = 0; parent < out.size(); ++parent) {
    double s = 0.0;
    for (std::size_t l = 0; l < card; ++l) s += conditional_table[parent * card + l] * f[parent * card + l];
    out[parent] = s;
  }
  return out;
}

double Marginal::at(std::span<const std::size_t> levels) const {
  if (levels.size() != vars.size()) throw DomainError("marginal lookup has the wrong number of levels");
  std::size_t idx = 0;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (levels[k] >= cards[k]) throw DomainError("marginal lookup level out of range");
    idx = idx * cards[k] + levels[k];
  }
  return probs[idx];
}

Marginal marginal(const FactorizedDistribution& p, std::vector<std::size_t> vars) {
  const OutcomeSpace& space = p.space();
  Marginal m;
  std::size_t cells = 1;
  for (std::size_t v : vars) {
    if (v >= space.num_variables()) throw DomainError("marginal variable out of range");
    m.cards.push_back(space.cardinality(v));
    cells *= space.cardinality(v);
  }
  m.vars = std::move(vars);
  m.probs.assign(cells, 0.0);
  for (std::size_t i = 0; i < space.size(); ++i) {
    std::size_t c = 0;
    for (std::size_t v : m.vars) c = c * space.cardinality(v) + space.level_of(i, v);
    m.probs[c] += p.joint()[i];
  }
  return m;
}

}  // namespace eifkit
