#pragma once

// Finite discrete distributions factorized into conditional probability
// tables in a fixed time ordering:
//
//   p(o) = prod_i p_i(o_i | o_0, ..., o_{i-1})
//
// Outcome points are addressed by a flat mixed-radix index with variable 0
// as the most significant digit, so every prefix (o_0, ..., o_{k-1}) owns a
// contiguous block of the outcome space. Conditional expectations given a
// prefix are block reductions, and the table of factor i is laid out exactly
// like a function of the length-(i+1) prefix: entry (parent * card_i + level).

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <optional>
#include <vector>

namespace eifkit {

// A real-valued function on the outcome space, or on the prefixes of a
// given length, stored densely in flat-index order.
using Table = std::vector<double>;

struct VariableSpec {
  std::string name;
  std::vector<double> levels;  // strictly increasing, at least one
  std::string role;            // free tag: confounder, treatment, outcome, ...

  std::size_t cardinality() const { return levels.size(); }
};

struct OutcomePoint {
  std::vector<std::size_t> levels;  // one level index per variable

  bool operator==(const OutcomePoint&) const = default;
};

class OutcomeSpace {
 public:
  OutcomeSpace() = default;
  explicit OutcomeSpace(std::vector<std::size_t> cardinalities);

  std::size_t size() const { return strides_.empty() ? 1 : strides_.front(); }
  std::size_t num_variables() const { return cards_.size(); }
  std::size_t cardinality(std::size_t var) const { return cards_[var]; }
  const std::vector<std::size_t>& cardinalities() const { return cards_; }

  // Number of outcome points sharing one length-k prefix.
  std::size_t stride(std::size_t k) const { return strides_[k]; }
  // Number of distinct length-k prefixes.
  std::size_t prefix_count(std::size_t k) const { return size() / strides_[k]; }
  std::size_t prefix_of(std::size_t index, std::size_t k) const { return index / strides_[k]; }
  std::size_t level_of(std::size_t index, std::size_t var) const {
    return (index / strides_[var + 1]) % cards_[var];
  }

  // Throws DomainError for a malformed point.
  std::size_t index_of(const OutcomePoint& point) const;
  OutcomePoint point_at(std::size_t index) const;
  // Index of a length-k prefix given its k level indices.
  std::size_t prefix_index(std::span<const std::size_t> partial) const;

 private:
  std::vector<std::size_t> cards_;
  std::vector<std::size_t> strides_;  // size d+1, strides_[d] == 1
};

// A parent configuration whose conditional row could not be derived from
// data because it has zero mass; the row was filled uniformly.
struct NullRow {
  std::size_t factor;
  std::size_t parent;
};

class FactorizedDistribution {
 public:
  static constexpr double kDefaultPositivityFloor = 1e-3;
  static constexpr double kRowTolerance = 1e-12;
  static constexpr double kMassTolerance = 1e-10;

  // Validates every invariant and throws DomainError on violation.
  FactorizedDistribution(std::vector<VariableSpec> variables, std::vector<Table> factors,
                         double positivity_floor = kDefaultPositivityFloor,
                         std::vector<NullRow> null_rows = {});

  const std::vector<VariableSpec>& variables() const { return variables_; }
  const VariableSpec& variable(std::size_t i) const { return variables_[i]; }
  std::size_t num_variables() const { return variables_.size(); }
  const OutcomeSpace& space() const { return space_; }
  std::optional<std::size_t> find_variable(std::string_view name) const;

  std::span<const double> factor(std::size_t i) const { return factors_[i]; }
  const std::vector<Table>& factors() const { return factors_; }
  std::span<const double> row(std::size_t i, std::size_t parent) const;
  double conditional(std::size_t i, std::size_t parent, std::size_t level) const {
    return factors_[i][parent * space_.cardinality(i) + level];
  }

  // Joint density of every outcome point, computed once at construction.
  const Table& joint() const { return joint_; }
  double positivity_floor() const { return positivity_floor_; }
  const std::vector<NullRow>& null_rows() const { return null_rows_; }

  // Throws PositivityError if value < positivity_floor().
  void require_positive(double value, std::string_view what) const;

  // Copy with one factor table replaced (validated).
  FactorizedDistribution with_factor(std::size_t i, Table table) const;

 private:
  std::vector<VariableSpec> variables_;
  OutcomeSpace space_;
  std::vector<Table> factors_;
  Table joint_;
  double positivity_floor_;
  std::vector<NullRow> null_rows_;
};

class QuadratureGrid {
 public:
  // Points are clipped into [a, b]; they must then be strictly increasing.
  QuadratureGrid(std::vector<double> points, std::vector<double> weights, double a, double b);

  // Unit weights at the given support levels that fall within [a, b].
  static QuadratureGrid unit_at_levels(std::span<const double> levels, double a, double b);

  const std::vector<double>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  double lower() const { return a_; }
  double upper() const { return b_; }

 private:
  std::vector<double> points_;
  std::vector<double> weights_;
  double a_;
  double b_;
};

// ---------------------------------------------------------------------------
// Operations

double joint_density(const FactorizedDistribution& p, const OutcomePoint& o);

// Conditional tables by exact marginalization of a joint given in flat-index
// order. Zero-mass parent rows are filled uniformly and recorded in
// null_rows().
FactorizedDistribution refactorize(std::span<const double> joint, std::vector<VariableSpec> variables,
                                   double positivity_floor = FactorizedDistribution::kDefaultPositivityFloor);

double expectation(const FactorizedDistribution& p, std::span<const double> f);

Table tabulate(const FactorizedDistribution& p, const std::function<double(const OutcomePoint&)>& f);

// f(o) = level value of one variable.
Table variable_values(const FactorizedDistribution& p, std::size_t var);

// E[f | O_0..O_{k-1} = at], k = at.size(). Throws DomainError on zero mass.
double conditional_expectation(const FactorizedDistribution& p, std::span<const double> f,
                               std::span<const std::size_t> at);

// Mass of every length-k prefix.
Table prefix_marginal(const FactorizedDistribution& p, std::size_t k);

// E[f | length-k prefix] for every prefix; zero-mass prefixes map to 0.
Table prefix_means(const FactorizedDistribution& p, std::span<const double> f, std::size_t k);

// Expands a function of the length-k prefix to the whole outcome space.
Table broadcast_prefix(const OutcomeSpace& space, std::span<const double> prefix_table, std::size_t k);

// E[f | length-k prefix] as a function on the whole outcome space.
Table conditional_expectation_table(const FactorizedDistribution& p, std::span<const double> f,
                                    std::size_t k);

// E[f | O_v, v in vars] for an arbitrary subset of variables, as a function
// on the whole outcome space. Zero-mass cells map to 0.
Table conditional_expectation_on(const FactorizedDistribution& p, std::span<const double> f,
                                 std::span<const std::size_t> vars);

// Integrates the last variable of a length-(k+1) prefix function against a
// conditional table of the same shape (rows of length card).
Table contract_last(std::span<const double> f, std::span<const double> conditional_table, std::size_t card);

struct Marginal {
  std::vector<std::size_t> vars;
  std::vector<std::size_t> cards;
  Table probs;  // mixed radix over vars, first var most significant

  double at(std::span<const std::size_t> levels) const;
};

Marginal marginal(const FactorizedDistribution& p, std::vector<std::size_t> vars);

}  // namespace eifkit
