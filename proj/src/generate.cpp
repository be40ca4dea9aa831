#include "eifkit/generate.hpp"

#include <algorithm>

#include "eifkit/error.hpp"
#include "eifkit/layout.hpp"
#include "eifkit/rng.hpp"

namespace eifkit {

namespace {

void fill_row(Rng& rng, double* row, std::size_t card, const GeneratorOptions& opt) {
  double sum = 0.0;
  for (std::size_t l = 0; l < card; ++l) sum += row[l] = rng.uniform(opt.row_lower, 1.0);
  for (std::size_t l = 0; l < card; ++l) row[l] = std::max(row[l] / sum, opt.positivity_floor);
  sum = 0.0;
  for (std::size_t l = 0; l < card; ++l) sum += row[l];
  for (std::size_t l = 0; l < card; ++l) row[l] /= sum;
}

void set_point_mass(Table& t, std::size_t row, std::size_t card, std::size_t level) {
  for (std::size_t l = 0; l < card; ++l) t[row * card + l] = l == level ? 1.0 : 0.0;
}

std::vector<double> level_values(std::size_t card, double start) {
  std::vector<double> v(card);
  for (std::size_t l = 0; l < card; ++l) v[l] = start + static_cast<double>(l);
  return v;
}

std::vector<Table> random_factors(const std::vector<VariableSpec>& variables, std::uint64_t seed,
                                  const GeneratorOptions& opt) {
  std::vector<std::size_t> cards;
  for (const auto& v : variables) cards.push_back(v.cardinality());
  const OutcomeSpace space(cards);
  Rng rng(seed);
  std::vector<Table> factors(variables.size());
  for (std::size_t i = 0; i < variables.size(); ++i) {
    factors[i].resize(space.prefix_count(i + 1));
    for (std::size_t r = 0; r < space.prefix_count(i); ++r) fill_row(rng, &factors[i][r * cards[i]], cards[i], opt);
  }
  return factors;
}

}  // namespace

Table random_row(std::uint64_t seed, std::size_t card, const GeneratorOptions& opt) {
  Rng rng(seed);
  Table row(card);
  fill_row(rng, row.data(), card, opt);
  return row;
}

VariableSpec make_variable(std::string name, std::size_t card, std::string role) {
  return VariableSpec{std::move(name), level_values(card, 0.0), std::move(role)};
}

FactorizedDistribution random_distribution(std::vector<VariableSpec> variables, std::uint64_t seed,
                                           const GeneratorOptions& opt) {
  std::vector<Table> factors = random_factors(variables, seed, opt);
  return FactorizedDistribution(std::move(variables), std::move(factors), opt.positivity_floor);
}

FactorizedDistribution random_univariate(std::uint64_t seed, std::size_t card, const GeneratorOptions& opt) {
  std::vector<VariableSpec> vars{{"X", level_values(card, 1.0), "outcome"}};
  return random_distribution(std::move(vars), seed, opt);
}

FactorizedDistribution random_point_treatment(std::uint64_t seed, std::vector<std::size_t> w_cards,
                                              std::size_t y_card, const GeneratorOptions& opt) {
  std::vector<VariableSpec> vars;
  for (std::size_t j = 0; j < w_cards.size(); ++j) {
    vars.push_back(make_variable(w_cards.size() == 1 ? "W" : "W" + std::to_string(j), w_cards[j], "confounder"));
  }
  vars.push_back(make_variable("A", 2, "treatment"));
  vars.push_back(make_variable("Y", y_card, "outcome"));
  return random_distribution(std::move(vars), seed, opt);
}

FactorizedDistribution random_transport(std::uint64_t seed, bool restricted, std::size_t w_card,
                                        std::size_t y_card, const GeneratorOptions& opt) {
  std::vector<VariableSpec> vars{make_variable("S", 2, "site"),     make_variable("W", w_card, "confounder"),
                                 make_variable("A", 2, "treatment"), make_variable("Z", 2, "intermediate"),
                                 make_variable("M", 2, "mediator"),  make_variable("Y", y_card, "outcome")};
  std::vector<Table> f = random_factors(vars, seed, opt);
  const std::size_t sw_count = 2 * w_card;
  for (std::size_t sw = 0; sw < sw_count; ++sw) {
    for (std::size_t z = 0; z < 2; ++z) {
      const std::size_t r0 = (sw * 2 + 0) * 2 + z;
      const std::size_t r1 = (sw * 2 + 1) * 2 + z;
      if (restricted) {
        for (std::size_t m = 0; m < 2; ++m) f[4][r1 * 2 + m] = f[4][r0 * 2 + m];
      }
      for (std::size_t m = 0; m < 2; ++m) {
        for (std::size_t r : {r0, r1}) {
          const std::size_t yrow = r * 2 + m;
          if (sw < w_card) {
            set_point_mass(f[5], yrow, y_card, 0);  // S = 0: outcome unobserved
          } else if (restricted && r == r1) {
            std::copy_n(&f[5][(r0 * 2 + m) * y_card], y_card, &f[5][yrow * y_card]);
          }
        }
      }
    }
  }
  return FactorizedDistribution(std::move(vars), std::move(f), opt.positivity_floor);
}

FactorizedDistribution random_longitudinal(std::uint64_t seed, std::size_t k, const GeneratorOptions& opt) {
  std::vector<VariableSpec> vars;
  for (std::size_t j = 0; j <= k; ++j) {
    vars.push_back(make_variable("L" + std::to_string(j), j == 0 ? 3 : 2, "covariate"));
    vars.push_back(make_variable("A" + std::to_string(j), 2, "treatment"));
  }
  vars.push_back(make_variable("Y", 3, "outcome"));
  return random_distribution(std::move(vars), seed, opt);
}

FactorizedDistribution random_survival(std::uint64_t seed, std::size_t horizon, bool censoring,
                                       std::size_t w_card, const GeneratorOptions& opt) {
  if (horizon == 0) throw DomainError("survival horizon must be at least 1");
  std::vector<VariableSpec> vars{make_variable("W", w_card, "confounder"), make_variable("A", 2, "treatment")};
  for (std::size_t t = 1; t <= horizon; ++t) {
    vars.push_back(make_variable("C" + std::to_string(t - 1), 2, "censoring"));
    vars.push_back(make_variable("N" + std::to_string(t), 2, "event"));
  }
  std::vector<Table> f = random_factors(vars, seed, opt);
  std::vector<std::size_t> cards;
  for (const auto& v : vars) cards.push_back(v.cardinality());
  const OutcomeSpace space(cards);
  for (std::size_t v = 2; v < vars.size(); ++v) {
    const bool is_censor = (v - 2) % 2 == 0;
    for (std::size_t parent = 0; parent < space.prefix_count(v); ++parent) {
      const std::size_t idx = parent * space.stride(v);
      bool jumped = false;
      for (std::size_t u = 2; u < v; ++u) jumped = jumped || space.level_of(idx, u) == 1;
      if (jumped || (is_censor && !censoring)) set_point_mass(f[v], parent, 2, 0);
    }
  }
  return FactorizedDistribution(std::move(vars), std::move(f), opt.positivity_floor);
}

LongitudinalSpec random_g_star(const FactorizedDistribution& p, std::uint64_t seed, const GeneratorOptions& opt) {
  const LongitudinalLayout l = longitudinal_layout(p);
  Rng rng(seed);
  LongitudinalSpec spec;
  for (std::size_t v : l.treatments) {
    const std::size_t card = p.space().cardinality(v);
    Table t(p.factor(v).size());
    for (std::size_t r = 0; r < t.size() / card; ++r) fill_row(rng, &t[r * card], card, opt);
    spec.g_star.push_back(std::move(t));
  }
  return spec;
}

InterventionSupplied random_supplied_intervention(const FactorizedDistribution& p, std::uint64_t seed,
                                                  const GeneratorOptions& opt) {
  const TransportLayout l = transport_layout(p);
  Rng rng(seed);
  InterventionSupplied s{Table(l.w_count * 2)};
  for (std::size_t w = 0; w < l.w_count; ++w) fill_row(rng, &s.table[w * 2], 2, opt);
  return s;
}

SurvivalSpec random_survival_rule(const FactorizedDistribution& p, std::uint64_t seed, std::size_t t0) {
  const SurvivalLayout l = survival_layout(p);
  Rng rng(seed);
  SurvivalSpec spec;
  spec.t0 = t0;
  for (std::size_t w = 0; w < l.w_count; ++w) spec.rule.push_back(rng.below(2));
  return spec;
}

FactorizedDistribution generate_shape(const std::string& shape, std::uint64_t seed) {
  if (shape == "univariate") return random_univariate(seed);
  if (shape == "point_treatment") return random_point_treatment(seed);
  if (shape == "transport") return random_transport(seed, false);
  if (shape == "transport_restricted") return random_transport(seed, true);
  if (shape == "longitudinal_k0") return random_longitudinal(seed, 0);
  if (shape == "longitudinal_k1") return random_longitudinal(seed, 1);
  if (shape == "longitudinal_k2") return random_longitudinal(seed, 2);
  if (shape == "survival") return random_survival(seed, 3, true);
  if (shape == "survival_uncensored") return random_survival(seed, 3, false);
  throw ConfigError("unknown generator shape '" + shape + "'");
}

}  // namespace eifkit
