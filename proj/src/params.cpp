#include "eifkit/params.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "eifkit/error.hpp"
#include "eifkit/layout.hpp"

namespace eifkit {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double row_mean(const FactorizedDistribution& p, std::size_t var, std::size_t parent) {
  const auto row = p.row(var, parent);
  const auto& levels = p.variable(var).levels;
  double m = 0.0;
  for (std::size_t l = 0; l < row.size(); ++l) m += levels[l] * row[l];
  return m;
}

void validate_rows(const Table& t, std::size_t card, const std::string& what) {
  if (card == 0 || t.size() % card != 0) throw DomainError(what + ": table size is not a multiple of the row length");
  for (std::size_t r = 0; r < t.size() / card; ++r) {
    double sum = 0.0;
    for (std::size_t l = 0; l < card; ++l) {
      const double q = t[r * card + l];
      if (!(q >= 0.0) || q > 1.0 + FactorizedDistribution::kRowTolerance) {
        throw DomainError(what + ": entry outside [0,1]");
      }
      sum += q;
    }
    if (std::abs(sum - 1.0) > FactorizedDistribution::kRowTolerance) {
      throw DomainError(what + ": row " + std::to_string(r) + " does not sum to 1");
    }
  }
}

}  // namespace

std::string parameter_type(const ParameterSpec& spec) {
  return std::visit(Overloaded{
                        [](const CdfSquareSpec&) { return std::string("cdf_square"); },
                        [](const TsmSpec&) { return std::string("tsm"); },
                        [](const VteSpec&) { return std::string("vte"); },
                        [](const AttSpec&) { return std::string("att"); },
                        [](const TransportSdeSpec&) { return std::string("transport_sde"); },
                        [](const LongitudinalSpec&) { return std::string("longitudinal"); },
                        [](const SurvivalSpec&) { return std::string("survival"); },
                    },
                    spec);
}

void validate_parameter(const FactorizedDistribution& p, const ParameterSpec& spec) {
  std::visit(Overloaded{
                 [&](const CdfSquareSpec& s) {
                   if (p.num_variables() != 1) throw DomainError("cdf_square needs a univariate distribution");
                   (void)effective_grid(p, s);
                 },
                 [&](const TsmSpec&) { (void)point_treatment_layout(p); },
                 [&](const VteSpec&) { (void)point_treatment_layout(p); },
                 [&](const AttSpec&) { (void)point_treatment_layout(p); },
                 [&](const TransportSdeSpec& s) {
                   const TransportLayout l = transport_layout(p);
                   if (s.a > 1 || s.a_star > 1 || s.s_star > 1) {
                     throw DomainError("transport_sde: a, a_star and s_star must be 0 or 1");
                   }
                   if (const auto* sup = std::get_if<InterventionSupplied>(&s.intervention)) {
                     if (sup->table.size() != l.w_count * 2) {
                       throw DomainError("transport_sde: supplied intervention needs " + std::to_string(l.w_count) +
                                         " rows of 2 probabilities");
                     }
                     validate_rows(sup->table, 2, "transport_sde supplied intervention");
                   }
                 },
                 [&](const LongitudinalSpec& s) {
                   const LongitudinalLayout l = longitudinal_layout(p);
                   if (s.g_star.size() != l.treatments.size()) {
                     throw DomainError("longitudinal: expected " + std::to_string(l.treatments.size()) +
                                       " g_star tables");
                   }
                   for (std::size_t i = 0; i < s.g_star.size(); ++i) {
                     const std::size_t v = l.treatments[i];
                     if (s.g_star[i].size() != p.factor(v).size()) {
                       throw DomainError("longitudinal: g_star[" + std::to_string(i) + "] has the wrong shape");
                     }
                     validate_rows(s.g_star[i], p.space().cardinality(v), "longitudinal g_star");
                   }
                 },
                 [&](const SurvivalSpec& s) {
                   const SurvivalLayout l = survival_layout(p);
                   if (s.rule.size() != l.w_count) {
                     throw DomainError("survival: rule needs one treatment level per W configuration (" +
                                       std::to_string(l.w_count) + ")");
                   }
                   for (std::size_t a : s.rule) {
                     if (a > 1) throw DomainError("survival: rule levels must be 0 or 1");
                   }
                   if (s.t0 < 1 || s.t0 > l.horizon) {
                     throw DomainError("survival: t0 must lie in [1, " + std::to_string(l.horizon) + "]");
                   }
                 },
             },
             spec);
}

// ---------------------------------------------------------------------------
// Example 1 style functional

QuadratureGrid effective_grid(const FactorizedDistribution& p, const CdfSquareSpec& spec) {
  if (p.num_variables() != 1) throw DomainError("cdf_square needs a univariate distribution");
  if (spec.grid) return *spec.grid;
  const auto& levels = p.variable(0).levels;
  return QuadratureGrid::unit_at_levels(levels, levels.front(), levels.back());
}

std::vector<double> cdf_at(const FactorizedDistribution& p, const QuadratureGrid& grid) {
  if (p.num_variables() != 1) throw DomainError("cdf_square needs a univariate distribution");
  const auto& levels = p.variable(0).levels;
  const auto probs = p.factor(0);
  std::vector<double> f;
  f.reserve(grid.points().size());
  for (double x : grid.points()) {
    double cdf = 0.0;
    for (std::size_t l = 0; l < levels.size() && levels[l] <= x; ++l) cdf += probs[l];
    f.push_back(cdf);
  }
  return f;
}

double psi_cdf_square(const FactorizedDistribution& p, const QuadratureGrid& grid) {
  const std::vector<double> f = cdf_at(p, grid);
  double sum = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) sum += grid.weights()[k] * f[k] * f[k];
  return sum;
}

// ---------------------------------------------------------------------------
// Point treatment

Table outcome_regression(const FactorizedDistribution& p) {
  const PointTreatmentLayout l = point_treatment_layout(p);
  Table q(l.w_count * 2);
  for (std::size_t j = 0; j < q.size(); ++j) q[j] = row_mean(p, l.y, j);
  return q;
}

double psi_tsm(const FactorizedDistribution& p) {
  const PointTreatmentLayout l = point_treatment_layout(p);
  const Table pw = prefix_marginal(p, l.a);
  const Table q = outcome_regression(p);
  double psi = 0.0;
  for (std::size_t w = 0; w < l.w_count; ++w) {
    if (pw[w] <= 0.0) continue;
    p.require_positive(p.conditional(l.a, w, 1), "g(1 | w)");
    psi += pw[w] * q[w * 2 + 1];
  }
  return psi;
}

BlipTable blip(const FactorizedDistribution& p) {
  const PointTreatmentLayout l = point_treatment_layout(p);
  const Table pw = prefix_marginal(p, l.a);
  const Table q = outcome_regression(p);
  BlipTable b(l.w_count);
  for (std::size_t w = 0; w < l.w_count; ++w) {
    if (pw[w] > 0.0) {
      p.require_positive(p.conditional(l.a, w, 0), "g(0 | w)");
      p.require_positive(p.conditional(l.a, w, 1), "g(1 | w)");
    }
    b[w] = q[w * 2 + 1] - q[w * 2];
  }
  return b;
}

double psi_vte(const FactorizedDistribution& p) {
  const PointTreatmentLayout l = point_treatment_layout(p);
  const Table pw = prefix_marginal(p, l.a);
  const BlipTable b = blip(p);
  double mean = 0.0;
  for (std::size_t w = 0; w < l.w_count; ++w) mean += pw[w] * b[w];
  double var = 0.0;
  for (std::size_t w = 0; w < l.w_count; ++w) var += pw[w] * (b[w] - mean) * (b[w] - mean);
  return var;
}

double psi_att(const FactorizedDistribution& p) {
  const PointTreatmentLayout l = point_treatment_layout(p);
  const Table pw = prefix_marginal(p, l.a);
  const Table q = outcome_regression(p);
  double p1 = 0.0;
  double num = 0.0;
  for (std::size_t w = 0; w < l.w_count; ++w) {
    const double g1 = p.conditional(l.a, w, 1);
    p1 += pw[w] * g1;
    num += pw[w] * g1 * (q[w * 2 + 1] - q[w * 2]);
  }
  if (!(p1 > 0.0)) throw DomainError("att: P(A = 1) = 0");
  p.require_positive(p1, "P(A = 1)");
  for (std::size_t w = 0; w < l.w_count; ++w) {
    if (pw[w] > 0.0) p.require_positive(p.conditional(l.a, w, 0), "g(0 | w)");
  }
  return num / p1;
}

// ---------------------------------------------------------------------------
// Transport

Table transport_intervention(const FactorizedDistribution& p, const TransportSdeSpec& spec) {
  const TransportLayout l = transport_layout(p);
  if (const auto* sup = std::get_if<InterventionSupplied>(&spec.intervention)) return sup->table;
  Table g(l.w_count * 2, 0.0);
  for (std::size_t w = 0; w < l.w_count; ++w) {
    const std::size_t sw = spec.s_star * l.w_count + w;
    const std::size_t swa = sw * 2 + spec.a_star;
    for (std::size_t z = 0; z < 2; ++z) {
      const double pz = p.conditional(l.z, swa, z);
      for (std::size_t m = 0; m < 2; ++m) g[w * 2 + m] += p.conditional(l.m, swa * 2 + z, m) * pz;
    }
  }
  return g;
}

double psi_transport_sde(const FactorizedDistribution& p, const TransportSdeSpec& spec) {
  validate_parameter(p, spec);
  const TransportLayout l = transport_layout(p);
  const double p_s0 = p.conditional(l.s, 0, 0);
  if (!(p_s0 > 0.0)) throw DomainError("transport_sde: the S = 0 stratum is empty");
  const Table psw = prefix_marginal(p, l.a);
  const Table g_star = transport_intervention(p, spec);
  double psi = 0.0;
  for (std::size_t w = 0; w < l.w_count; ++w) {
    const double pw0 = psw[w] / p_s0;  // p(w | S = 0)
    if (pw0 <= 0.0) continue;
    const std::size_t row0 = w * 2 + spec.a;                  // (S=0, w, a)
    const std::size_t row1 = (l.w_count + w) * 2 + spec.a;    // (S=1, w, a)
    double qz = 0.0;
    for (std::size_t z = 0; z < 2; ++z) {
      double qm = 0.0;
      for (std::size_t m = 0; m < 2; ++m) qm += g_star[w * 2 + m] * row_mean(p, l.y, (row1 * 2 + z) * 2 + m);
      qz += p.conditional(l.z, row0, z) * qm;
    }
    psi += pw0 * qz;
  }
  return psi;
}

// ---------------------------------------------------------------------------
// Longitudinal g-computation

namespace {

// Integrates variables [first, last) of a prefix function of length `last`
// down to a function of the length-`first` prefix, using P's own factors.
Table integrate_block(const FactorizedDistribution& p, Table f, std::size_t first, std::size_t last) {
  for (std::size_t v = last; v-- > first;) f = contract_last(f, p.factor(v), p.space().cardinality(v));
  return f;
}

}  // namespace

GcompResult gcomp_recursion(const FactorizedDistribution& p, const std::vector<Table>& g_star) {
  validate_parameter(p, LongitudinalSpec{g_star});
  const LongitudinalLayout l = longitudinal_layout(p);
  const std::size_t k = l.k();
  GcompResult r;
  r.q.resize(k + 2);
  r.prefix_length.resize(k + 2);
  r.q[k + 1] = variable_values(p, l.y);
  r.prefix_length[k + 1] = p.num_variables();
  for (std::size_t j = k + 1; j-- > 0;) {
    // Q_{L(j+1)} -> integrate the L(j+1) block under P, then A(j) under g*.
    Table f = integrate_block(p, r.q[j + 1], l.l_first[j + 1], r.prefix_length[j + 1]);
    const std::size_t a = l.treatments[j];
    f = contract_last(f, g_star[j], p.space().cardinality(a));
    r.q[j] = std::move(f);
    r.prefix_length[j] = a;
  }
  const Table base = integrate_block(p, r.q[0], 0, r.prefix_length[0]);
  r.psi = base[0];
  return r;
}

double psi_longitudinal(const FactorizedDistribution& p, const std::vector<Table>& g_star) {
  return gcomp_recursion(p, g_star).psi;
}

// ---------------------------------------------------------------------------
// Survival

SurvivalHazards survival_hazards(const FactorizedDistribution& p) {
  const SurvivalLayout l = survival_layout(p);
  const std::size_t wa = l.w_count * 2;
  SurvivalHazards h;
  h.failure.assign(l.horizon + 1, Table(wa, 0.0));
  h.censoring.assign(l.horizon, Table(wa, 0.0));
  // Row of indicator v at the all-zero history after (w, a).
  auto zero_history_row = [&](std::size_t v, std::size_t j) { return j << (v - l.a - 1); };
  for (std::size_t j = 0; j < wa; ++j) {
    for (std::size_t t = 1; t <= l.horizon; ++t) {
      h.failure[t][j] = p.conditional(l.event(t), zero_history_row(l.event(t), j), 1);
    }
    for (std::size_t c = 0; c < l.horizon; ++c) {
      h.censoring[c][j] = p.conditional(l.censor(c), zero_history_row(l.censor(c), j), 1);
    }
  }
  return h;
}

double psi_survival(const FactorizedDistribution& p, const std::vector<std::size_t>& rule, std::size_t t0) {
  validate_parameter(p, SurvivalSpec{rule, t0});
  const SurvivalLayout l = survival_layout(p);
  const SurvivalHazards h = survival_hazards(p);
  const Table pw = prefix_marginal(p, l.a);
  double psi = 0.0;
  for (std::size_t w = 0; w < l.w_count; ++w) {
    const std::size_t j = w * 2 + rule[w];
    double s = 1.0;
    for (std::size_t t = 1; t <= t0; ++t) s *= 1.0 - h.failure[t][j];
    psi += pw[w] * s;
  }
  return psi;
}

double psi(const FactorizedDistribution& p, const ParameterSpec& spec) {
  return std::visit(Overloaded{
                        [&](const CdfSquareSpec& s) { return psi_cdf_square(p, effective_grid(p, s)); },
                        [&](const TsmSpec&) { return psi_tsm(p); },
                        [&](const VteSpec&) { return psi_vte(p); },
                        [&](const AttSpec&) { return psi_att(p); },
                        [&](const TransportSdeSpec& s) { return psi_transport_sde(p, s); },
                        [&](const LongitudinalSpec& s) { return psi_longitudinal(p, s.g_star); },
                        [&](const SurvivalSpec& s) { return psi_survival(p, s.rule, s.t0); },
                    },
                    spec);
}

}  // namespace eifkit
