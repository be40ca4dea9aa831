#include "eifkit/eif.hpp"

#include <algorithm>
#include <cmath>

#include "eifkit/error.hpp"
#include "eifkit/layout.hpp"
#include "eifkit/tangent.hpp"

namespace eifkit {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Weights only matter on points of positive mass; a zero denominator can
// only occur off the support, where the value is irrelevant.
double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

double row_mean(const FactorizedDistribution& p, std::size_t var, std::size_t parent) {
  const auto row = p.row(var, parent);
  const auto& levels = p.variable(var).levels;
  double m = 0.0;
  for (std::size_t l = 0; l < row.size(); ++l) m += levels[l] * row[l];
  return m;
}

// D* is defined P-almost surely; points without mass are reported as 0.
InfluenceFunction assemble(const FactorizedDistribution& p, std::vector<EifComponent> components, ParameterSpec spec,
                           double psi) {
  const Table& joint = p.joint();
  InfluenceFunction f;
  f.total.assign(joint.size(), 0.0);
  for (auto& c : components) {
    for (std::size_t i = 0; i < joint.size(); ++i) {
      if (!(joint[i] > 0.0)) c.values[i] = 0.0;
      f.total[i] += c.values[i];
    }
  }
  f.components = std::move(components);
  f.parameter = std::move(spec);
  f.psi = psi;
  return f;
}

}  // namespace

const EifComponent* InfluenceFunction::find(const std::string& name) const {
  for (const auto& c : components) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------

InfluenceFunction eif_cdf_square(const FactorizedDistribution& p, const QuadratureGrid& grid) {
  const std::vector<double> f = cdf_at(p, grid);
  const auto& levels = p.variable(0).levels;
  const auto& pts = grid.points();
  const auto& wts = grid.weights();
  Table d(levels.size(), 0.0);
  for (std::size_t l = 0; l < levels.size(); ++l) {
    double sum = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const double ind = levels[l] <= pts[k] ? 1.0 : 0.0;
      sum += wts[k] * f[k] * (ind - f[k]);
    }
    d[l] = 2.0 * sum;
  }
  return assemble(p, {{"X", d, 0, 1}}, CdfSquareSpec{grid}, psi_cdf_square(p, grid));
}

InfluenceFunction eif_tsm(const FactorizedDistribution& p) {
  const PointTreatmentLayout l = point_treatment_layout(p);
  const double psi = psi_tsm(p);
  const Table q = outcome_regression(p);
  const OutcomeSpace& space = p.space();
  Table dy(space.size()), dw(space.size());
  const auto& ylev = p.variable(l.y).levels;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const std::size_t w = space.prefix_of(i, l.a);
    const std::size_t a = space.level_of(i, l.a);
    const double y = ylev[space.level_of(i, l.y)];
    dy[i] = a == 1 ? ratio(y - q[w * 2 + 1], p.conditional(l.a, w, 1)) : 0.0;
    dw[i] = q[w * 2 + 1] - psi;
  }
  return assemble(p, {{"Y", std::move(dy), l.y, l.y + 1}, {"W", std::move(dw), 0, l.a}}, TsmSpec{}, psi);
}

InfluenceFunction eif_vte(const FactorizedDistribution& p) {
  const PointTreatmentLayout l = point_treatment_layout(p);
  const double psi = psi_vte(p);
  const Table q = outcome_regression(p);
  const BlipTable b = blip(p);
  const Table pw = prefix_marginal(p, l.a);
  double eb = 0.0;
  for (std::size_t w = 0; w < l.w_count; ++w) eb += pw[w] * b[w];
  const OutcomeSpace& space = p.space();
  Table dy(space.size()), dw(space.size());
  const auto& ylev = p.variable(l.y).levels;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const std::size_t w = space.prefix_of(i, l.a);
    const std::size_t a = space.level_of(i, l.a);
    const double y = ylev[space.level_of(i, l.y)];
    const double c = b[w] - eb;
    const double sign = a == 1 ? 1.0 : -1.0;
    dy[i] = 2.0 * c * sign * ratio(y - q[w * 2 + a], p.conditional(l.a, w, a));
    dw[i] = c * c - psi;
  }
  return assemble(p, {{"Y", std::move(dy), l.y, l.y + 1}, {"W", std::move(dw), 0, l.a}}, VteSpec{}, psi);
}

InfluenceFunction eif_att(const FactorizedDistribution& p) {
  const PointTreatmentLayout l = point_treatment_layout(p);
  const double psi = psi_att(p);
  const Table q = outcome_regression(p);
  const Table pw = prefix_marginal(p, l.a);
  double p1 = 0.0;
  for (std::size_t w = 0; w < l.w_count; ++w) p1 += pw[w] * p.conditional(l.a, w, 1);
  const OutcomeSpace& space = p.space();
  Table dy(space.size()), da(space.size()), dw(space.size());
  const auto& ylev = p.variable(l.y).levels;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const std::size_t w = space.prefix_of(i, l.a);
    const std::size_t a = space.level_of(i, l.a);
    const double y = ylev[space.level_of(i, l.y)];
    const double g1 = p.conditional(l.a, w, 1);
    const double g0 = p.conditional(l.a, w, 0);
    const double b = q[w * 2 + 1] - q[w * 2];
    const double h = a == 1 ? 1.0 / p1 : -ratio(g1, p1 * g0);
    dy[i] = h * (y - q[w * 2 + a]);
    da[i] = (static_cast<double>(a) - g1) * (b - psi) / p1;
    dw[i] = g1 * (b - psi) / p1;
  }
  return assemble(p,
                  {{"Y", std::move(dy), l.y, l.y + 1}, {"A", std::move(da), l.a, l.a + 1}, {"W", std::move(dw), 0, l.a}},
                  AttSpec{}, psi);
}

Table ipw_gradient(const FactorizedDistribution& p) {
  const PointTreatmentLayout l = point_treatment_layout(p);
  const double psi = psi_tsm(p);
  const OutcomeSpace& space = p.space();
  const auto& ylev = p.variable(l.y).levels;
  Table d(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    const std::size_t w = space.prefix_of(i, l.a);
    const std::size_t a = space.level_of(i, l.a);
    const double y = ylev[space.level_of(i, l.y)];
    d[i] = (a == 1 ? ratio(y, p.conditional(l.a, w, 1)) : 0.0) - psi;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Transport

void require_transport_restriction(const FactorizedDistribution& p, double tol) {
  const TransportLayout l = transport_layout(p);
  for (std::size_t sw = 0; sw < 2 * l.w_count; ++sw) {
    for (std::size_t z = 0; z < 2; ++z) {
      const std::size_t r0 = (sw * 2 + 0) * 2 + z;
      const std::size_t r1 = (sw * 2 + 1) * 2 + z;
      for (std::size_t m = 0; m < 2; ++m) {
        if (std::abs(p.conditional(l.m, r0, m) - p.conditional(l.m, r1, m)) > tol) {
          throw ModelError("restricted model violated: the mediator mechanism depends on A");
        }
        const auto y0 = p.row(l.y, r0 * 2 + m);
        const auto y1 = p.row(l.y, r1 * 2 + m);
        for (std::size_t k = 0; k < y0.size(); ++k) {
          if (std::abs(y0[k] - y1[k]) > tol) {
            throw ModelError("restricted model violated: the outcome mechanism depends on A");
          }
        }
      }
    }
  }
}

Table project_to_restricted(const FactorizedDistribution& p, const Table& component, Restriction restriction) {
  require_transport_restriction(p);
  const TransportLayout l = transport_layout(p);
  std::vector<std::size_t> parents;
  for (std::size_t v = 0; v < l.a; ++v) parents.push_back(v);  // S, W
  parents.push_back(l.z);
  if (restriction == Restriction::outcome) {
    parents.push_back(l.m);
    return project_restricted(p, component, l.y, parents);
  }
  return project_restricted(p, component, l.m, parents);
}

TransportParts transport_parts(const FactorizedDistribution& p, const TransportSdeSpec& spec) {
  validate_parameter(p, spec);
  const TransportLayout l = transport_layout(p);
  const OutcomeSpace& space = p.space();
  const std::size_t nw = l.w_count;
  const double p_s0 = p.conditional(l.s, 0, 0);
  if (!(p_s0 > 0.0)) throw DomainError("transport_sde: the S = 0 stratum is empty");

  TransportParts r;
  r.psi = psi_transport_sde(p, spec);
  const Table psw = prefix_marginal(p, l.a);
  const Table g_star = transport_intervention(p, spec);
  const std::size_t a = spec.a;
  const std::size_t as = spec.a_star;

  auto sw = [&](std::size_t s, std::size_t w) { return s * nw + w; };
  auto p_s_given_w = [&](std::size_t s, std::size_t w) {
    return ratio(psw[sw(s, w)], psw[sw(0, w)] + psw[sw(1, w)]);
  };
  auto g_a = [&](std::size_t x, std::size_t w, std::size_t s) { return p.conditional(l.a, sw(s, w), x); };
  auto p_z = [&](std::size_t z, std::size_t x, std::size_t w, std::size_t s) {
    return p.conditional(l.z, sw(s, w) * 2 + x, z);
  };
  auto p_z_marg = [&](std::size_t z, std::size_t w, std::size_t s) {
    return p_z(z, 0, w, s) * g_a(0, w, s) + p_z(z, 1, w, s) * g_a(1, w, s);
  };
  auto g_m = [&](std::size_t m, std::size_t z, std::size_t x, std::size_t w, std::size_t s) {
    return p.conditional(l.m, (sw(s, w) * 2 + x) * 2 + z, m);
  };
  auto q_y = [&](std::size_t m, std::size_t z, std::size_t x, std::size_t w, std::size_t s) {
    return row_mean(p, l.y, ((sw(s, w) * 2 + x) * 2 + z) * 2 + m);
  };
  auto q_m = [&](std::size_t z, std::size_t x, std::size_t w) {
    return g_star[w * 2] * q_y(0, z, x, w, 1) + g_star[w * 2 + 1] * q_y(1, z, x, w, 1);
  };
  auto q_z = [&](std::size_t x, std::size_t w, std::size_t s) {
    return p_z(0, x, w, s) * q_m(0, x, w) + p_z(1, x, w, s) * q_m(1, x, w);
  };
  // Qbar_{a,0}(m, w) = sum_z Qbar(m, z, a, w) p_Z(z | a, w, 0)
  auto q_a0 = [&](std::size_t m, std::size_t w) {
    return q_y(m, 0, a, w, 1) * p_z(0, a, w, 0) + q_y(m, 1, a, w, 1) * p_z(1, a, w, 0);
  };
  auto q_a0_z = [&](std::size_t z, std::size_t x, std::size_t w, std::size_t s) {
    return q_a0(0, w) * g_m(0, z, x, w, s) + q_a0(1, w) * g_m(1, z, x, w, s);
  };

  const bool restricted = spec.model == TransportModel::restricted;
  if (restricted) require_transport_restriction(p);
  const auto& ylev = p.variable(l.y).levels;
  for (auto* t : {&r.y, &r.y_r, &r.z, &r.z_fix, &r.m, &r.m_r, &r.w}) t->assign(space.size(), 0.0);

  for (std::size_t i = 0; i < space.size(); ++i) {
    const std::size_t s = space.level_of(i, l.s);
    const std::size_t w = space.prefix_of(i, l.a) - s * nw;
    const std::size_t x = space.level_of(i, l.a);
    const std::size_t z = space.level_of(i, l.z);
    const std::size_t m = space.level_of(i, l.m);
    const double y = ylev[space.level_of(i, l.y)];
    const bool reachable = p.joint()[i] > 0.0;
    auto positive = [&](double v, const char* what) {
      if (reachable) p.require_positive(v, what);
      return v;
    };

    if (s == 1) {
      const double num = g_star[w * 2 + m] * p_z(z, a, w, 0) * p_s_given_w(0, w);
      const double resid = y - q_y(m, z, x, w, 1);
      if (x == a) {
        const double den = positive(g_m(m, z, a, w, 1), "g_M(m | z, a, w, 1)") *
                           positive(p_z(z, a, w, 1), "p_Z(z | a, w, 1)") *
                           positive(g_a(a, w, 1), "g_A(a | w, 1)") * positive(p_s_given_w(1, w), "p(S=1 | w)") *
                           positive(p_s0, "P(S=0)");
        r.y[i] = resid * ratio(num, den);
      }
      if (restricted) {
        const double den = positive(g_m(m, z, x, w, 1), "g_M(m | z, w, 1)") *
                           positive(p_z_marg(z, w, 1), "p_Z(z | w, 1)") *
                           positive(p_s_given_w(1, w), "p(S=1 | w)") * p_s0;
        r.y_r[i] = resid * ratio(num, den);
      }
    } else if (x == a) {
      const double den = positive(g_a(a, w, 0), "g_A(a | w, 0)") * positive(p_s0, "P(S=0)");
      r.z[i] = ratio(q_m(z, a, w) - q_z(a, w, 0), den);
    }
    if (s == 0) r.w[i] = ratio(q_z(a, w, 0) - r.psi, p_s0);

    if (s == spec.s_star) {
      const double base = ratio(p_s_given_w(0, w), positive(p_s_given_w(s, w), "p(S | w)") * p_s0);
      const double m_resid = q_a0(m, w) - (q_a0(0, w) * g_m(0, z, x, w, s) + q_a0(1, w) * g_m(1, z, x, w, s));
      if (x == as) {
        const double ga = positive(g_a(as, w, s), "g_A(a* | w, s*)");
        r.m[i] = m_resid * ratio(base, ga);
        const double z_resid =
            q_a0_z(z, x, w, s) - (q_a0_z(0, x, w, s) * p_z(0, x, w, s) + q_a0_z(1, x, w, s) * p_z(1, x, w, s));
        r.z_fix[i] = z_resid * ratio(base, ga);
      }
      if (restricted) {
        const double pz = positive(p_z_marg(z, w, s), "p_Z(z | w, s*)");
        r.m_r[i] = m_resid * base * ratio(p_z(z, as, w, s), pz);
      }
    }
  }
  return r;
}

InfluenceFunction eif_transport_sde(const FactorizedDistribution& p, const TransportSdeSpec& spec) {
  const TransportLayout l = transport_layout(p);
  TransportParts parts = transport_parts(p, spec);
  const bool restricted = spec.model == TransportModel::restricted;
  const bool fixed = spec.fixed();
  const std::size_t n = p.space().size();
  std::vector<EifComponent> comps;
  comps.push_back({"Y", restricted ? std::move(parts.y_r) : std::move(parts.y), l.y, l.y + 1});
  if (fixed) comps.push_back({"M", restricted ? std::move(parts.m_r) : std::move(parts.m), l.m, l.m + 1});
  Table z = std::move(parts.z);
  if (fixed) {
    for (std::size_t i = 0; i < n; ++i) z[i] += parts.z_fix[i];
  }
  comps.push_back({"Z", std::move(z), l.z, l.z + 1});
  comps.push_back({"W", std::move(parts.w), l.w_first, l.a});
  return assemble(p, std::move(comps), spec, parts.psi);
}

// ---------------------------------------------------------------------------
// Longitudinal

InfluenceFunction eif_longitudinal(const FactorizedDistribution& p, const std::vector<Table>& g_star) {
  const GcompResult g = gcomp_recursion(p, g_star);
  const LongitudinalLayout l = longitudinal_layout(p);
  const OutcomeSpace& space = p.space();
  const std::size_t n = space.size();
  const std::size_t k = l.k();

  for (std::size_t i = 0; i <= k; ++i) {
    const std::size_t v = l.treatments[i];
    const std::size_t card = space.cardinality(v);
    const Table mass = prefix_marginal(p, v);
    for (std::size_t parent = 0; parent < mass.size(); ++parent) {
      if (mass[parent] <= 0.0) continue;
      for (std::size_t a = 0; a < card; ++a) {
        if (g_star[i][parent * card + a] > 0.0) {
          p.require_positive(p.conditional(v, parent, a), "g_" + std::to_string(i) + "(a | past)");
        }
      }
    }
  }

  std::vector<EifComponent> comps;
  Table weight(n, 1.0);
  for (std::size_t j = 0; j <= k + 1; ++j) {
    const std::size_t first = l.l_first[j];
    const std::size_t len = g.prefix_length[j];
    Table before = g.q[j];
    for (std::size_t v = len; v-- > first;) before = contract_last(before, p.factor(v), space.cardinality(v));
    const Table q_full = broadcast_prefix(space, g.q[j], len);
    const Table b_full = broadcast_prefix(space, before, first);
    Table d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = weight[i] * (q_full[i] - b_full[i]);
    comps.push_back({j == k + 1 ? "Y" : "L" + std::to_string(j), std::move(d), first, len});
    if (j <= k) {
      const std::size_t v = l.treatments[j];
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t e = space.prefix_of(i, v + 1);
        weight[i] *= ratio(g_star[j][e], p.factor(v)[e]);
      }
    }
  }
  return assemble(p, std::move(comps), LongitudinalSpec{g_star}, g.psi);
}

// ---------------------------------------------------------------------------
// Survival

InfluenceFunction eif_survival(const FactorizedDistribution& p, const std::vector<std::size_t>& rule,
                               std::size_t t0) {
  const double psi = psi_survival(p, rule, t0);
  const SurvivalLayout l = survival_layout(p);
  const SurvivalHazards h = survival_hazards(p);
  const OutcomeSpace& space = p.space();
  const std::size_t n = space.size();
  const Table pw = prefix_marginal(p, l.a);

  // Per W configuration, at A = d(w): s(t0), s(t0)/s(t) and s_c(t-1).
  std::vector<double> surv(l.w_count);
  std::vector<std::vector<double>> tail(l.w_count, std::vector<double>(t0 + 1));
  std::vector<std::vector<double>> cens(l.w_count, std::vector<double>(t0 + 1));
  for (std::size_t w = 0; w < l.w_count; ++w) {
    const std::size_t j = w * 2 + rule[w];
    double t_prod = 1.0;
    tail[w][t0] = 1.0;
    for (std::size_t t = t0; t >= 1; --t) {
      tail[w][t] = t_prod;
      t_prod *= 1.0 - h.failure[t][j];
    }
    surv[w] = t_prod;
    double c_prod = 1.0;
    for (std::size_t t = 1; t <= t0; ++t) {
      c_prod *= 1.0 - h.censoring[t - 1][j];
      cens[w][t] = c_prod;  // s_c(t-1)
    }
    if (pw[w] > 0.0) {
      p.require_positive(p.conditional(l.a, w, rule[w]), "g(d(w) | w)");
      for (std::size_t t = 1; t <= t0; ++t) p.require_positive(cens[w][t], "s_c(t-1 | d(w), w)");
    }
  }

  std::vector<EifComponent> comps;
  Table dw(n);
  for (std::size_t i = 0; i < n; ++i) dw[i] = surv[space.prefix_of(i, l.a)] - psi;
  comps.push_back({"W", std::move(dw), 0, l.a});
  for (std::size_t t = 1; t <= t0; ++t) {
    const std::size_t ev = l.event(t);
    Table d(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t w = space.prefix_of(i, l.a);
      if (space.level_of(i, l.a) != rule[w]) continue;
      bool at_risk = true;
      for (std::size_t v = l.a + 1; v < ev && at_risk; ++v) at_risk = space.level_of(i, v) == 0;
      if (!at_risk) continue;
      const double lambda = h.failure[t][w * 2 + rule[w]];
      const double dn = static_cast<double>(space.level_of(i, ev));
      const double den = p.conditional(l.a, w, rule[w]) * cens[w][t];
      d[i] = -ratio(tail[w][t], den) * (dn - lambda);
    }
    comps.push_back({"N" + std::to_string(t), std::move(d), ev, ev + 1});
  }
  return assemble(p, std::move(comps), SurvivalSpec{rule, t0}, psi);
}

InfluenceFunction eif(const FactorizedDistribution& p, const ParameterSpec& spec) {
  return std::visit(Overloaded{
                        [&](const CdfSquareSpec& s) { return eif_cdf_square(p, effective_grid(p, s)); },
                        [&](const TsmSpec&) { return eif_tsm(p); },
                        [&](const VteSpec&) { return eif_vte(p); },
                        [&](const AttSpec&) { return eif_att(p); },
                        [&](const TransportSdeSpec& s) { return eif_transport_sde(p, s); },
                        [&](const LongitudinalSpec& s) { return eif_longitudinal(p, s.g_star); },
                        [&](const SurvivalSpec& s) { return eif_survival(p, s.rule, s.t0); },
                    },
                    spec);
}

// ---------------------------------------------------------------------------
// Parametric connection

Table ParametricFamily1D::score(double theta) const {
  if (dlogp) return dlogp(theta);
  const Table up = density(theta + fd_step);
  const Table down = density(theta - fd_step);
  Table s(up.size());
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = (std::log(up[k]) - std::log(down[k])) / (2.0 * fd_step);
  return s;
}

ParametricFamily1D bernoulli_family() {
  ParametricFamily1D f;
  f.density = [](double t) { return Table{1.0 - t, t}; };
  f.dlogp = [](double t) { return Table{-1.0 / (1.0 - t), 1.0 / t}; };
  f.lower = 0.0;
  f.upper = 1.0;
  return f;
}

ParametricFamily1D tilted_categorical_family(std::vector<double> base, std::vector<double> x) {
  if (base.size() != x.size() || base.empty()) throw DomainError("tilted family: base and support differ in size");
  ParametricFamily1D f;
  f.density = [base, x](double t) {
    Table q(base.size());
    double z = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) z += q[k] = base[k] * std::exp(t * x[k]);
    for (double& v : q) v /= z;
    return q;
  };
  f.lower = -5.0;
  f.upper = 5.0;
  return f;
}

double fisher_information(const ParametricFamily1D& family, double theta) {
  const Table p = family.density(theta);
  const Table s = family.score(theta);
  double info = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) info += p[k] * s[k] * s[k];
  return info;
}

Table eif_parametric_1d(const ParametricFamily1D& family, double theta) {
  if (theta <= family.lower || theta >= family.upper) {
    throw DomainError("parameter outside the family's declared interval");
  }
  const double info = fisher_information(family, theta);
  if (!(info > 0.0)) throw DomainError("degenerate family: zero Fisher information");
  Table e = family.score(theta);
  for (double& v : e) v /= info;
  return e;
}

}  // namespace eifkit
