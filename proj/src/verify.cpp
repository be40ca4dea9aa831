#include "eifkit/verify.hpp"

#include <algorithm>
#include <cmath>

#include "eifkit/error.hpp"
#include "eifkit/layout.hpp"

namespace eifkit {

namespace {

FactorizedDistribution along(const FactorizedDistribution& p, const ScoreFunction& s, double eps, PathKind path) {
  if (!(std::abs(eps) * s.sup_norm() < 1.0)) {
    throw PreconditionError("step too large: path leaves the simplex at eps = " + std::to_string(eps));
  }
  return path == PathKind::joint ? perturb_joint(p, s, eps) : perturb_factors(p, s.values(), eps);
}

}  // namespace

double pathwise_derivative(const FactorizedDistribution& p, const PsiFunction& psi, const ScoreFunction& s,
                           double h, PathKind path) {
  if (!(h > 0.0)) throw DomainError("step size must be positive");
  const double up = psi(along(p, s, h, path));
  const double down = psi(along(p, s, -h, path));
  return (up - down) / (2.0 * h);
}

RieszResult riesz_check(const FactorizedDistribution& p, const PsiFunction& psi, std::span<const double> gradient,
                        const ScoreFunction& s, double h, PathKind path, double tolerance) {
  RieszResult r;
  r.derivative = pathwise_derivative(p, psi, s, h, path);
  r.inner = inner_product(p, gradient, s.values());
  r.abs_error = std::abs(r.derivative - r.inner);
  r.rel_error = r.abs_error / std::max({std::abs(r.derivative), std::abs(r.inner), 1e-300});
  r.pass = r.abs_error <= tolerance;
  return r;
}

RieszResult riesz_check(const FactorizedDistribution& p, const ParameterSpec& spec, const ScoreFunction& s,
                        double h, double tolerance) {
  const InfluenceFunction f = eif(p, spec);
  const auto* t = std::get_if<TransportSdeSpec>(&spec);
  const PathKind path = t && t->model == TransportModel::restricted ? PathKind::factors : PathKind::joint;
  return riesz_check(p, [&](const FactorizedDistribution& q) { return psi(q, spec); }, f.total, s, h, path,
                     tolerance);
}

double mean_zero_check(const FactorizedDistribution& p, std::span<const double> d) {
  return std::abs(expectation(p, d));
}

std::vector<std::vector<double>> orthogonality_check(const FactorizedDistribution& p,
                                                     const std::vector<EifComponent>& components) {
  const std::size_t n = components.size();
  std::vector<std::vector<double>> g(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      g[i][j] = g[j][i] = inner_product(p, components[i].values, components[j].values);
    }
  }
  return g;
}

double max_off_diagonal(const std::vector<std::vector<double>>& gram) {
  double m = 0.0;
  for (std::size_t i = 0; i < gram.size(); ++i) {
    for (std::size_t j = 0; j < gram.size(); ++j) {
      if (i != j) m = std::max(m, std::abs(gram[i][j]));
    }
  }
  return m;
}

double decomposition_check(const FactorizedDistribution& p, const ScoreFunction& s) {
  const std::vector<Table> parts = decompose_score(p, s.values());
  double err = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(p.joint()[i] > 0.0)) continue;
    double sum = 0.0;
    for (const auto& part : parts) sum += part[i];
    err = std::max(err, std::abs(sum - s[i]));
  }
  return err;
}

double component_sum_check(const InfluenceFunction& f) {
  double err = 0.0;
  for (std::size_t i = 0; i < f.total.size(); ++i) {
    double sum = 0.0;
    for (const auto& c : f.components) sum += c.values[i];
    err = std::max(err, std::abs(sum - f.total[i]));
  }
  return err;
}

double tangent_membership_check(const FactorizedDistribution& p, const EifComponent& c) {
  const Table past = conditional_expectation_table(p, c.values, c.first_factor);
  const Table through = conditional_expectation_table(p, c.values, c.last_factor);
  double err = 0.0;
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    if (p.joint()[i] <= 0.0) continue;
    err = std::max({err, std::abs(past[i]), std::abs(c.values[i] - through[i])});
  }
  return err;
}

EfficiencyResult efficiency_bound_check(const FactorizedDistribution& p) {
  const InfluenceFunction f = eif_tsm(p);
  const Table ipw = ipw_gradient(p);
  EfficiencyResult r;
  r.var_eif = inner_product(p, f.total, f.total);
  r.var_ipw = inner_product(p, ipw, ipw);
  r.margin = r.var_ipw - r.var_eif;
  return r;
}

Table restrict_score_outcome_covariates(const FactorizedDistribution& p, std::span<const double> s) {
  const PointTreatmentLayout l = point_treatment_layout(p);
  Table ty = project_onto_factor(p, s, l.y);
  const Table tw = project_onto_factor_range(p, s, 0, l.a);
  for (std::size_t i = 0; i < ty.size(); ++i) ty[i] += tw[i];
  return ty;
}

Table restrict_score_transport(const FactorizedDistribution& p, std::span<const double> s) {
  const TransportLayout l = transport_layout(p);
  Table out = project_onto_factor_range(p, s, 0, l.m);  // S, W, A, Z unrestricted
  const Table ty = project_onto_factor(p, s, l.y);
  const Table tm = project_onto_factor(p, s, l.m);
  const Table ry = project_to_restricted(p, ty, Restriction::outcome);
  const Table rm = project_to_restricted(p, tm, Restriction::mediator);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += ry[i] + rm[i];
  return out;
}

Table survival_as_tsm(const FactorizedDistribution& p, const std::vector<std::size_t>& rule) {
  const SurvivalLayout l = survival_layout(p);
  const OutcomeSpace& space = p.space();
  // Reduced data (W..., A' = I(A = d(W)), Y' = 1 - N1).
  std::vector<VariableSpec> vars(p.variables().begin(), p.variables().begin() + l.a);
  vars.push_back({"A_rule", {0.0, 1.0}, "treatment"});
  vars.push_back({"Y_surv", {0.0, 1.0}, "outcome"});
  auto reduced_index = [&](std::size_t i) {
    const std::size_t w = space.prefix_of(i, l.a);
    const std::size_t follows = space.level_of(i, l.a) == rule[w] ? 1 : 0;
    const std::size_t survived = 1 - space.level_of(i, l.event(1));
    return (w * 2 + follows) * 2 + survived;
  };
  Table joint(l.w_count * 4, 0.0);
  for (std::size_t i = 0; i < space.size(); ++i) joint[reduced_index(i)] += p.joint()[i];
  const FactorizedDistribution reduced = refactorize(joint, std::move(vars), p.positivity_floor());
  const InfluenceFunction f = eif_tsm(reduced);
  Table out(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) out[i] = f.total[reduced_index(i)];
  return out;
}

// ---------------------------------------------------------------------------

std::string corruption_name(Corruption c) {
  switch (c) {
    case Corruption::none: return "none";
    case Corruption::tsm_drop_w: return "tsm_drop_w";
    case Corruption::vte_drop_factor_two: return "vte_drop_factor_two";
    case Corruption::att_drop_control_term: return "att_drop_control_term";
    case Corruption::transport_drop_z: return "transport_drop_z";
    case Corruption::survival_flip_sign: return "survival_flip_sign";
  }
  return "none";
}

Corruption corruption_from_name(const std::string& name) {
  for (Corruption c : {Corruption::none, Corruption::tsm_drop_w, Corruption::vte_drop_factor_two,
                       Corruption::att_drop_control_term, Corruption::transport_drop_z,
                       Corruption::survival_flip_sign}) {
    if (corruption_name(c) == name) return c;
  }
  throw ConfigError("unknown corruption '" + name + "'");
}

std::vector<Corruption> all_corruptions() {
  return {Corruption::tsm_drop_w, Corruption::vte_drop_factor_two, Corruption::att_drop_control_term,
          Corruption::transport_drop_z, Corruption::survival_flip_sign};
}

std::string corruption_target(Corruption c) {
  switch (c) {
    case Corruption::tsm_drop_w: return "tsm";
    case Corruption::vte_drop_factor_two: return "vte";
    case Corruption::att_drop_control_term: return "att";
    case Corruption::transport_drop_z: return "transport_sde";
    case Corruption::survival_flip_sign: return "survival";
    case Corruption::none: break;
  }
  return "";
}

Table corrupt(const FactorizedDistribution& p, const InfluenceFunction& f, Corruption c) {
  if (c == Corruption::none || corruption_target(c) != parameter_type(f.parameter)) return f.total;
  Table out(f.total.size(), 0.0);
  const OutcomeSpace& space = p.space();
  const std::size_t a_var = c == Corruption::att_drop_control_term ? point_treatment_layout(p).a : 0;
  for (const auto& comp : f.components) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      double v = comp.values[i];
      switch (c) {
        case Corruption::tsm_drop_w:
          if (comp.name == "W") v = 0.0;
          break;
        case Corruption::vte_drop_factor_two:
          if (comp.name == "Y") v *= 0.5;
          break;
        case Corruption::att_drop_control_term:
          if (comp.name == "Y" && space.level_of(i, a_var) == 0) v = 0.0;
          break;
        case Corruption::transport_drop_z:
          if (comp.name == "Z") v = 0.0;
          break;
        case Corruption::survival_flip_sign:
          if (comp.name != "W") v = -v;
          break;
        case Corruption::none:
          break;
      }
      out[i] += v;
    }
  }
  return out;
}

}  // namespace eifkit
