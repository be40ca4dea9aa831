#include "eifkit/layout.hpp"

#include "eifkit/error.hpp"

namespace eifkit {

namespace {

void require_binary(const FactorizedDistribution& p, std::size_t var, const char* what) {
  const auto& levels = p.variable(var).levels;
  if (levels.size() != 2 || levels[0] != 0.0 || levels[1] != 1.0) {
    throw DomainError(std::string(what) + " '" + p.variable(var).name + "' must be binary with levels {0, 1}");
  }
}

}  // namespace

PointTreatmentLayout point_treatment_layout(const FactorizedDistribution& p) {
  const std::size_t d = p.num_variables();
  if (d < 3) throw DomainError("point-treatment parameter needs (W..., A, Y) with at least one W");
  PointTreatmentLayout l{d - 2, d - 1, p.space().prefix_count(d - 2)};
  require_binary(p, l.a, "treatment");
  return l;
}

TransportLayout transport_layout(const FactorizedDistribution& p) {
  const std::size_t d = p.num_variables();
  if (d < 6) throw DomainError("transport parameter needs (S, W..., A, Z, M, Y) with at least one W");
  TransportLayout l;
  l.a = d - 4;
  l.z = d - 3;
  l.m = d - 2;
  l.y = d - 1;
  l.w_count = p.space().prefix_count(l.a) / p.space().cardinality(l.s);
  require_binary(p, l.s, "site");
  require_binary(p, l.a, "treatment");
  require_binary(p, l.z, "intermediate");
  require_binary(p, l.m, "mediator");
  return l;
}

LongitudinalLayout longitudinal_layout(const FactorizedDistribution& p) {
  LongitudinalLayout l;
  const std::size_t d = p.num_variables();
  std::size_t block_start = 0;
  for (std::size_t v = 0; v < d; ++v) {
    if (p.variable(v).role != "treatment") continue;
    if (v == block_start) {
      throw DomainError("longitudinal layout: treatment '" + p.variable(v).name + "' has an empty L block before it");
    }
    l.l_first.push_back(block_start);
    l.treatments.push_back(v);
    block_start = v + 1;
  }
  if (l.treatments.empty()) throw DomainError("longitudinal layout: no variable has role 'treatment'");
  if (block_start != d - 1) {
    throw DomainError("longitudinal layout: exactly one outcome variable must follow the last treatment");
  }
  l.y = d - 1;
  l.l_first.push_back(l.y);
  return l;
}

SurvivalLayout survival_layout(const FactorizedDistribution& p) {
  const std::size_t d = p.num_variables();
  std::size_t a = d;
  for (std::size_t v = 0; v < d; ++v) {
    if (p.variable(v).role == "treatment") {
      a = v;
      break;
    }
  }
  if (a == d || a == 0) throw DomainError("survival layout: need W variables followed by a 'treatment' variable");
  const std::size_t tail = d - a - 1;
  if (tail < 2 || tail % 2 != 0) {
    throw DomainError("survival layout: expected C0, N1, ..., C_{T-1}, N_T after the treatment");
  }
  SurvivalLayout l{a, tail / 2, p.space().prefix_count(a)};
  require_binary(p, a, "treatment");
  for (std::size_t v = a + 1; v < d; ++v) require_binary(p, v, "jump indicator");
  return l;
}

}  // namespace eifkit
