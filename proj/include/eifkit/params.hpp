#pragma once

// Parameter mappings Psi(P), each evaluated exactly by summation over the
// factor tables.

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "eifkit/dist.hpp"

namespace eifkit {

// Psi = sum_k w_k F(x_k)^2 on a univariate P. Without a grid: unit weights at
// the support levels over [min level, max level].
struct CdfSquareSpec {
  std::optional<QuadratureGrid> grid;
};

// Psi = E[ E[Y | A=1, W] ].
struct TsmSpec {};

// Psi = var(b(W)), b(w) = E[Y | A=1, w] - E[Y | A=0, w].
struct VteSpec {};

// Psi = E[ b(W) | A=1 ].
struct AttSpec {};

enum class TransportModel { unrestricted, restricted };

// Mediator intervention g*(m | w).
struct InterventionFromP {};  // sum_z g_M(m | z, a*, w, s*) p_Z(z | a*, w, s*)
struct InterventionSupplied {
  Table table;  // w_count x 2, row-normalized
};

// Psi = sum y p_Y(y | m, z, a, w, S=1) g*(m | w) p_Z(z | a, w, S=0) p(w | S=0).
struct TransportSdeSpec {
  std::size_t a = 1;
  std::size_t a_star = 0;
  std::size_t s_star = 1;
  std::variant<InterventionFromP, InterventionSupplied> intervention = InterventionFromP{};
  TransportModel model = TransportModel::unrestricted;

  bool fixed() const { return std::holds_alternative<InterventionFromP>(intervention); }
};

// Mean outcome under stochastic interventions g*_i on every A(i). g_star[i]
// has the shape of the factor table of A(i).
struct LongitudinalSpec {
  std::vector<Table> g_star;
};

// Psi = E prod_{t <= t0} (1 - lambda(t | A=d(W), W)). rule[w] is the
// treatment level index assigned to W configuration w.
struct SurvivalSpec {
  std::vector<std::size_t> rule;
  std::size_t t0 = 1;
};

using ParameterSpec =
    std::variant<CdfSquareSpec, TsmSpec, VteSpec, AttSpec, TransportSdeSpec, LongitudinalSpec, SurvivalSpec>;

// Short identifier: cdf_square, tsm, vte, att, transport_sde, longitudinal, survival.
std::string parameter_type(const ParameterSpec& spec);

// Validates the spec against P (layout, table shapes, row sums). Throws
// DomainError.
void validate_parameter(const FactorizedDistribution& p, const ParameterSpec& spec);

// ---------------------------------------------------------------------------
// Evaluation

QuadratureGrid effective_grid(const FactorizedDistribution& p, const CdfSquareSpec& spec);
// F(x_k) at every grid point.
std::vector<double> cdf_at(const FactorizedDistribution& p, const QuadratureGrid& grid);

double psi_cdf_square(const FactorizedDistribution& p, const QuadratureGrid& grid);
double psi_tsm(const FactorizedDistribution& p);

// Outcome regression Qbar(a, w) for a point-treatment layout, indexed
// [w * 2 + a].
Table outcome_regression(const FactorizedDistribution& p);

using BlipTable = Table;  // indexed by W configuration
BlipTable blip(const FactorizedDistribution& p);
double psi_vte(const FactorizedDistribution& p);
double psi_att(const FactorizedDistribution& p);

// g*(m | w) as a w_count x 2 table.
Table transport_intervention(const FactorizedDistribution& p, const TransportSdeSpec& spec);
double psi_transport_sde(const FactorizedDistribution& p, const TransportSdeSpec& spec);

// Qbar_{L(j)} for j = 0..K+1 as prefix tables. q[j] is a function of the
// first prefix_length[j] variables; q[K+1] is Y itself.
struct GcompResult {
  std::vector<Table> q;
  std::vector<std::size_t> prefix_length;
  double psi = 0.0;
};
GcompResult gcomp_recursion(const FactorizedDistribution& p, const std::vector<Table>& g_star);
double psi_longitudinal(const FactorizedDistribution& p, const std::vector<Table>& g_star);

// Discrete hazards at the all-zero history, indexed [t][w * 2 + a] with
// t = 1..T for failure (index 0 unused) and k = 0..T-1 for censoring.
struct SurvivalHazards {
  std::vector<Table> failure;
  std::vector<Table> censoring;
};
SurvivalHazards survival_hazards(const FactorizedDistribution& p);
double psi_survival(const FactorizedDistribution& p, const std::vector<std::size_t>& rule, std::size_t t0);

// Dispatch on the variant.
double psi(const FactorizedDistribution& p, const ParameterSpec& spec);

}  // namespace eifkit
