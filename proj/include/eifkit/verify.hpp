#pragma once

// Numeric oracles for a single distribution: pathwise derivatives by central
// differences, the Riesz identity, mean-zero, orthogonality, decomposition
// and efficiency-bound checks.

#include <functional>
#include <string>
#include <vector>

#include "eifkit/dist.hpp"
#include "eifkit/eif.hpp"
#include "eifkit/params.hpp"
#include "eifkit/tangent.hpp"

namespace eifkit {

inline constexpr double kDefaultStep = 1e-4;
inline constexpr double kRieszTolerance = 1e-6;

// joint: (1 + eps S) p. factors: every factor fluctuated along its own
// projection of S (stays inside a model defined by factor restrictions).
enum class PathKind { joint, factors };

using PsiFunction = std::function<double(const FactorizedDistribution&)>;

// (Psi(P_{+h}) - Psi(P_{-h})) / 2h. Throws PreconditionError if the path is
// invalid at +-h.
double pathwise_derivative(const FactorizedDistribution& p, const PsiFunction& psi, const ScoreFunction& s,
                           double h = kDefaultStep, PathKind path = PathKind::joint);

struct RieszResult {
  double derivative = 0.0;
  double inner = 0.0;
  double abs_error = 0.0;
  double rel_error = 0.0;
  bool pass = false;
};

RieszResult riesz_check(const FactorizedDistribution& p, const PsiFunction& psi, std::span<const double> gradient,
                        const ScoreFunction& s, double h = kDefaultStep, PathKind path = PathKind::joint,
                        double tolerance = kRieszTolerance);
RieszResult riesz_check(const FactorizedDistribution& p, const ParameterSpec& spec, const ScoreFunction& s,
                        double h = kDefaultStep, double tolerance = kRieszTolerance);

// |E_P D|.
double mean_zero_check(const FactorizedDistribution& p, std::span<const double> d);

// Matrix of pairwise inner products (diagonal = squared norms).
std::vector<std::vector<double>> orthogonality_check(const FactorizedDistribution& p,
                                                     const std::vector<EifComponent>& components);
// Largest off-diagonal magnitude of orthogonality_check.
double max_off_diagonal(const std::vector<std::vector<double>>& gram);

// max |sum_i Pi(S | T_i) - S| over points of positive mass.
double decomposition_check(const FactorizedDistribution& p, const ScoreFunction& s);

// max |sum of components - total|.
double component_sum_check(const InfluenceFunction& f);

// Largest violation of tangent membership: |E[c | prefix first]| and
// |c - E[c | prefix last]| over points of positive mass.
double tangent_membership_check(const FactorizedDistribution& p, const EifComponent& c);

struct EfficiencyResult {
  double var_ipw = 0.0;
  double var_eif = 0.0;
  double margin = 0.0;  // var_ipw - var_eif
};
EfficiencyResult efficiency_bound_check(const FactorizedDistribution& p);

// Projection of S onto T_Y + T_W for the point-treatment layout.
Table restrict_score_outcome_covariates(const FactorizedDistribution& p, std::span<const double> s);

// Projection of S onto the tangent space of the restricted transport model:
// unrestricted for S, W, A, Z; restricted subspaces for M and Y.
Table restrict_score_transport(const FactorizedDistribution& p, std::span<const double> s);

// Survival EIF (no censoring, t0 = 1) recomputed as the treatment-specific
// mean EIF of the reduced data (W, I(A = d(W)), 1 - N1), mapped back to the
// survival outcome space.
Table survival_as_tsm(const FactorizedDistribution& p, const std::vector<std::size_t>& rule);

// ---------------------------------------------------------------------------
// Negative controls: single-term corruptions of a correct EIF.

enum class Corruption {
  none,
  tsm_drop_w,                // drop Qbar(1, W) - Psi
  vte_drop_factor_two,       // residual term without its factor 2
  att_drop_control_term,     // residual weight without the A = 0 part
  transport_drop_z,          // drop D*_Z
  survival_flip_sign,        // hazard terms with a + sign
};

std::string corruption_name(Corruption c);
Corruption corruption_from_name(const std::string& name);  // throws ConfigError
std::vector<Corruption> all_corruptions();
// The parameter type (parameter_type()) a corruption applies to.
std::string corruption_target(Corruption c);

// Returns the corrupted gradient; unchanged if the corruption does not target
// this parameter.
Table corrupt(const FactorizedDistribution& p, const InfluenceFunction& f, Corruption c);

}  // namespace eifkit
