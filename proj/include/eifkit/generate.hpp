#pragma once

// Seeded random distributions shaped for each parameter family. Conditional
// rows are normalized positive uniforms on [row_lower, 1), floored at the
// positivity floor and renormalized, so every generated P satisfies the
// family's positivity preconditions by construction.

#include <cstdint>
#include <string>
#include <vector>

#include "eifkit/dist.hpp"
#include "eifkit/params.hpp"

namespace eifkit {

struct GeneratorOptions {
  double row_lower = 0.25;
  double positivity_floor = FactorizedDistribution::kDefaultPositivityFloor;
};

Table random_row(std::uint64_t seed, std::size_t card, const GeneratorOptions& opt = {});

// Every factor row drawn independently.
FactorizedDistribution random_distribution(std::vector<VariableSpec> variables, std::uint64_t seed,
                                           const GeneratorOptions& opt = {});

VariableSpec make_variable(std::string name, std::size_t card, std::string role);

// X with `card` levels 1..card.
FactorizedDistribution random_univariate(std::uint64_t seed, std::size_t card = 4, const GeneratorOptions& opt = {});

// (W_0..W_{k-1}, A, Y), W_j with w_cards[j] levels, Y with levels 0..y_card-1.
FactorizedDistribution random_point_treatment(std::uint64_t seed, std::vector<std::size_t> w_cards = {3},
                                              std::size_t y_card = 3, const GeneratorOptions& opt = {});

// (S, W, A, Z, M, Y) with Y a point mass at level 0 when S = 0. With
// restricted = true the M and Y rows do not depend on A.
FactorizedDistribution random_transport(std::uint64_t seed, bool restricted, std::size_t w_card = 3,
                                        std::size_t y_card = 3, const GeneratorOptions& opt = {});

// (L(0), A(0), ..., L(K), A(K), Y): L(0) with 3 levels, later L binary.
FactorizedDistribution random_longitudinal(std::uint64_t seed, std::size_t k, const GeneratorOptions& opt = {});

// (W, A, C0, N1, ..., C_{T-1}, N_T); indicators stay 0 after any jump.
// Without censoring every C_k is a point mass at 0.
FactorizedDistribution random_survival(std::uint64_t seed, std::size_t horizon = 3, bool censoring = true,
                                       std::size_t w_card = 3, const GeneratorOptions& opt = {});

// Random intervention pieces for a given P.
LongitudinalSpec random_g_star(const FactorizedDistribution& p, std::uint64_t seed, const GeneratorOptions& opt = {});
InterventionSupplied random_supplied_intervention(const FactorizedDistribution& p, std::uint64_t seed,
                                                  const GeneratorOptions& opt = {});
SurvivalSpec random_survival_rule(const FactorizedDistribution& p, std::uint64_t seed, std::size_t t0);

// Named shapes used by configuration files: univariate, point_treatment,
// transport, transport_restricted, longitudinal_k0/k1/k2, survival,
// survival_uncensored.
FactorizedDistribution generate_shape(const std::string& shape, std::uint64_t seed);

}  // namespace eifkit
