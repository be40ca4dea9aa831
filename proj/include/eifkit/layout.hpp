#pragma once

// Positional variable layouts expected by each parameter family. Every
// resolver validates the shape and throws DomainError with a precise message
// when the distribution does not fit.

#include <cstddef>
#include <vector>

#include "eifkit/dist.hpp"

namespace eifkit {

// (W_0, ..., W_{k-1}, A, Y): W is the length-k prefix, A binary {0, 1}.
struct PointTreatmentLayout {
  std::size_t a;  // index of A == number of W variables
  std::size_t y;
  std::size_t w_count;  // number of W configurations
};
PointTreatmentLayout point_treatment_layout(const FactorizedDistribution& p);

// (S, W..., A, Z, M, Y) with S, A, Z, M binary {0, 1}.
struct TransportLayout {
  std::size_t s = 0;
  std::size_t w_first = 1;
  std::size_t a;
  std::size_t z;
  std::size_t m;
  std::size_t y;
  std::size_t w_count;  // number of W configurations
};
TransportLayout transport_layout(const FactorizedDistribution& p);

// (L(0), A(0), L(1), A(1), ..., L(K), A(K), Y). Treatment variables are those
// tagged with role "treatment"; each L block is the run of variables between
// consecutive treatments and must be non-empty.
struct LongitudinalLayout {
  std::vector<std::size_t> treatments;  // A(0..K)
  std::vector<std::size_t> l_first;     // first variable of L(0..K), plus Y at index K+1
  std::size_t y;
  std::size_t k() const { return treatments.size() - 1; }
};
LongitudinalLayout longitudinal_layout(const FactorizedDistribution& p);

// (W..., A, C0, N1, C1, N2, ..., C_{T-1}, N_T) with binary jump indicators:
// C_k = censored at k, N_t = failure at t. Only rows at the all-zero history
// enter the survival functional, so rows after a jump are never read.
struct SurvivalLayout {
  std::size_t a;
  std::size_t horizon;  // T
  std::size_t w_count;
  std::size_t event(std::size_t t) const { return a + 2 * t; }       // N_t, t = 1..T
  std::size_t censor(std::size_t k) const { return a + 1 + 2 * k; }  // C_k, k = 0..T-1
};
SurvivalLayout survival_layout(const FactorizedDistribution& p);

}  // namespace eifkit
