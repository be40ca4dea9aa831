#pragma once

// Closed-form efficient influence functions as exact tables over the outcome
// space, split into named orthogonal components.

#include <functional>
#include <string>
#include <vector>

#include "eifkit/dist.hpp"
#include "eifkit/params.hpp"

namespace eifkit {

struct EifComponent {
  std::string name;
  Table values;
  // The component lies in T_first + ... + T_{last-1}; tangent membership is
  // E[component | prefix first] = 0 and measurability w.r.t. prefix last.
  std::size_t first_factor = 0;
  std::size_t last_factor = 0;
};

struct InfluenceFunction {
  Table total;
  std::vector<EifComponent> components;
  ParameterSpec parameter;
  double psi = 0.0;

  const EifComponent* find(const std::string& name) const;
};

InfluenceFunction eif_cdf_square(const FactorizedDistribution& p, const QuadratureGrid& grid);
InfluenceFunction eif_tsm(const FactorizedDistribution& p);
InfluenceFunction eif_vte(const FactorizedDistribution& p);
InfluenceFunction eif_att(const FactorizedDistribution& p);
InfluenceFunction eif_transport_sde(const FactorizedDistribution& p, const TransportSdeSpec& spec);
InfluenceFunction eif_longitudinal(const FactorizedDistribution& p, const std::vector<Table>& g_star);
InfluenceFunction eif_survival(const FactorizedDistribution& p, const std::vector<std::size_t>& rule,
                               std::size_t t0);

// Dispatch on the variant.
InfluenceFunction eif(const FactorizedDistribution& p, const ParameterSpec& spec);

// IPW gradient A / g(1|W) Y - Psi for the treatment-specific mean. A valid
// gradient in the model with g known, but not the efficient one.
Table ipw_gradient(const FactorizedDistribution& p);

// ---------------------------------------------------------------------------
// Transport restricted model: Y and M mechanisms do not depend on A.

// Throws ModelError if the Y or M factor rows differ between A = 0 and A = 1
// by more than tol.
void require_transport_restriction(const FactorizedDistribution& p, double tol = 1e-10);

enum class Restriction { outcome, mediator };

// Generic projection of a T_Y (resp. T_M) component onto the restricted
// subspace: E[D | Y, M, Z, W, S] - E[D | M, Z, W, S] (resp. with M as the child
// and (Z, W, S) as parents).
Table project_to_restricted(const FactorizedDistribution& p, const Table& component, Restriction restriction);

// Unrestricted components of the transport EIF at P, needed to compare the
// restricted closed forms against the generic projection.
struct TransportParts {
  Table y;       // D*_Y
  Table y_r;     // D*_{Y,r}, closed form (restricted P only)
  Table z;       // D*_Z
  Table z_fix;   // extra Z term of the fixed parameter
  Table m;       // D*_{f,M}
  Table m_r;     // D*_{f,M,r}, closed form (restricted P only)
  Table w;       // D*_W
  double psi = 0.0;
};
TransportParts transport_parts(const FactorizedDistribution& p, const TransportSdeSpec& spec);

// ---------------------------------------------------------------------------
// Parametric connection

// A smooth one-parameter family on a finite outcome space.
struct ParametricFamily1D {
  std::function<Table(double)> density;
  std::function<Table(double)> dlogp;  // optional; central differences if empty
  double lower = 0.0;                  // declared parameter interval
  double upper = 1.0;
  double fd_step = 1e-5;

  Table score(double theta) const;
};

ParametricFamily1D bernoulli_family();
// p_theta(k) proportional to base(k) exp(theta * x_k): exponential tilt of a
// categorical distribution with support points x.
ParametricFamily1D tilted_categorical_family(std::vector<double> base, std::vector<double> x);

double fisher_information(const ParametricFamily1D& family, double theta);
// dlogp / ||dlogp||^2. Throws DomainError on zero Fisher information.
Table eif_parametric_1d(const ParametricFamily1D& family, double theta);

}  // namespace eifkit
