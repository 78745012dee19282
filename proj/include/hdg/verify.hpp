#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hdg/projections.hpp"
#include "hdg/scheme.hpp"

namespace hdg {

/// u, q = -grad u and f = div q on the unit square, with u = 0 on the boundary.
struct ManufacturedSolution {
  std::string id;
  ScalarField u;
  VectorField q;
  ScalarField f;
};

/// "sine": u = sin(pi x) sin(pi y); "patch" (= "patch-4") and "patch-P",
/// 4 <= P <= 20: u = x(1-x)y(1-y)(x+y)^(P-4), a polynomial of degree P;
/// "zero": u = 0.
/// Throws hdg::Error(config) for unknown ids.
ManufacturedSolution manufactured_solution(const std::string& id);

/// Extra quadrature degrees used for error norms.
inline constexpr int error_quadrature_boost = 6;

struct ErrorReport {
  double err_q = 0.0;   ///< ||q - q_h||
  double err_u = 0.0;   ///< ||u - u_h||
  /// Available when tau is constant on every element and the scheme is standard.
  std::optional<double> err_piwu;  ///< ||Pi_W u - u_h||
  std::optional<double> err_pivq;  ///< ||q - Pi_V q||
  double energy_resid = 0.0;
  double flux_resid = 0.0;
  double transmission_resid = 0.0;
};

ErrorReport evaluate(const Discretization& disc, const HDGSolution& sol, const ManufacturedSolution& exact);

/// |(||q_h||^2 + sum tau ||u~ - u_hat||^2_dK) - (f, u_h)| / max(1, |(f, u_h)|), where
/// u~ = u_h (standard) or P_M u_h (LS).
double energy_identity_residual(const Discretization& disc, const HDGSolution& sol, const ScalarField& f);

/// Pointwise residual of q_hat.n = q_h.n + tau (u~ - u_hat) at edge
/// quadrature points, relative to max(1, max |q_hat.n|).
double flux_identity_residual(const Discretization& disc, const HDGSolution& sol);

/// Largest mismatch of u_hat across interior edges and of the sum of the two
/// outward fluxes, relative to max(1, largest trace coefficient).
double transmission_residual(const Discretization& disc, const HDGSolution& sol);

/// Max absolute coefficient over all unknowns.
double max_coefficient(const HDGSolution& sol);

/// Largest coefficient difference of q, u and the element-side traces,
/// relative to max_coefficient(a) (absolute when that vanishes).
double relative_difference(const HDGSolution& a, const HDGSolution& b);

/// Experimental orders log(e_i / e_{i+1}) / log(h_i / h_{i+1}); the first
/// entry is empty, as is any entry with a non-positive error.
std::vector<std::optional<double>> eoc(const std::vector<double>& errors, const std::vector<double>& h);

}  // namespace hdg
