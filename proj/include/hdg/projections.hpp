#pragma once

#include <array>

#include <Eigen/Core>

#include "hdg/fem_core.hpp"
#include "hdg/scheme.hpp"

namespace hdg {

/// Local spaces V(K) = P_k(K)^2, W(K) = P_{k_W}(K), M(e) = P_k(e) on one
/// element, with the stabilization value on each side.
struct ElementSpaces {
  ElementData data;
  int k = 1;
  int k_w = 1;
  std::array<double, 3> tau{1.0, 1.0, 1.0};

  int dim_v() const { return data.dim_v(); }
  int dim_w() const { return data.dim_w(); }
  int dim_m() const { return data.dim_m(); }
};

ElementSpaces make_element_spaces(const Mesh& mesh, int element, const FiniteElement& fe,
                                  const std::array<double, 3>& tau);

/// Coefficients of the L2 projection onto W(K) (orthonormal basis, so these
/// are the moments (f, phi_a)_K).
Eigen::VectorXd l2_project_w(const ElementSpaces& spaces, const ScalarField& f);
/// Same for V(K); layout (x components, y components).
Eigen::VectorXd l2_project_v(const ElementSpaces& spaces, const VectorField& q);
/// Projection onto P_k of a mesh edge, in the edge's canonical parameterization.
Eigen::VectorXd l2_project_edge(const Mesh& mesh, int edge, int k, const ScalarField& g, int quadrature_degree);

/// Local operator matrices in the orthonormal bases.
struct LocalOperators {
  Eigen::MatrixXd div;            ///< (phi_a, div v_j), dim W x dim V
  Eigen::MatrixXd grad;           ///< (v_j, grad phi_a), dim W x dim V
  Eigen::MatrixXd normal_trace;   ///< <v_j.n, psi_i>_e, 3 dim M x dim V
  Eigen::MatrixXd scalar_trace;   ///< <phi_a, psi_i>_e, 3 dim M x dim W
};

LocalOperators local_operators(const ElementSpaces& spaces);

/// Orthonormal spanning sets (columns over the V coefficients) of the
/// solenoidal fields, the solenoidal bubbles, and their L2 complements.
struct SolenoidalDecomposition {
  Eigen::MatrixXd solenoidal;
  Eigen::MatrixXd solenoidal_perp;
  Eigen::MatrixXd bubbles;
  Eigen::MatrixXd bubbles_perp;

  int dim_solenoidal() const { return static_cast<int>(solenoidal.cols()); }
  int dim_bubbles() const { return static_cast<int>(bubbles.cols()); }
};

inline constexpr double rank_cutoff = 1e-10;
inline constexpr double rank_ambiguity_low = 1e-12;
inline constexpr double rank_ambiguity_high = 1e-8;

/// Nullspace via SVD; throws hdg::Error(numerical) if a singular value falls
/// inside the ambiguity band.
SolenoidalDecomposition solenoidal_decomposition(const ElementSpaces& spaces);

/// dim M(dK) - (dim V_s - dim V_sbb + 1).
int m_index(const ElementSpaces& spaces);
int m_index(const ElementSpaces& spaces, const SolenoidalDecomposition& dec);

struct HdgProjection {
  Eigen::VectorXd q;  ///< Pi_V q over the V basis
  Eigen::VectorXd u;  ///< Pi_W u over the W basis
  double residual_div = 0.0;    ///< (Pi_W u - u, div v) over all v
  double residual_grad = 0.0;   ///< (Pi_V q - q, grad w) over all w
  double residual_trace = 0.0;  ///< <(Pi_V q - q).n + tau (Pi_W u - P_M u), mu> over all mu
};

/// Solves the reduced square system on V_sbb^perp x W with test spaces
/// V_s^perp, W / P_0 and M(dK). The V_sbb component of Pi_V q, which the
/// equations do not determine, is the L2 one. Requires a constant tau on the
/// element and a vanishing M-index.
HdgProjection hdg_project(const VectorField& q, const ScalarField& u, const ElementSpaces& spaces);

/// Minimum-norm least-squares solution of the full redundant system, used as
/// an independent cross-check of hdg_project (same V_sbb convention).
HdgProjection hdg_project_least_squares(const VectorField& q, const ScalarField& u, const ElementSpaces& spaces);

/// Terms of the two local projection error estimates.
struct ProjectionBounds {
  double err_q = 0.0;       ///< ||q - Pi_V q||_K
  double l2_err_q = 0.0;    ///< ||q - P_V q||_K
  double delta_q = 0.0;     ///< ||P_V q - Pi_V q||_K
  double bracket_q = 0.0;   ///< h^{1/2} (||(q - P_V q).n|| + ||tau (u - P_W u)||) on dK
  double err_u = 0.0;
  double l2_err_u = 0.0;
  double delta_u = 0.0;
  double bracket_u = 0.0;   ///< h^{1/2} (||tau^{-1} (q - P_V q).n|| + ||u - P_W u||) on dK

  /// delta / bracket, 0 when both vanish.
  double ratio_q() const;
  double ratio_u() const;
};

ProjectionBounds hdg_project_bounds_check(const VectorField& q, const ScalarField& u, const ElementSpaces& spaces);

/// Largest ratios over all elements of a mesh, with C calibrated as that
/// maximum both estimates hold on every element.
struct MeshProjectionBounds {
  double max_ratio_q = 0.0;
  double max_ratio_u = 0.0;
  bool holds = true;
};

MeshProjectionBounds hdg_project_bounds_check(const VectorField& q, const ScalarField& u, const Mesh& mesh, int k,
                                              double tau);

}  // namespace hdg
