#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "hdg/mesh.hpp"

namespace hdg {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class Definiteness { unknown, spd };

/// Square linear system. Dense storage is the reference path; the sparse
/// form is used for the global trace systems.
struct LinearSystem {
  Eigen::MatrixXd dense;
  SparseMatrix sparse;
  bool is_sparse = false;
  Eigen::VectorXd rhs;
  bool symmetric = false;
  Definiteness definiteness = Definiteness::unknown;

  Eigen::Index size() const { return rhs.size(); }
  /// max |A - A^T| / max |A|
  double asymmetry() const;
};

/// Relative residual bound every solve is checked against.
inline constexpr double solve_residual_tolerance = 1e-10;

/// LU with partial pivoting, or Cholesky when the system is marked SPD.
/// Throws hdg::Error(numerical) on a numerically singular (or, for the
/// Cholesky path, indefinite) matrix, or if the residual contract fails.
Eigen::VectorXd solve(const LinearSystem& system);

/// Smallest singular value of a dense matrix.
double smallest_singular_value(const Eigen::MatrixXd& matrix);

/// Discrete inf-sup constant of  <r.n, wbar>_{dT_h}  over piecewise constants
/// wbar (jump norm on edges) and normal traces r in P_k(e) n_e
/// (broken boundary norm).
double infsup_estimate(const Mesh& mesh, int k);

}  // namespace hdg
