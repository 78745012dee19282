#include "hdg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "hdg/error.hpp"

namespace hdg {

double LinearSystem::asymmetry() const {
  if (is_sparse) {
    const SparseMatrix diff = sparse - SparseMatrix(sparse.transpose());
    double scale = 0.0, d = 0.0;
    for (int k = 0; k < sparse.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(sparse, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
    }
    for (int k = 0; k < diff.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(diff, k); it; ++it) d = std::max(d, std::abs(it.value()));
    }
    return scale > 0.0 ? d / scale : 0.0;
  }
  const double scale = dense.cwiseAbs().maxCoeff();
  return scale > 0.0 ? (dense - dense.transpose()).cwiseAbs().maxCoeff() / scale : 0.0;
}

namespace {

void check_residual(double residual, double bnorm) {
  if (bnorm > 0.0 && residual / bnorm > solve_residual_tolerance) {
    fail(ErrorKind::numerical, "linear solve residual " + std::to_string(residual / bnorm) + " exceeds tolerance");
  }
}

Eigen::VectorXd solve_dense(const LinearSystem& s) {
  const Eigen::MatrixXd& A = s.dense;
  const double anorm = A.cwiseAbs().maxCoeff();
  Eigen::VectorXd x;
  if (s.definiteness == Definiteness::spd) {
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) fail(ErrorKind::numerical, "matrix is not positive definite");
    x = llt.solve(s.rhs);
  } else {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(min_pivot > 1e-14 * anorm)) fail(ErrorKind::numerical, "matrix is numerically singular");
    x = lu.solve(s.rhs);
  }
  check_residual((A * x - s.rhs).norm(), s.rhs.norm());
  return x;
}

Eigen::VectorXd solve_sparse(const LinearSystem& s) {
  Eigen::VectorXd x;
  if (s.definiteness == Definiteness::spd) {
    Eigen::SimplicialLLT<SparseMatrix> llt(s.sparse);
    if (llt.info() != Eigen::Success) fail(ErrorKind::numerical, "matrix is not positive definite");
    x = llt.solve(s.rhs);
  } else {
    Eigen::SparseLU<SparseMatrix> lu;
    lu.analyzePattern(s.sparse);
    lu.factorize(s.sparse);
    if (lu.info() != Eigen::Success) fail(ErrorKind::numerical, "matrix is numerically singular: " + lu.lastErrorMessage());
    x = lu.solve(s.rhs);
    // one step of iterative refinement
    const Eigen::VectorXd r = s.rhs - s.sparse * x;
    x += lu.solve(r);
  }
  check_residual((s.sparse * x - s.rhs).norm(), s.rhs.norm());
  return x;
}

}  // namespace

Eigen::VectorXd solve(const LinearSystem& system) {
  if (system.size() == 0) return {};
  return system.is_sparse ? solve_sparse(system) : solve_dense(system);
}

double smallest_singular_value(const Eigen::MatrixXd& matrix) {
  if (matrix.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix);
  const auto& s = svd.singularValues();
  if (matrix.rows() != matrix.cols()) return s(s.size() - 1);
  return s.minCoeff();
}

double infsup_estimate(const Mesh& mesh, int k) {
  const int ne = mesh.num_edges();
  const int nt = mesh.num_triangles();
  const int nm = k + 1;
  // Orthonormal edge bases: only the constant mode couples to piecewise
  // constants, <psi_j, 1>_e = sqrt(|e|) delta_j0.
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(ne * nm, nt);
  Eigen::VectorXd r_norm(ne * nm);
  Eigen::MatrixXd jump = Eigen::MatrixXd::Zero(nt, nt);
  for (int e = 0; e < ne; ++e) {
    const Edge& edge = mesh.edges()[e];
    const double multiplicity = edge.boundary() ? 1.0 : 2.0;
    for (int j = 0; j < nm; ++j) r_norm(e * nm + j) = multiplicity;
    const double c = std::sqrt(edge.length);
    b(e * nm, edge.left) += c;
    jump(edge.left, edge.left) += edge.length;
    if (edge.right) {
      b(e * nm, *edge.right) -= c;
      jump(*edge.right, *edge.right) += edge.length;
      jump(edge.left, *edge.right) -= edge.length;
      jump(*edge.right, edge.left) -= edge.length;
    }
  }
  const Eigen::MatrixXd btb = b.transpose() * r_norm.cwiseInverse().asDiagonal() * b;
  Eigen::LLT<Eigen::MatrixXd> jl(jump);
  if (jl.info() != Eigen::Success) fail(ErrorKind::numerical, "jump norm matrix is degenerate");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(btb, jump);
  if (ges.info() != Eigen::Success) fail(ErrorKind::numerical, "inf-sup eigenproblem failed");
  return std::sqrt(std::max(0.0, ges.eigenvalues().minCoeff()));
}

}  // namespace hdg
