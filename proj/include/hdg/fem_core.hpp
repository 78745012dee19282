#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "hdg/mesh.hpp"

namespace hdg {

enum class Shape { triangle, edge };

/// Quadrature on the reference triangle {x,y >= 0, x+y <= 1} (points are 2-D)
/// or on the reference edge [0,1] (only the x coordinate is used).
struct QuadratureRule {
  Shape shape = Shape::triangle;
  int exactness = 0;
  std::vector<Point> points;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

/// Gauss-Legendre nodes and weights on [0,1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Rule exact for polynomials of total degree `exactness_degree`.
/// Throws hdg::Error(config) above the supported range.
QuadratureRule make_quadrature(Shape shape, int exactness_degree);

inline constexpr int max_quadrature_degree = 60;

/// Orthonormal basis of P_k on the reference triangle or edge, expressed in
/// products L_a(2x-1) L_b(2y-1) of shifted Legendre polynomials, ordered by
/// total degree a+b, then by decreasing a. The first function is the constant.
class ReferenceBasis {
 public:
  ReferenceBasis() = default;
  ReferenceBasis(Shape shape, int degree);

  Shape shape() const { return shape_; }
  int degree() const { return degree_; }
  int dim() const { return static_cast<int>(coeffs_.rows()); }
  const Eigen::MatrixXd& coefficients() const { return coeffs_; }
  const std::vector<std::array<int, 2>>& exponents() const { return exponents_; }

  /// Values, one row per point, one column per basis function.
  Eigen::MatrixXd eval(const std::vector<Point>& points) const;
  /// Gradients: entry [d] holds d/dx_d, same layout as eval().
  std::array<Eigen::MatrixXd, 2> eval_grad(const std::vector<Point>& points) const;

 private:
  Shape shape_ = Shape::triangle;
  int degree_ = 0;
  std::vector<std::array<int, 2>> exponents_;
  Eigen::MatrixXd coeffs_;  // basis i = sum_j coeffs_(i, j) * raw product j
};

inline ReferenceBasis make_basis(Shape shape, int degree) { return ReferenceBasis(shape, degree); }

/// Exact integral of x^a y^b over the reference triangle: a! b! / (a+b+2)!.
double reference_monomial_integral(int a, int b);

/// x = B * xi + b mapping the reference triangle onto a mesh element.
struct AffineMap {
  Eigen::Matrix2d B = Eigen::Matrix2d::Identity();
  Point offset = Point::Zero();
  double det = 1.0;  ///< |det B| = 2 * area
  Eigen::Matrix2d B_inv_T = Eigen::Matrix2d::Identity();
  std::array<Point, 3> normals;   ///< outward unit normal of local edge i
  std::array<double, 3> lengths{};

  Point to_physical(const Point& xi) const { return B * xi + offset; }
  Point to_reference(const Point& x) const { return B_inv_T.transpose() * (x - offset); }
};

AffineMap affine_map(const Mesh& mesh, int element);

/// Edge quadrature pushed to a mesh edge, in the edge's canonical
/// parameterization (t = 0 at the lower-index vertex).
std::vector<Point> edge_points(const Mesh& mesh, int edge, const QuadratureRule& edge_rule);

/// Physical-element tabulation of the local bases.
///
/// Scalar bases on the element are the reference bases composed with the
/// inverse affine map and scaled by |det B|^{-1/2}, so they are L2-orthonormal
/// on the physical element. Edge bases are scaled by |e|^{-1/2}.
struct ElementData {
  int element = -1;
  AffineMap map;
  double diameter = 0.0;

  // volume quadrature
  std::vector<Point> points;
  Eigen::VectorXd weights;  // physical weights
  Eigen::MatrixXd phi_w;    // W basis values (points x dim W)
  std::array<Eigen::MatrixXd, 2> grad_w;
  Eigen::MatrixXd phi_v;    // scalar P_k basis used for each V component
  std::array<Eigen::MatrixXd, 2> grad_v;

  struct Side {
    int edge = -1;
    int sign = 1;
    Point normal = Point::Zero();  // outward
    double length = 0.0;
    std::vector<Point> points;
    Eigen::VectorXd weights;
    Eigen::MatrixXd phi_w;
    Eigen::MatrixXd phi_v;
    Eigen::MatrixXd psi;  // edge basis P_k(e)
  };
  std::array<Side, 3> sides;

  int dim_w() const { return static_cast<int>(phi_w.cols()); }
  int dim_vs() const { return static_cast<int>(phi_v.cols()); }
  int dim_v() const { return 2 * dim_vs(); }
  int dim_m() const { return static_cast<int>(sides[0].psi.cols()); }
};

/// Reference ingredients shared by all elements for a fixed (k, k_W).
struct FiniteElement {
  int k = 1;
  int k_w = 1;
  ReferenceBasis v_basis;
  ReferenceBasis w_basis;
  ReferenceBasis m_basis;
  QuadratureRule tri_rule;
  QuadratureRule edge_rule;

  FiniteElement() = default;
  FiniteElement(int k, int k_w, int quadrature_degree);
};

/// Default quadrature degree integrating every bilinear form exactly.
inline int default_quadrature_degree(int k, int k_w) { return 2 * (k > k_w ? k : k_w) + 2; }

ElementData make_element_data(const Mesh& mesh, int element, const FiniteElement& fe);

}  // namespace hdg
