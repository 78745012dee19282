#include "hdg/fem_core.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "hdg/error.hpp"

namespace hdg {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    // Chebyshev-like initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (int j = 2; j <= n; ++j) {
      const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    nodes[n - 1 - i] = 0.5 * (x + 1.0);
    weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);  // 2/((1-x^2)P'^2) scaled by 1/2
  }
}

QuadratureRule make_quadrature(Shape shape, int exactness_degree) {
  if (exactness_degree < 0 || exactness_degree > max_quadrature_degree) {
    fail(ErrorKind::config, "unsupported quadrature degree " + std::to_string(exactness_degree));
  }
  QuadratureRule rule;
  rule.shape = shape;
  rule.exactness = exactness_degree;
  std::vector<double> gx, gw;
  if (shape == Shape::edge) {
    gauss_legendre(std::max(1, (exactness_degree + 2) / 2), gx, gw);
    for (std::size_t i = 0; i < gx.size(); ++i) {
      rule.points.emplace_back(gx[i], 0.0);
      rule.weights.push_back(gw[i]);
    }
    return rule;
  }
  if (exactness_degree <= 1) {
    rule.points = {Point(1.0 / 3.0, 1.0 / 3.0)};
    rule.weights = {0.5};
    return rule;
  }
  if (exactness_degree == 2) {
    rule.points = {Point(1.0 / 6.0, 1.0 / 6.0), Point(2.0 / 3.0, 1.0 / 6.0), Point(1.0 / 6.0, 2.0 / 3.0)};
    rule.weights = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
    return rule;
  }
  // Collapsed tensor product: x = s, y = (1-s) t, dx dy = (1-s) ds dt.
  const int n = (exactness_degree + 3) / 2;
  gauss_legendre(n, gx, gw);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double s = gx[i], t = gx[j];
      rule.points.emplace_back(s, (1.0 - s) * t);
      rule.weights.push_back(gw[i] * gw[j] * (1.0 - s));
    }
  }
  return rule;
}

double reference_monomial_integral(int a, int b) {
  return std::exp(std::lgamma(a + 1.0) + std::lgamma(b + 1.0) - std::lgamma(a + b + 3.0));
}

namespace {

// Shifted Legendre polynomials L_i(2t - 1) and their t-derivatives, i = 0..n.
void legendre(int n, double t, std::vector<double>& v, std::vector<double>& dv) {
  v.assign(n + 1, 0.0);
  dv.assign(n + 1, 0.0);
  const double x = 2.0 * t - 1.0;
  v[0] = 1.0;
  if (n >= 1) {
    v[1] = x;
    dv[1] = 2.0;
  }
  for (int i = 2; i <= n; ++i) {
    v[i] = ((2 * i - 1) * x * v[i - 1] - (i - 1) * v[i - 2]) / i;
    dv[i] = ((2 * i - 1) * (2.0 * v[i - 1] + x * dv[i - 1]) - (i - 1) * dv[i - 2]) / i;
  }
}

}  // namespace

ReferenceBasis::ReferenceBasis(Shape shape, int degree) : shape_(shape), degree_(degree) {
  if (degree < 0) fail(ErrorKind::config, "basis degree must be >= 0");
  if (shape == Shape::edge) {
    for (int a = 0; a <= degree; ++a) exponents_.push_back({a, 0});
  } else {
    for (int d = 0; d <= degree; ++d) {
      for (int a = d; a >= 0; --a) exponents_.push_back({a, d - a});
    }
  }
  const int n = static_cast<int>(exponents_.size());
  coeffs_ = Eigen::MatrixXd::Identity(n, n);
  const QuadratureRule rule = make_quadrature(shape, 2 * degree);
  // Cholesky orthonormalization, repeated once to restore orthogonality lost to rounding.
  for (int pass = 0; pass < 2; ++pass) {
    const Eigen::MatrixXd vals = eval(rule.points);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t p = 0; p < rule.size(); ++p) gram += rule.weights[p] * vals.row(p).transpose() * vals.row(p);
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) fail(ErrorKind::numerical, "basis Gram matrix is not positive definite");
    const Eigen::MatrixXd L = llt.matrixL();
    coeffs_ = L.triangularView<Eigen::Lower>().solve(coeffs_);
  }
}

Eigen::MatrixXd ReferenceBasis::eval(const std::vector<Point>& points) const {
  const int n = dim();
  Eigen::MatrixXd raw(points.size(), n);
  std::vector<double> lx, dlx, ly, dly;
  for (std::size_t p = 0; p < points.size(); ++p) {
    legendre(degree_, points[p].x(), lx, dlx);
    legendre(degree_, points[p].y(), ly, dly);
    for (int j = 0; j < n; ++j) raw(p, j) = lx[exponents_[j][0]] * ly[exponents_[j][1]];
  }
  return raw * coeffs_.transpose();
}

std::array<Eigen::MatrixXd, 2> ReferenceBasis::eval_grad(const std::vector<Point>& points) const {
  const int n = dim();
  Eigen::MatrixXd dx(points.size(), n), dy(points.size(), n);
  std::vector<double> lx, dlx, ly, dly;
  for (std::size_t p = 0; p < points.size(); ++p) {
    legendre(degree_, points[p].x(), lx, dlx);
    legendre(degree_, points[p].y(), ly, dly);
    for (int j = 0; j < n; ++j) {
      const int a = exponents_[j][0], b = exponents_[j][1];
      dx(p, j) = dlx[a] * ly[b];
      dy(p, j) = lx[a] * dly[b];
    }
  }
  return {dx * coeffs_.transpose(), dy * coeffs_.transpose()};
}

AffineMap affine_map(const Mesh& mesh, int element) {
  const auto& tri = mesh.triangles()[element];
  const auto& v = mesh.vertices();
  AffineMap m;
  m.offset = v[tri[0]];
  m.B.col(0) = v[tri[1]] - v[tri[0]];
  m.B.col(1) = v[tri[2]] - v[tri[0]];
  m.det = std::abs(m.B.determinant());
  m.B_inv_T = m.B.inverse().transpose();
  for (int i = 0; i < 3; ++i) {
    m.normals[i] = mesh.outward_normal(element, i);
    m.lengths[i] = mesh.edges()[mesh.triangle_edges(element)[i]].length;
  }
  return m;
}

std::vector<Point> edge_points(const Mesh& mesh, int edge, const QuadratureRule& edge_rule) {
  const Edge& e = mesh.edges()[edge];
  const Point a = mesh.vertices()[e.v[0]];
  const Point b = mesh.vertices()[e.v[1]];
  std::vector<Point> pts;
  pts.reserve(edge_rule.size());
  for (const auto& p : edge_rule.points) pts.push_back(a + p.x() * (b - a));
  return pts;
}

FiniteElement::FiniteElement(int k_, int k_w_, int quadrature_degree)
    : k(k_),
      k_w(k_w_),
      v_basis(Shape::triangle, k_),
      w_basis(Shape::triangle, k_w_),
      m_basis(Shape::edge, k_),
      tri_rule(make_quadrature(Shape::triangle, quadrature_degree)),
      edge_rule(make_quadrature(Shape::edge, quadrature_degree)) {}

ElementData make_element_data(const Mesh& mesh, int element, const FiniteElement& fe) {
  ElementData d;
  d.element = element;
  d.map = affine_map(mesh, element);
  d.diameter = std::max({d.map.lengths[0], d.map.lengths[1], d.map.lengths[2]});
  const double scale = 1.0 / std::sqrt(d.map.det);

  d.weights.resize(fe.tri_rule.size());
  for (std::size_t q = 0; q < fe.tri_rule.size(); ++q) {
    d.points.push_back(d.map.to_physical(fe.tri_rule.points[q]));
    d.weights[q] = fe.tri_rule.weights[q] * d.map.det;
  }
  auto push_grad = [&](const ReferenceBasis& basis, std::array<Eigen::MatrixXd, 2>& out) {
    auto g = basis.eval_grad(fe.tri_rule.points);
    const Eigen::Matrix2d& J = d.map.B_inv_T;
    out[0] = scale * (J(0, 0) * g[0] + J(0, 1) * g[1]);
    out[1] = scale * (J(1, 0) * g[0] + J(1, 1) * g[1]);
  };
  d.phi_w = scale * fe.w_basis.eval(fe.tri_rule.points);
  push_grad(fe.w_basis, d.grad_w);
  d.phi_v = scale * fe.v_basis.eval(fe.tri_rule.points);
  push_grad(fe.v_basis, d.grad_v);

  for (int i = 0; i < 3; ++i) {
    auto& s = d.sides[i];
    s.edge = mesh.triangle_edges(element)[i];
    s.sign = mesh.triangle_edge_signs(element)[i];
    s.normal = d.map.normals[i];
    s.length = d.map.lengths[i];
    s.points = edge_points(mesh, s.edge, fe.edge_rule);
    s.weights.resize(fe.edge_rule.size());
    for (std::size_t q = 0; q < fe.edge_rule.size(); ++q) s.weights[q] = fe.edge_rule.weights[q] * s.length;
    std::vector<Point> ref;
    ref.reserve(s.points.size());
    for (const auto& p : s.points) ref.push_back(d.map.to_reference(p));
    s.phi_w = scale * fe.w_basis.eval(ref);
    s.phi_v = scale * fe.v_basis.eval(ref);
    s.psi = fe.m_basis.eval(fe.edge_rule.points) / std::sqrt(s.length);
  }
  return d;
}

}  // namespace hdg
