#include "hdg/projections.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "hdg/error.hpp"

namespace hdg {

ElementSpaces make_element_spaces(const Mesh& mesh, int element, const FiniteElement& fe,
                                  const std::array<double, 3>& tau) {
  ElementSpaces s;
  s.data = make_element_data(mesh, element, fe);
  s.k = fe.k;
  s.k_w = fe.k_w;
  s.tau = tau;
  return s;
}

namespace {

Eigen::VectorXd sample(const std::vector<Point>& pts, const ScalarField& f) {
  Eigen::VectorXd v(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) v[i] = f(pts[i]);
  return v;
}

Eigen::MatrixXd sample(const std::vector<Point>& pts, const VectorField& q) {
  Eigen::MatrixXd v(pts.size(), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) v.row(i) = q(pts[i]).transpose();
  return v;
}

// Values of the V basis at the given scalar-basis tabulation: column j < n
// is (phi_j, 0), column n + j is (0, phi_j).
Eigen::VectorXd eval_v_component(const Eigen::MatrixXd& phi, const Eigen::VectorXd& coeffs, int comp) {
  const Eigen::Index n = phi.cols();
  return phi * coeffs.segment(comp * n, n);
}

}  // namespace

Eigen::VectorXd l2_project_w(const ElementSpaces& spaces, const ScalarField& f) {
  const auto& d = spaces.data;
  return d.phi_w.transpose() * d.weights.asDiagonal() * sample(d.points, f);
}

Eigen::VectorXd l2_project_v(const ElementSpaces& spaces, const VectorField& q) {
  const auto& d = spaces.data;
  const Eigen::MatrixXd qv = sample(d.points, q);
  Eigen::VectorXd c(d.dim_v());
  c << d.phi_v.transpose() * d.weights.asDiagonal() * qv.col(0), d.phi_v.transpose() * d.weights.asDiagonal() * qv.col(1);
  return c;
}

Eigen::VectorXd l2_project_edge(const Mesh& mesh, int edge, int k, const ScalarField& g, int quadrature_degree) {
  const QuadratureRule rule = make_quadrature(Shape::edge, quadrature_degree);
  const ReferenceBasis basis(Shape::edge, k);
  const double len = mesh.edges()[edge].length;
  const Eigen::MatrixXd psi = basis.eval(rule.points) / std::sqrt(len);
  Eigen::VectorXd w(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) w[i] = rule.weights[i] * len;
  return psi.transpose() * w.asDiagonal() * sample(edge_points(mesh, edge, rule), g);
}

LocalOperators local_operators(const ElementSpaces& spaces) {
  const auto& d = spaces.data;
  const int nvs = d.dim_vs(), nv = d.dim_v(), nw = d.dim_w(), nm = d.dim_m();
  const auto W = d.weights.asDiagonal();
  LocalOperators op;
  op.div.resize(nw, nv);
  op.div << d.phi_w.transpose() * W * d.grad_v[0], d.phi_w.transpose() * W * d.grad_v[1];
  op.grad.resize(nw, nv);
  op.grad << d.grad_w[0].transpose() * W * d.phi_v, d.grad_w[1].transpose() * W * d.phi_v;
  op.normal_trace.resize(3 * nm, nv);
  op.scalar_trace.resize(3 * nm, nw);
  for (int i = 0; i < 3; ++i) {
    const auto& s = d.sides[i];
    const auto We = s.weights.asDiagonal();
    op.normal_trace.block(i * nm, 0, nm, nvs) = s.normal.x() * (s.psi.transpose() * We * s.phi_v);
    op.normal_trace.block(i * nm, nvs, nm, nvs) = s.normal.y() * (s.psi.transpose() * We * s.phi_v);
    op.scalar_trace.block(i * nm, 0, nm, nw) = s.psi.transpose() * We * s.phi_w;
  }
  return op;
}

namespace {

struct Split {
  Eigen::MatrixXd kernel;
  Eigen::MatrixXd complement;
};

// Right singular vectors split at the numerical rank.
Split nullspace_split(const Eigen::MatrixXd& a, const char* what) {
  const Eigen::Index n = a.cols();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double smax = s.size() > 0 ? s.maxCoeff() : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double rel = smax > 0.0 ? s[i] / smax : 0.0;
    if (rel > rank_ambiguity_low && rel < rank_ambiguity_high) {
      fail(ErrorKind::numerical, std::string("rank ambiguity in ") + what + ": relative singular value " +
                                     std::to_string(rel));
    }
    if (rel > rank_cutoff) ++rank;
  }
  Split out;
  out.complement = svd.matrixV().leftCols(rank);
  out.kernel = svd.matrixV().rightCols(n - rank);
  return out;
}

}  // namespace

SolenoidalDecomposition solenoidal_decomposition(const ElementSpaces& spaces) {
  const LocalOperators op = local_operators(spaces);
  SolenoidalDecomposition dec;
  auto sol = nullspace_split(op.div, "divergence operator");
  dec.solenoidal = std::move(sol.kernel);
  dec.solenoidal_perp = std::move(sol.complement);
  Eigen::MatrixXd stacked(op.div.rows() + op.normal_trace.rows(), op.div.cols());
  stacked << op.div, op.normal_trace;
  auto bub = nullspace_split(stacked, "divergence/normal-trace operator");
  dec.bubbles = std::move(bub.kernel);
  dec.bubbles_perp = std::move(bub.complement);
  return dec;
}

int m_index(const ElementSpaces& spaces, const SolenoidalDecomposition& dec) {
  return 3 * spaces.dim_m() - (dec.dim_solenoidal() - dec.dim_bubbles() + 1);
}

int m_index(const ElementSpaces& spaces) { return m_index(spaces, solenoidal_decomposition(spaces)); }

namespace {

struct ProjectionData {
  LocalOperators op;
  Eigen::VectorXd rhs_div;    // (u, div v_j)
  Eigen::VectorXd rhs_grad;   // (q, grad phi_a)
  Eigen::VectorXd rhs_trace;  // <q.n + tau u, psi_i>
  double tau = 1.0;
};

ProjectionData projection_data(const VectorField& q, const ScalarField& u, const ElementSpaces& spaces) {
  const auto& t = spaces.tau;
  const double tmax = std::max({std::abs(t[0]), std::abs(t[1]), std::abs(t[2])});
  if (!(t[0] > 0.0) || std::abs(t[0] - t[1]) > 1e-14 * tmax || std::abs(t[0] - t[2]) > 1e-14 * tmax) {
    fail(ErrorKind::config, "the HDG projection needs a positive tau that is constant on the element");
  }
  const auto& d = spaces.data;
  const auto W = d.weights.asDiagonal();
  ProjectionData pd;
  pd.op = local_operators(spaces);
  pd.tau = t[0];
  const Eigen::VectorXd uv = sample(d.points, u);
  const Eigen::MatrixXd qv = sample(d.points, q);
  pd.rhs_div.resize(d.dim_v());
  pd.rhs_div << d.grad_v[0].transpose() * W * uv, d.grad_v[1].transpose() * W * uv;
  pd.rhs_grad = d.grad_w[0].transpose() * W * qv.col(0) + d.grad_w[1].transpose() * W * qv.col(1);
  const int nm = d.dim_m();
  pd.rhs_trace.resize(3 * nm);
  for (int i = 0; i < 3; ++i) {
    const auto& s = d.sides[i];
    const Eigen::MatrixXd qe = sample(s.points, q);
    const Eigen::VectorXd g = qe.col(0) * s.normal.x() + qe.col(1) * s.normal.y() + pd.tau * sample(s.points, u);
    pd.rhs_trace.segment(i * nm, nm) = s.psi.transpose() * s.weights.asDiagonal() * g;
  }
  return pd;
}

void fill_residuals(const ProjectionData& pd, HdgProjection& p) {
  const double scale = std::max({pd.rhs_div.norm(), pd.rhs_grad.norm(), pd.rhs_trace.norm(), 1e-300});
  p.residual_div = (pd.op.div.transpose() * p.u - pd.rhs_div).norm() / scale;
  p.residual_grad = (pd.op.grad * p.q - pd.rhs_grad).norm() / scale;
  p.residual_trace = (pd.op.normal_trace * p.q + pd.tau * pd.op.scalar_trace * p.u - pd.rhs_trace).norm() / scale;
}

}  // namespace

HdgProjection hdg_project(const VectorField& q, const ScalarField& u, const ElementSpaces& spaces) {
  const ProjectionData pd = projection_data(q, u, spaces);
  const SolenoidalDecomposition dec = solenoidal_decomposition(spaces);
  const int index = m_index(spaces, dec);
  if (index != 0) {
    fail(ErrorKind::numerical, "M-decomposition not admitted (M-index " + std::to_string(index) + ")");
  }
  const Eigen::MatrixXd& trial_v = dec.bubbles_perp;
  const Eigen::MatrixXd& test_v = dec.solenoidal_perp;
  const int nw = spaces.dim_w();
  const Eigen::Index nz = trial_v.cols(), ny = test_v.cols();
  const Eigen::Index nmu = pd.op.normal_trace.rows();
  const Eigen::Index rows = ny + (nw - 1) + nmu;
  const Eigen::Index cols = nz + nw;
  if (rows != cols) fail(ErrorKind::contract, "reduced projection system is not square");

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::VectorXd b(rows);
  a.block(0, nz, ny, nw) = test_v.transpose() * pd.op.div.transpose();
  b.head(ny) = test_v.transpose() * pd.rhs_div;
  // W / P_0: drop the constant (first) basis function
  a.block(ny, 0, nw - 1, nz) = pd.op.grad.bottomRows(nw - 1) * trial_v;
  b.segment(ny, nw - 1) = pd.rhs_grad.tail(nw - 1);
  a.block(ny + nw - 1, 0, nmu, nz) = pd.op.normal_trace * trial_v;
  a.block(ny + nw - 1, nz, nmu, nw) = pd.tau * pd.op.scalar_trace;
  b.tail(nmu) = pd.rhs_trace;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const double pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(pivot > 1e-12 * a.cwiseAbs().maxCoeff())) {
    fail(ErrorKind::contract, "reduced projection system is singular although the M-index vanishes");
  }
  const Eigen::VectorXd x = lu.solve(b);
  HdgProjection p;
  // (13) does not see the bubbles; their component is the L2 one
  p.q = trial_v * x.head(nz) + dec.bubbles * (dec.bubbles.transpose() * l2_project_v(spaces, q));
  p.u = x.tail(nw);
  fill_residuals(pd, p);
  return p;
}

HdgProjection hdg_project_least_squares(const VectorField& q, const ScalarField& u, const ElementSpaces& spaces) {
  const ProjectionData pd = projection_data(q, u, spaces);
  const int nv = spaces.dim_v(), nw = spaces.dim_w();
  const Eigen::Index nmu = pd.op.normal_trace.rows();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nv + nw + nmu, nv + nw);
  Eigen::VectorXd b(nv + nw + nmu);
  a.block(0, nv, nv, nw) = pd.op.div.transpose();
  b.head(nv) = pd.rhs_div;
  a.block(nv, 0, nw, nv) = pd.op.grad;
  b.segment(nv, nw) = pd.rhs_grad;
  a.block(nv + nw, 0, nmu, nv) = pd.op.normal_trace;
  a.block(nv + nw, nv, nmu, nw) = pd.tau * pd.op.scalar_trace;
  b.tail(nmu) = pd.rhs_trace;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(rank_cutoff);
  const Eigen::VectorXd x = svd.solve(b);
  const Eigen::MatrixXd& bub = solenoidal_decomposition(spaces).bubbles;
  HdgProjection p;
  p.q = x.head(nv) + bub * (bub.transpose() * (l2_project_v(spaces, q) - x.head(nv)));
  p.u = x.tail(nw);
  fill_residuals(pd, p);
  return p;
}

double ProjectionBounds::ratio_q() const { return bracket_q > 0.0 ? delta_q / bracket_q : 0.0; }
double ProjectionBounds::ratio_u() const { return bracket_u > 0.0 ? delta_u / bracket_u : 0.0; }

ProjectionBounds hdg_project_bounds_check(const VectorField& q, const ScalarField& u, const ElementSpaces& spaces) {
  const HdgProjection pi = hdg_project(q, u, spaces);
  const Eigen::VectorXd pv = l2_project_v(spaces, q);
  const Eigen::VectorXd pw = l2_project_w(spaces, u);
  const auto& d = spaces.data;
  const double tau = spaces.tau[0];

  ProjectionBounds b;
  b.delta_q = (pv - pi.q).norm();
  b.delta_u = (pw - pi.u).norm();

  const Eigen::MatrixXd qv = sample(d.points, q);
  const Eigen::VectorXd uv = sample(d.points, u);
  auto vol_norm = [&](const Eigen::VectorXd& coeffs) {
    const Eigen::VectorXd ex = qv.col(0) - eval_v_component(d.phi_v, coeffs, 0);
    const Eigen::VectorXd ey = qv.col(1) - eval_v_component(d.phi_v, coeffs, 1);
    return std::sqrt((d.weights.array() * (ex.array().square() + ey.array().square())).sum());
  };
  b.err_q = vol_norm(pi.q);
  b.l2_err_q = vol_norm(pv);
  b.err_u = std::sqrt((d.weights.array() * (uv - d.phi_w * pi.u).array().square()).sum());
  b.l2_err_u = std::sqrt((d.weights.array() * (uv - d.phi_w * pw).array().square()).sum());

  double qn2 = 0.0, u2 = 0.0;
  for (const auto& s : d.sides) {
    const Eigen::MatrixXd qe = sample(s.points, q);
    const Eigen::VectorXd qn = qe.col(0) * s.normal.x() + qe.col(1) * s.normal.y() -
                               s.normal.x() * eval_v_component(s.phi_v, pv, 0) -
                               s.normal.y() * eval_v_component(s.phi_v, pv, 1);
    const Eigen::VectorXd ue = sample(s.points, u) - s.phi_w * pw;
    qn2 += (s.weights.array() * qn.array().square()).sum();
    u2 += (s.weights.array() * ue.array().square()).sum();
  }
  const double sh = std::sqrt(d.diameter);
  b.bracket_q = sh * (std::sqrt(qn2) + tau * std::sqrt(u2));
  b.bracket_u = sh * (std::sqrt(qn2) / tau + std::sqrt(u2));
  const double tiny = 1e-12 * std::max({b.l2_err_q, b.l2_err_u, 1e-300});
  if (b.delta_q <= tiny && b.bracket_q <= tiny) b.bracket_q = 0.0;
  if (b.delta_u <= tiny && b.bracket_u <= tiny) b.bracket_u = 0.0;
  return b;
}

MeshProjectionBounds hdg_project_bounds_check(const VectorField& q, const ScalarField& u, const Mesh& mesh, int k,
                                              double tau) {
  const FiniteElement fe(k, k, default_quadrature_degree(k, k) + 6);
  std::vector<ProjectionBounds> all;
  MeshProjectionBounds out;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    all.push_back(hdg_project_bounds_check(q, u, make_element_spaces(mesh, t, fe, {tau, tau, tau})));
    out.max_ratio_q = std::max(out.max_ratio_q, all.back().ratio_q());
    out.max_ratio_u = std::max(out.max_ratio_u, all.back().ratio_u());
  }
  for (const auto& b : all) {
    const double slack = 1e-12 * (b.err_q + b.err_u + 1e-300);
    out.holds = out.holds && b.err_q <= b.l2_err_q + out.max_ratio_q * b.bracket_q + slack &&
                b.err_u <= b.l2_err_u + out.max_ratio_u * b.bracket_u + slack;
  }
  return out;
}

}  // namespace hdg
