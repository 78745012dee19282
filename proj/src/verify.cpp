#include "hdg/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hdg/error.hpp"

namespace hdg {

namespace {

ManufacturedSolution patch_solution(int degree) {
  // u = x(1-x) y(1-y) (x+y)^m, total degree 4 + m
  const int m = degree - 4;
  ManufacturedSolution s;
  s.id = "patch-" + std::to_string(degree);
  auto powi = [](double b, int e) { return e <= 0 ? 1.0 : std::pow(b, e); };
  s.u = [=](const Point& p) {
    const double x = p.x(), y = p.y();
    return x * (1 - x) * y * (1 - y) * powi(x + y, m);
  };
  s.q = [=](const Point& p) {
    const double x = p.x(), y = p.y();
    const double b = x * (1 - x) * y * (1 - y);
    const double bx = (1 - 2 * x) * y * (1 - y), by = x * (1 - x) * (1 - 2 * y);
    const double g = powi(x + y, m), dg = m > 0 ? m * powi(x + y, m - 1) : 0.0;
    return Point(-(bx * g + b * dg), -(by * g + b * dg));
  };
  s.f = [=](const Point& p) {
    const double x = p.x(), y = p.y();
    const double b = x * (1 - x) * y * (1 - y);
    const double bx = (1 - 2 * x) * y * (1 - y), by = x * (1 - x) * (1 - 2 * y);
    const double lap_b = -2 * y * (1 - y) - 2 * x * (1 - x);
    const double g = powi(x + y, m);
    const double dg = m > 0 ? m * powi(x + y, m - 1) : 0.0;
    const double d2g = m > 1 ? m * (m - 1) * powi(x + y, m - 2) : 0.0;
    return -(g * lap_b + 2 * dg * (bx + by) + 2 * b * d2g);
  };
  return s;
}

}  // namespace

ManufacturedSolution manufactured_solution(const std::string& id) {
  using std::numbers::pi;
  if (id == "sine") {
    ManufacturedSolution s;
    s.id = id;
    s.u = [](const Point& p) { return std::sin(pi * p.x()) * std::sin(pi * p.y()); };
    s.q = [](const Point& p) {
      return Point(-pi * std::cos(pi * p.x()) * std::sin(pi * p.y()), -pi * std::sin(pi * p.x()) * std::cos(pi * p.y()));
    };
    s.f = [](const Point& p) { return 2 * pi * pi * std::sin(pi * p.x()) * std::sin(pi * p.y()); };
    return s;
  }
  if (id == "zero") {
    ManufacturedSolution s;
    s.id = id;
    s.u = [](const Point&) { return 0.0; };
    s.q = [](const Point&) { return Point(0.0, 0.0); };
    s.f = [](const Point&) { return 0.0; };
    return s;
  }
  if (id == "patch") return patch_solution(4);
  if (id.rfind("patch-", 0) == 0) {
    int p = 0;
    try {
      std::size_t used = 0;
      p = std::stoi(id.substr(6), &used);
      if (used != id.size() - 6) p = 0;
    } catch (const std::exception&) {
      p = 0;
    }
    if (p < 4 || p > 20) fail(ErrorKind::config, "patch solution degree must be in [4, 20]: " + id);
    return patch_solution(p);
  }
  fail(ErrorKind::config, "unknown manufactured solution: " + id);
}

namespace {

bool tau_constant_per_element(const Discretization& disc, int t) {
  const auto& e = disc.mesh().triangle_edges(t);
  const double t0 = disc.tau(e[0]);
  for (int i = 1; i < 3; ++i) {
    if (std::abs(disc.tau(e[i]) - t0) > 1e-14 * std::abs(t0)) return false;
  }
  return t0 > 0.0;
}

}  // namespace

ErrorReport evaluate(const Discretization& disc, const HDGSolution& sol, const ManufacturedSolution& exact) {
  const Mesh& mesh = disc.mesh();
  const MethodConfig& cfg = disc.config();
  const int nt = mesh.num_triangles();
  const FiniteElement fine(cfg.k, cfg.k_w, cfg.effective_quadrature_degree() + error_quadrature_boost);

  bool have_projection = cfg.stabilization == Stabilization::standard && cfg.k_w == cfg.k;
  for (int t = 0; t < nt && have_projection; ++t) have_projection = tau_constant_per_element(disc, t);

  std::vector<double> eq(nt, 0.0), eu(nt, 0.0), epw(nt, 0.0), epv(nt, 0.0);
  parallel_for(nt, cfg.jobs, [&](int t) {
    const auto& ed = mesh.triangle_edges(t);
    const ElementSpaces sp = make_element_spaces(mesh, t, fine, {disc.tau(ed[0]), disc.tau(ed[1]), disc.tau(ed[2])});
    const ElementData& d = sp.data;
    const int nvs = d.dim_vs();
    const Eigen::VectorXd& qc = sol.q[t];
    const Eigen::VectorXd qhx = d.phi_v * qc.head(nvs), qhy = d.phi_v * qc.tail(nvs);
    const Eigen::VectorXd uh = d.phi_w * sol.u[t];
    double sq = 0.0, su = 0.0;
    for (std::size_t i = 0; i < d.points.size(); ++i) {
      const Point q = exact.q(d.points[i]);
      const double dx = q.x() - qhx[i], dy = q.y() - qhy[i], du = exact.u(d.points[i]) - uh[i];
      sq += d.weights[i] * (dx * dx + dy * dy);
      su += d.weights[i] * du * du;
    }
    eq[t] = sq;
    eu[t] = su;
    if (have_projection) {
      const HdgProjection pi = hdg_project(exact.q, exact.u, sp);
      epw[t] = (pi.u - sol.u[t]).squaredNorm();
      const Eigen::VectorXd px = d.phi_v * pi.q.head(nvs), py = d.phi_v * pi.q.tail(nvs);
      double sp2 = 0.0;
      for (std::size_t i = 0; i < d.points.size(); ++i) {
        const Point q = exact.q(d.points[i]);
        sp2 += d.weights[i] * ((q.x() - px[i]) * (q.x() - px[i]) + (q.y() - py[i]) * (q.y() - py[i]));
      }
      epv[t] = sp2;
    }
  });

  auto total = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return std::sqrt(s);
  };
  ErrorReport r;
  r.err_q = total(eq);
  r.err_u = total(eu);
  if (have_projection) {
    r.err_piwu = total(epw);
    r.err_pivq = total(epv);
  }
  r.energy_resid = energy_identity_residual(disc, sol, exact.f);
  r.flux_resid = flux_identity_residual(disc, sol);
  r.transmission_resid = transmission_residual(disc, sol);
  return r;
}

namespace {

// P_M of the W function with coefficients c on side s.
Eigen::VectorXd side_projection(const ElementData::Side& s, const Eigen::VectorXd& c) {
  return s.psi.transpose() * s.weights.asDiagonal() * (s.phi_w * c);
}

}  // namespace

double energy_identity_residual(const Discretization& disc, const HDGSolution& sol, const ScalarField& f) {
  const Mesh& mesh = disc.mesh();
  const bool ls = disc.config().stabilization == Stabilization::ls;
  double lhs = 0.0, rhs = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementData& d = disc.element(t);
    lhs += sol.q[t].squaredNorm();
    Eigen::VectorXd fv(d.points.size());
    for (std::size_t i = 0; i < d.points.size(); ++i) fv[i] = f(d.points[i]);
    rhs += (d.phi_w.transpose() * d.weights.asDiagonal() * fv).dot(sol.u[t]);
    for (int i = 0; i < 3; ++i) {
      const auto& s = d.sides[i];
      const double tau = disc.tau(s.edge);
      if (ls) {
        lhs += tau * (side_projection(s, sol.u[t]) - sol.u_hat[t][i]).squaredNorm();
      } else {
        const Eigen::VectorXd diff = s.phi_w * sol.u[t] - s.psi * sol.u_hat[t][i];
        lhs += tau * (s.weights.array() * diff.array().square()).sum();
      }
    }
  }
  return std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs));
}

double flux_identity_residual(const Discretization& disc, const HDGSolution& sol) {
  const Mesh& mesh = disc.mesh();
  const bool ls = disc.config().stabilization == Stabilization::ls;
  double worst = 0.0, scale = 1.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementData& d = disc.element(t);
    const int nvs = d.dim_vs();
    for (int i = 0; i < 3; ++i) {
      const auto& s = d.sides[i];
      const double tau = disc.tau(s.edge);
      const Eigen::VectorXd qn =
          s.normal.x() * (s.phi_v * sol.q[t].head(nvs)) + s.normal.y() * (s.phi_v * sol.q[t].tail(nvs));
      const Eigen::VectorXd ut = ls ? Eigen::VectorXd(s.psi * side_projection(s, sol.u[t])) : Eigen::VectorXd(s.phi_w * sol.u[t]);
      const Eigen::VectorXd qhat = s.psi * sol.qn_hat[t][i];
      const Eigen::VectorXd r = qhat - qn - tau * (ut - s.psi * sol.u_hat[t][i]);
      worst = std::max(worst, r.cwiseAbs().maxCoeff());
      scale = std::max(scale, qhat.cwiseAbs().maxCoeff());
    }
  }
  return worst / scale;
}

double transmission_residual(const Discretization& disc, const HDGSolution& sol) {
  const Mesh& mesh = disc.mesh();
  const int ne = mesh.num_edges();
  // locate (element, side) pairs per edge
  std::vector<std::array<std::pair<int, int>, 2>> owners(ne, {std::pair{-1, -1}, std::pair{-1, -1}});
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (int i = 0; i < 3; ++i) {
      auto& o = owners[mesh.triangle_edges(t)[i]];
      (o[0].first < 0 ? o[0] : o[1]) = {t, i};
    }
  }
  double worst = 0.0, scale = 1.0;
  for (int e = 0; e < ne; ++e) {
    const auto& [a, b] = owners[e];
    scale = std::max({scale, sol.u_hat[a.first][a.second].cwiseAbs().maxCoeff(),
                      sol.qn_hat[a.first][a.second].cwiseAbs().maxCoeff()});
    if (b.first < 0) continue;
    worst = std::max(worst, (sol.u_hat[a.first][a.second] - sol.u_hat[b.first][b.second]).cwiseAbs().maxCoeff());
    worst = std::max(worst, (sol.qn_hat[a.first][a.second] + sol.qn_hat[b.first][b.second]).cwiseAbs().maxCoeff());
  }
  return worst / scale;
}

double max_coefficient(const HDGSolution& sol) {
  double m = 0.0;
  for (const auto& v : sol.q) m = std::max(m, v.cwiseAbs().maxCoeff());
  for (const auto& v : sol.u) m = std::max(m, v.cwiseAbs().maxCoeff());
  for (const auto& v : sol.trace) {
    if (v.size() > 0) m = std::max(m, v.cwiseAbs().maxCoeff());
  }
  return m;
}

double relative_difference(const HDGSolution& a, const HDGSolution& b) {
  double d = 0.0;
  auto upd = [&d](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    if (x.size() != y.size()) fail(ErrorKind::contract, "solutions have different layouts");
    if (x.size() > 0) d = std::max(d, (x - y).cwiseAbs().maxCoeff());
  };
  if (a.q.size() != b.q.size()) fail(ErrorKind::contract, "solutions live on different meshes");
  for (std::size_t t = 0; t < a.q.size(); ++t) {
    upd(a.q[t], b.q[t]);
    upd(a.u[t], b.u[t]);
    for (int i = 0; i < 3; ++i) {
      upd(a.u_hat[t][i], b.u_hat[t][i]);
      upd(a.qn_hat[t][i], b.qn_hat[t][i]);
    }
  }
  const double scale = max_coefficient(a);
  return scale > 0.0 ? d / scale : d;
}

std::vector<std::optional<double>> eoc(const std::vector<double>& errors, const std::vector<double>& h) {
  std::vector<std::optional<double>> out(errors.size());
  for (std::size_t i = 1; i < errors.size(); ++i) {
    if (errors[i - 1] > 0.0 && errors[i] > 0.0 && h[i - 1] > 0.0 && h[i] > 0.0 && h[i - 1] != h[i]) {
      out[i] = std::log(errors[i - 1] / errors[i]) / std::log(h[i - 1] / h[i]);
    }
  }
  return out;
}

}  // namespace hdg
