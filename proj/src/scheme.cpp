#include "hdg/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <thread>

#include "hdg/error.hpp"

namespace hdg {

std::string to_string(Method m) {
  switch (m) {
    case Method::dirichlet: return "dirichlet";
    case Method::neumann: return "neumann";
    case Method::mixed: return "mixed";
  }
  return "?";
}

std::string to_string(Stabilization s) { return s == Stabilization::standard ? "standard" : "ls"; }

void MethodConfig::validate() const {
  if (k < 0) fail(ErrorKind::config, "k must be >= 0");
  if (k_w != k && k_w != k + 1) fail(ErrorKind::config, "W degree must be k or k+1");
  if (k_w == k + 1 && stabilization != Stabilization::ls) {
    fail(ErrorKind::config, "W of degree k+1 requires the LS stabilization");
  }
  if (!(std::isfinite(tau)) || tau == 0.0) fail(ErrorKind::config, "tau must be a finite nonzero number");
  if (jobs < 1) fail(ErrorKind::config, "jobs must be >= 1");
  if (quadrature_degree >= 0 && quadrature_degree < default_quadrature_degree(k, k_w)) {
    fail(ErrorKind::config, "quadrature degree too low to integrate the bilinear forms exactly");
  }
}

bool EdgeLabeling::all(EdgeLabel l) const {
  return std::all_of(labels.begin(), labels.end(), [l](EdgeLabel x) { return x == l; });
}

namespace {

bool monochrome(const Mesh& mesh, const std::vector<EdgeLabel>& labels, int t) {
  const auto& e = mesh.triangle_edges(t);
  return labels[e[0]] == labels[e[1]] && labels[e[1]] == labels[e[2]];
}

EdgeLabel flipped(EdgeLabel l) { return l == EdgeLabel::D ? EdgeLabel::N : EdgeLabel::D; }

}  // namespace

bool EdgeLabeling::mixed_everywhere(const Mesh& mesh) const {
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (monochrome(mesh, labels, t)) return false;
  }
  return true;
}

void repair_labeling(const Mesh& mesh, EdgeLabeling& labeling) {
  auto& labels = labeling.labels;
  const int max_flips = 10 * mesh.num_edges() + 10;
  int flips = 0;
  for (int t = 0; t < mesh.num_triangles();) {
    if (!monochrome(mesh, labels, t)) {
      ++t;
      continue;
    }
    if (++flips > max_flips) fail(ErrorKind::config, "could not build a labeling with D and N edges on every element");
    // Prefer an edge whose flip does not make the neighbour monochrome.
    const auto& edges = mesh.triangle_edges(t);
    int chosen = edges[0];
    for (int e : edges) {
      const Edge& edge = mesh.edges()[e];
      if (edge.boundary()) {
        chosen = e;
        break;
      }
      const int other = edge.left == t ? *edge.right : edge.left;
      labels[e] = flipped(labels[e]);
      const bool ok = !monochrome(mesh, labels, other);
      labels[e] = flipped(labels[e]);
      if (ok) {
        chosen = e;
        break;
      }
    }
    labels[chosen] = flipped(labels[chosen]);
    // a flip may break an earlier neighbour; rescan from the start
    t = 0;
  }
}

EdgeLabeling make_labeling(const Mesh& mesh, const MethodConfig& config) {
  EdgeLabeling l;
  const int ne = mesh.num_edges();
  if (config.method == Method::dirichlet) {
    l.labels.assign(ne, EdgeLabel::D);
    return l;
  }
  if (config.method == Method::neumann) {
    l.labels.assign(ne, EdgeLabel::N);
    return l;
  }
  switch (config.labeling) {
    case LabelingRule::all_d: l.labels.assign(ne, EdgeLabel::D); return l;
    case LabelingRule::all_n: l.labels.assign(ne, EdgeLabel::N); return l;
    case LabelingRule::parity:
      for (int e = 0; e < ne; ++e) l.labels.push_back(e % 2 == 0 ? EdgeLabel::D : EdgeLabel::N);
      break;
    case LabelingRule::seeded: {
      std::mt19937_64 rng(config.seed);
      for (int e = 0; e < ne; ++e) l.labels.push_back((rng() >> 63) ? EdgeLabel::N : EdgeLabel::D);
      break;
    }
  }
  repair_labeling(mesh, l);
  return l;
}

Discretization::Discretization(const Mesh& mesh, const MethodConfig& config)
    : mesh_(&mesh), config_(config) {
  config_.validate();
  labeling_ = make_labeling(mesh, config_);
  init();
}

Discretization::Discretization(const Mesh& mesh, const MethodConfig& config, EdgeLabeling labeling)
    : mesh_(&mesh), config_(config), labeling_(std::move(labeling)) {
  config_.validate();
  if (static_cast<int>(labeling_.labels.size()) != mesh.num_edges()) {
    fail(ErrorKind::config, "labeling does not cover every edge");
  }
  init();
}

void Discretization::init() {
  fe_ = FiniteElement(config_.k, config_.k_w, config_.effective_quadrature_degree());
  tau_.resize(mesh_->num_edges());
  for (int e = 0; e < mesh_->num_edges(); ++e) {
    tau_[e] = config_.tau_rule == TauRule::constant ? config_.tau : config_.tau / mesh_->edges()[e].length;
    if (!(tau_[e] > 0.0)) {
      fail(ErrorKind::numerical, "stabilization " + std::to_string(tau_[e]) + " on edge " + std::to_string(e) +
                                     " is not positive: local problems are not coercive");
    }
  }
  elements_.resize(mesh_->num_triangles());
  parallel_for(mesh_->num_triangles(), config_.jobs,
               [&](int t) { elements_[t] = make_element_data(*mesh_, t, fe_); });
}

bool Discretization::deflated(int t) const {
  const auto& e = mesh_->triangle_edges(t);
  return label(e[0]) == EdgeLabel::N && label(e[1]) == EdgeLabel::N && label(e[2]) == EdgeLabel::N;
}

bool Discretization::has_unknown(int edge) const {
  return label(edge) == EdgeLabel::N || !mesh_->edges()[edge].boundary();
}

ElementBlocks element_blocks(const Discretization& disc, int t, const ScalarField& f) {
  const ElementData& el = disc.element(t);
  const int nvs = el.dim_vs(), nv = 2 * nvs, nw = el.dim_w(), nm = el.dim_m();
  const int ni = nv + nw;
  const bool ls = disc.config().stabilization == Stabilization::ls;

  ElementBlocks blk;
  blk.a = Eigen::MatrixXd::Zero(ni, ni);
  blk.b = Eigen::MatrixXd::Zero(ni, 3 * nm);
  blk.c = Eigen::MatrixXd::Zero(3 * nm, ni);
  blk.d = Eigen::MatrixXd::Zero(3 * nm, 3 * nm);
  blk.f = Eigen::VectorXd::Zero(ni);

  const auto W = el.weights.asDiagonal();
  const Eigen::MatrixXd mass = el.phi_v.transpose() * W * el.phi_v;
  // (q, v)
  blk.a.block(0, 0, nvs, nvs) = mass;
  blk.a.block(nvs, nvs, nvs, nvs) = mass;
  // -(u, div v)
  blk.a.block(0, nv, nvs, nw) = -el.grad_v[0].transpose() * W * el.phi_w;
  blk.a.block(nvs, nv, nvs, nw) = -el.grad_v[1].transpose() * W * el.phi_w;
  // (q, grad w), row of the negated balance equation
  blk.a.block(nv, 0, nw, nvs) = el.grad_w[0].transpose() * W * el.phi_v;
  blk.a.block(nv, nvs, nw, nvs) = el.grad_w[1].transpose() * W * el.phi_v;

  Eigen::VectorXd fq(el.points.size());
  for (std::size_t q = 0; q < el.points.size(); ++q) fq[q] = f ? f(el.points[q]) : 0.0;
  blk.f.tail(nw) = -el.phi_w.transpose() * W * fq;

  for (int i = 0; i < 3; ++i) {
    const auto& s = el.sides[i];
    const auto We = s.weights.asDiagonal();
    Eigen::MatrixXd vn(s.points.size(), nv);  // v.n at edge points
    vn << s.normal.x() * s.phi_v, s.normal.y() * s.phi_v;
    const Eigen::MatrixXd vn_psi = vn.transpose() * We * s.psi;    // <v.n, psi>
    const Eigen::MatrixXd w_psi = s.phi_w.transpose() * We * s.psi;  // <w, psi>
    const double tau = disc.tau(s.edge);
    const int col = i * nm;

    if (disc.label(s.edge) == EdgeLabel::D) {
      // q_hat.n = q.n + tau (u - lambda), u -> P_M u for LS
      blk.a.block(nv, 0, nw, nv) -= s.phi_w.transpose() * We * vn;
      blk.a.block(nv, nv, nw, nw) -= ls ? Eigen::MatrixXd(tau * w_psi * w_psi.transpose())
                                        : Eigen::MatrixXd(tau * s.phi_w.transpose() * We * s.phi_w);
      blk.b.block(0, col, nv, nm) = vn_psi;
      blk.b.block(nv, col, nw, nm) = tau * w_psi;
      blk.c.block(col, 0, nm, nv) = -vn_psi.transpose();
      blk.c.block(col, nv, nm, nw) = -tau * w_psi.transpose();
      blk.d.block(col, col, nm, nm) = tau * (s.psi.transpose() * We * s.psi);
    } else {
      // u_hat = u + tau^{-1} (q.n - s sigma), tested only against traces in M(e)
      const double sg = s.sign;
      blk.a.block(0, 0, nv, nv) += (1.0 / tau) * (vn.transpose() * We * vn);
      blk.a.block(0, nv, nv, nw) += vn.transpose() * We * s.phi_w;
      blk.b.block(0, col, nv, nm) = -(sg / tau) * vn_psi;
      blk.b.block(nv, col, nw, nm) = -sg * w_psi;
      blk.c.block(col, 0, nm, nv) = -(sg / tau) * vn_psi.transpose();
      blk.c.block(col, nv, nm, nw) = -sg * w_psi.transpose();
      blk.d.block(col, col, nm, nm) = (1.0 / tau) * (s.psi.transpose() * We * s.psi);
    }
  }
  return blk;
}

namespace {

TraceLayout make_layout(const Discretization& disc, bool deflate) {
  TraceLayout layout;
  const Mesh& mesh = disc.mesh();
  const int nm = disc.dim_m();
  layout.edge_offset.assign(mesh.num_edges(), -1);
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (disc.has_unknown(e)) {
      layout.edge_offset[e] = layout.size;
      layout.size += nm;
    }
  }
  layout.mean_offset.assign(mesh.num_triangles(), -1);
  if (deflate) {
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      if (disc.deflated(t)) layout.mean_offset[t] = layout.size++;
    }
  }
  return layout;
}

Eigen::MatrixXd extended(const ElementBlocks& blk) {
  const Eigen::Index ni = blk.a.rows(), nt = blk.d.rows();
  Eigen::MatrixXd e(ni + nt, ni + nt);
  e << blk.a, blk.b, blk.c, blk.d;
  return e;
}

Eigen::MatrixXd select(const Eigen::MatrixXd& m, const std::vector<int>& rows, const std::vector<int>& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  }
  return out;
}

struct ElementContribution {
  Eigen::MatrixXd s;
  Eigen::VectorXd g;
};

CondensedSystem condense_impl(const Discretization& disc, const ScalarField& f) {
  const Mesh& mesh = disc.mesh();
  const int nt = mesh.num_triangles();
  const int ni = disc.dim_interior();
  const int nm = disc.dim_m();
  const int u0 = disc.dim_v();  // constant mode of u (first W basis function)

  CondensedSystem out;
  out.layout = make_layout(disc, true);
  out.locals.resize(nt);
  std::vector<ElementContribution> parts(nt);
  std::vector<std::string> errors(nt);

  parallel_for(nt, disc.config().jobs, [&](int t) {
    const ElementBlocks blk = element_blocks(disc, t, f);
    const Eigen::MatrixXd e = extended(blk);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(e.rows());
    rhs.head(ni) = blk.f;

    ElementSolver& loc = out.locals[t];
    const bool deflate = disc.deflated(t);
    for (int i = 0; i < ni; ++i) {
      if (!(deflate && i == u0)) loc.interior.push_back(i);
    }
    if (deflate) {
      loc.global_local.push_back(u0);
      loc.global_index.push_back(out.layout.mean_offset[t]);
    }
    for (int i = 0; i < 3; ++i) {
      const int edge = mesh.triangle_edges(t)[i];
      if (out.layout.edge_offset[edge] < 0) continue;
      for (int j = 0; j < nm; ++j) {
        loc.global_local.push_back(ni + i * nm + j);
        loc.global_index.push_back(out.layout.edge_offset[edge] + j);
      }
    }
    const Eigen::MatrixXd a_ii = select(e, loc.interior, loc.interior);
    loc.a_ig = select(e, loc.interior, loc.global_local);
    const Eigen::MatrixXd a_gi = select(e, loc.global_local, loc.interior);
    const Eigen::MatrixXd a_gg = select(e, loc.global_local, loc.global_local);
    loc.f_i.resize(loc.interior.size());
    for (std::size_t i = 0; i < loc.interior.size(); ++i) loc.f_i[i] = rhs[loc.interior[i]];
    Eigen::VectorXd f_g(loc.global_local.size());
    for (std::size_t i = 0; i < loc.global_local.size(); ++i) f_g[i] = rhs[loc.global_local[i]];

    loc.lu.compute(a_ii);
    const double pivot = loc.lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(pivot > 1e-12 * a_ii.cwiseAbs().maxCoeff())) {
      errors[t] = "singular local matrix on element " + std::to_string(t);
      return;
    }
    const Eigen::MatrixXd x_ig = loc.lu.solve(loc.a_ig);
    parts[t].s = a_gg - a_gi * x_ig;
    parts[t].g = f_g - a_gi * loc.lu.solve(loc.f_i);
  });
  for (const auto& err : errors) {
    if (!err.empty()) fail(ErrorKind::numerical, err);
  }

  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(out.layout.size);
  for (int t = 0; t < nt; ++t) {
    const auto& idx = out.locals[t].global_index;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      rhs[idx[i]] += parts[t].g[i];
      for (std::size_t j = 0; j < idx.size(); ++j) triplets.emplace_back(idx[i], idx[j], parts[t].s(i, j));
    }
  }
  out.system.is_sparse = true;
  out.system.sparse.resize(out.layout.size, out.layout.size);
  out.system.sparse.setFromTriplets(triplets.begin(), triplets.end());
  out.system.rhs = std::move(rhs);
  return out;
}

}  // namespace

CondensedSystem condense_dirichlet(const Discretization& disc, const ScalarField& f) {
  if (disc.config().method != Method::dirichlet || !disc.labeling().all(EdgeLabel::D)) {
    fail(ErrorKind::config, "condense_dirichlet requires the Dirichlet-type method");
  }
  CondensedSystem out = condense_impl(disc, f);
  out.system.symmetric = true;
  out.system.definiteness = Definiteness::spd;
  return out;
}

CondensedSystem condense_neumann(const Discretization& disc, const ScalarField& f) {
  if (disc.config().method != Method::neumann || !disc.labeling().all(EdgeLabel::N)) {
    fail(ErrorKind::config, "condense_neumann requires the Neumann-type method");
  }
  CondensedSystem out = condense_impl(disc, f);
  out.system.symmetric = true;
  return out;
}

CondensedSystem condense_mixed(const Discretization& disc, const ScalarField& f) {
  const auto& lab = disc.labeling();
  const bool uniform = lab.all(EdgeLabel::D) || lab.all(EdgeLabel::N);
  if (!uniform && !lab.mixed_everywhere(disc.mesh())) {
    fail(ErrorKind::config, "labeling violation: every element needs at least one D and one N edge");
  }
  CondensedSystem out = condense_impl(disc, f);
  if (lab.all(EdgeLabel::D)) {
    out.system.symmetric = true;
    out.system.definiteness = Definiteness::spd;
  } else if (lab.all(EdgeLabel::N)) {
    out.system.symmetric = true;
  }
  return out;
}

CondensedSystem condense(const Discretization& disc, const ScalarField& f) {
  switch (disc.config().method) {
    case Method::dirichlet: return condense_dirichlet(disc, f);
    case Method::neumann: return condense_neumann(disc, f);
    case Method::mixed: return condense_mixed(disc, f);
  }
  fail(ErrorKind::config, "unknown method");
}

HDGSolution recover_interior(const Discretization& disc, const CondensedSystem& condensed,
                             const Eigen::VectorXd& trace_solution) {
  const Mesh& mesh = disc.mesh();
  const int nt = mesh.num_triangles();
  const int nv = disc.dim_v(), nw = disc.dim_w(), nm = disc.dim_m();
  const int ni = nv + nw;
  HDGSolution sol;
  sol.q.resize(nt);
  sol.u.resize(nt);
  parallel_for(nt, disc.config().jobs, [&](int t) {
    const ElementSolver& loc = condensed.locals[t];
    Eigen::VectorXd tg(loc.global_index.size());
    for (Eigen::Index i = 0; i < tg.size(); ++i) tg[i] = trace_solution[loc.global_index[i]];
    const Eigen::VectorXd xi = loc.lu.solve(loc.f_i - loc.a_ig * tg);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(ni);
    for (std::size_t i = 0; i < loc.interior.size(); ++i) x[loc.interior[i]] = xi[i];
    for (std::size_t i = 0; i < loc.global_local.size(); ++i) {
      if (loc.global_local[i] < ni) x[loc.global_local[i]] = tg[i];
    }
    sol.q[t] = x.head(nv);
    sol.u[t] = x.tail(nw);
  });
  sol.trace.assign(mesh.num_edges(), Eigen::VectorXd::Zero(nm));
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const int off = condensed.layout.edge_offset[e];
    if (off >= 0) sol.trace[e] = trace_solution.segment(off, nm);
  }
  derive_traces(disc, sol);
  return sol;
}

MonolithicSystem assemble_monolithic(const Discretization& disc, const ScalarField& f) {
  const Mesh& mesh = disc.mesh();
  const int nt = mesh.num_triangles();
  const int ni = disc.dim_interior();
  const int nm = disc.dim_m();
  MonolithicSystem out;
  out.layout = make_layout(disc, false);
  out.interior_size = nt * ni;
  const int n = out.interior_size + out.layout.size;

  std::vector<ElementBlocks> blocks(nt);
  parallel_for(nt, disc.config().jobs, [&](int t) { blocks[t] = element_blocks(disc, t, f); });

  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (int t = 0; t < nt; ++t) {
    const ElementBlocks& blk = blocks[t];
    std::vector<int> tr(3 * nm, -1);
    for (int i = 0; i < 3; ++i) {
      const int off = out.layout.edge_offset[mesh.triangle_edges(t)[i]];
      if (off < 0) continue;
      for (int j = 0; j < nm; ++j) tr[i * nm + j] = out.interior_size + off + j;
    }
    const int base = t * ni;
    rhs.segment(base, ni) = blk.f;
    for (int i = 0; i < ni; ++i) {
      for (int j = 0; j < ni; ++j) {
        if (blk.a(i, j) != 0.0) triplets.emplace_back(base + i, base + j, blk.a(i, j));
      }
      for (int j = 0; j < 3 * nm; ++j) {
        if (tr[j] >= 0 && blk.b(i, j) != 0.0) triplets.emplace_back(base + i, tr[j], blk.b(i, j));
      }
    }
    for (int i = 0; i < 3 * nm; ++i) {
      if (tr[i] < 0) continue;
      for (int j = 0; j < ni; ++j) {
        if (blk.c(i, j) != 0.0) triplets.emplace_back(tr[i], base + j, blk.c(i, j));
      }
      for (int j = 0; j < 3 * nm; ++j) {
        if (tr[j] >= 0 && blk.d(i, j) != 0.0) triplets.emplace_back(tr[i], tr[j], blk.d(i, j));
      }
    }
  }
  out.system.is_sparse = true;
  out.system.sparse.resize(n, n);
  out.system.sparse.setFromTriplets(triplets.begin(), triplets.end());
  out.system.rhs = std::move(rhs);
  return out;
}

HDGSolution solve_monolithic(const Discretization& disc, const ScalarField& f) {
  const MonolithicSystem mono = assemble_monolithic(disc, f);
  const Eigen::VectorXd x = solve(mono.system);
  const Mesh& mesh = disc.mesh();
  const int nv = disc.dim_v(), nw = disc.dim_w(), nm = disc.dim_m(), ni = nv + nw;
  HDGSolution sol;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    sol.q.push_back(x.segment(t * ni, nv));
    sol.u.push_back(x.segment(t * ni + nv, nw));
  }
  sol.trace.assign(mesh.num_edges(), Eigen::VectorXd::Zero(nm));
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const int off = mono.layout.edge_offset[e];
    if (off >= 0) sol.trace[e] = x.segment(mono.interior_size + off, nm);
  }
  derive_traces(disc, sol);
  return sol;
}

HDGSolution solve_condensed(const Discretization& disc, const ScalarField& f) {
  const CondensedSystem cs = condense(disc, f);
  const Eigen::VectorXd t = solve(cs.system);
  return recover_interior(disc, cs, t);
}

void derive_traces(const Discretization& disc, HDGSolution& sol) {
  const Mesh& mesh = disc.mesh();
  const int nt = mesh.num_triangles();
  const int nvs = disc.fe().v_basis.dim();
  sol.u_hat.assign(nt, {});
  sol.qn_hat.assign(nt, {});
  for (int t = 0; t < nt; ++t) {
    const ElementData& el = disc.element(t);
    for (int i = 0; i < 3; ++i) {
      const auto& s = el.sides[i];
      const auto We = s.weights.asDiagonal();
      const Eigen::VectorXd qn =
          s.normal.x() * (s.phi_v * sol.q[t].head(nvs)) + s.normal.y() * (s.phi_v * sol.q[t].tail(nvs));
      const Eigen::VectorXd qn_m = s.psi.transpose() * We * qn;  // P_M(q.n)
      const Eigen::VectorXd u_m = s.psi.transpose() * We * (s.phi_w * sol.u[t]);  // P_M u
      const double tau = disc.tau(s.edge);
      const Eigen::VectorXd& lam = sol.trace[s.edge];
      if (disc.label(s.edge) == EdgeLabel::D) {
        sol.u_hat[t][i] = lam;
        sol.qn_hat[t][i] = qn_m + tau * (u_m - lam);
      } else {
        sol.qn_hat[t][i] = s.sign * lam;
        sol.u_hat[t][i] = u_m + (qn_m - s.sign * lam) / tau;
      }
    }
  }
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 1 || n < 2) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = std::min(jobs, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace hdg
