#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "hdg/fem_core.hpp"
#include "hdg/mesh.hpp"
#include "hdg/solver.hpp"

namespace hdg {

enum class Method { dirichlet, neumann, mixed };
enum class Stabilization { standard, ls };
enum class TauRule { constant, inverse_h };
enum class LabelingRule { parity, seeded, all_d, all_n };

/// D: the scalar trace u_hat is the single-valued unknown on the edge.
/// N: the normal flux q_hat.n (global orientation) is the unknown.
enum class EdgeLabel : std::uint8_t { D, N };

struct MethodConfig {
  Method method = Method::dirichlet;
  int k = 1;    ///< degree of V, N and M
  int k_w = 1;  ///< degree of W, k or k+1
  Stabilization stabilization = Stabilization::standard;
  TauRule tau_rule = TauRule::constant;
  double tau = 1.0;  ///< tau, or the constant c in tau = c / h_e
  LabelingRule labeling = LabelingRule::parity;
  std::uint64_t seed = 0;
  int quadrature_degree = -1;  ///< -1 selects 2 max(k, k_w) + 2
  int jobs = 1;

  int effective_quadrature_degree() const {
    return quadrature_degree >= 0 ? quadrature_degree : default_quadrature_degree(k, k_w);
  }
  /// Throws hdg::Error(config).
  void validate() const;
};

std::string to_string(Method m);
std::string to_string(Stabilization s);

struct EdgeLabeling {
  std::vector<EdgeLabel> labels;

  bool all(EdgeLabel l) const;
  /// Every element has at least one D and one N edge.
  bool mixed_everywhere(const Mesh& mesh) const;
};

/// Labels every edge. Dirichlet and Neumann methods get uniform labels; the
/// mixed method starts from the selected rule and is then repaired until each
/// element carries both labels (deterministic for a given mesh and seed).
EdgeLabeling make_labeling(const Mesh& mesh, const MethodConfig& config);

/// Flips labels until every element has both a D and an N edge.
void repair_labeling(const Mesh& mesh, EdgeLabeling& labeling);

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Point(const Point&)>;

/// Mesh, configuration and all per-element tabulations for one solve.
class Discretization {
 public:
  Discretization(const Mesh& mesh, const MethodConfig& config);
  Discretization(const Mesh& mesh, const MethodConfig& config, EdgeLabeling labeling);

  const Mesh& mesh() const { return *mesh_; }
  const MethodConfig& config() const { return config_; }
  const FiniteElement& fe() const { return fe_; }
  const ElementData& element(int t) const { return elements_[t]; }
  const EdgeLabeling& labeling() const { return labeling_; }
  EdgeLabel label(int edge) const { return labeling_.labels[edge]; }
  double tau(int edge) const { return tau_[edge]; }

  int dim_v() const { return 2 * fe_.v_basis.dim(); }
  int dim_w() const { return fe_.w_basis.dim(); }
  int dim_m() const { return fe_.m_basis.dim(); }
  int dim_interior() const { return dim_v() + dim_w(); }

  /// Element whose edges are all N: its constant mode of u is carried globally.
  bool deflated(int t) const;
  /// Edge carries a global trace unknown (everything except boundary D edges).
  bool has_unknown(int edge) const;

 private:
  void init();

  const Mesh* mesh_;
  MethodConfig config_;
  FiniteElement fe_;
  EdgeLabeling labeling_;
  std::vector<double> tau_;
  std::vector<ElementData> elements_;
};

/// Element contribution to the unified system.
///
/// Interior unknowns are ordered (q_x, q_y, u), trace unknowns per local side
/// (dim M each, in the edge's canonical parameterization). Rows are the flux
/// equation tested with v, the negated balance equation tested with w, and
/// the element's share of the transmission rows on each side:
///   D side:  -<q_hat.n, mu>           N side:  -s <u_hat, rho>
/// where the complementary trace is eliminated through the numerical flux.
struct ElementBlocks {
  Eigen::MatrixXd a;  ///< interior rows x interior cols
  Eigen::MatrixXd b;  ///< interior rows x trace cols
  Eigen::MatrixXd c;  ///< transmission rows x interior cols
  Eigen::MatrixXd d;  ///< transmission rows x trace cols
  Eigen::VectorXd f;  ///< interior load
};

ElementBlocks element_blocks(const Discretization& disc, int t, const ScalarField& f);

/// Global numbering of trace unknowns (and, for deflated elements, of the
/// element constants).
struct TraceLayout {
  std::vector<int> edge_offset;  ///< -1 for boundary D edges
  std::vector<int> mean_offset;  ///< -1 unless the element is deflated
  int size = 0;
};

struct ElementSolver {
  std::vector<int> interior;  ///< kept interior columns / rows (local indices)
  std::vector<int> global_local;  ///< local extended indices of the global dofs
  std::vector<int> global_index;  ///< their global numbers
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  Eigen::MatrixXd a_ig;  ///< interior rows x global dofs
  Eigen::VectorXd f_i;
};

struct CondensedSystem {
  LinearSystem system;
  TraceLayout layout;
  std::vector<ElementSolver> locals;
};

CondensedSystem condense_dirichlet(const Discretization& disc, const ScalarField& f);
CondensedSystem condense_neumann(const Discretization& disc, const ScalarField& f);
CondensedSystem condense_mixed(const Discretization& disc, const ScalarField& f);
/// Dispatches on the configured method.
CondensedSystem condense(const Discretization& disc, const ScalarField& f);

struct HDGSolution {
  std::vector<Eigen::VectorXd> q;      ///< per element, V coefficients
  std::vector<Eigen::VectorXd> u;      ///< per element, W coefficients
  std::vector<Eigen::VectorXd> trace;  ///< per edge, the single-valued unknown (zero where absent)
  /// Element-side traces in M(e): u_hat and the outward q_hat.n.
  std::vector<std::array<Eigen::VectorXd, 3>> u_hat;
  std::vector<std::array<Eigen::VectorXd, 3>> qn_hat;
};

HDGSolution recover_interior(const Discretization& disc, const CondensedSystem& condensed,
                             const Eigen::VectorXd& trace_solution);

struct MonolithicSystem {
  LinearSystem system;
  TraceLayout layout;  ///< trace offsets relative to the start of the trace block
  int interior_size = 0;
};

MonolithicSystem assemble_monolithic(const Discretization& disc, const ScalarField& f);
HDGSolution solve_monolithic(const Discretization& disc, const ScalarField& f);

/// Static condensation, global solve, recovery.
HDGSolution solve_condensed(const Discretization& disc, const ScalarField& f);

/// Fill in the element-side traces from interior and trace coefficients.
void derive_traces(const Discretization& disc, HDGSolution& sol);

/// Calls fn(i) for i in [0, n), split across `jobs` threads. Each index is
/// processed exactly once; callers write to disjoint slots only.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

}  // namespace hdg
