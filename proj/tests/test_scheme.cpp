#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "hdg/error.hpp"
#include "hdg/scheme.hpp"
#include "hdg/verify.hpp"

using hdg::Method;

namespace {

hdg::MethodConfig config(Method m, int k) {
  hdg::MethodConfig c;
  c.method = m;
  c.k = k;
  c.k_w = k;
  return c;
}

hdg::Mesh square(int n) { return hdg::build_structured_mesh(n, hdg::MeshPattern::right_split); }

const hdg::ScalarField zero = [](const hdg::Point&) { return 0.0; };

}  // namespace

TEST_SUITE("scheme") {

TEST_CASE("configuration invariants") {
  hdg::MethodConfig c = config(Method::dirichlet, 2);
  CHECK_NOTHROW(c.validate());
  c.k_w = 3;
  CHECK_THROWS_AS(c.validate(), hdg::Error);  // k+1 needs LS
  c.stabilization = hdg::Stabilization::ls;
  CHECK_NOTHROW(c.validate());
  c.k_w = 4;
  CHECK_THROWS_AS(c.validate(), hdg::Error);
  c = config(Method::dirichlet, -1);
  CHECK_THROWS_AS(c.validate(), hdg::Error);
  c = config(Method::dirichlet, 1);
  c.tau = 0.0;
  CHECK_THROWS_AS(c.validate(), hdg::Error);
  c = config(Method::dirichlet, 1);
  c.quadrature_degree = 2;
  CHECK_THROWS_AS(c.validate(), hdg::Error);
}

TEST_CASE("global system sizes on the two-triangle mesh") {
  const hdg::Mesh mesh = square(1);
  const hdg::Discretization dd(mesh, config(Method::dirichlet, 1));
  CHECK(hdg::condense(dd, zero).system.size() == 2);  // one interior edge, P1 traces
  const hdg::Discretization dn(mesh, config(Method::neumann, 1));
  CHECK(hdg::condense(dn, zero).system.size() == 5 * 2 + 2);  // all edges plus two element means
  CHECK(dn.deflated(0));
  CHECK_FALSE(dd.deflated(0));
}

TEST_CASE("mixed system counts D interior edges, N edges and no means") {
  const hdg::Mesh mesh = square(3);
  const hdg::Discretization d(mesh, config(Method::mixed, 2));
  int expected = 0;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (d.label(e) == hdg::EdgeLabel::N || !mesh.edges()[e].boundary()) expected += 3;
  }
  for (int t = 0; t < mesh.num_triangles(); ++t) CHECK_FALSE(d.deflated(t));
  CHECK(hdg::condense(d, zero).system.size() == expected);
}

TEST_CASE("Dirichlet condensed matrix is SPD, Neumann is symmetric") {
  const hdg::Mesh mesh = square(2);
  for (int k = 0; k <= 3; ++k) {
    const hdg::Discretization dd(mesh, config(Method::dirichlet, k));
    const hdg::CondensedSystem sd = hdg::condense(dd, zero);
    CHECK(sd.system.asymmetry() < 1e-12);
    const Eigen::MatrixXd a(sd.system.sparse);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (a + a.transpose())).eigenvalues().minCoeff() > 0.0);

    const hdg::Discretization dn(mesh, config(Method::neumann, k));
    CHECK(hdg::condense(dn, zero).system.asymmetry() < 1e-12);
  }
}

TEST_CASE("condensed and monolithic solutions agree") {
  const auto exact = hdg::manufactured_solution("sine");
  for (Method m : {Method::dirichlet, Method::neumann, Method::mixed}) {
    for (int k = 0; k <= 3; ++k) {
      for (int n : {1, 2, 3}) {
        const hdg::Mesh mesh = square(n);
        const hdg::Discretization d(mesh, config(m, k));
        const double diff = hdg::relative_difference(hdg::solve_condensed(d, exact.f), hdg::solve_monolithic(d, exact.f));
        CHECK(diff < 1e-10);
      }
    }
  }
}

TEST_CASE("the three hybridizations give the same discrete solution") {
  const auto exact = hdg::manufactured_solution("sine");
  const hdg::Mesh mesh = square(4);
  for (int k = 1; k <= 2; ++k) {
    const hdg::Discretization dd(mesh, config(Method::dirichlet, k));
    const hdg::HDGSolution ref = hdg::solve_condensed(dd, exact.f);
    for (Method m : {Method::neumann, Method::mixed}) {
      const hdg::Discretization d(mesh, config(m, k));
      CHECK(hdg::relative_difference(ref, hdg::solve_condensed(d, exact.f)) < 1e-10);
    }
  }
}

TEST_CASE("zero data gives the zero solution") {
  const hdg::Mesh mesh = square(3);
  for (Method m : {Method::dirichlet, Method::neumann, Method::mixed}) {
    for (int k = 0; k <= 3; ++k) {
      const hdg::Discretization d(mesh, config(m, k));
      CHECK(hdg::max_coefficient(hdg::solve_condensed(d, zero)) <= 1e-11);
    }
  }
}

TEST_CASE("LS coincides with the standard flux when W and M have equal degree") {
  const auto exact = hdg::manufactured_solution("sine");
  const hdg::Mesh mesh = square(3);
  for (Method m : {Method::dirichlet, Method::neumann, Method::mixed}) {
    hdg::MethodConfig c = config(m, 2);
    const hdg::HDGSolution a = hdg::solve_condensed(hdg::Discretization(mesh, c), exact.f);
    c.stabilization = hdg::Stabilization::ls;
    const hdg::HDGSolution b = hdg::solve_condensed(hdg::Discretization(mesh, c), exact.f);
    CHECK(hdg::relative_difference(a, b) < 1e-12);
  }
}

TEST_CASE("polynomial solutions in the discrete spaces are reproduced") {
  const auto exact = hdg::manufactured_solution("patch-4");
  const hdg::Mesh mesh = square(2);
  for (Method m : {Method::dirichlet, Method::neumann, Method::mixed}) {
    const hdg::Discretization d(mesh, config(m, 4));
    const hdg::ErrorReport r = hdg::evaluate(d, hdg::solve_condensed(d, exact.f), exact);
    CHECK(r.err_q < 1e-10);
    CHECK(r.err_u < 1e-10);
    REQUIRE(r.err_piwu);
    CHECK(*r.err_piwu < 1e-10);
  }
}

TEST_CASE("mixed labeling") {
  const hdg::Mesh mesh = square(4);
  hdg::MethodConfig c = config(Method::mixed, 1);
  SUBCASE("parity rule is repaired until every element is mixed") {
    CHECK(hdg::make_labeling(mesh, c).mixed_everywhere(mesh));
  }
  SUBCASE("seeded labels are reproducible") {
    c.labeling = hdg::LabelingRule::seeded;
    c.seed = 42;
    const auto a = hdg::make_labeling(mesh, c);
    CHECK(a.mixed_everywhere(mesh));
    CHECK(a.labels == hdg::make_labeling(mesh, c).labels);
    c.seed = 43;
    CHECK(a.labels != hdg::make_labeling(mesh, c).labels);
  }
  SUBCASE("uniform labels reduce to the single-type methods") {
    c.labeling = hdg::LabelingRule::all_d;
    CHECK(hdg::make_labeling(mesh, c).all(hdg::EdgeLabel::D));
    c.labeling = hdg::LabelingRule::all_n;
    CHECK(hdg::make_labeling(mesh, c).all(hdg::EdgeLabel::N));
  }
  SUBCASE("a monochrome element in a mixed labeling is rejected") {
    hdg::EdgeLabeling lab = hdg::make_labeling(mesh, c);
    for (int e : mesh.triangle_edges(0)) lab.labels[e] = hdg::EdgeLabel::D;
    const hdg::Discretization d(mesh, c, lab);
    CHECK_THROWS_AS(hdg::condense_mixed(d, zero), hdg::Error);
  }
  SUBCASE("repair is deterministic and minimal on a mixed labeling") {
    hdg::EdgeLabeling lab = hdg::make_labeling(mesh, c);
    const auto before = lab.labels;
    hdg::repair_labeling(mesh, lab);
    CHECK(lab.labels == before);
  }
}

TEST_CASE("method-specific condensation entry points check the method") {
  const hdg::Mesh mesh = square(2);
  const hdg::Discretization dn(mesh, config(Method::neumann, 1));
  CHECK_THROWS_AS(hdg::condense_dirichlet(dn, zero), hdg::Error);
  const hdg::Discretization dd(mesh, config(Method::dirichlet, 1));
  CHECK_THROWS_AS(hdg::condense_neumann(dd, zero), hdg::Error);
}

TEST_CASE("non-positive stabilization is a numerical failure") {
  hdg::MethodConfig c = config(Method::dirichlet, 1);
  c.tau = -1.0;
  const hdg::Mesh mesh = square(2);
  try {
    hdg::Discretization d(mesh, c);
    FAIL("expected an error");
  } catch (const hdg::Error& e) {
    CHECK(e.kind() == hdg::ErrorKind::numerical);
  }
}

TEST_CASE("results do not depend on the number of threads") {
  const auto exact = hdg::manufactured_solution("sine");
  const hdg::Mesh mesh = square(6);
  for (Method m : {Method::dirichlet, Method::neumann, Method::mixed}) {
    hdg::MethodConfig c = config(m, 2);
    const hdg::HDGSolution a = hdg::solve_condensed(hdg::Discretization(mesh, c), exact.f);
    c.jobs = 3;
    const hdg::HDGSolution b = hdg::solve_condensed(hdg::Discretization(mesh, c), exact.f);
    CHECK(hdg::relative_difference(a, b) == 0.0);
  }
}

TEST_CASE("parallel_for visits each index once") {
  std::vector<int> hits(97, 0);
  hdg::parallel_for(97, 4, [&](int i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
}

}
