#include <doctest.h>

#include <cmath>

#include "hdg/error.hpp"
#include "hdg/verify.hpp"
#include "oracles.hpp"

using hdg::Point;

TEST_SUITE("verify") {

TEST_CASE("manufactured solutions are consistent") {
  const Point pts[] = {Point(0.3, 0.7), Point(0.81, 0.12), Point(0.5, 0.5)};
  for (const char* id : {"sine", "patch", "patch-6", "zero"}) {
    const hdg::ManufacturedSolution s = hdg::manufactured_solution(id);
    for (const Point& p : pts) {
      // q = -grad u
      const Eigen::Vector2d g = oracle::fd_gradient(s.u, p);
      CHECK(s.q(p).x() == doctest::Approx(-g.x()).epsilon(1e-7));
      CHECK(s.q(p).y() == doctest::Approx(-g.y()).epsilon(1e-7));
      // f = div q
      auto qx = [&](const Eigen::Vector2d& x) { return s.q(x).x(); };
      auto qy = [&](const Eigen::Vector2d& x) { return s.q(x).y(); };
      const double div = oracle::fd_gradient(qx, p).x() + oracle::fd_gradient(qy, p).y();
      CHECK(s.f(p) == doctest::Approx(div).epsilon(1e-6));
    }
    // homogeneous boundary values
    for (double t : {0.0, 0.25, 0.6, 1.0}) {
      CHECK(std::abs(s.u(Point(t, 0.0))) < 1e-15);
      CHECK(std::abs(s.u(Point(0.0, t))) < 1e-15);
      CHECK(std::abs(s.u(Point(t, 1.0))) < 1e-15);
      CHECK(std::abs(s.u(Point(1.0, t))) < 1e-15);
    }
  }
  CHECK_THROWS_AS(hdg::manufactured_solution("nope"), hdg::Error);
  CHECK_THROWS_AS(hdg::manufactured_solution("patch-3"), hdg::Error);
  CHECK_THROWS_AS(hdg::manufactured_solution("patch-x"), hdg::Error);
}

TEST_CASE("experimental orders") {
  const auto o = hdg::eoc({1.0, 0.25, 0.0625}, {0.5, 0.25, 0.125});
  REQUIRE(o.size() == 3);
  CHECK_FALSE(o[0]);
  CHECK(*o[1] == doctest::Approx(2.0));
  CHECK(*o[2] == doctest::Approx(2.0));
  const auto z = hdg::eoc({1.0, 0.0}, {0.5, 0.25});
  CHECK_FALSE(z[1]);
  CHECK(hdg::eoc({}, {}).empty());
}

TEST_CASE("error norms of the zero solution are the exact-solution norms") {
  const hdg::ManufacturedSolution sine = hdg::manufactured_solution("sine");
  const hdg::Mesh mesh = hdg::build_structured_mesh(4, hdg::MeshPattern::right_split);
  hdg::MethodConfig c;
  c.k = 1;
  const hdg::Discretization d(mesh, c);
  const hdg::HDGSolution zero_sol = hdg::solve_condensed(d, [](const Point&) { return 0.0; });
  const hdg::ErrorReport r = hdg::evaluate(d, zero_sol, sine);
  // ||sin sin|| = 1/2, ||grad sin sin|| = pi / sqrt 2
  CHECK(r.err_u == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(r.err_q == doctest::Approx(M_PI / std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("identity residuals are at roundoff for every method and stabilization") {
  const hdg::ManufacturedSolution s = hdg::manufactured_solution("sine");
  const hdg::Mesh mesh = hdg::build_structured_mesh(3, hdg::MeshPattern::criss_cross);
  for (hdg::Method m : {hdg::Method::dirichlet, hdg::Method::neumann, hdg::Method::mixed}) {
    for (bool ls : {false, true}) {
      hdg::MethodConfig c;
      c.method = m;
      c.k = 2;
      c.k_w = ls ? 3 : 2;
      c.stabilization = ls ? hdg::Stabilization::ls : hdg::Stabilization::standard;
      c.tau_rule = ls ? hdg::TauRule::inverse_h : hdg::TauRule::constant;
      const hdg::Discretization d(mesh, c);
      const hdg::ErrorReport r = hdg::evaluate(d, hdg::solve_condensed(d, s.f), s);
      CHECK(r.energy_resid <= 1e-10);
      CHECK(r.flux_resid <= 1e-10);
      CHECK(r.transmission_resid <= 1e-10);
      CHECK(r.err_piwu.has_value() == !ls);
    }
  }
}

TEST_CASE("residuals detect a perturbed solution") {
  const hdg::ManufacturedSolution s = hdg::manufactured_solution("sine");
  const hdg::Mesh mesh = hdg::build_structured_mesh(2, hdg::MeshPattern::right_split);
  hdg::MethodConfig c;
  c.k = 1;
  const hdg::Discretization d(mesh, c);
  hdg::HDGSolution sol = hdg::solve_condensed(d, s.f);
  sol.q[0][0] += 1e-3;
  CHECK(hdg::energy_identity_residual(d, sol, s.f) > 1e-8);
  CHECK(hdg::flux_identity_residual(d, sol) > 1e-8);
  hdg::HDGSolution sol2 = hdg::solve_condensed(d, s.f);
  sol2.u_hat[0][0][0] += 1e-3;
  CHECK(hdg::transmission_residual(d, sol2) > 1e-8);
}

TEST_CASE("projection corollary on the reference problem") {
  const hdg::ManufacturedSolution s = hdg::manufactured_solution("sine");
  for (int n : {2, 4, 8}) {
    const hdg::Mesh mesh = hdg::build_structured_mesh(n, hdg::MeshPattern::right_split);
    hdg::MethodConfig c;
    c.k = 2;
    c.k_w = 2;
    const hdg::Discretization d(mesh, c);
    const hdg::ErrorReport r = hdg::evaluate(d, hdg::solve_condensed(d, s.f), s);
    REQUIRE(r.err_pivq);
    CHECK(r.err_q <= 2.0 * *r.err_pivq + 1e-12);
  }
}

}
