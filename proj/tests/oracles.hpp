// Independent reference computations used by the tests: exact monomial
// integrals, finite differences and exact-arithmetic rank counts.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

namespace oracle {

inline long double factorial(int n) {
  long double r = 1.0L;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

/// Integral of x^a y^b over {x, y >= 0, x + y <= 1}.
inline double triangle_monomial(int a, int b) {
  return static_cast<double>(factorial(a) * factorial(b) / factorial(a + b + 2));
}

/// Central-difference gradient.
inline Eigen::Vector2d fd_gradient(const std::function<double(const Eigen::Vector2d&)>& f, const Eigen::Vector2d& x,
                                   double h = 1e-5) {
  const Eigen::Vector2d ex(h, 0.0), ey(0.0, h);
  return {(f(x + ex) - f(x - ex)) / (2 * h), (f(x + ey) - f(x - ey)) / (2 * h)};
}

/// Index of x^a y^b among monomials of total degree <= k, in any fixed order.
inline int monomial_index(int a, int b) {
  const int d = a + b;
  return d * (d + 1) / 2 + b;
}

inline int dim_p(int k) { return k < 0 ? 0 : (k + 1) * (k + 2) / 2; }

inline double binomial(int n, int j) {
  return static_cast<double>(factorial(n) / (factorial(j) * factorial(n - j)));
}

struct SolenoidalDims {
  int solenoidal = 0;
  int bubbles = 0;
};

/// Dimensions of the divergence-free fields in P_k^2 and of those with zero
/// normal trace on the reference triangle, from integer monomial matrices.
inline SolenoidalDims solenoidal_dims(int k) {
  const int np = dim_p(k);
  const int nv = 2 * np;
  // divergence into P_{k-1}
  Eigen::MatrixXd div = Eigen::MatrixXd::Zero(std::max(1, dim_p(k - 1)), nv);
  // normal traces: bottom (x^a), left (y^b), hypotenuse (t^j), each degree <= k
  Eigen::MatrixXd tr = Eigen::MatrixXd::Zero(3 * (k + 1), nv);
  for (int d = 0; d <= k; ++d) {
    for (int b = 0; b <= d; ++b) {
      const int a = d - b;
      const int i = monomial_index(a, b);
      if (a > 0) div(monomial_index(a - 1, b), i) += a;
      if (b > 0) div(monomial_index(a, b - 1), np + i) += b;
      if (b == 0) tr(a, np + i) -= 1.0;          // -v_y(x, 0)
      if (a == 0) tr((k + 1) + b, i) -= 1.0;     // -v_x(0, y)
      for (int j = 0; j <= b; ++j) {             // (v_x + v_y)(t, 1 - t)
        const double c = binomial(b, j) * ((j % 2) ? -1.0 : 1.0);
        tr(2 * (k + 1) + a + j, i) += c;
        tr(2 * (k + 1) + a + j, np + i) += c;
      }
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu_div(div);
  lu_div.setThreshold(1e-12);
  Eigen::MatrixXd stacked(div.rows() + tr.rows(), nv);
  stacked << div, tr;
  Eigen::FullPivLU<Eigen::MatrixXd> lu_all(stacked);
  lu_all.setThreshold(1e-12);
  return {nv - static_cast<int>(lu_div.rank()), nv - static_cast<int>(lu_all.rank())};
}

}  // namespace oracle
