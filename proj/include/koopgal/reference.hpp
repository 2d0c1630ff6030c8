#ifndef KOOPGAL_REFERENCE_HPP
#define KOOPGAL_REFERENCE_HPP

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "basis.hpp"
#include "dynamics.hpp"
#include "error.hpp"
#include "polynomial.hpp"

namespace koopgal {

// Independent numerical oracles: fixed-step RK4 and tensor Gauss-Legendre.

struct ReferenceTrajectory {
  std::vector<double> times;
  Eigen::MatrixXd states; // m x nt
  double step = 0.0;
};

/// Classical RK4 with a fixed internal step. Every requested time is hit
/// exactly; the last sub-step of each interval is shortened as needed.
inline ReferenceTrajectory rk4_integrate(const VectorField &vf, std::span<const double> x0,
                                         std::span<const double> times, double step) {
  const int m = vf.dimension();
  if (static_cast<int>(x0.size()) != m)
    throw DimensionError("initial state dimension mismatch");
  if (!(step > 0.0))
    throw ValidationError("RK4 step must be positive");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1]))
      throw ValidationError("output times must be strictly increasing");

  constexpr double kDivergence = 1e12;
  auto check = [&](const Eigen::VectorXd &x, double t) {
    for (int j = 0; j < m; ++j)
      if (!std::isfinite(x(j)) || std::abs(x(j)) > kDivergence)
        throw NonFiniteError("RK4 state diverged near t = " + std::to_string(t));
  };
  auto f = [&](const Eigen::VectorXd &x) {
    return vf(std::span<const double>(x.data(), static_cast<std::size_t>(m)));
  };

  ReferenceTrajectory out;
  out.times.assign(times.begin(), times.end());
  out.states.resize(m, static_cast<Eigen::Index>(times.size()));
  out.step = step;
  if (times.empty())
    return out;

  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(x0.data(), m);
  check(x, times[0]);
  double t = times[0];
  out.states.col(0) = x;
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double target = times[k];
    // Number of sub-steps is fixed from the interval length so that the
    // landing point is exact rather than accumulated.
    const double span = target - t;
    const long nsub = std::max(1L, static_cast<long>(std::ceil(span / step - 1e-9)));
    for (long s = 0; s < nsub; ++s) {
      const double t_next = (s + 1 == nsub) ? target : t + step;
      const double h = t_next - t;
      const Eigen::VectorXd k1 = f(x);
      const Eigen::VectorXd k2 = f(x + 0.5 * h * k1);
      const Eigen::VectorXd k3 = f(x + 0.5 * h * k2);
      const Eigen::VectorXd k4 = f(x + h * k3);
      x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t = t_next;
      check(x, t);
    }
    out.states.col(static_cast<Eigen::Index>(k)) = x;
  }
  return out;
}

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1,1]; nodes by Newton iteration on P_n.
inline QuadratureRule gauss_legendre_rule(int n) {
  if (n < 1)
    throw ValidationError("quadrature needs at least one node");
  constexpr double kTol = 1e-14;
  constexpr int kMaxIter = 100;
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Chebyshev-like initial guess for the i-th largest root.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < kMaxIter; ++it) {
      const double p = legendre_value(n, x);
      const double pm1 = legendre_value(n - 1, x);
      dp = n * (x * p - pm1) / (x * x - 1.0);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < kTol)
        break;
    }
    const double p = legendre_value(n, x);
    const double pm1 = legendre_value(n - 1, x);
    dp = n * (x * p - pm1) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1)
    rule.nodes[n / 2] = 0.0;
  return rule;
}

/// Tensor-product Gauss-Legendre approximation of the integral of a*b over
/// [-1,1]^m. Exact to roundoff when nodes_per_dim >= ceil((deg a + deg b + 1)/2).
inline double gauss_legendre_inner_product(const Polynomial &a, const Polynomial &b,
                                           int nodes_per_dim) {
  if (a.dimension() != b.dimension())
    throw DimensionError("polynomial dimension mismatch");
  const int needed = (a.degree() + b.degree() + 2) / 2;
  if (nodes_per_dim < needed)
    throw ValidationError("quadrature needs " + std::to_string(needed) +
                          " nodes per dimension, got " + std::to_string(nodes_per_dim));
  const int m = a.dimension();
  const auto rule = gauss_legendre_rule(nodes_per_dim);
  std::vector<int> idx(m, 0);
  std::vector<double> x(m);
  double sum = 0.0;
  while (true) {
    double w = 1.0;
    for (int k = 0; k < m; ++k) {
      x[k] = rule.nodes[idx[k]];
      w *= rule.weights[idx[k]];
    }
    sum += w * evaluate(a, x) * evaluate(b, x);
    int k = 0;
    while (k < m && ++idx[k] == nodes_per_dim)
      idx[k++] = 0;
    if (k == m)
      break;
  }
  return sum;
}

} // namespace koopgal

#endif // KOOPGAL_REFERENCE_HPP
