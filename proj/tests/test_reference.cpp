#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include <koopgal/basis.hpp>
#include <koopgal/reference.hpp>
#include <koopgal/validate.hpp>

using namespace koopgal;

TEST(Rk4, ZeroFieldIsConstant) {
  const VectorField vf({Polynomial(2), Polynomial(2)});
  const std::vector<double> x0{0.3, -0.7};
  const std::vector<double> times{0.0, 0.5, 2.0};
  const auto r = rk4_integrate(vf, x0, times, 0.1);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(r.states(0, k), 0.3);
    EXPECT_EQ(r.states(1, k), -0.7);
  }
  EXPECT_EQ(r.times, times);
}

TEST(Rk4, HarmonicOscillatorCosine) {
  const VectorField vf = duffing_vector_field(1, 1, 1, 0);
  const std::vector<double> x0{1.0, 0.0};
  const std::vector<double> times{0.0, 10.0};
  const auto r = rk4_integrate(vf, x0, times, 1e-3);
  EXPECT_NEAR(r.states(0, 1), std::cos(10.0), 1e-9);
  EXPECT_NEAR(r.states(1, 1), -std::sin(10.0), 1e-9);
}

TEST(Rk4, ExponentialDecay) {
  const VectorField vf({Polynomial::variable(1, 0, -1.0)});
  const std::vector<double> x0{1.0};
  const std::vector<double> times{0.0, 1.0};
  const auto r = rk4_integrate(vf, x0, times, 1e-3);
  EXPECT_NEAR(r.states(0, 1), std::exp(-1.0), 1e-10);
}

TEST(Rk4, LandsOnNonAlignedTimes) {
  const VectorField vf({Polynomial::variable(1, 0, -1.0)});
  const std::vector<double> x0{1.0};
  const std::vector<double> times{0.0, 0.0137, 0.5, 0.77777};
  const auto r = rk4_integrate(vf, x0, times, 1e-2);
  for (std::size_t k = 0; k < times.size(); ++k)
    EXPECT_NEAR(r.states(0, static_cast<Eigen::Index>(k)), std::exp(-times[k]), 1e-9);
}

TEST(Rk4, FourthOrderConvergence) {
  const auto e = checks::rk4_harmonic_errors({1e-2, 5e-3, 2.5e-3}, 10.0);
  EXPECT_GE(e[0] / e[1], 12.0);
  EXPECT_GE(e[1] / e[2], 12.0);
}

TEST(Rk4, DivergenceReported) {
  // dx/dt = x^2 blows up at t = 1 for x0 = 1.
  const VectorField vf({canonicalize({{1.0, {2}}}, 1)});
  const std::vector<double> x0{1.0};
  const std::vector<double> times{0.0, 2.0};
  EXPECT_THROW(rk4_integrate(vf, x0, times, 1e-3), NonFiniteError);
}

TEST(Rk4, Preconditions) {
  const VectorField vf = duffing_vector_field(1, 1, 1, 0);
  const std::vector<double> x0{1.0, 0.0};
  const std::vector<double> bad_times{0.0, 1.0, 1.0};
  EXPECT_THROW(rk4_integrate(vf, x0, bad_times, 1e-3), ValidationError);
  const std::vector<double> times{0.0, 1.0};
  EXPECT_THROW(rk4_integrate(vf, x0, times, 0.0), ValidationError);
  const std::vector<double> x1{1.0};
  EXPECT_THROW(rk4_integrate(vf, x1, times, 1e-3), DimensionError);
}

TEST(GaussLegendre, NodesAndWeights) {
  for (int n = 1; n <= 20; ++n) {
    const auto rule = gauss_legendre_rule(n);
    const double wsum = std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0);
    EXPECT_NEAR(wsum, 2.0, 1e-13) << n;
    for (int i = 0; i < n; ++i) {
      EXPECT_NEAR(rule.nodes[i], -rule.nodes[n - 1 - i], 1e-15);
      EXPECT_NEAR(legendre_value(n, rule.nodes[i]), 0.0, 1e-13);
      if (i > 0) {
        EXPECT_LT(rule.nodes[i - 1], rule.nodes[i]);
      }
    }
  }
}

TEST(GaussLegendre, InnerProductExamples) {
  const Polynomial one = Polynomial::constant(2, 1.0);
  EXPECT_NEAR(gauss_legendre_inner_product(one, one, 1), 4.0, 1e-14);
  const Polynomial q = Polynomial::variable(2, 0);
  EXPECT_NEAR(gauss_legendre_inner_product(q, q, 2), 4.0 / 3.0, 1e-13);
  const BasisSet b = make_basis(3, 2);
  EXPECT_NEAR(gauss_legendre_inner_product(b.function(3), b.function(3), 3), 1.0, 1e-12);
}

TEST(GaussLegendre, InsufficientNodes) {
  const Polynomial q = Polynomial::variable(2, 0);
  EXPECT_THROW(gauss_legendre_inner_product(q, q, 1), ValidationError);
}
