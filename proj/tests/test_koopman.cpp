#include <cmath>
#include <complex>
#include <random>

#include <gtest/gtest.h>

#include <koopgal/app.hpp>
#include <koopgal/koopman.hpp>
#include <koopgal/reference.hpp>

#include "test_support.hpp"

using namespace koopgal;
using cd = std::complex<double>;

namespace {

const std::vector<std::string> kNames{"q", "p"};

/// <dL_i/dt, L_k> by tensor Gauss-Legendre quadrature, with dL_i/dt
/// evaluated pointwise as sum_j (dL_i/dx_j)(x) f_j(x). Shares no product or
/// integration code with the assembly path.
Eigen::MatrixXd koopman_by_quadrature(const BasisSet &b, const VectorField &vf) {
  const int m = b.dimension();
  const int nodes = b.order() + (b.order() + vf.max_degree() - 1) / 2 + 2;
  const auto rule = gauss_legendre_rule(nodes);
  const int n = b.size();
  std::vector<std::vector<Polynomial>> partials(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      partials[i].push_back(partial_derivative(b.function(i), j));

  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  std::vector<int> idx(m, 0);
  std::vector<double> x(m);
  while (true) {
    double w = 1.0;
    for (int k = 0; k < m; ++k) {
      x[k] = rule.nodes[idx[k]];
      w *= rule.weights[idx[k]];
    }
    const Eigen::VectorXd f = vf(x);
    for (int i = 0; i < n; ++i) {
      double dl = 0.0;
      for (int j = 0; j < m; ++j)
        dl += evaluate(partials[i][j], x) * f(j);
      for (int k = 0; k < n; ++k)
        K(i, k) += w * dl * evaluate(b.function(k), x);
    }
    int k = 0;
    while (k < m && ++idx[k] == nodes)
      idx[k++] = 0;
    if (k == m)
      break;
  }
  return K;
}

/// exp(A t) x0 for a 2x2 matrix via the closed form
/// e^{s t} [cosh(d t) I + sinh(d t)/d (A - s I)], s = tr/2, d^2 = s^2 - det.
Eigen::Vector2d expm2_apply(const Eigen::Matrix2d &A, double t, const Eigen::Vector2d &x0) {
  const double s = A.trace() / 2.0;
  const cd d = std::sqrt(cd(s * s - A.determinant(), 0.0));
  const cd ch = std::cosh(d * t);
  const cd sh_over_d = std::abs(d) < 1e-14 ? cd(t) : std::sinh(d * t) / d;
  const Eigen::Matrix2d B = A - s * Eigen::Matrix2d::Identity();
  Eigen::Vector2d out;
  for (int r = 0; r < 2; ++r) {
    cd v = ch * x0(r);
    for (int c = 0; c < 2; ++c)
      v += sh_over_d * B(r, c) * x0(c);
    out(r) = std::exp(s * t) * v.real();
  }
  return out;
}

Trajectory run(const KoopmanModel &model, const std::vector<double> &x0,
               const std::vector<double> &times) {
  const Eigen::VectorXd h0 = evaluate_basis(model.basis, x0);
  return propagate(model, initial_eigenfunctions(model.eig.inverse, h0), times);
}

} // namespace

TEST(TotalDerivative, ConstantBasisFunction) {
  const BasisSet b = make_basis(3, 2);
  EXPECT_TRUE(total_derivative(b, 0, duffing_vector_field(1, 1, 1, 0.001)).is_zero());
}

TEST(TotalDerivative, HarmonicOscillatorRotatesDegreeOne) {
  const BasisSet b = make_basis(3, 2);
  const Polynomial d = total_derivative(b, 1, duffing_vector_field(1, 1, 1, 0));
  // L1 = sqrt(3/2) sqrt(1/2) q, so dL1/dt = sqrt(3)/2 p = L2.
  EXPECT_TRUE(koopgal::testing::polynomials_close(d, b.function(2), 1e-15));
  EXPECT_NEAR(d.coefficient({0, 1}), std::sqrt(3.0) / 2.0, 1e-15);
}

TEST(TotalDerivative, DuffingCubicTerm) {
  const BasisSet b = make_basis(3, 2);
  const Polynomial d = total_derivative(b, 2, duffing_vector_field(1, 1, 1, 0.001));
  EXPECT_NEAR(d.coefficient({3, 0}), -0.001 * std::sqrt(3.0) / 2.0, 1e-15);
  EXPECT_NEAR(d.coefficient({1, 0}), -std::sqrt(3.0) / 2.0, 1e-15);
}

TEST(TotalDerivative, DimensionMismatch) {
  const BasisSet b = make_basis(2, 3);
  EXPECT_THROW(total_derivative(b, 1, duffing_vector_field(1, 1, 1, 0)), DimensionError);
  EXPECT_THROW(assemble_koopman(b, duffing_vector_field(1, 1, 1, 0)), DimensionError);
}

TEST(AssembleKoopman, ZeroField) {
  const BasisSet b = make_basis(3, 2);
  const VectorField zero({Polynomial(2), Polynomial(2)});
  EXPECT_TRUE(assemble_koopman(b, zero).isZero(0.0));
}

TEST(AssembleKoopman, HarmonicDegreeOneBlock) {
  for (int c = 1; c <= 4; ++c) {
    const Eigen::MatrixXd K = assemble_koopman(make_basis(c, 2), duffing_vector_field(1, 1, 1, 0));
    EXPECT_NEAR(K(1, 1), 0.0, 1e-15);
    EXPECT_NEAR(K(1, 2), 1.0, 1e-15);
    EXPECT_NEAR(K(2, 1), -1.0, 1e-15);
    EXPECT_NEAR(K(2, 2), 0.0, 1e-15);
  }
}

TEST(AssembleKoopman, MatchesQuadratureOracle) {
  const std::vector<VectorField> fields = {
      duffing_vector_field(1, 1, 1, 0.001),
      duffing_vector_field(1, 1, 1, 0),
      VectorField({canonicalize({{0.4, {0, 1}}, {-0.3, {2, 1}}}, 2),
                   canonicalize({{-1.0, {1, 0}}, {0.2, {0, 0}}, {0.5, {1, 2}}}, 2)}),
  };
  for (const auto &vf : fields)
    for (int c = 0; c <= 3; ++c) {
      const BasisSet b = make_basis(c, 2);
      const Eigen::MatrixXd diff = assemble_koopman(b, vf) - koopman_by_quadrature(b, vf);
      EXPECT_LT(diff.cwiseAbs().maxCoeff(), 1e-10) << "c=" << c;
    }
}

TEST(AssembleKoopman, DegreeTriangularForLinearFields) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int m = 2 + trial % 2;
    std::vector<Polynomial> comps;
    for (int j = 0; j < m; ++j) {
      std::vector<Monomial> terms;
      for (int k = 0; k < m; ++k) {
        Exponent e(m, 0);
        e[k] = 1;
        terms.push_back({u(rng), e});
      }
      comps.push_back(canonicalize(terms, m));
    }
    const BasisSet b = make_basis(m == 2 ? 5 : 3, m);
    const Eigen::MatrixXd K = assemble_koopman(b, VectorField(comps));
    for (int i = 0; i < b.size(); ++i)
      for (int k = 0; k < b.size(); ++k)
        if (b.degree(k) > b.degree(i)) {
          EXPECT_LE(std::abs(K(i, k)), 1e-12);
        }
  }
}

TEST(ObservableMatrix, ConstantAndIdentity) {
  const BasisSet b = make_basis(3, 2);
  const ObservableSet obs = {
      {"one", Polynomial::constant(2, 1.0)},
      {"q", Polynomial::variable(2, 0)},
      {"p", Polynomial::variable(2, 1)},
  };
  const Eigen::MatrixXd H = observable_matrix(b, obs);
  // <1, 1/2> over [-1,1]^2
  EXPECT_NEAR(H(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(H.row(0).tail(9).cwiseAbs().maxCoeff(), 0.0, 0.0);
  // <q, sqrt(3)/2 q> = sqrt(3)/2 * 4/3
  EXPECT_NEAR(H(1, 1), 2.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(H(1, 1), 1.1547, 5e-5);
  EXPECT_EQ(H(1, 1), H(2, 2));
  for (int k = 0; k < 10; ++k) {
    if (k != 1) {
      EXPECT_NEAR(H(1, k), 0.0, 1e-15);
    }
    if (k != 2) {
      EXPECT_NEAR(H(2, k), 0.0, 1e-15);
    }
  }
}

TEST(ObservableMatrix, ReconstructionIsExactUpToOrder) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 1 + trial % 3;
    const int c = 4;
    const BasisSet b = make_basis(c, m);
    const Polynomial g = koopgal::testing::random_polynomial(rng, m, c, 8);
    const Eigen::MatrixXd H = observable_matrix(b, {{"g", g}});
    Polynomial rebuilt(m);
    for (int k = 0; k < b.size(); ++k)
      rebuilt = rebuilt + scale(b.function(k), H(0, k));
    EXPECT_TRUE(koopgal::testing::polynomials_close(rebuilt, g, 1e-12));
  }
}

TEST(ObservableMatrix, DegreeOverflowRejected) {
  const BasisSet b = make_basis(2, 2);
  EXPECT_THROW(observable_matrix(b, {{"q3", canonicalize({{1.0, {3, 0}}}, 2)}}),
               ValidationError);
}

TEST(Eigendecompose, Diagonal) {
  const Eigen::MatrixXd K = Eigen::Vector3d(1, 2, 3).asDiagonal();
  const auto e = eigendecompose(K);
  EXPECT_NEAR(std::abs(e.values(0) - cd(3)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(e.values(1) - cd(2)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(e.values(2) - cd(1)), 0.0, 1e-14);
  // Columns are the (sorted) unit vectors.
  const Eigen::MatrixXcd expected =
      (Eigen::MatrixXcd(3, 3) << 0, 0, 1, 0, 1, 0, 1, 0, 0).finished();
  EXPECT_LT((e.vectors - expected).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NEAR(e.condition, 1.0, 1e-14);
}

TEST(Eigendecompose, RotationBlock) {
  Eigen::MatrixXd K(2, 2);
  K << 0, 1, -1, 0;
  const auto e = eigendecompose(K);
  EXPECT_NEAR(std::abs(e.values(0) - cd(0, 1)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(e.values(1) - cd(0, -1)), 0.0, 1e-14);
  EXPECT_LT(e.residual, 1e-14);
}

TEST(Eigendecompose, NormalizationConvention) {
  std::mt19937_64 rng(33);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(6, 6);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      K(i, j) = u(rng);
  const auto e = eigendecompose(K);
  for (int c = 0; c < 6; ++c) {
    EXPECT_NEAR(e.vectors.col(c).norm(), 1.0, 1e-14);
    for (int r = 0; r < 6; ++r)
      if (std::abs(e.vectors(r, c)) > 1e-12) {
        EXPECT_EQ(e.vectors(r, c).imag(), 0.0);
        EXPECT_GT(e.vectors(r, c).real(), 0.0);
        break;
      }
  }
  for (int c = 1; c < 6; ++c) {
    const auto a = e.values(c - 1), b = e.values(c);
    EXPECT_TRUE(a.real() > b.real() || (a.real() == b.real() && a.imag() >= b.imag()));
  }
}

TEST(Eigendecompose, HarmonicSpectrumIsImaginaryIntegers) {
  const Eigen::MatrixXd K = assemble_koopman(make_basis(3, 2), duffing_vector_field(1, 1, 1, 0));
  const auto e = eigendecompose(K);
  ASSERT_EQ(e.values.size(), 10);
  for (int i = 0; i < 10; ++i) {
    EXPECT_NEAR(e.values(i).real(), 0.0, 1e-8);
    const double im = e.values(i).imag();
    EXPECT_NEAR(im, std::round(im), 1e-8);
    EXPECT_LE(std::abs(std::round(im)), 3.0);
  }
}

TEST(Eigendecompose, DefectiveMatrixRejected) {
  Eigen::MatrixXd K(2, 2);
  K << 0, 1, 0, 0;
  EXPECT_THROW(eigendecompose(K), NearDefectiveError);
}

TEST(Eigendecompose, NonFiniteRejected) {
  Eigen::MatrixXd K = Eigen::MatrixXd::Identity(2, 2);
  K(0, 1) = std::nan("");
  EXPECT_THROW(eigendecompose(K), NonFiniteError);
}

TEST(KoopmanModel, Invariants) {
  for (double eps : {0.0, 0.001, 0.1})
    for (int c = 1; c <= 7; ++c) {
      const KoopmanModel model = build_koopman_model(
          make_basis(c, 2), duffing_vector_field(1, 1, 1, eps), identity_observables(kNames));
      const auto &e = model.eig;
      EXPECT_LE(e.residual, 1e-8 * (1.0 + model.K.cwiseAbs().maxCoeff()));
      const Eigen::Index n = e.values.size();
      const double inv_err =
          (e.vectors * e.inverse - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
      EXPECT_LE(inv_err, 1e-8 * e.condition);
      // Conjugate-pair closure.
      std::vector<bool> used(static_cast<std::size_t>(n), false);
      for (Eigen::Index i = 0; i < n; ++i) {
        bool found = false;
        for (Eigen::Index j = 0; j < n && !found; ++j)
          if (!used[j] && std::abs(e.values(j) - std::conj(e.values(i))) <= 1e-9) {
            used[j] = true;
            found = true;
          }
        EXPECT_TRUE(found) << "no conjugate for eigenvalue " << e.values(i);
      }
    }
}

TEST(InitialEigenfunctions, IdentityVectors) {
  const Eigen::VectorXd h0 = Eigen::Vector3d(0.5, -1.0, 2.0);
  const Eigen::VectorXcd phi = initial_eigenfunctions(Eigen::MatrixXcd::Identity(3, 3), h0);
  EXPECT_LT((phi - h0.cast<cd>()).cwiseAbs().maxCoeff(), 0.0 + 1e-300);
  EXPECT_THROW(initial_eigenfunctions(Eigen::MatrixXcd::Identity(2, 2), h0), DimensionError);
}

TEST(InitialEigenfunctions, DiagonalRealKoopman) {
  const Eigen::MatrixXd K = Eigen::Vector3d(-1.0, 2.0, 0.5).asDiagonal();
  const auto e = eigendecompose(K);
  // Eigenvalues sort as 2, 0.5, -1, which permutes h0.
  const Eigen::VectorXd h0 = Eigen::Vector3d(0.5, -1.0, 2.0);
  const Eigen::VectorXcd phi = initial_eigenfunctions(e.inverse, h0);
  EXPECT_LT((e.vectors * phi - h0.cast<cd>()).cwiseAbs().maxCoeff(), 1e-15);
  const Eigen::VectorXd sorted = Eigen::Vector3d(-1.0, 2.0, 0.5);
  EXPECT_LT((phi.real() - sorted).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(InitialEigenfunctions, DuffingRoundTrip) {
  const KoopmanModel model = build_koopman_model(
      make_basis(3, 2), duffing_vector_field(1, 1, 1, 0.001), identity_observables(kNames));
  const std::vector<double> x0{1.0, 0.0};
  const Eigen::VectorXd h0 = evaluate_basis(model.basis, x0);
  const Eigen::VectorXcd phi = initial_eigenfunctions(model.eig.inverse, h0);
  EXPECT_LT((model.eig.vectors * phi - h0.cast<cd>()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Propagate, TimeZeroReconstructsObservables) {
  std::mt19937_64 rng(34);
  const BasisSet b = make_basis(3, 2);
  const ObservableSet obs = {
      {"q", Polynomial::variable(2, 0)},
      {"p", Polynomial::variable(2, 1)},
      {"g", koopgal::testing::random_polynomial(rng, 2, 3)},
  };
  const KoopmanModel model = build_koopman_model(b, duffing_vector_field(1, 1, 1, 0.001), obs);
  const std::vector<double> t0{0.0};
  for (int trial = 0; trial < 100; ++trial) {
    const auto x0 = koopgal::testing::random_point(rng, 2, -0.999, 0.999);
    const Trajectory tr = run(model, x0, t0);
    for (std::size_t i = 0; i < obs.size(); ++i)
      EXPECT_NEAR(tr.values(static_cast<Eigen::Index>(i), 0), evaluate(obs[i].poly, x0), 1e-9);
  }
}

TEST(Propagate, HarmonicOscillatorClosedForm) {
  const auto times = linspace(0.0, 10.0, 100);
  for (int c = 1; c <= 5; ++c) {
    const KoopmanModel model = build_koopman_model(
        make_basis(c, 2), duffing_vector_field(1, 1, 1, 0), identity_observables(kNames));
    const Trajectory tr = run(model, {1.0, 0.0}, times);
    for (std::size_t k = 0; k < times.size(); ++k) {
      EXPECT_NEAR(tr.values(0, static_cast<Eigen::Index>(k)), std::cos(times[k]), 1e-8);
      EXPECT_NEAR(tr.values(1, static_cast<Eigen::Index>(k)), -std::sin(times[k]), 1e-8);
    }
  }
}

TEST(Propagate, DuffingAgainstRk4) {
  const VectorField vf = duffing_vector_field(1, 1, 1, 0.001);
  const auto times = linspace(0.0, 10.0, 100);
  const KoopmanModel model = build_koopman_model(make_basis(3, 2), vf, identity_observables(kNames));
  const std::vector<double> x0{1.0, 0.0};
  const Trajectory tr = run(model, x0, times);
  const auto ref = rk4_integrate(vf, x0, times, 1e-4);
  EXPECT_LE((tr.values.row(0) - ref.states.row(0)).cwiseAbs().maxCoeff(), 1e-2);
  EXPECT_LE(tr.max_imag, 1e-8);
}

TEST(Propagate, ShortTimeAgreementAtOrderFive) {
  const auto times = linspace(0.0, 1.0, 50);
  for (double eps : {0.001, 0.005, 0.01}) {
    const VectorField vf = duffing_vector_field(1, 1, 1, eps);
    const KoopmanModel model =
        build_koopman_model(make_basis(5, 2), vf, identity_observables(kNames));
    for (const std::vector<double> &x0 : {std::vector<double>{1.0, 0.0}, {0.3, -0.6}, {-0.7, 0.7}}) {
      const Trajectory tr = run(model, x0, times);
      const auto ref = rk4_integrate(vf, x0, times, 1e-4);
      EXPECT_LE((tr.values - ref.states).cwiseAbs().maxCoeff(), 1e-4);
    }
  }
}

TEST(Propagate, LinearSystemsExactAtEveryOrder) {
  std::mt19937_64 rng(35);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const auto times = linspace(0.0, 5.0, 40);
  int tested = 0;
  while (tested < 12) {
    Eigen::Matrix2d A;
    A << u(rng), u(rng), u(rng), u(rng);
    const double s = A.trace() / 2.0;
    const double disc = s * s - A.determinant();
    const Eigen::EigenSolver<Eigen::Matrix2d> es(A);
    // Stable, and away from a repeated (possibly defective) eigenvalue.
    if (es.eigenvalues().real().maxCoeff() >= -0.05 || std::abs(disc) < 0.05)
      continue;
    ++tested;
    const VectorField vf({canonicalize({{A(0, 0), {1, 0}}, {A(0, 1), {0, 1}}}, 2),
                          canonicalize({{A(1, 0), {1, 0}}, {A(1, 1), {0, 1}}}, 2)});
    const auto x0 = koopgal::testing::random_point(rng, 2, -0.5, 0.5);
    for (int c = 1; c <= 4; ++c) {
      const KoopmanModel model =
          build_koopman_model(make_basis(c, 2), vf, identity_observables(kNames));
      const Trajectory tr = run(model, x0, times);
      for (std::size_t k = 0; k < times.size(); ++k) {
        const Eigen::Vector2d expect = expm2_apply(A, times[k], Eigen::Vector2d(x0[0], x0[1]));
        EXPECT_NEAR(tr.values(0, static_cast<Eigen::Index>(k)), expect(0), 1e-7);
        EXPECT_NEAR(tr.values(1, static_cast<Eigen::Index>(k)), expect(1), 1e-7);
      }
    }
  }
}

TEST(Propagate, RealnessOfTrajectories) {
  std::mt19937_64 rng(36);
  const auto times = linspace(0.0, 10.0, 60);
  for (double eps : {0.0, 0.01, 0.1}) {
    const KoopmanModel model = build_koopman_model(
        make_basis(6, 2), duffing_vector_field(1, 1, 1, eps), identity_observables(kNames));
    for (int trial = 0; trial < 5; ++trial) {
      const Trajectory tr = run(model, koopgal::testing::random_point(rng, 2), times);
      EXPECT_LE(tr.max_imag, 1e-8 * std::max(1.0, tr.values.cwiseAbs().maxCoeff()));
    }
  }
}

TEST(Propagate, OverflowGuard) {
  const BasisSet b = make_basis(1, 1);
  const VectorField grow({Polynomial::variable(1, 0, 1.0)});
  const KoopmanModel model = build_koopman_model(b, grow, {{"x", Polynomial::variable(1, 0)}});
  const std::vector<double> x0{0.5};
  const std::vector<double> ok{0.0, 1.0};
  const Trajectory tr = run(model, x0, ok);
  EXPECT_NEAR(tr.values(0, 1), 0.5 * std::exp(1.0), 1e-12);
  const std::vector<double> bad{0.0, 800.0};
  EXPECT_THROW(run(model, x0, bad), OverflowError);
}

TEST(Skewness, Examples) {
  Eigen::MatrixXd rot(2, 2);
  rot << 0, 1, -1, 0;
  EXPECT_EQ(skewness_diagnostic(rot), 0.0);
  EXPECT_NEAR(skewness_diagnostic(Eigen::MatrixXd::Identity(2, 2)), 2.0, 1e-15);
  const Eigen::MatrixXd K =
      assemble_koopman(make_basis(3, 2), duffing_vector_field(1, 1, 1, 0.001));
  const double s = skewness_diagnostic(K);
  EXPECT_TRUE(std::isfinite(s));
  EXPECT_GT(s, 0.0);
}
