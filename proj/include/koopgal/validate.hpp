#ifndef KOOPGAL_VALIDATE_HPP
#define KOOPGAL_VALIDATE_HPP

#include <cmath>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "app.hpp"
#include "basis.hpp"
#include "dynamics.hpp"
#include "koopman.hpp"
#include "reference.hpp"

namespace koopgal {

/// Expansion matrix for c = 3, m = 2 rounded to three decimals.
inline Eigen::MatrixXd reference_mlp_order3() {
  Eigen::MatrixXd m(10, 10);
  // clang-format off
  m << 0.5,    0,      0,      0,     0,   0,     0,     0,     0,     0,
       0,      0.866,  0,      0,     0,   0,     0,     0,     0,     0,
       0,      0,      0.866,  0,     0,   0,     0,     0,     0,     0,
       -0.559, 0,      0,      1.677, 0,   0,     0,     0,     0,     0,
       0,      0,      0,      0,     1.5, 0,     0,     0,     0,     0,
       -0.559, 0,      0,      0,     0,   1.677, 0,     0,     0,     0,
       0,      -1.984, 0,      0,     0,   0,     3.307, 0,     0,     0,
       0,      0,      -0.968, 0,     0,   0,     0,     2.905, 0,     0,
       0,      -0.968, 0,      0,     0,   0,     0,     0,     2.905, 0,
       0,      0,      -1.984, 0,     0,   0,     0,     0,     0,     3.307;
  // clang-format on
  return m;
}

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace checks {

inline CheckResult mlp_fixture() {
  const BasisSet b = make_basis(3, 2);
  const double dev = (b.mlp() - reference_mlp_order3()).cwiseAbs().maxCoeff();
  std::ostringstream d;
  d << "max |MLP - reference| = " << dev << " (tol 5e-4)";
  return {"expansion matrix fixture c=3", b.size() == 10 && dev <= 5e-4, d.str()};
}

inline CheckResult gram_identity() {
  double worst = 0.0;
  for (int c = 1; c <= 8; ++c) {
    const BasisSet b = make_basis(c, 2);
    for (int i = 0; i < b.size(); ++i)
      for (int k = 0; k < b.size(); ++k) {
        const double g = box_inner_product(b.function(i), b.function(k));
        worst = std::max(worst, std::abs(g - (i == k ? 1.0 : 0.0)));
      }
  }
  std::ostringstream d;
  d << "max |G - I| over c=1..8 = " << worst << " (tol 1e-12)";
  return {"Gram identity", worst <= 1e-12, d.str()};
}

inline CheckResult quadrature_equivalence() {
  double worst = 0.0;
  for (double eps : {0.0, 0.001}) {
    const VectorField vf = duffing_vector_field(1, 1, 1, eps);
    for (int c = 1; c <= 3; ++c) {
      const BasisSet b = make_basis(c, 2);
      const Eigen::MatrixXd K = assemble_koopman(b, vf);
      for (int i = 0; i < b.size(); ++i) {
        const Polynomial dl = total_derivative(b, i, vf);
        for (int k = 0; k < b.size(); ++k) {
          const int nodes = (dl.degree() + b.degree(k) + 2) / 2;
          worst = std::max(worst, std::abs(K(i, k) - gauss_legendre_inner_product(
                                                           dl, b.function(k), nodes)));
        }
      }
    }
  }
  std::ostringstream d;
  d << "max |K - K_quadrature| = " << worst << " (tol 1e-10)";
  return {"quadrature equivalence", worst <= 1e-10, d.str()};
}

inline CheckResult degree_triangularity() {
  double worst = 0.0;
  const std::vector<VectorField> fields = {
      duffing_vector_field(1, 1, 1, 0),
      VectorField({Polynomial::canonical({{-0.3, {1, 0}}, {0.7, {0, 1}}}, 2),
                   Polynomial::canonical({{-1.1, {1, 0}}, {0.2, {0, 1}}, {0.5, {0, 0}}}, 2)}),
  };
  for (const auto &vf : fields) {
    const BasisSet b = make_basis(4, 2);
    const Eigen::MatrixXd K = assemble_koopman(b, vf);
    for (int i = 0; i < b.size(); ++i)
      for (int k = 0; k < b.size(); ++k)
        if (b.degree(k) > b.degree(i))
          worst = std::max(worst, std::abs(K(i, k)));
  }
  std::ostringstream d;
  d << "max |K(i,k)| above degree diagonal = " << worst << " (tol 1e-12)";
  return {"degree triangularity", worst <= 1e-12, d.str()};
}

inline CheckResult initial_reconstruction() {
  const std::vector<std::string> names{"q", "p"};
  const BasisSet b = make_basis(3, 2);
  const KoopmanModel model =
      build_koopman_model(b, duffing_vector_field(1, 1, 1, 0.001), identity_observables(names));
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::vector<double> t0{0.0};
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<double> x0{u(rng), u(rng)};
    const Eigen::VectorXd h0 = evaluate_basis(model.basis, x0);
    const Trajectory tr = propagate(model, initial_eigenfunctions(model.eig.inverse, h0), t0);
    for (int j = 0; j < 2; ++j)
      worst = std::max(worst, std::abs(tr.values(j, 0) - x0[j]));
  }
  std::ostringstream d;
  d << "max |x(0) - x0| over 100 random states = " << worst << " (tol 1e-9)";
  return {"t=0 reconstruction", worst <= 1e-9, d.str()};
}

/// Endpoint error of RK4 on the harmonic oscillator for each step.
inline std::vector<double> rk4_harmonic_errors(const std::vector<double> &steps, double tf) {
  const VectorField vf = duffing_vector_field(1, 1, 1, 0);
  const std::vector<double> x0{1.0, 0.0};
  const std::vector<double> times{0.0, tf};
  std::vector<double> errs;
  for (double h : steps) {
    const auto ref = rk4_integrate(vf, x0, times, h);
    errs.push_back(std::hypot(ref.states(0, 1) - std::cos(tf), ref.states(1, 1) + std::sin(tf)));
  }
  return errs;
}

inline CheckResult rk4_order() {
  const auto e = rk4_harmonic_errors({1e-2, 5e-3, 2.5e-3}, 10.0);
  const double r1 = e[0] / e[1];
  const double r2 = e[1] / e[2];
  std::ostringstream d;
  d << "halving ratios " << r1 << ", " << r2 << " (min 12)";
  return {"RK4 convergence order", r1 >= 12.0 && r2 >= 12.0, d.str()};
}

inline CheckResult linear_exactness() {
  const std::vector<std::string> names{"q", "p"};
  const auto times = linspace(0.0, 10.0, 100);
  double worst = 0.0;
  double worst_re = 0.0;
  for (int c = 1; c <= 5; ++c) {
    const KoopmanModel model = build_koopman_model(
        make_basis(c, 2), duffing_vector_field(1, 1, 1, 0), identity_observables(names));
    const std::vector<double> x0{1.0, 0.0};
    const Eigen::VectorXd h0 = evaluate_basis(model.basis, x0);
    const Trajectory tr = propagate(model, initial_eigenfunctions(model.eig.inverse, h0), times);
    for (std::size_t k = 0; k < times.size(); ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      worst = std::max(worst, std::abs(tr.values(0, kk) - std::cos(times[k])));
      worst = std::max(worst, std::abs(tr.values(1, kk) + std::sin(times[k])));
    }
    worst_re = std::max(worst_re, model.eig.values.real().cwiseAbs().maxCoeff());
  }
  std::ostringstream d;
  d << "max trajectory error " << worst << ", max |Re lambda| " << worst_re << " (tol 1e-8)";
  return {"harmonic oscillator exactness", worst <= 1e-8 && worst_re <= 1e-8, d.str()};
}

} // namespace checks

inline std::vector<CheckResult> validation_suite() {
  std::vector<std::function<CheckResult()>> fns = {
      checks::mlp_fixture,          checks::gram_identity,
      checks::quadrature_equivalence, checks::degree_triangularity,
      checks::initial_reconstruction, checks::rk4_order,
      checks::linear_exactness,
  };
  std::vector<CheckResult> out;
  for (auto &fn : fns) {
    try {
      out.push_back(fn());
    } catch (const std::exception &e) {
      out.push_back({"(check threw)", false, e.what()});
    }
  }
  return out;
}

inline int run_validate(std::ostream &out) {
  bool all = true;
  for (const auto &r : validation_suite()) {
    out << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail << '\n';
    all = all && r.passed;
  }
  out << (all ? "all checks passed" : "some checks FAILED") << '\n';
  return all ? kExitOk : kExitValidateFailed;
}

} // namespace koopgal

#endif // KOOPGAL_VALIDATE_HPP
