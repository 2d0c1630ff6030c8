#ifndef KOOPGAL_KOOPMAN_HPP
#define KOOPGAL_KOOPMAN_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "basis.hpp"
#include "dynamics.hpp"
#include "error.hpp"
#include "polynomial.hpp"

namespace koopgal {

/// Eigenvector matrices with a 1-norm condition number above this are
/// treated as defective.
inline constexpr double kNearDefectiveCondition = 1e12;

/// exp(x) overflows a double a little above 709.
inline constexpr double kMaxExponentArgument = 700.0;

struct Observable {
  std::string name;
  Polynomial poly;

  friend bool operator==(const Observable &, const Observable &) = default;
};

using ObservableSet = std::vector<Observable>;

/// g_j(x) = x_j, named after the states.
inline ObservableSet identity_observables(std::span<const std::string> names) {
  const int m = static_cast<int>(names.size());
  ObservableSet obs;
  for (int j = 0; j < m; ++j)
    obs.push_back({names[j], Polynomial::variable(m, j)});
  return obs;
}

/// dL_i/dt = sum_j (dL_i/dx_j) f_j
inline Polynomial total_derivative(const BasisSet &basis, int i, const VectorField &vf) {
  if (vf.dimension() != basis.dimension())
    throw DimensionError("vector field dimension " + std::to_string(vf.dimension()) +
                         " does not match basis dimension " + std::to_string(basis.dimension()));
  const Polynomial &li = basis.function(i);
  Polynomial sum(basis.dimension());
  for (int j = 0; j < vf.dimension(); ++j) {
    const Polynomial dj = partial_derivative(li, j);
    if (dj.is_zero() || vf[j].is_zero())
      continue;
    sum = sum + dj * vf[j];
  }
  return sum;
}

/// K(i,k) = <dL_i/dt, L_k>, so that dL/dt = K L on the truncated span.
inline Eigen::MatrixXd assemble_koopman(const BasisSet &basis, const VectorField &vf) {
  if (vf.dimension() != basis.dimension())
    throw DimensionError("vector field dimension does not match basis dimension");
  if (basis.order() + vf.max_degree() > 2 * kMaxExponent)
    throw ValidationError("basis order plus field degree exceeds supported degree");
  const int n = basis.size();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const Polynomial dli = total_derivative(basis, i, vf);
    if (dli.is_zero())
      continue;
    for (int k = 0; k < n; ++k)
      K(i, k) = box_inner_product(dli, basis.function(k));
  }
  return K;
}

inline void validate_observables(const ObservableSet &obs, int m, int c) {
  for (const auto &g : obs) {
    if (g.poly.dimension() != m)
      throw DimensionError("observable '" + g.name + "' has dimension " +
                           std::to_string(g.poly.dimension()) + ", expected " + std::to_string(m));
    if (g.poly.degree() > c)
      throw ValidationError("observable '" + g.name + "' has degree " +
                            std::to_string(g.poly.degree()) + " > order " + std::to_string(c));
  }
}

/// H(i,k) = <g_i, L_k>
inline Eigen::MatrixXd observable_matrix(const BasisSet &basis, const ObservableSet &obs) {
  validate_observables(obs, basis.dimension(), basis.order());
  Eigen::MatrixXd H(static_cast<Eigen::Index>(obs.size()), basis.size());
  for (std::size_t i = 0; i < obs.size(); ++i)
    for (int k = 0; k < basis.size(); ++k)
      H(static_cast<Eigen::Index>(i), k) = box_inner_product(obs[i].poly, basis.function(k));
  return H;
}

/// Right eigendecomposition K V = V diag(values).
struct Eigendecomposition {
  Eigen::VectorXcd values;
  Eigen::MatrixXcd vectors;
  Eigen::MatrixXcd inverse;
  double residual = 0.0;  // max |K V - V diag(values)|
  double condition = 0.0; // ||V||_1 ||V^-1||_1
};

/// Dense nonsymmetric eigensolve without balancing. Columns of V have unit
/// 2-norm with their first nonzero entry real and positive; eigenpairs are
/// sorted by real part descending, then imaginary part descending.
inline Eigendecomposition eigendecompose(const Eigen::MatrixXd &K) {
  if (K.rows() != K.cols())
    throw DimensionError("Koopman matrix must be square");
  if (!K.allFinite())
    throw NonFiniteError("Koopman matrix has non-finite entries");
  const Eigen::Index n = K.rows();

  Eigen::EigenSolver<Eigen::MatrixXd> solver(K, true);
  if (solver.info() != Eigen::Success)
    throw NonFiniteError("eigensolver did not converge");
  const Eigen::VectorXcd raw_values = solver.eigenvalues();
  Eigen::MatrixXcd raw_vectors = solver.eigenvectors();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const auto &la = raw_values(a);
    const auto &lb = raw_values(b);
    if (la.real() != lb.real())
      return la.real() > lb.real();
    return la.imag() > lb.imag();
  });

  Eigendecomposition out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const Eigen::Index src = order[static_cast<std::size_t>(c)];
    out.values(c) = raw_values(src);
    Eigen::VectorXcd v = raw_vectors.col(src);
    const double norm = v.norm();
    if (!(norm > 0.0) || !std::isfinite(norm))
      throw NonFiniteError("degenerate eigenvector");
    v /= norm;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (std::abs(v(r)) > 1e-12) {
        v *= std::conj(v(r)) / std::abs(v(r));
        v(r) = std::abs(v(r));
        break;
      }
    }
    out.vectors.col(c) = v;
  }
  if (!out.values.allFinite() || !out.vectors.allFinite())
    throw NonFiniteError("eigensolver produced non-finite output");

  const Eigen::MatrixXcd Kc = K.cast<std::complex<double>>();
  out.residual =
      (Kc * out.vectors - out.vectors * out.values.asDiagonal()).cwiseAbs().maxCoeff();

  Eigen::FullPivLU<Eigen::MatrixXcd> lu(out.vectors);
  if (!lu.isInvertible())
    throw NearDefectiveError("eigenvector matrix is singular");
  out.inverse = lu.inverse();
  auto norm1 = [](const Eigen::MatrixXcd &A) { return A.cwiseAbs().colwise().sum().maxCoeff(); };
  out.condition = norm1(out.vectors) * norm1(out.inverse);
  if (!std::isfinite(out.condition) || out.condition > kNearDefectiveCondition)
    throw NearDefectiveError("eigenvector condition " + std::to_string(out.condition) +
                             " exceeds " + std::to_string(kNearDefectiveCondition) +
                             "; Koopman matrix is numerically defective");
  return out;
}

/// phi0 = V^-1 h0
inline Eigen::VectorXcd initial_eigenfunctions(const Eigen::MatrixXcd &inverse,
                                               const Eigen::VectorXd &h0) {
  if (inverse.cols() != h0.size())
    throw DimensionError("initial basis vector size mismatch");
  return inverse * h0.cast<std::complex<double>>();
}

/// ||K + K^T||_F / max(1, ||K||_F); zero iff K is skew-symmetric.
inline double skewness_diagnostic(const Eigen::MatrixXd &K) {
  return (K + K.transpose()).norm() / std::max(1.0, K.norm());
}

struct KoopmanModel {
  BasisSet basis;
  Eigen::MatrixXd K;
  Eigen::MatrixXd H;
  Eigendecomposition eig;
  Eigen::MatrixXcd modes; // H V
  double skewness = 0.0;
};

inline KoopmanModel build_koopman_model(BasisSet basis, const VectorField &vf,
                                        const ObservableSet &obs) {
  Eigen::MatrixXd K = assemble_koopman(basis, vf);
  Eigen::MatrixXd H = observable_matrix(basis, obs);
  Eigendecomposition eig = eigendecompose(K);
  Eigen::MatrixXcd modes = H.cast<std::complex<double>>() * eig.vectors;
  const double skew = skewness_diagnostic(K);
  return KoopmanModel{std::move(basis), std::move(K), std::move(H), std::move(eig),
                      std::move(modes), skew};
}

struct Trajectory {
  std::vector<double> times;
  Eigen::MatrixXd values; // g x nt
  double max_imag = 0.0;  // largest |Im| dropped when taking the real part
};

/// values(:,k) = Re[ H V diag(exp(lambda t_k)) phi0 ]
inline Trajectory propagate(const KoopmanModel &model, const Eigen::VectorXcd &phi0,
                            std::span<const double> times) {
  const Eigen::Index n = model.eig.values.size();
  if (phi0.size() != n)
    throw DimensionError("initial eigenfunction vector size mismatch");
  Trajectory out;
  out.times.assign(times.begin(), times.end());
  out.values.resize(model.modes.rows(), static_cast<Eigen::Index>(times.size()));
  Eigen::VectorXcd weighted(n);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    if (!std::isfinite(t))
      throw NonFiniteError("non-finite output time");
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::complex<double> lam = model.eig.values(i);
      if (lam.real() * t > kMaxExponentArgument)
        throw OverflowError("exp(lambda t) overflows at t = " + std::to_string(t));
      weighted(i) = std::exp(lam * t) * phi0(i);
    }
    const Eigen::VectorXcd g = model.modes * weighted;
    out.values.col(static_cast<Eigen::Index>(k)) = g.real();
    if (g.size() > 0)
      out.max_imag = std::max(out.max_imag, g.imag().cwiseAbs().maxCoeff());
  }
  if (!out.values.allFinite())
    throw NonFiniteError("trajectory has non-finite values");
  return out;
}

} // namespace koopgal

#endif // KOOPGAL_KOOPMAN_HPP
