#ifndef KOOPGAL_BASIS_HPP
#define KOOPGAL_BASIS_HPP

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "polynomial.hpp"

namespace koopgal {

inline constexpr int kMaxDimension = 6;
inline constexpr int kMaxOrder = 12;
inline constexpr long kMaxBasisSize = 20000;

/// C(c+m, m): number of exponent tuples in m variables of total degree <= c.
inline long basis_size(int c, int m) {
  long r = 1;
  for (int k = 1; k <= m; ++k)
    r = r * (c + k) / k;
  return r;
}

/// Ordered table of exponent tuples of total degree <= order, in graded order.
/// Row i gives the per-variable Legendre orders of basis function L_i and,
/// equally, the exponents of monomial column i in the expansion matrix.
class MultiIndexSet {
public:
  MultiIndexSet() = default;
  MultiIndexSet(int order, int dim, std::vector<Exponent> rows)
      : order_(order), dim_(dim), rows_(std::move(rows)) {
    for (std::size_t i = 0; i < rows_.size(); ++i)
      lookup_.emplace(rows_[i], static_cast<int>(i));
  }

  int order() const noexcept { return order_; }
  int dimension() const noexcept { return dim_; }
  int size() const noexcept { return static_cast<int>(rows_.size()); }
  const Exponent &operator[](int i) const { return rows_.at(i); }
  std::span<const Exponent> rows() const noexcept { return rows_; }

  /// Row holding `e`, or -1.
  int position(const Exponent &e) const {
    auto it = lookup_.find(e);
    return it == lookup_.end() ? -1 : it->second;
  }

private:
  int order_ = 0;
  int dim_ = 0;
  std::vector<Exponent> rows_;
  std::map<Exponent, int> lookup_;
};

inline void check_basis_range(int c, int m) {
  if (m < 1 || m > kMaxDimension)
    throw ValidationError("state dimension " + std::to_string(m) + " outside [1, " +
                          std::to_string(kMaxDimension) + "]");
  if (c < 0 || c > kMaxOrder)
    throw ValidationError("order " + std::to_string(c) + " outside [0, " +
                          std::to_string(kMaxOrder) + "]");
  if (basis_size(c, m) > kMaxBasisSize)
    throw ValidationError("basis size " + std::to_string(basis_size(c, m)) + " exceeds " +
                          std::to_string(kMaxBasisSize));
}

inline MultiIndexSet enumerate_multi_indices(int c, int m) {
  check_basis_range(c, m);
  std::vector<Exponent> rows;
  rows.reserve(basis_size(c, m));
  for (int d = 0; d <= c; ++d) {
    // Tuples of total degree d, lexicographically descending.
    Exponent e(m, 0);
    auto fill = [&](auto &&self, int k, int remaining) -> void {
      if (k == m - 1) {
        e[k] = remaining;
        rows.push_back(e);
        return;
      }
      for (int v = remaining; v >= 0; --v) {
        e[k] = v;
        self(self, k + 1, remaining - v);
      }
    };
    fill(fill, 0, d);
  }
  return MultiIndexSet(c, m, std::move(rows));
}

/// Value of P_n(x) by the three-term recurrence.
inline double legendre_value(int n, double x) {
  if (n == 0)
    return 1.0;
  double prev = 1.0, cur = x;
  for (int k = 1; k < n; ++k) {
    const double next = ((2 * k + 1) * x * cur - k * prev) / (k + 1);
    prev = cur;
    cur = next;
  }
  return cur;
}

/// Row i: coefficients of P_i by ascending power of x.
inline Eigen::MatrixXd legendre_coefficients(int c) {
  if (c < 0 || c > kMaxOrder)
    throw ValidationError("order " + std::to_string(c) + " outside supported range");
  Eigen::MatrixXd lpc = Eigen::MatrixXd::Zero(c + 1, c + 1);
  lpc(0, 0) = 1.0;
  if (c >= 1)
    lpc(1, 1) = 1.0;
  // (i) P_i = (2i-1) x P_{i-1} - (i-1) P_{i-2}
  for (int i = 2; i <= c; ++i) {
    for (int j = 0; j < i; ++j) {
      lpc(i, j + 1) += (2.0 * (i - 1) + 1.0) / i * lpc(i - 1, j);
      lpc(i, j) -= (i - 1.0) / i * lpc(i - 2, j);
    }
  }
  return lpc;
}

/// Scales row i by sqrt((2i+1)/2) so that the univariate polynomials are
/// orthonormal on [-1,1].
inline Eigen::MatrixXd normalize_legendre(const Eigen::MatrixXd &lpc) {
  Eigen::MatrixXd nlpc = lpc;
  for (int i = 0; i < lpc.rows(); ++i)
    nlpc.row(i) *= std::sqrt((2.0 * i + 1.0) / 2.0);
  return nlpc;
}

/// Row i: coefficients of d/dx of normalized P_i by ascending power.
inline Eigen::MatrixXd derivative_table(const Eigen::MatrixXd &nlpc) {
  const Eigen::Index n = nlpc.rows();
  Eigen::MatrixXd dlpc = Eigen::MatrixXd::Zero(n, nlpc.cols());
  for (Eigen::Index i = 1; i < n; ++i)
    for (Eigen::Index j = 0; j + 1 < nlpc.cols(); ++j)
      dlpc(i, j) = static_cast<double>(j + 1) * nlpc(i, j + 1);
  return dlpc;
}

struct UnivariateTables {
  int order = 0;
  Eigen::MatrixXd lpc;  // raw Legendre coefficients
  Eigen::MatrixXd nlpc; // normalized
  Eigen::MatrixXd dlpc; // derivatives of normalized

  static UnivariateTables build(int c) {
    UnivariateTables t;
    t.order = c;
    t.lpc = legendre_coefficients(c);
    t.nlpc = normalize_legendre(t.lpc);
    t.dlpc = derivative_table(t.nlpc);
    return t;
  }
};

/// Orthonormal multivariate Legendre basis of total order <= c.
///
/// `mlp()(i, j)` is the coefficient of monomial x^{indices[j]} in L_i. The
/// same basis functions are also kept as sparse polynomials so the Galerkin
/// stage can work on them directly.
class BasisSet {
public:
  BasisSet(UnivariateTables tables, MultiIndexSet indices);

  int order() const noexcept { return indices_.order(); }
  int dimension() const noexcept { return indices_.dimension(); }
  int size() const noexcept { return indices_.size(); }
  const MultiIndexSet &indices() const noexcept { return indices_; }
  const UnivariateTables &tables() const noexcept { return tables_; }
  const Eigen::MatrixXd &mlp() const noexcept { return mlp_; }

  const Polynomial &function(int i) const {
    if (i < 0 || i >= size())
      throw DimensionError("basis index " + std::to_string(i) + " out of range");
    return functions_[i];
  }

  /// Total degree of L_i.
  int degree(int i) const { return total_degree(indices_[i]); }

private:
  UnivariateTables tables_;
  MultiIndexSet indices_;
  Eigen::MatrixXd mlp_;
  std::vector<Polynomial> functions_;
};

inline BasisSet::BasisSet(UnivariateTables tables, MultiIndexSet indices)
    : tables_(std::move(tables)), indices_(std::move(indices)) {
  if (tables_.order != indices_.order())
    throw ValidationError("univariate tables and multi-index set disagree on order");
  const int n = indices_.size();
  const int m = indices_.dimension();
  mlp_ = Eigen::MatrixXd::Zero(n, n);
  functions_.reserve(n);
  for (int i = 0; i < n; ++i) {
    const Exponent &ri = indices_[i];
    std::vector<Monomial> terms;
    for (int j = 0; j < n; ++j) {
      const Exponent &rj = indices_[j];
      double v = 1.0;
      for (int k = 0; k < m && v != 0.0; ++k)
        v *= tables_.nlpc(ri[k], rj[k]);
      mlp_(i, j) = v;
      if (v != 0.0)
        terms.push_back({v, rj});
    }
    functions_.push_back(Polynomial::canonical(std::move(terms), m));
  }
}

inline BasisSet multivariate_basis(UnivariateTables tables, MultiIndexSet indices) {
  return BasisSet(std::move(tables), std::move(indices));
}

/// Convenience: tables plus indices for order c in m variables.
inline BasisSet make_basis(int c, int m) {
  auto indices = enumerate_multi_indices(c, m);
  return BasisSet(UnivariateTables::build(c), std::move(indices));
}

inline Polynomial basis_as_polynomial(const BasisSet &basis, int i) {
  return basis.function(i);
}

/// dL_i/dx_var assembled from the derivative table:
/// coefficient at column j is DLPC(ri[var], rj[var]) * prod_{k != var} NLPC(ri[k], rj[k]).
inline Polynomial basis_partial_derivative(const BasisSet &basis, int i, int var) {
  const int m = basis.dimension();
  if (var < 0 || var >= m)
    throw DimensionError("derivative variable out of range");
  const Exponent &ri = basis.indices()[i];
  const auto &t = basis.tables();
  std::vector<Monomial> terms;
  for (int j = 0; j < basis.size(); ++j) {
    const Exponent &rj = basis.indices()[j];
    double v = 1.0;
    for (int k = 0; k < m && v != 0.0; ++k)
      v *= (k == var) ? t.dlpc(ri[k], rj[k]) : t.nlpc(ri[k], rj[k]);
    if (v != 0.0)
      terms.push_back({v, rj});
  }
  return Polynomial::canonical(std::move(terms), m);
}

/// h(i) = L_i(x) for every basis function.
inline Eigen::VectorXd evaluate_basis(const BasisSet &basis, std::span<const double> x) {
  const int m = basis.dimension();
  if (static_cast<int>(x.size()) != m)
    throw DimensionError("evaluation point has " + std::to_string(x.size()) +
                         " coordinates, expected " + std::to_string(m));
  const int c = basis.order();
  // powers(k, e) = x_k^e
  Eigen::MatrixXd powers(m, c + 1);
  for (int k = 0; k < m; ++k) {
    powers(k, 0) = 1.0;
    for (int e = 1; e <= c; ++e)
      powers(k, e) = powers(k, e - 1) * x[k];
  }
  const int n = basis.size();
  Eigen::VectorXd monomials(n);
  for (int j = 0; j < n; ++j) {
    double v = 1.0;
    for (int k = 0; k < m; ++k)
      v *= powers(k, basis.indices()[j][k]);
    monomials(j) = v;
  }
  Eigen::VectorXd h(n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (const auto &term : basis.function(i).terms())
      s += term.coef * monomials(basis.indices().position(term.exp));
    h(i) = s;
  }
  return h;
}

} // namespace koopgal

#endif // KOOPGAL_BASIS_HPP
