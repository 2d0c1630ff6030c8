#ifndef KOOPGAL_POLYNOMIAL_HPP
#define KOOPGAL_POLYNOMIAL_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace koopgal {

/// Per-variable exponents of a monomial, one entry per state variable.
using Exponent = std::vector<int>;

inline int total_degree(const Exponent &e) {
  return std::accumulate(e.begin(), e.end(), 0);
}

/// Graded order: total degree ascending, ties broken by lexicographically
/// descending exponent tuple. For two variables this yields
/// (0,0) (1,0) (0,1) (2,0) (1,1) (0,2) (3,0) ...
inline bool graded_less(const Exponent &a, const Exponent &b) {
  const int da = total_degree(a);
  const int db = total_degree(b);
  if (da != db)
    return da < db;
  return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

/// x^n for small non-negative integer n by repeated multiplication.
inline double int_pow(double x, int n) {
  double r = 1.0;
  for (int k = 0; k < n; ++k)
    r *= x;
  return r;
}

struct Monomial {
  double coef = 0.0;
  Exponent exp;

  friend bool operator==(const Monomial &, const Monomial &) = default;
};

/// Sparse multivariate polynomial with real coefficients in canonical form:
/// like terms combined, no zero coefficients, terms in graded order.
///
/// Instances are immutable; all arithmetic returns a new canonical value.
class Polynomial {
public:
  /// Zero polynomial in `m` variables.
  explicit Polynomial(int m = 1) : dim_(m) {
    if (m < 1)
      throw DimensionError("polynomial dimension must be >= 1");
  }

  /// Builds the canonical form of an arbitrary term list.
  static Polynomial canonical(std::vector<Monomial> terms, int m);

  static Polynomial constant(int m, double value) {
    return canonical({Monomial{value, Exponent(m, 0)}}, m);
  }

  /// coef * x_var
  static Polynomial variable(int m, int var, double coef = 1.0) {
    if (var < 0 || var >= m)
      throw DimensionError("variable index out of range");
    Exponent e(m, 0);
    e[var] = 1;
    return canonical({Monomial{coef, std::move(e)}}, m);
  }

  int dimension() const noexcept { return dim_; }
  std::span<const Monomial> terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool is_zero() const noexcept { return terms_.empty(); }

  /// Total degree; 0 for the zero polynomial.
  int degree() const noexcept {
    return terms_.empty() ? 0 : total_degree(terms_.back().exp);
  }

  /// Largest exponent of any single variable.
  int max_exponent() const noexcept {
    int r = 0;
    for (const auto &t : terms_)
      for (int e : t.exp)
        r = std::max(r, e);
    return r;
  }

  /// Coefficient of x^e, 0 when absent.
  double coefficient(const Exponent &e) const {
    auto it = std::lower_bound(
        terms_.begin(), terms_.end(), e,
        [](const Monomial &t, const Exponent &x) { return graded_less(t.exp, x); });
    return (it != terms_.end() && it->exp == e) ? it->coef : 0.0;
  }

  friend bool operator==(const Polynomial &, const Polynomial &) = default;

private:
  int dim_;
  std::vector<Monomial> terms_;
};

inline Polynomial Polynomial::canonical(std::vector<Monomial> terms, int m) {
  Polynomial p(m);
  for (const auto &t : terms) {
    if (static_cast<int>(t.exp.size()) != m)
      throw DimensionError("monomial has " + std::to_string(t.exp.size()) +
                           " exponents, expected " + std::to_string(m));
    if (std::any_of(t.exp.begin(), t.exp.end(), [](int e) { return e < 0; }))
      throw ValidationError("negative exponent in monomial");
    if (!std::isfinite(t.coef))
      throw NonFiniteError("non-finite polynomial coefficient");
  }
  // Stable, so like terms are summed in input order.
  std::stable_sort(terms.begin(), terms.end(), [](const Monomial &a, const Monomial &b) {
    return graded_less(a.exp, b.exp);
  });
  p.terms_.reserve(terms.size());
  for (auto &t : terms) {
    if (!p.terms_.empty() && p.terms_.back().exp == t.exp)
      p.terms_.back().coef += t.coef;
    else
      p.terms_.push_back(std::move(t));
  }
  std::erase_if(p.terms_, [](const Monomial &t) { return t.coef == 0.0; });
  return p;
}

inline Polynomial canonicalize(std::vector<Monomial> terms, int m) {
  return Polynomial::canonical(std::move(terms), m);
}

namespace detail {
inline void require_same_dim(const Polynomial &a, const Polynomial &b) {
  if (a.dimension() != b.dimension())
    throw DimensionError("polynomial dimension mismatch: " + std::to_string(a.dimension()) +
                         " vs " + std::to_string(b.dimension()));
}
} // namespace detail

inline Polynomial add(const Polynomial &a, const Polynomial &b) {
  detail::require_same_dim(a, b);
  std::vector<Monomial> terms(a.terms().begin(), a.terms().end());
  terms.insert(terms.end(), b.terms().begin(), b.terms().end());
  return Polynomial::canonical(std::move(terms), a.dimension());
}

inline Polynomial scale(const Polynomial &a, double s) {
  std::vector<Monomial> terms(a.terms().begin(), a.terms().end());
  for (auto &t : terms)
    t.coef *= s;
  return Polynomial::canonical(std::move(terms), a.dimension());
}

inline Polynomial subtract(const Polynomial &a, const Polynomial &b) {
  return add(a, scale(b, -1.0));
}

inline Polynomial multiply(const Polynomial &a, const Polynomial &b) {
  detail::require_same_dim(a, b);
  const int m = a.dimension();
  std::vector<Monomial> terms;
  terms.reserve(a.size() * b.size());
  for (const auto &ta : a.terms()) {
    for (const auto &tb : b.terms()) {
      Exponent e(m);
      for (int k = 0; k < m; ++k)
        e[k] = ta.exp[k] + tb.exp[k];
      terms.push_back({ta.coef * tb.coef, std::move(e)});
    }
  }
  return Polynomial::canonical(std::move(terms), m);
}

inline Polynomial operator+(const Polynomial &a, const Polynomial &b) { return add(a, b); }
inline Polynomial operator-(const Polynomial &a, const Polynomial &b) { return subtract(a, b); }
inline Polynomial operator*(const Polynomial &a, const Polynomial &b) { return multiply(a, b); }
inline Polynomial operator*(double s, const Polynomial &a) { return scale(a, s); }

inline Polynomial partial_derivative(const Polynomial &p, int var) {
  if (var < 0 || var >= p.dimension())
    throw DimensionError("derivative variable " + std::to_string(var) + " out of range");
  std::vector<Monomial> terms;
  terms.reserve(p.size());
  for (const auto &t : p.terms()) {
    if (t.exp[var] == 0)
      continue;
    Monomial d{t.coef * t.exp[var], t.exp};
    --d.exp[var];
    terms.push_back(std::move(d));
  }
  return Polynomial::canonical(std::move(terms), p.dimension());
}

/// Closed-form integral of a*b over [-1,1]^m. A product monomial contributes
/// nothing when any exponent is odd, otherwise coef * prod_k 2/(e_k+1).
/// Contributions are accumulated in canonical term order of a, then b.
inline double box_inner_product(const Polynomial &a, const Polynomial &b) {
  detail::require_same_dim(a, b);
  const int m = a.dimension();
  double sum = 0.0;
  for (const auto &ta : a.terms()) {
    for (const auto &tb : b.terms()) {
      double w = ta.coef * tb.coef;
      for (int k = 0; k < m; ++k) {
        const int e = ta.exp[k] + tb.exp[k];
        if (e % 2 != 0) {
          w = 0.0;
          break;
        }
        w *= 2.0 / (e + 1);
      }
      sum += w;
    }
  }
  return sum;
}

inline double evaluate(const Polynomial &p, std::span<const double> x) {
  if (static_cast<int>(x.size()) != p.dimension())
    throw DimensionError("evaluation point has " + std::to_string(x.size()) +
                         " coordinates, expected " + std::to_string(p.dimension()));
  double sum = 0.0;
  for (const auto &t : p.terms()) {
    double v = t.coef;
    for (std::size_t k = 0; k < x.size(); ++k)
      v *= int_pow(x[k], t.exp[k]);
    sum += v;
  }
  return sum;
}

/// Returns q(y) = p(center + half_width .* y), expanded in y.
inline Polynomial affine_substitute(const Polynomial &p, std::span<const double> center,
                                    std::span<const double> half_width) {
  const int m = p.dimension();
  if (static_cast<int>(center.size()) != m || static_cast<int>(half_width.size()) != m)
    throw DimensionError("affine map dimension mismatch");
  for (double h : half_width)
    if (!(h > 0.0))
      throw ValidationError("half width must be positive");

  // (c + h y)^n = sum_j C(n,j) c^(n-j) h^j y^j, one univariate table per variable.
  auto binomial_row = [](double c, double h, int n) {
    std::vector<double> row(n + 1);
    double binom = 1.0;
    for (int j = 0; j <= n; ++j) {
      row[j] = binom * int_pow(c, n - j) * int_pow(h, j);
      binom = binom * (n - j) / (j + 1);
    }
    return row;
  };

  std::vector<Monomial> out;
  for (const auto &t : p.terms()) {
    std::vector<Monomial> partial{{t.coef, Exponent(m, 0)}};
    for (int k = 0; k < m; ++k) {
      if (t.exp[k] == 0)
        continue;
      const auto row = binomial_row(center[k], half_width[k], t.exp[k]);
      std::vector<Monomial> next;
      next.reserve(partial.size() * row.size());
      for (const auto &q : partial) {
        for (int j = 0; j < static_cast<int>(row.size()); ++j) {
          if (row[j] == 0.0)
            continue;
          Monomial r{q.coef * row[j], q.exp};
          r.exp[k] = j;
          next.push_back(std::move(r));
        }
      }
      partial = std::move(next);
    }
    out.insert(out.end(), partial.begin(), partial.end());
  }
  return Polynomial::canonical(std::move(out), m);
}

} // namespace koopgal

#endif // KOOPGAL_POLYNOMIAL_HPP
