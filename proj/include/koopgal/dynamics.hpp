#ifndef KOOPGAL_DYNAMICS_HPP
#define KOOPGAL_DYNAMICS_HPP

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "polynomial.hpp"

namespace koopgal {

/// Largest per-variable exponent accepted anywhere in a system definition.
inline constexpr int kMaxExponent = 64;

/// Autonomous polynomial right-hand side dx/dt = f(x).
class VectorField {
public:
  VectorField() = default;
  explicit VectorField(std::vector<Polynomial> components) : comps_(std::move(components)) {
    if (comps_.empty())
      throw DimensionError("vector field needs at least one component");
    const int m = static_cast<int>(comps_.size());
    for (const auto &f : comps_) {
      if (f.dimension() != m)
        throw DimensionError("vector field component has dimension " +
                             std::to_string(f.dimension()) + ", expected " + std::to_string(m));
      if (f.max_exponent() > kMaxExponent)
        throw ValidationError("vector field exponent exceeds " + std::to_string(kMaxExponent));
    }
  }

  int dimension() const noexcept { return static_cast<int>(comps_.size()); }
  const Polynomial &operator[](int j) const { return comps_.at(j); }
  std::span<const Polynomial> components() const noexcept { return comps_; }

  int max_degree() const noexcept {
    int d = 0;
    for (const auto &f : comps_)
      d = std::max(d, f.degree());
    return d;
  }

  Eigen::VectorXd operator()(std::span<const double> x) const {
    Eigen::VectorXd dx(dimension());
    for (int j = 0; j < dimension(); ++j)
      dx(j) = evaluate(comps_[j], x);
    return dx;
  }

  friend bool operator==(const VectorField &, const VectorField &) = default;

private:
  std::vector<Polynomial> comps_;
};

/// dq/dt = p/M, dp/dt = -k q - k a^2 eps q^3.
inline VectorField duffing_vector_field(double mass, double stiffness, double unit_scale,
                                        double epsilon) {
  if (mass == 0.0)
    throw ValidationError("Duffing mass must be nonzero");
  const double cubic = -stiffness * epsilon * unit_scale * unit_scale;
  return VectorField({
      Polynomial::canonical({{1.0 / mass, {0, 1}}}, 2),
      Polynomial::canonical({{-stiffness, {1, 0}}, {cubic, {3, 0}}}, 2),
  });
}

/// Field g in y = (x - center) ./ half_width, g_j(y) = f_j(center + half_width .* y) / half_width_j.
inline VectorField rescale_to_unit_box(const VectorField &vf, std::span<const double> center,
                                       std::span<const double> half_width) {
  const int m = vf.dimension();
  if (static_cast<int>(center.size()) != m || static_cast<int>(half_width.size()) != m)
    throw DimensionError("domain dimension mismatch");
  std::vector<Polynomial> out;
  out.reserve(m);
  for (int j = 0; j < m; ++j)
    out.push_back(scale(affine_substitute(vf[j], center, half_width), 1.0 / half_width[j]));
  return VectorField(std::move(out));
}

} // namespace koopgal

#endif // KOOPGAL_DYNAMICS_HPP
