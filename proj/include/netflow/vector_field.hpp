#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Core>

namespace netflow {

using Vec = Eigen::VectorXd;

/// Autonomous velocity map x -> dx/dt on R^n.
class VectorField {
public:
  virtual ~VectorField() = default;

  virtual std::size_t dimension() const = 0;

  /// Writes the velocity at `x` into `dx`; both have size dimension().
  virtual void velocity(const Vec& x, Vec& dx) const = 0;

  Vec velocity(const Vec& x) const {
    Vec dx(x.size());
    velocity(x, dx);
    return dx;
  }
};

/// A vector field with trainable parameters and reverse-mode derivatives.
class DifferentiableField : public VectorField {
public:
  virtual std::size_t parameter_count() const = 0;

  /// Given the cotangent `dx_bar` of velocity(x), accumulates the cotangent
  /// of x into `x_bar` and the parameter cotangent into `param_grad` (both
  /// are added to, never overwritten).
  virtual void vjp(const Vec& x, const Vec& dx_bar, Vec& x_bar,
                   std::span<double> param_grad) const = 0;
};

}  // namespace netflow
