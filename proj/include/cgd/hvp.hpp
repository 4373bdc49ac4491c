#pragma once

// Hessian-vector products: central-difference fallback, an adapter that
// swaps a game's analytic mixed products for finite differences, and the
// matrix-free equilibrium operator of CGD.

#include "cgd/core.hpp"
#include "cgd/krylov.hpp"

#include <cmath>
#include <functional>
#include <limits>

namespace cgd {

enum class Block { X, Y };

/// (machine epsilon)^(1/3), the usual optimum for central differences.
inline const double kDefaultStepScale = std::cbrt(std::numeric_limits<double>::epsilon());

using GradientComponent = std::function<Vector(const JointPoint&)>;

/// (g(p + h d) - g(p - h d)) / (2h) where d perturbs `block` of p and
/// h = step_scale * (1 + |p_block|) / |d|. A zero direction returns zeros of
/// length `out_dim` without calling the oracle.
Vector fd_hvp(const GradientComponent& grad_component, const JointPoint& p, Block block,
              const Vector& direction, double step_scale, Index out_dim);

/// Overload that infers the output length from one oracle call when the
/// direction is zero.
Vector fd_hvp(const GradientComponent& grad_component, const JointPoint& p, Block block,
              const Vector& direction, double step_scale);

struct HvpSource {
  enum class Kind { Analytic, FiniteDifference };
  Kind kind = Kind::Analytic;
  double step_scale = kDefaultStepScale;

  static HvpSource analytic() { return {}; }
  static HvpSource finite_difference(double step = kDefaultStepScale) {
    return {Kind::FiniteDifference, step};
  }
};

/// Forwards everything to `inner` except the second-order oracles, which are
/// computed by central differences of inner's gradients.
class FiniteDifferenceGame final : public ZeroSumGame {
 public:
  FiniteDifferenceGame(ZeroSumGame& inner, double step_scale = kDefaultStepScale);

  Index dim_x() const override { return inner_.dim_x(); }
  Index dim_y() const override { return inner_.dim_y(); }
  double value(const JointPoint& p) override { return inner_.value(p); }
  GradientPair gradients(const JointPoint& p) override { return inner_.gradients(p); }
  Vector mixed_xy(const JointPoint& p, const Vector& v) override;
  Vector mixed_yx(const JointPoint& p, const Vector& u) override;
  Vector hessian_xx(const JointPoint& p, const Vector& u) override;
  Vector hessian_yy(const JointPoint& p, const Vector& v) override;
  void begin_iteration(std::int64_t k) override { inner_.begin_iteration(k); }
  std::optional<double> residual(const JointPoint& p) const override {
    return inner_.residual(p);
  }
  std::string name() const override { return inner_.name() + "+fd"; }

 private:
  ZeroSumGame& inner_;
  double step_scale_;
};

/// v -> v + eta^2 D_xy(D_yx v) (side X, length m) or
/// v -> v + eta^2 D_yx(D_xy v) (side Y, length n), evaluated at p.
/// Each application charges two HVPs to the game.
LinearMap equilibrium_operator(ZeroSumGame& game, const JointPoint& p, double eta, Block side);

}  // namespace cgd
