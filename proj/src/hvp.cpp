#include "cgd/hvp.hpp"

namespace cgd {

namespace {

constexpr double kDirectionFloor = 1e-300;

JointPoint shifted(const JointPoint& p, Block block, const Vector& direction, double h) {
  JointPoint q = p;
  if (block == Block::X) {
    q.x.noalias() += h * direction;
  } else {
    q.y.noalias() += h * direction;
  }
  return q;
}

}  // namespace

Vector fd_hvp(const GradientComponent& grad_component, const JointPoint& p, Block block,
              const Vector& direction, double step_scale, Index out_dim) {
  const Vector& base = block == Block::X ? p.x : p.y;
  if (direction.size() != base.size())
    throw ContractError("fd_hvp: direction length does not match the perturbed block");
  if (!(step_scale > 0.0)) throw ContractError("fd_hvp: step_scale must be positive");
  if (!p.finite()) throw ContractError("fd_hvp: point must be finite");

  const double dir_norm = direction.norm();
  if (dir_norm == 0.0) return Vector::Zero(out_dim);

  const double h = step_scale * (1.0 + base.norm()) / std::max(dir_norm, kDirectionFloor);
  const Vector plus = grad_component(shifted(p, block, direction, h));
  const Vector minus = grad_component(shifted(p, block, direction, -h));
  return (plus - minus) / (2.0 * h);
}

Vector fd_hvp(const GradientComponent& grad_component, const JointPoint& p, Block block,
              const Vector& direction, double step_scale) {
  if (direction.squaredNorm() == 0.0) {
    return Vector::Zero(grad_component(p).size());
  }
  return fd_hvp(grad_component, p, block, direction, step_scale, -1);
}

FiniteDifferenceGame::FiniteDifferenceGame(ZeroSumGame& inner, double step_scale)
    : inner_(inner), step_scale_(step_scale) {
  if (!(step_scale > 0.0)) throw ContractError("FiniteDifferenceGame: step_scale must be positive");
}

Vector FiniteDifferenceGame::mixed_xy(const JointPoint& p, const Vector& v) {
  return fd_hvp([this](const JointPoint& q) { return inner_.gradients(q).gx; }, p, Block::Y, v,
                step_scale_, inner_.dim_x());
}

Vector FiniteDifferenceGame::mixed_yx(const JointPoint& p, const Vector& u) {
  return fd_hvp([this](const JointPoint& q) { return inner_.gradients(q).gy; }, p, Block::X, u,
                step_scale_, inner_.dim_y());
}

Vector FiniteDifferenceGame::hessian_xx(const JointPoint& p, const Vector& u) {
  return fd_hvp([this](const JointPoint& q) { return inner_.gradients(q).gx; }, p, Block::X, u,
                step_scale_, inner_.dim_x());
}

Vector FiniteDifferenceGame::hessian_yy(const JointPoint& p, const Vector& v) {
  return fd_hvp([this](const JointPoint& q) { return inner_.gradients(q).gy; }, p, Block::Y, v,
                step_scale_, inner_.dim_y());
}

LinearMap equilibrium_operator(ZeroSumGame& game, const JointPoint& p, double eta, Block side) {
  if (!(eta >= 0.0)) throw ContractError("equilibrium_operator: eta must be nonnegative");
  check_dims(game, p);
  const double eta2 = eta * eta;
  if (side == Block::X) {
    return LinearMap{game.dim_x(), [&game, p, eta2](const Vector& v) -> Vector {
                       Vector inner = apply_mixed_yx(game, p, v);
                       return v + eta2 * apply_mixed_xy(game, p, inner);
                     }};
  }
  return LinearMap{game.dim_y(), [&game, p, eta2](const Vector& v) -> Vector {
                     Vector inner = apply_mixed_xy(game, p, v);
                     return v + eta2 * apply_mixed_yx(game, p, inner);
                   }};
}

}  // namespace cgd
