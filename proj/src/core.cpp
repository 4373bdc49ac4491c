#include "cgd/core.hpp"

#include "cgd/hvp.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <utility>

namespace cgd {

namespace {

constexpr std::array<std::pair<Method, std::string_view>, 6> kMethodNames{{
    {Method::GDA, "GDA"},
    {Method::LCGD, "LCGD"},
    {Method::SGA, "SGA"},
    {Method::ConOpt, "ConOpt"},
    {Method::OGDA, "OGDA"},
    {Method::CGD, "CGD"},
}};

void require_finite(const Vector& v, const JointPoint& p, const char* oracle) {
  if (!v.allFinite()) {
    throw NumericalError(std::string("non-finite output from ") + oracle, p);
  }
}

}  // namespace

std::string_view to_string(Method m) {
  for (const auto& [method, name] : kMethodNames) {
    if (method == m) return name;
  }
  return "?";
}

Method method_from_string(std::string_view name) {
  for (const auto& [method, label] : kMethodNames) {
    if (label.size() != name.size()) continue;
    bool same = true;
    for (std::size_t i = 0; i < name.size(); ++i) {
      if (std::tolower(static_cast<unsigned char>(label[i])) !=
          std::tolower(static_cast<unsigned char>(name[i]))) {
        same = false;
        break;
      }
    }
    if (same) return method;
  }
  throw ContractError("unknown method: " + std::string(name));
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods{Method::GDA,    Method::LCGD, Method::SGA,
                                           Method::ConOpt, Method::OGDA, Method::CGD};
  return methods;
}

std::int64_t cost::per_iteration(Method m) {
  switch (m) {
    case Method::GDA:
    case Method::OGDA:
      return kGradientPair;
    case Method::LCGD:
    case Method::SGA:
      return kGradientPair + 2 * kHvp;
    case Method::ConOpt:
      return kGradientPair + 4 * kHvp;
    case Method::CGD:
      // gradient, the right-hand side's mixed product and the counter strategy
      return kGradientPair + 2 * kHvp;
  }
  return 0;
}

Vector ZeroSumGame::hessian_xx(const JointPoint& p, const Vector& u) {
  return fd_hvp([this](const JointPoint& q) { return gradients(q).gx; }, p, Block::X, u,
                kDefaultStepScale);
}

Vector ZeroSumGame::hessian_yy(const JointPoint& p, const Vector& v) {
  return fd_hvp([this](const JointPoint& q) { return gradients(q).gy; }, p, Block::Y, v,
                kDefaultStepScale);
}

void check_dims(const ZeroSumGame& game, const JointPoint& p) {
  if (p.x.size() != game.dim_x() || p.y.size() != game.dim_y()) {
    throw ContractError("point dimensions (" + std::to_string(p.x.size()) + ", " +
                        std::to_string(p.y.size()) + ") do not match game " + game.name() +
                        " (" + std::to_string(game.dim_x()) + ", " +
                        std::to_string(game.dim_y()) + ")");
  }
}

GradientPair evaluate_gradients(ZeroSumGame& game, const JointPoint& p) {
  check_dims(game, p);
  GradientPair g = game.gradients(p);
  game.charge(cost::kGradientPair);
  require_finite(g.gx, p, "gradient (x)");
  require_finite(g.gy, p, "gradient (y)");
  return g;
}

Vector apply_mixed_xy(ZeroSumGame& game, const JointPoint& p, const Vector& v) {
  check_dims(game, p);
  if (v.size() != game.dim_y()) throw ContractError("mixed_xy: direction must have length n");
  Vector out = game.mixed_xy(p, v);
  game.charge(cost::kHvp);
  require_finite(out, p, "mixed_xy");
  return out;
}

Vector apply_mixed_yx(ZeroSumGame& game, const JointPoint& p, const Vector& u) {
  check_dims(game, p);
  if (u.size() != game.dim_x()) throw ContractError("mixed_yx: direction must have length m");
  Vector out = game.mixed_yx(p, u);
  game.charge(cost::kHvp);
  require_finite(out, p, "mixed_yx");
  return out;
}

Vector apply_hessian_xx(ZeroSumGame& game, const JointPoint& p, const Vector& u) {
  check_dims(game, p);
  if (u.size() != game.dim_x()) throw ContractError("hessian_xx: direction must have length m");
  Vector out = game.hessian_xx(p, u);
  game.charge(cost::kHvp);
  require_finite(out, p, "hessian_xx");
  return out;
}

Vector apply_hessian_yy(ZeroSumGame& game, const JointPoint& p, const Vector& v) {
  check_dims(game, p);
  if (v.size() != game.dim_y()) throw ContractError("hessian_yy: direction must have length n");
  Vector out = game.hessian_yy(p, v);
  game.charge(cost::kHvp);
  require_finite(out, p, "hessian_yy");
  return out;
}

void SolverConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ContractError("eta must be positive");
  if (!(gamma >= 0.0)) throw ContractError("gamma must be nonnegative");
  if (!(krylov.tol > 0.0)) throw ContractError("krylov tolerance must be positive");
  if (krylov.max_iter < 0) throw ContractError("krylov max_iter must be positive");
  if (rmsprop) {
    if (!(rmsprop->rho > 0.0 && rmsprop->rho < 1.0))
      throw ContractError("rmsprop rho must lie in (0, 1)");
    if (rmsprop->floor < 0.0) throw ContractError("rmsprop floor must be nonnegative");
  }
}

}  // namespace cgd
