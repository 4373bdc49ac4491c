#include "cgd/solvers.hpp"

#include "cgd/hvp.hpp"

#include <cmath>

namespace cgd {

namespace {

struct ExplicitTerms {
  Vector dx;
  Vector dy;
};

// Unscaled update of the explicit methods given the gradients at p.
ExplicitTerms explicit_terms(Method method, ZeroSumGame& game, const JointPoint& p,
                             const GradientPair& g, SolverState& state,
                             const SolverConfig& config) {
  const double eta = config.eta;
  const double gamma = config.gamma;
  switch (method) {
    case Method::GDA:
      return {-eta * g.gx, eta * g.gy};
    case Method::LCGD:
    case Method::SGA: {
      const double w = method == Method::LCGD ? eta : gamma;
      const Vector Ngy = apply_mixed_xy(game, p, g.gy);
      const Vector Ntgx = apply_mixed_yx(game, p, g.gx);
      return {-eta * (g.gx + w * Ngy), eta * (g.gy - w * Ntgx)};
    }
    case Method::ConOpt: {
      const Vector Ngy = apply_mixed_xy(game, p, g.gy);
      const Vector Ntgx = apply_mixed_yx(game, p, g.gx);
      const Vector Hxx_gx = apply_hessian_xx(game, p, g.gx);
      const Vector Hyy_gy = apply_hessian_yy(game, p, g.gy);
      return {-eta * (g.gx + gamma * (Ngy + Hxx_gx)), eta * (g.gy - gamma * (Ntgx + Hyy_gy))};
    }
    case Method::OGDA: {
      ExplicitTerms t;
      if (state.previous_grads) {
        t = {-eta * (2.0 * g.gx - state.previous_grads->gx),
             eta * (2.0 * g.gy - state.previous_grads->gy)};
      } else {
        t = {-eta * g.gx, eta * g.gy};
      }
      state.previous_grads = g;
      return t;
    }
    case Method::CGD:
      break;
  }
  throw ContractError("explicit_terms: CGD is not an explicit method");
}

// Shared CGD core. Null scalings mean identity.
UpdateResult equilibrium_update(ZeroSumGame& game, const JointPoint& p, const GradientPair& g,
                                double eta, const Vector* scale_x, const Vector* scale_y,
                                const KrylovSettings& krylov, SolveSide side,
                                const Vector* warm_start, Vector* solution_out) {
  const double eta2 = eta * eta;
  const Index m = game.dim_x(), n = game.dim_y();
  Vector sqrt_x = scale_x ? Vector(scale_x->cwiseSqrt()) : Vector();
  Vector sqrt_y = scale_y ? Vector(scale_y->cwiseSqrt()) : Vector();
  auto mul = [](const Vector* s, const Vector& v) -> Vector {
    return s ? Vector(s->cwiseProduct(v)) : v;
  };
  auto mul_sqrt = [](const Vector& s, const Vector& v) -> Vector {
    return s.size() ? Vector(s.cwiseProduct(v)) : v;
  };

  UpdateResult out;
  out.gradients = g;
  if (warm_start && warm_start->size() != (side == SolveSide::X ? m : n)) warm_start = nullptr;

  if (side == SolveSide::X) {
    // (Id + eta^2 s N Sy N' s) z = s (gx + eta N Sy gy),  dx = -eta s z
    const Vector rhs = mul_sqrt(sqrt_x, g.gx + eta * apply_mixed_xy(game, p, mul(scale_y, g.gy)));
    LinearMap op{m, [&](const Vector& z) -> Vector {
                   const Vector inner = apply_mixed_yx(game, p, mul_sqrt(sqrt_x, z));
                   return z + eta2 * mul_sqrt(sqrt_x, apply_mixed_xy(game, p, mul(scale_y, inner)));
                 }};
    KrylovResult solve = cg_solve(op, rhs, warm_start, krylov);
    out.delta_x = -eta * mul_sqrt(sqrt_x, solve.solution);
    out.delta_y = eta * mul(scale_y, g.gy + apply_mixed_yx(game, p, out.delta_x));
    out.cg_iters = solve.iterations;
    out.cg_converged = solve.converged;
    if (solution_out) *solution_out = std::move(solve.solution);
  } else {
    // (Id + eta^2 s N' Sx N s) w = s (gy - eta N' Sx gx),  dy = eta s w
    const Vector rhs = mul_sqrt(sqrt_y, g.gy - eta * apply_mixed_yx(game, p, mul(scale_x, g.gx)));
    LinearMap op{n, [&](const Vector& w) -> Vector {
                   const Vector inner = apply_mixed_xy(game, p, mul_sqrt(sqrt_y, w));
                   return w + eta2 * mul_sqrt(sqrt_y, apply_mixed_yx(game, p, mul(scale_x, inner)));
                 }};
    KrylovResult solve = cg_solve(op, rhs, warm_start, krylov);
    out.delta_y = eta * mul_sqrt(sqrt_y, solve.solution);
    out.delta_x = -eta * mul(scale_x, g.gx + apply_mixed_xy(game, p, out.delta_y));
    out.cg_iters = solve.iterations;
    out.cg_converged = solve.converged;
    if (solution_out) *solution_out = std::move(solve.solution);
  }
  return out;
}

void check_point(const ZeroSumGame& game, const JointPoint& p) {
  check_dims(game, p);
  if (!p.finite()) throw NumericalError("iterate is not finite", p);
}

}  // namespace

UpdateResult explicit_step(Method method, ZeroSumGame& game, SolverState& state,
                           const SolverConfig& config) {
  if (method == Method::CGD) throw ContractError("explicit_step: use cgd_step for CGD");
  check_point(game, state.point);
  const std::int64_t before = game.forward_passes();
  const GradientPair g = evaluate_gradients(game, state.point);
  ExplicitTerms t = explicit_terms(method, game, state.point, g, state, config);
  UpdateResult out;
  out.delta_x = std::move(t.dx);
  out.delta_y = std::move(t.dy);
  out.gradients = g;
  out.forward_passes = game.forward_passes() - before;
  return out;
}

UpdateResult cgd_step(ZeroSumGame& game, SolverState& state, const SolverConfig& config) {
  check_point(game, state.point);
  const std::int64_t before = game.forward_passes();
  const GradientPair g = evaluate_gradients(game, state.point);
  const Vector* warm = config.warm_start && state.warm_start ? &*state.warm_start : nullptr;
  Vector solution;
  UpdateResult out = equilibrium_update(game, state.point, g, config.eta, nullptr, nullptr,
                                        config.krylov, config.solve_side, warm, &solution);
  if (config.warm_start) state.warm_start = std::move(solution);
  out.forward_passes = game.forward_passes() - before;
  return out;
}

Vector counter_strategy(ZeroSumGame& game, const JointPoint& p, double eta,
                        const Vector& delta_x) {
  const GradientPair g = evaluate_gradients(game, p);
  return eta * (g.gy + apply_mixed_yx(game, p, delta_x));
}

UpdateResult scaled_cgd_update(ZeroSumGame& game, const JointPoint& p, double eta,
                               const Vector& scale_x, const Vector& scale_y,
                               const KrylovSettings& krylov, SolveSide side,
                               const Vector* warm_start) {
  check_point(game, p);
  if (scale_x.size() != game.dim_x() || scale_y.size() != game.dim_y())
    throw ContractError("scaled_cgd_update: scaling lengths must match the players");
  if ((scale_x.array() < 0.0).any() || (scale_y.array() < 0.0).any())
    throw ContractError("scaled_cgd_update: scalings must be nonnegative");
  const std::int64_t before = game.forward_passes();
  const GradientPair g = evaluate_gradients(game, p);
  UpdateResult out =
      equilibrium_update(game, p, g, eta, &scale_x, &scale_y, krylov, side, warm_start, nullptr);
  out.forward_passes = game.forward_passes() - before;
  return out;
}

UpdateResult lola_k_update(ZeroSumGame& game, const JointPoint& p, double eta, int order) {
  if (order < 0) throw ContractError("lola_k_update: order must be nonnegative");
  check_point(game, p);
  const std::int64_t before = game.forward_passes();
  const GradientPair g = evaluate_gradients(game, p);
  // Joint system (Id - A) d = b with b = (-eta gx, eta gy) and
  // A(u, v) = (-eta N v, eta N' u); Horner form of sum_k A^k b.
  const Vector bx = -eta * g.gx;
  const Vector by = eta * g.gy;
  Vector dx = bx;
  Vector dy = by;
  for (int k = 0; k < order; ++k) {
    Vector nx = bx - eta * apply_mixed_xy(game, p, dy);
    Vector ny = by + eta * apply_mixed_yx(game, p, dx);
    dx = std::move(nx);
    dy = std::move(ny);
  }
  UpdateResult out;
  out.delta_x = std::move(dx);
  out.delta_y = std::move(dy);
  out.gradients = g;
  out.forward_passes = game.forward_passes() - before;
  return out;
}

UpdateResult rmsprop_preconditioned_step(ZeroSumGame& game, SolverState& state,
                                         const SolverConfig& config) {
  if (!config.rmsprop) throw ContractError("rmsprop_preconditioned_step: rmsprop not configured");
  check_point(game, state.point);
  const RmspropConfig& rms = *config.rmsprop;
  const std::int64_t before = game.forward_passes();
  const GradientPair g = evaluate_gradients(game, state.point);

  if (!state.rmsprop_accum) {
    state.rmsprop_accum =
        RmspropAccumulators{Vector::Zero(game.dim_x()), Vector::Zero(game.dim_y())};
  }
  RmspropAccumulators& acc = *state.rmsprop_accum;
  acc.sx = rms.rho * acc.sx + (1.0 - rms.rho) * g.gx.cwiseAbs2();
  acc.sy = rms.rho * acc.sy + (1.0 - rms.rho) * g.gy.cwiseAbs2();
  const Vector scale_x = (acc.sx.cwiseSqrt().array() + rms.floor).inverse().matrix();
  const Vector scale_y = (acc.sy.cwiseSqrt().array() + rms.floor).inverse().matrix();

  UpdateResult out;
  if (config.method == Method::CGD) {
    const Vector* warm = config.warm_start && state.warm_start ? &*state.warm_start : nullptr;
    Vector solution;
    out = equilibrium_update(game, state.point, g, config.eta, &scale_x, &scale_y, config.krylov,
                             config.solve_side, warm, &solution);
    if (config.warm_start) state.warm_start = std::move(solution);
  } else {
    ExplicitTerms t = explicit_terms(config.method, game, state.point, g, state, config);
    out.delta_x = scale_x.cwiseProduct(t.dx);
    out.delta_y = scale_y.cwiseProduct(t.dy);
    out.gradients = g;
  }
  out.forward_passes = game.forward_passes() - before;
  return out;
}

UpdateResult step(ZeroSumGame& game, SolverState& state, const SolverConfig& config) {
  if (config.rmsprop) return rmsprop_preconditioned_step(game, state, config);
  if (config.method == Method::CGD) return cgd_step(game, state, config);
  return explicit_step(config.method, game, state, config);
}

void apply_update(SolverState& state, const UpdateResult& update) {
  state.point.x += update.delta_x;
  state.point.y += update.delta_y;
  ++state.point.iteration;
}

}  // namespace cgd
