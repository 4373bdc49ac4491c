#pragma once

// Update rules for two-player zero-sum games: GDA, LCGD, SGA, ConOpt, OGDA
// and competitive gradient descent, plus the RMSProp-scaled variants and the
// truncated-series (higher-order LOLA) update.

#include "cgd/core.hpp"
#include "cgd/krylov.hpp"

#include <optional>

namespace cgd {

struct RmspropAccumulators {
  Vector sx;  // running mean of gx^2
  Vector sy;  // running mean of gy^2
};

struct SolverState {
  JointPoint point;
  std::optional<GradientPair> previous_grads;  // OGDA memory
  std::optional<RmspropAccumulators> rmsprop_accum;
  std::optional<Vector> warm_start;  // previous CG solution
};

struct UpdateResult {
  Vector delta_x;
  Vector delta_y;
  Index cg_iters = 0;
  bool cg_converged = true;
  std::int64_t forward_passes = 0;
  GradientPair gradients;  // at the point the update was computed from
};

/// GDA, LCGD, SGA, ConOpt or OGDA. OGDA stores the current gradients in
/// `state`; its first step is a plain GDA step.
UpdateResult explicit_step(Method method, ZeroSumGame& game, SolverState& state,
                           const SolverConfig& config);

/// Nash equilibrium of the regularized bilinear local game. Solves one
/// player's block with CG (warm-started from state.warm_start) and derives
/// the other as the exact counter strategy.
UpdateResult cgd_step(ZeroSumGame& game, SolverState& state, const SolverConfig& config);

/// Best response of the y-player to a given x-update:
/// eta (grad_y f + D_yx f delta_x).
Vector counter_strategy(ZeroSumGame& game, const JointPoint& p, double eta,
                        const Vector& delta_x);

/// Nash update of the local game with the quadratic penalties replaced by
/// x' Sx^-1 x / (2 eta) and y' Sy^-1 y / (2 eta), for diagonal Sx, Sy given
/// as vectors. With unit scalings this is exactly cgd_step.
UpdateResult scaled_cgd_update(ZeroSumGame& game, const JointPoint& p, double eta,
                               const Vector& scale_x, const Vector& scale_y,
                               const KrylovSettings& krylov, SolveSide side,
                               const Vector* warm_start);

/// Replaces the inverse in the joint CGD system by the partial sum
/// sum_{k <= order} A^k. Order 0 is GDA, order 1 is LCGD.
UpdateResult lola_k_update(ZeroSumGame& game, const JointPoint& p, double eta, int order);

/// RMSProp: updates the accumulators with the current gradients, then takes
/// the configured method's step under diagonal scaling 1 / (sqrt(s) + floor).
UpdateResult rmsprop_preconditioned_step(ZeroSumGame& game, SolverState& state,
                                         const SolverConfig& config);

/// Dispatches on config.method and config.rmsprop.
UpdateResult step(ZeroSumGame& game, SolverState& state, const SolverConfig& config);

/// Adds the update to state.point and advances its iteration counter.
void apply_update(SolverState& state, const UpdateResult& update);

}  // namespace cgd
