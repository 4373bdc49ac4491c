#pragma once

// Matrix-free conjugate gradients for the symmetric positive-definite
// systems (Id + eta^2 D_xy D_yx) that appear in zero-sum CGD.

#include "cgd/core.hpp"

#include <functional>

namespace cgd {

struct LinearMap {
  Index dim = 0;
  std::function<Vector(const Vector&)> apply;

  Vector operator()(const Vector& v) const { return apply(v); }
};

struct KrylovResult {
  Vector solution;
  /// Number of operator applications, including the one needed to form the
  /// initial residual of a warm start.
  Index iterations = 0;
  double final_relative_residual = 0.0;
  bool converged = false;
};

/// True iff residual_norm <= tol * max(reference_norm, smallest normal double).
bool termination_check(double residual_norm, double reference_norm, double tol);

/// Solves op(x) = rhs. `warm_start`, when given, is the initial iterate.
/// Hitting max_iter is not an error: the iterate with the smallest residual
/// seen is returned with converged = false.
KrylovResult cg_solve(const LinearMap& op, const Vector& rhs, const Vector* warm_start,
                      const KrylovSettings& settings);

}  // namespace cgd
