#include "cgd/krylov.hpp"

#include <cmath>
#include <limits>

namespace cgd {

bool termination_check(double residual_norm, double reference_norm, double tol) {
  return residual_norm <= tol * std::max(reference_norm, std::numeric_limits<double>::min());
}

KrylovResult cg_solve(const LinearMap& op, const Vector& rhs, const Vector* warm_start,
                      const KrylovSettings& settings) {
  if (rhs.size() != op.dim) throw ContractError("cg_solve: rhs length does not match operator");
  if (!rhs.allFinite()) throw ContractError("cg_solve: rhs must be finite");
  if (!(settings.tol > 0.0)) throw ContractError("cg_solve: tolerance must be positive");
  if (warm_start && warm_start->size() != op.dim)
    throw ContractError("cg_solve: warm start length does not match operator");

  const Index max_iter = settings.max_iter > 0 ? settings.max_iter : op.dim;
  const double rhs_norm = rhs.norm();

  KrylovResult result;
  if (rhs_norm == 0.0) {
    result.solution = Vector::Zero(op.dim);
    result.converged = true;
    return result;
  }

  Vector x;
  Vector r;
  Index applications = 0;
  if (warm_start && warm_start->squaredNorm() > 0.0) {
    x = *warm_start;
    r = rhs - op(x);
    ++applications;
  } else {
    x = Vector::Zero(op.dim);
    r = rhs;
  }

  auto reference = [&](const Vector& iterate) {
    return settings.norm == TerminationNorm::RightHandSide ? rhs_norm : iterate.norm();
  };

  double rr = r.squaredNorm();
  Vector best = x;
  double best_res = std::sqrt(rr);

  if (termination_check(std::sqrt(rr), reference(x), settings.tol)) {
    result.solution = std::move(x);
    result.iterations = applications;
    result.final_relative_residual = std::sqrt(rr) / rhs_norm;
    result.converged = true;
    return result;
  }

  Vector p = r;
  Vector q(op.dim);
  bool converged = false;
  Index k = 0;
  while (k < max_iter) {
    q = op(p);
    ++applications;
    ++k;
    const double pq = p.dot(q);
    if (!(pq > 0.0)) break;  // breakdown: operator not SPD along p
    const double alpha = rr / pq;
    x.noalias() += alpha * p;
    if (settings.recompute_every > 0 && k % settings.recompute_every == 0) {
      r = rhs - op(x);
      ++applications;
    } else {
      r.noalias() -= alpha * q;
    }
    const double rr_next = r.squaredNorm();
    const double res = std::sqrt(rr_next);
    if (res < best_res) {
      best_res = res;
      best = x;
    }
    if (termination_check(res, reference(x), settings.tol)) {
      converged = true;
      rr = rr_next;
      break;
    }
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }

  result.iterations = applications;
  result.converged = converged;
  if (converged) {
    result.solution = std::move(x);
    result.final_relative_residual = std::sqrt(rr) / rhs_norm;
  } else {
    result.solution = std::move(best);
    result.final_relative_residual = best_res / rhs_norm;
  }
  return result;
}

}  // namespace cgd
