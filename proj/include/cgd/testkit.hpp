#pragma once

// Independent dense oracles and verification instruments: dense Nash
// solves of the local game, best-response iteration, the gradient-norm
// decrease bound and trajectory classification.

#include "cgd/core.hpp"

#include <json.hpp>

#include <optional>
#include <utility>

namespace cgd {

/// Local game at a point: gradients and the mixed block N = D_xy f, all
/// dense. Assembled by probing the HVP oracles with basis vectors.
struct DenseLocalGame {
  Vector gx;
  Vector gy;
  Matrix Nxy;
  double eta = 0.0;
};

struct DenseHessian {
  Matrix Dxx;
  Matrix Dxy;
  Matrix Dyx;
  Matrix Dyy;
};

DenseLocalGame assemble_local_game(ZeroSumGame& game, const JointPoint& p, double eta);
DenseHessian assemble_hessian(ZeroSumGame& game, const JointPoint& p);

/// Solves [[Id, eta N], [-eta N', Id]] (dx, dy) = -eta (gx, -gy) by LU.
std::pair<Vector, Vector> dense_nash_solve(const DenseLocalGame& g);

struct BestResponseResult {
  Vector delta_x;
  Vector delta_y;
  int rounds = 0;
  bool converged = false;
};

/// Alternating exact best responses: x <- -eta (gx + N y), then
/// y <- eta (gy + N' x). Stops after the first round whose fixed-point
/// residual is below tol.
BestResponseResult best_response_iteration(const DenseLocalGame& g,
                                           std::optional<std::pair<Vector, Vector>> start,
                                           int max_rounds, double tol);

/// Dense form of the first-player rows of the update-rule table, used as an
/// independent oracle for the matrix-free solvers. OGDA here is the
/// Hessian approximation, not the past-gradient method.
std::pair<Vector, Vector> dense_update(Method method, const DenseLocalGame& g,
                                       const DenseHessian& h, double gamma);

/// h(M) = c * phi(M), phi(l) = 2 l - |l| applied to the eigenvalues.
/// HalfPhi uses c = 1/2, Phi uses c = 1.
enum class SpectralConvention { HalfPhi, Phi };

Matrix spectral_h(const Matrix& symmetric, SpectralConvention convention);

struct TheoremBoundReport {
  double gap = 0.0;  // rhs - lhs
  double lhs = 0.0;  // change of |grad_x f|^2 + |grad_y f|^2 over one CGD step
  double rhs = 0.0;
  double eta = 0.0;
  double lipschitz = 0.0;
  SpectralConvention convention = SpectralConvention::HalfPhi;
  JointPoint point;
  Vector spectrum_xx;
  Vector spectrum_yy;
  Vector spectrum_mixed;  // singular values of D_xy f

  nlohmann::json to_json() const;
};

/// Takes one CGD step (CG to `krylov_tol`) and compares the change of the
/// squared gradient norm against the bound. Throws ContractError if
/// eta |D_xx f| or eta |D_yy f| exceeds 1/18.
TheoremBoundReport theorem_bound_report(ZeroSumGame& game, const JointPoint& p, double eta,
                                        double lipschitz,
                                        SpectralConvention convention = SpectralConvention::HalfPhi,
                                        double krylov_tol = 1e-12);

double theorem_bound_gap(ZeroSumGame& game, const JointPoint& p, double eta, double lipschitz);

// --- trajectory classification ---------------------------------------------

enum class Verdict { Converged, Diverged, Bounded };
std::string_view to_string(Verdict v);

enum class TrajectoryMeasure { JointNorm, Residual };

struct ClassifierThresholds {
  double converge_ratio = 1e-2;
  double converge_abs = 1e-6;
  double diverge_ratio = 10.0;
  TrajectoryMeasure measure = TrajectoryMeasure::JointNorm;
};

struct TrajectoryVerdict {
  Verdict kind = Verdict::Bounded;
  std::optional<double> rate;  // slope of log(measure) per iteration
  double initial = 0.0;
  double final = 0.0;
  std::optional<std::int64_t> divergence_iteration;
  ClassifierThresholds thresholds;
};

/// Classifies a series of measure values indexed by iteration.
TrajectoryVerdict classify_series(const std::vector<std::int64_t>& iterations,
                                  const std::vector<double>& values,
                                  const ClassifierThresholds& thresholds = {});

/// Uses entries with iteration <= horizon (all when absent). Aborted runs
/// are Diverged.
TrajectoryVerdict classify_trajectory(const TraceRecord& trace,
                                      std::optional<std::int64_t> horizon = std::nullopt,
                                      const ClassifierThresholds& thresholds = {});

}  // namespace cgd
