#pragma once

// Shared domain types and the oracle contract every two-player zero-sum
// problem implements.
//
// Sign convention: the x-player minimizes f, the y-player minimizes g = -f.
// Gradients are always reported as (grad_x f, grad_y f); the y-player's own
// gradient is therefore -gy.

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cgd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Thrown when a caller violates a documented precondition (dimensions,
/// parameter ranges).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct JointPoint {
  Vector x;
  Vector y;
  std::int64_t iteration = 0;

  double norm() const { return std::sqrt(x.squaredNorm() + y.squaredNorm()); }
  bool finite() const { return x.allFinite() && y.allFinite(); }
};

/// Thrown when an oracle produces NaN/Inf. Carries the point it was
/// evaluated at so the run can be diagnosed after the fact.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, JointPoint at)
      : std::runtime_error(what), point_(std::move(at)) {}
  const JointPoint& point() const { return point_; }

 private:
  JointPoint point_;
};

struct GradientPair {
  Vector gx;  // grad_x f
  Vector gy;  // grad_y f
};

enum class Method { GDA, LCGD, SGA, ConOpt, OGDA, CGD };

std::string_view to_string(Method m);
Method method_from_string(std::string_view name);
const std::vector<Method>& all_methods();

/// Forward passes charged per oracle call. A gradient pair costs one forward
/// and one backward sweep; a single-block Hessian-vector product costs one.
namespace cost {
inline constexpr std::int64_t kGradientPair = 2;
inline constexpr std::int64_t kHvp = 1;

/// Per-iteration forward passes of a method, excluding CG iterations.
std::int64_t per_iteration(Method m);
/// Additional forward passes per CG operator application (two mixed HVPs).
inline constexpr std::int64_t kPerCgIteration = 2 * kHvp;
}  // namespace cost

/// Oracle bundle for a zero-sum game f(x, y).
///
/// Derived classes implement the raw oracles. Callers go through the free
/// functions below (evaluate_gradients, apply_mixed_xy, ...), which check
/// dimensions, detect non-finite output and charge the forward-pass counter.
class ZeroSumGame {
 public:
  virtual ~ZeroSumGame() = default;

  virtual Index dim_x() const = 0;
  virtual Index dim_y() const = 0;

  virtual double value(const JointPoint& p) = 0;
  virtual GradientPair gradients(const JointPoint& p) = 0;
  /// v (length n) -> D_xy f v (length m)
  virtual Vector mixed_xy(const JointPoint& p, const Vector& v) = 0;
  /// u (length m) -> D_yx f u (length n)
  virtual Vector mixed_yx(const JointPoint& p, const Vector& u) = 0;
  /// u -> D_xx f u. Default: central differences of grad_x f.
  virtual Vector hessian_xx(const JointPoint& p, const Vector& u);
  /// v -> D_yy f v. Default: central differences of grad_y f.
  virtual Vector hessian_yy(const JointPoint& p, const Vector& v);

  /// Called by the run loop once before each outer iteration; stochastic
  /// problems resample their batch here.
  virtual void begin_iteration(std::int64_t /*iteration*/) {}

  /// Optional problem-specific progress measure (e.g. covariance residual).
  virtual std::optional<double> residual(const JointPoint& /*p*/) const {
    return std::nullopt;
  }

  virtual std::string name() const = 0;

  std::int64_t forward_passes() const { return forward_passes_; }
  void charge(std::int64_t passes) { forward_passes_ += passes; }
  void reset_counter() { forward_passes_ = 0; }

 private:
  std::int64_t forward_passes_ = 0;
};

void check_dims(const ZeroSumGame& game, const JointPoint& p);

GradientPair evaluate_gradients(ZeroSumGame& game, const JointPoint& p);
Vector apply_mixed_xy(ZeroSumGame& game, const JointPoint& p, const Vector& v);
Vector apply_mixed_yx(ZeroSumGame& game, const JointPoint& p, const Vector& u);
Vector apply_hessian_xx(ZeroSumGame& game, const JointPoint& p, const Vector& u);
Vector apply_hessian_yy(ZeroSumGame& game, const JointPoint& p, const Vector& v);

enum class TerminationNorm { RightHandSide, Solution };

struct KrylovSettings {
  double tol = 1e-6;
  /// Cap on CG steps; 0 means "dimension of the system". The warm-start
  /// residual and periodic recomputations are not counted against it.
  Index max_iter = 0;
  Index recompute_every = 50;
  TerminationNorm norm = TerminationNorm::RightHandSide;
};

struct RmspropConfig {
  double rho = 0.9;
  double floor = 1e-8;
};

enum class SolveSide { X, Y };

struct SolverConfig {
  Method method = Method::CGD;
  double eta = 0.2;
  double gamma = 1.0;
  KrylovSettings krylov;
  std::optional<RmspropConfig> rmsprop;
  SolveSide solve_side = SolveSide::X;
  bool warm_start = true;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TraceEntry {
  std::int64_t iteration = 0;
  std::optional<JointPoint> point;  // stored when the run asks for it
  double joint_norm = 0.0;
  double grad_norm_x = 0.0;
  double grad_norm_y = 0.0;
  std::int64_t cg_iters = 0;             // this iteration
  std::int64_t cg_iters_cumulative = 0;  // all iterations so far
  std::int64_t forward_passes_cumulative = 0;
  std::optional<double> problem_residual;
  bool cg_converged = true;
};

struct TraceRecord {
  Method method = Method::GDA;
  std::vector<TraceEntry> entries;
  std::int64_t iterations_run = 0;
  bool aborted = false;
  std::optional<std::int64_t> abort_iteration;
  std::string abort_reason;
  std::string stop_reason;  // "iterations", "target" or "budget" when not aborted
  std::map<std::int64_t, std::int64_t> cg_histogram;  // cg iterations -> count
};

}  // namespace cgd
