#pragma once

// Experiment runner: single cells, (method, eta) sweeps with CSV/JSON
// output, forward-pass accounting and canned configurations of the
// polynomial, covariance and GAN experiments.

#include "cgd/core.hpp"
#include "cgd/gan.hpp"
#include "cgd/problems.hpp"
#include "cgd/solvers.hpp"
#include "cgd/testkit.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <memory>

namespace cgd {

enum class ProblemKind { Bilinear, ConvexConcave, ConcaveConvex, Covariance, Gan };
std::string_view to_string(ProblemKind k);
ProblemKind problem_kind_from_string(std::string_view name);

struct ProblemSpec {
  ProblemKind kind = ProblemKind::Bilinear;
  double alpha = 1.0;  // polynomial games
  Index dim = 1;       // polynomial games
  double start = 0.5;  // polynomial games start at (start, ..., start)
  Index d = 20;        // covariance
  CovarianceOptions covariance;
  bool gan_full_scale = false;
  std::uint64_t seed = 0;
};

struct ProblemInstance {
  std::unique_ptr<ZeroSumGame> game;
  JointPoint start;
  nlohmann::json provenance;  // ground truth and seeds
};

ProblemInstance make_problem(const ProblemSpec& spec);

struct RunControls {
  std::int64_t iterations = 50;
  double abort_norm = 1e12;
  /// Stop once problem_residual <= target_residual.
  std::optional<double> target_residual;
  /// Stop before an iteration would start past this many forward passes
  /// (0 = unlimited).
  std::int64_t forward_pass_budget = 0;
  /// Keep every stride-th entry plus the initial and final state.
  std::int64_t record_stride = 1;
  bool store_points = false;
  /// Called after each update with the new iteration count.
  std::function<void(const SolverState&)> on_iteration;
};

/// Drives `config` over `game` from `start`. Never throws for numerical
/// failure: non-finite iterates or joint norms above abort_norm end the run
/// with trace.aborted set.
TraceRecord run_cell(ZeroSumGame& game, const JointPoint& start, const SolverConfig& config,
                     const RunControls& controls);

/// per_iteration(method) * iterations + 2 * cumulative CG iterations.
std::int64_t forward_pass_total(Method method, const TraceRecord& trace);

struct ExperimentConfig {
  std::string name = "experiment";
  ProblemSpec problem;
  std::vector<Method> methods;
  std::vector<double> etas;
  double gamma = 1.0;
  std::int64_t iterations = 50;
  KrylovSettings krylov;
  std::optional<RmspropConfig> rmsprop;
  SolveSide solve_side = SolveSide::X;
  std::string output_dir;  // empty: no files
  /// Relative to the initial residual; cells stop once reached.
  std::optional<double> target_residual_ratio;
  std::int64_t forward_pass_budget = 0;
  std::int64_t record_stride = 1;
  double abort_norm = 1e12;
  ClassifierThresholds thresholds;
  /// GAN only: sample and logit dumps every k iterations (0 = none).
  std::int64_t dump_every = 0;

  void validate() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

struct CellSummary {
  Method method = Method::GDA;
  double eta = 0.0;
  std::string id;
  Verdict verdict = Verdict::Bounded;
  std::optional<double> rate;
  std::optional<std::int64_t> divergence_iteration;
  double initial_norm = 0.0;
  double final_norm = 0.0;
  std::optional<double> initial_residual;
  std::optional<double> final_residual;
  std::int64_t iterations_run = 0;
  std::int64_t forward_passes = 0;
  std::string stop_reason;
  std::map<std::int64_t, std::int64_t> cg_histogram;
  std::optional<ModeCoverage> coverage;  // GAN
  std::string error;
  TraceRecord trace;
};

struct SweepSummary {
  ExperimentConfig config;
  nlohmann::json provenance;
  std::vector<CellSummary> cells;

  const CellSummary* find(Method m, double eta) const;
  nlohmann::json to_json() const;
};

std::string cell_id(Method m, double eta);

/// One cell per (method, eta). Cells run in parallel with their own game
/// instances; a failing cell is recorded and never stops the sweep. Writes
/// trace_<cell>.csv and summary.json when config.output_dir is set.
SweepSummary run_sweep(const ExperimentConfig& config);

/// CSV trace with a versioned header comment.
void write_trace_csv(const std::filesystem::path& path, const TraceRecord& trace);
inline constexpr const char* kTraceCsvVersion = "# cgd-trace v1";

namespace canned {
/// Bilinear alpha x'y, all six methods, eta 0.2, gamma 1, 50 iterations.
ExperimentConfig bilinear(double alpha);
/// alpha (x^2 - y^2) or alpha (-x^2 + y^2), same settings.
ExperimentConfig quadratic(double alpha, QuadraticSign sign);
/// Covariance game, d x d, CGD and the baselines over the four stepsizes.
ExperimentConfig covariance(Index d, SigmaSource source);
/// GAN with RMSProp, 2000 iterations.
ExperimentConfig gan(bool full_scale);
}  // namespace canned

}  // namespace cgd
