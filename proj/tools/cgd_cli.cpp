// cgd: run single cells, sweeps, verification suites and the canned figure
// experiments.

#include "cgd/harness.hpp"
#include "cgd/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

using namespace cgd;

namespace {

struct CommonFlags {
  std::string problem = "bilinear";
  std::vector<std::string> methods{"CGD"};
  std::vector<double> etas{0.2};
  double gamma = 1.0;
  std::int64_t iters = 50;
  std::uint64_t seed = 0;
  double krylov_tol = 1e-6;
  std::string out;
  std::string config;
  double alpha = 1.0;
  long dim = 1;
  long d = 20;
  bool stochastic = false;
  bool rmsprop = false;
  bool full_scale = false;
};

void add_common(CLI::App* app, CommonFlags& f, bool multi) {
  app->add_option("--problem", f.problem,
                  "bilinear | convex-concave | concave-convex | covariance | gan");
  if (multi) {
    app->add_option("--method", f.methods, "methods (repeatable)");
    app->add_option("--eta", f.etas, "stepsizes (repeatable)");
  } else {
    app->add_option("--method", f.methods.front(), "GDA | LCGD | SGA | ConOpt | OGDA | CGD");
    app->add_option("--eta", f.etas.front(), "stepsize");
  }
  app->add_option("--gamma", f.gamma, "SGA/ConOpt weight");
  app->add_option("--iters", f.iters, "iterations");
  app->add_option("--seed", f.seed, "problem seed");
  app->add_option("--krylov-tol", f.krylov_tol, "relative CG tolerance");
  app->add_option("--out", f.out, "output directory");
  app->add_option("--config", f.config, "JSON experiment config; overrides flags");
  app->add_option("--alpha", f.alpha, "polynomial game coefficient");
  app->add_option("--dim", f.dim, "polynomial game dimension");
  app->add_option("--d", f.d, "covariance matrix size");
  app->add_flag("--stochastic", f.stochastic, "covariance: sampled Sigma");
  app->add_flag("--rmsprop", f.rmsprop, "RMSProp scaling (rho 0.9)");
  app->add_flag("--full-scale", f.full_scale, "GAN: 4x128 networks");
}

ExperimentConfig build_config(const CommonFlags& f) {
  ExperimentConfig c;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw ContractError("cannot open config " + f.config);
    c = nlohmann::json::parse(in).get<ExperimentConfig>();
    if (!f.out.empty()) c.output_dir = f.out;
    c.validate();
    return c;
  }
  c.name = "cli";
  c.problem.kind = problem_kind_from_string(f.problem);
  c.problem.alpha = f.alpha;
  c.problem.dim = f.dim;
  c.problem.d = f.d;
  c.problem.seed = f.seed;
  c.problem.gan_full_scale = f.full_scale;
  if (f.stochastic) c.problem.covariance.source = SigmaSource::Stochastic;
  for (const auto& m : f.methods) c.methods.push_back(method_from_string(m));
  c.etas = f.etas;
  c.gamma = f.gamma;
  c.iterations = f.iters;
  c.krylov.tol = f.krylov_tol;
  if (f.rmsprop) c.rmsprop = RmspropConfig{};
  if (c.problem.kind == ProblemKind::Covariance) {
    c.thresholds.measure = TrajectoryMeasure::Residual;
    c.thresholds.converge_ratio = 1e-6;
    c.thresholds.converge_abs = 0.0;
  }
  c.output_dir = f.out;
  c.validate();
  return c;
}

void print_summary(const SweepSummary& s) {
  std::printf("%-18s %-9s %10s %12s %12s %12s %s\n", "cell", "verdict", "iters", "fwd_passes",
              "final_norm", "final_resid", "stop");
  for (const CellSummary& c : s.cells) {
    std::printf("%-18s %-9s %10lld %12lld %12.4g %12s %s\n", c.id.c_str(),
                std::string(to_string(c.verdict)).c_str(), static_cast<long long>(c.iterations_run),
                static_cast<long long>(c.forward_passes), c.final_norm,
                c.final_residual ? std::to_string(*c.final_residual).c_str() : "-",
                c.error.empty() ? c.stop_reason.c_str() : ("error: " + c.error).c_str());
    if (c.coverage)
      std::printf("%18s coverage mode1 %.3f mode2 %.3f neither %.3f\n", "",
                  c.coverage->frac_mode1, c.coverage->frac_mode2, c.coverage->frac_neither);
  }
  if (!s.config.output_dir.empty()) std::printf("wrote %s\n", s.config.output_dir.c_str());
}

int run_figures(const std::string& which, const std::string& out, bool with_full) {
  auto go = [&](ExperimentConfig c, const std::string& sub) {
    if (!out.empty()) c.output_dir = out + "/" + sub;
    std::printf("== %s\n", c.name.c_str());
    std::fflush(stdout);
    print_summary(run_sweep(c));
  };
  const bool all = which == "all";
  if (all || which == "3")
    for (double a : {1.0, 3.0, 6.0}) go(canned::bilinear(a), canned::bilinear(a).name);
  if (all || which == "4")
    for (QuadraticSign s : {QuadraticSign::ConvexConcave, QuadraticSign::ConcaveConvex})
      for (double a : {1.0, 3.0, 6.0}) go(canned::quadratic(a, s), canned::quadratic(a, s).name);
  if (all || which == "5") {
    go(canned::gan(false), "gan_desk");
    if (with_full) go(canned::gan(true), "gan_full");
  }
  if (all || which == "6")
    for (Index d : {20, 40, 60})
      for (SigmaSource src : {SigmaSource::Deterministic, SigmaSource::Stochastic})
        go(canned::covariance(d, src), canned::covariance(d, src).name);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Competitive gradient descent experiments"};
  app.require_subcommand(1);

  CommonFlags run_flags, sweep_flags;
  auto* run = app.add_subcommand("run", "single (method, eta) cell");
  add_common(run, run_flags, false);
  auto* sweep = app.add_subcommand("sweep", "grid over methods and stepsizes");
  add_common(sweep, sweep_flags, true);

  auto* verify = app.add_subcommand("verify", "testkit verification suites");
  bool verify_all = false, verbose = false;
  std::string verify_out;
  verify->add_flag("--all", verify_all, "include the covariance and GAN suites (minutes)");
  verify->add_flag("-v,--verbose", verbose, "detail lines");
  verify->add_option("--out", verify_out, "artifact directory for the long suites");

  auto* figures = app.add_subcommand("figures", "canned experiment configurations");
  std::string which = "all", fig_out;
  bool with_full = false;
  figures->add_option("--which", which, "3 | 4 | 5 | 6 | all");
  figures->add_option("--out", fig_out, "output directory");
  figures->add_flag("--full-scale", with_full, "also run the full-size GAN");

  auto* dump = app.add_subcommand("dump-config", "print a canned config as JSON");
  std::string canned_name = "covariance";
  dump->add_option("name", canned_name, "bilinear | convex-concave | concave-convex | covariance | gan")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      ExperimentConfig c = build_config(run_flags);
      if (c.methods.size() != 1 || c.etas.size() != 1)
        throw ContractError("run takes one method and one stepsize; use sweep for grids");
      print_summary(run_sweep(c));
    } else if (*sweep) {
      print_summary(run_sweep(build_config(sweep_flags)));
    } else if (*verify) {
      const auto results = verify_all ? verify::all(verify_out) : verify::fast();
      int failed = 0;
      for (const auto& r : results) {
        std::printf("%s\n", verify::format(r, verbose).c_str());
        failed += !r.passed;
      }
      return failed ? 1 : 0;
    } else if (*figures) {
      return run_figures(which, fig_out, with_full);
    } else if (*dump) {
      ExperimentConfig c;
      const ProblemKind k = problem_kind_from_string(canned_name);
      switch (k) {
        case ProblemKind::Bilinear: c = canned::bilinear(1.0); break;
        case ProblemKind::ConvexConcave: c = canned::quadratic(1.0, QuadraticSign::ConvexConcave); break;
        case ProblemKind::ConcaveConvex: c = canned::quadratic(1.0, QuadraticSign::ConcaveConvex); break;
        case ProblemKind::Covariance: c = canned::covariance(20, SigmaSource::Deterministic); break;
        case ProblemKind::Gan: c = canned::gan(false); break;
      }
      std::cout << nlohmann::json(c).dump(2) << '\n';
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
