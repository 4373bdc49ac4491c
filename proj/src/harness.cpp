#include "cgd/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cgd {

namespace {

std::string format_eta(double eta) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", eta);
  return buf;
}

const char* side_name(SolveSide s) { return s == SolveSide::X ? "x" : "y"; }

std::string sigma_source_name(SigmaSource s) {
  return s == SigmaSource::Deterministic ? "deterministic" : "stochastic";
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp);
    f << content;
  }
  std::filesystem::rename(tmp, path);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

}  // namespace

std::string_view to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::Bilinear:
      return "bilinear";
    case ProblemKind::ConvexConcave:
      return "convex-concave";
    case ProblemKind::ConcaveConvex:
      return "concave-convex";
    case ProblemKind::Covariance:
      return "covariance";
    case ProblemKind::Gan:
      return "gan";
  }
  return "?";
}

ProblemKind problem_kind_from_string(std::string_view name) {
  for (ProblemKind k : {ProblemKind::Bilinear, ProblemKind::ConvexConcave,
                        ProblemKind::ConcaveConvex, ProblemKind::Covariance, ProblemKind::Gan})
    if (to_string(k) == name) return k;
  throw ContractError("unknown problem: " + std::string(name));
}

ProblemInstance make_problem(const ProblemSpec& spec) {
  ProblemInstance inst;
  inst.provenance = {{"kind", to_string(spec.kind)}, {"seed", spec.seed}};
  switch (spec.kind) {
    case ProblemKind::Bilinear:
    case ProblemKind::ConvexConcave:
    case ProblemKind::ConcaveConvex: {
      if (spec.dim < 1) throw ContractError("problem: dim must be >= 1");
      if (spec.kind == ProblemKind::Bilinear) {
        inst.game = std::make_unique<BilinearGame>(spec.alpha, spec.dim);
      } else {
        const auto sign = spec.kind == ProblemKind::ConvexConcave ? QuadraticSign::ConvexConcave
                                                                  : QuadraticSign::ConcaveConvex;
        inst.game = std::make_unique<SeparableQuadraticGame>(spec.alpha, sign, spec.dim);
      }
      inst.start.x = Vector::Constant(spec.dim, spec.start);
      inst.start.y = Vector::Constant(spec.dim, spec.start);
      inst.provenance["alpha"] = spec.alpha;
      inst.provenance["dim"] = spec.dim;
      inst.provenance["start"] = spec.start;
      break;
    }
    case ProblemKind::Covariance: {
      auto game = std::make_unique<CovarianceGame>(make_covariance_game(spec.d, spec.seed, spec.covariance));
      inst.start = init_covariance_point(game->U(), spec.seed + 1);
      const Vector u = flatten(game->U());
      inst.provenance["d"] = spec.d;
      inst.provenance["U_row_major"] = std::vector<double>(u.data(), u.data() + u.size());
      inst.provenance["init_seed"] = spec.seed + 1;
      inst.provenance["sigma_source"] = sigma_source_name(spec.covariance.source);
      inst.provenance["batch"] = spec.covariance.batch;
      inst.provenance["sample_seed"] = spec.covariance.sample_seed;
      inst.provenance["generator_noise"] =
          spec.covariance.noise == GeneratorNoise::IdentityNoise ? "identity" : "shared_sigma";
      inst.provenance["batch_sharing"] =
          spec.covariance.sharing == BatchSharing::PerIteration ? "per_iteration" : "per_call";
      inst.game = std::move(game);
      break;
    }
    case ProblemKind::Gan: {
      GanProblem gp = spec.gan_full_scale ? GanProblem::full_scale() : GanProblem::desk_scale();
      inst.start = init_gan_point(gp, spec.seed);
      inst.provenance["scale"] = spec.gan_full_scale ? "full" : "desk";
      inst.provenance["generator_layers"] = gp.generator.layer_dims;
      inst.provenance["discriminator_layers"] = gp.discriminator.layer_dims;
      inst.game = std::make_unique<GanGame>(std::move(gp), spec.seed + 7);
      break;
    }
  }
  return inst;
}

TraceRecord run_cell(ZeroSumGame& game, const JointPoint& start, const SolverConfig& config,
                     const RunControls& controls) {
  config.validate();
  if (controls.iterations < 0) throw ContractError("run_cell: iterations must be >= 0");
  if (controls.record_stride < 1) throw ContractError("run_cell: record_stride must be >= 1");
  check_dims(game, start);

  game.reset_counter();
  TraceRecord trace;
  trace.method = config.method;
  SolverState state{start, std::nullopt, std::nullopt, std::nullopt};
  state.point.iteration = 0;
  std::int64_t cg_cumulative = 0;
  std::optional<std::size_t> pending;  // entry still waiting for its gradient norms

  auto push_entry = [&](std::int64_t cg_iters, bool cg_converged) {
    TraceEntry e;
    e.iteration = state.point.iteration;
    e.joint_norm = state.point.norm();
    e.cg_iters = cg_iters;
    e.cg_iters_cumulative = cg_cumulative;
    e.forward_passes_cumulative = game.forward_passes();
    e.cg_converged = cg_converged;
    if (state.point.finite()) e.problem_residual = game.residual(state.point);
    if (controls.store_points) e.point = state.point;
    trace.entries.push_back(std::move(e));
    pending = trace.entries.size() - 1;
  };

  push_entry(0, true);
  trace.stop_reason = "iterations";
  for (std::int64_t k = 0; k < controls.iterations; ++k) {
    if (controls.target_residual && trace.entries.back().iteration == k &&
        trace.entries.back().problem_residual &&
        *trace.entries.back().problem_residual <= *controls.target_residual) {
      trace.stop_reason = "target";
      break;
    }
    if (controls.forward_pass_budget > 0 && game.forward_passes() >= controls.forward_pass_budget) {
      trace.stop_reason = "budget";
      break;
    }
    game.begin_iteration(k);
    UpdateResult u;
    try {
      u = step(game, state, config);
    } catch (const NumericalError& err) {
      trace.aborted = true;
      trace.abort_iteration = k;
      trace.abort_reason = err.what();
      break;
    }
    if (pending) {
      trace.entries[*pending].grad_norm_x = u.gradients.gx.norm();
      trace.entries[*pending].grad_norm_y = u.gradients.gy.norm();
      pending.reset();
    }
    apply_update(state, u);
    cg_cumulative += u.cg_iters;
    ++trace.cg_histogram[u.cg_iters];
    trace.iterations_run = state.point.iteration;

    const double norm = state.point.norm();
    const bool blown = !std::isfinite(norm) || norm > controls.abort_norm;
    std::optional<double> residual;
    if (controls.target_residual && !blown) residual = game.residual(state.point);
    const bool hit_target =
        residual && controls.target_residual && *residual <= *controls.target_residual;
    const bool last = k + 1 == controls.iterations;
    if (blown || hit_target || last || state.point.iteration % controls.record_stride == 0)
      push_entry(u.cg_iters, u.cg_converged);
    if (controls.on_iteration) controls.on_iteration(state);
    if (blown) {
      trace.aborted = true;
      trace.abort_iteration = state.point.iteration;
      trace.abort_reason = std::isfinite(norm) ? "joint norm exceeded abort threshold"
                                               : "non-finite iterate";
      break;
    }
  }
  if (pending && state.point.finite()) {
    const GradientPair g = game.gradients(state.point);
    trace.entries[*pending].grad_norm_x = g.gx.norm();
    trace.entries[*pending].grad_norm_y = g.gy.norm();
  }
  // Make sure the final state is the last entry.
  if (trace.entries.back().iteration != state.point.iteration) {
    push_entry(0, true);
    if (state.point.finite()) {
      const GradientPair g = game.gradients(state.point);
      trace.entries.back().grad_norm_x = g.gx.norm();
      trace.entries.back().grad_norm_y = g.gy.norm();
    }
  }
  if (trace.aborted) trace.stop_reason.clear();
  return trace;
}

std::int64_t forward_pass_total(Method method, const TraceRecord& trace) {
  const std::int64_t cg = trace.entries.empty() ? 0 : trace.entries.back().cg_iters_cumulative;
  return cost::per_iteration(method) * trace.iterations_run + cost::kPerCgIteration * cg;
}

void ExperimentConfig::validate() const {
  if (methods.empty()) throw ContractError("config: no methods");
  if (etas.empty()) throw ContractError("config: no stepsizes");
  for (double eta : etas)
    if (!(eta > 0.0)) throw ContractError("config: eta must be positive");
  if (!(gamma >= 0.0)) throw ContractError("config: gamma must be nonnegative");
  if (iterations < 0) throw ContractError("config: iterations must be >= 0");
  if (!(krylov.tol > 0.0)) throw ContractError("config: krylov tol must be positive");
  if (record_stride < 1) throw ContractError("config: record_stride must be >= 1");
  if (target_residual_ratio && !(*target_residual_ratio > 0.0))
    throw ContractError("config: target_residual_ratio must be positive");
  if (rmsprop && !(rmsprop->rho > 0.0 && rmsprop->rho < 1.0))
    throw ContractError("config: rmsprop rho must be in (0, 1)");
  if (dump_every < 0) throw ContractError("config: dump_every must be >= 0");
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  std::vector<std::string> methods;
  for (Method m : c.methods) methods.emplace_back(to_string(m));
  j = {
      {"name", c.name},
      {"problem",
       {{"kind", to_string(c.problem.kind)},
        {"alpha", c.problem.alpha},
        {"dim", c.problem.dim},
        {"start", c.problem.start},
        {"d", c.problem.d},
        {"sigma_source", sigma_source_name(c.problem.covariance.source)},
        {"batch", c.problem.covariance.batch},
        {"sample_seed", c.problem.covariance.sample_seed},
        {"batch_sharing", c.problem.covariance.sharing == BatchSharing::PerIteration
                              ? "per_iteration"
                              : "per_call"},
        {"generator_noise",
         c.problem.covariance.noise == GeneratorNoise::IdentityNoise ? "identity"
                                                                      : "shared_sigma"},
        {"gan_full_scale", c.problem.gan_full_scale},
        {"seed", c.problem.seed}}},
      {"methods", methods},
      {"etas", c.etas},
      {"gamma", c.gamma},
      {"iterations", c.iterations},
      {"krylov",
       {{"tol", c.krylov.tol},
        {"max_iter", c.krylov.max_iter},
        {"recompute_every", c.krylov.recompute_every},
        {"norm", c.krylov.norm == TerminationNorm::RightHandSide ? "rhs" : "solution"}}},
      {"solve_side", side_name(c.solve_side)},
      {"output_dir", c.output_dir},
      {"forward_pass_budget", c.forward_pass_budget},
      {"record_stride", c.record_stride},
      {"abort_norm", c.abort_norm},
      {"dump_every", c.dump_every},
      {"thresholds",
       {{"converge_ratio", c.thresholds.converge_ratio},
        {"converge_abs", c.thresholds.converge_abs},
        {"diverge_ratio", c.thresholds.diverge_ratio},
        {"measure",
         c.thresholds.measure == TrajectoryMeasure::JointNorm ? "joint_norm" : "residual"}}},
  };
  j["rmsprop"] = c.rmsprop ? nlohmann::json{{"rho", c.rmsprop->rho}, {"floor", c.rmsprop->floor}}
                           : nlohmann::json(nullptr);
  j["target_residual_ratio"] =
      c.target_residual_ratio ? nlohmann::json(*c.target_residual_ratio) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  c = ExperimentConfig{};
  c.name = j.value("name", c.name);
  if (j.contains("problem")) {
    const auto& p = j.at("problem");
    if (p.contains("kind")) c.problem.kind = problem_kind_from_string(p.at("kind").get<std::string>());
    c.problem.alpha = p.value("alpha", c.problem.alpha);
    c.problem.dim = p.value("dim", c.problem.dim);
    c.problem.start = p.value("start", c.problem.start);
    c.problem.d = p.value("d", c.problem.d);
    c.problem.seed = p.value("seed", c.problem.seed);
    c.problem.gan_full_scale = p.value("gan_full_scale", c.problem.gan_full_scale);
    auto& cov = c.problem.covariance;
    const std::string src = p.value("sigma_source", std::string("deterministic"));
    if (src != "deterministic" && src != "stochastic")
      throw ContractError("config: sigma_source must be deterministic or stochastic");
    cov.source = src == "stochastic" ? SigmaSource::Stochastic : SigmaSource::Deterministic;
    cov.batch = p.value("batch", cov.batch);
    cov.sample_seed = p.value("sample_seed", cov.sample_seed);
    cov.sharing = p.value("batch_sharing", std::string("per_iteration")) == "per_call"
                      ? BatchSharing::PerOracleCall
                      : BatchSharing::PerIteration;
    cov.noise = p.value("generator_noise", std::string("identity")) == "shared_sigma"
                    ? GeneratorNoise::SharedSigma
                    : GeneratorNoise::IdentityNoise;
  }
  if (j.contains("methods"))
    for (const auto& m : j.at("methods")) c.methods.push_back(method_from_string(m.get<std::string>()));
  if (j.contains("etas")) c.etas = j.at("etas").get<std::vector<double>>();
  c.gamma = j.value("gamma", c.gamma);
  c.iterations = j.value("iterations", c.iterations);
  if (j.contains("krylov")) {
    const auto& k = j.at("krylov");
    c.krylov.tol = k.value("tol", c.krylov.tol);
    c.krylov.max_iter = k.value("max_iter", c.krylov.max_iter);
    c.krylov.recompute_every = k.value("recompute_every", c.krylov.recompute_every);
    c.krylov.norm = k.value("norm", std::string("rhs")) == "solution" ? TerminationNorm::Solution
                                                                        : TerminationNorm::RightHandSide;
  }
  if (j.contains("rmsprop") && !j.at("rmsprop").is_null()) {
    RmspropConfig r;
    r.rho = j.at("rmsprop").value("rho", r.rho);
    r.floor = j.at("rmsprop").value("floor", r.floor);
    c.rmsprop = r;
  }
  c.solve_side = j.value("solve_side", std::string("x")) == "y" ? SolveSide::Y : SolveSide::X;
  c.output_dir = j.value("output_dir", c.output_dir);
  if (j.contains("target_residual_ratio") && !j.at("target_residual_ratio").is_null())
    c.target_residual_ratio = j.at("target_residual_ratio").get<double>();
  c.forward_pass_budget = j.value("forward_pass_budget", c.forward_pass_budget);
  c.record_stride = j.value("record_stride", c.record_stride);
  c.abort_norm = j.value("abort_norm", c.abort_norm);
  c.dump_every = j.value("dump_every", c.dump_every);
  if (j.contains("thresholds")) {
    const auto& t = j.at("thresholds");
    c.thresholds.converge_ratio = t.value("converge_ratio", c.thresholds.converge_ratio);
    c.thresholds.converge_abs = t.value("converge_abs", c.thresholds.converge_abs);
    c.thresholds.diverge_ratio = t.value("diverge_ratio", c.thresholds.diverge_ratio);
    c.thresholds.measure = t.value("measure", std::string("joint_norm")) == "residual"
                               ? TrajectoryMeasure::Residual
                               : TrajectoryMeasure::JointNorm;
  }
}

std::string cell_id(Method m, double eta) {
  return std::string(to_string(m)) + "_eta" + format_eta(eta);
}

const CellSummary* SweepSummary::find(Method m, double eta) const {
  for (const CellSummary& c : cells)
    if (c.method == m && c.eta == eta) return &c;
  return nullptr;
}

nlohmann::json SweepSummary::to_json() const {
  nlohmann::json cells_json = nlohmann::json::array();
  for (const CellSummary& c : cells) {
    nlohmann::json hist = nlohmann::json::object();
    for (const auto& [k, v] : c.cg_histogram) hist[std::to_string(k)] = v;
    nlohmann::json cj = {
        {"id", c.id},
        {"method", to_string(c.method)},
        {"eta", c.eta},
        {"verdict", to_string(c.verdict)},
        {"rate", c.rate ? nlohmann::json(*c.rate) : nlohmann::json(nullptr)},
        {"divergence_iteration",
         c.divergence_iteration ? nlohmann::json(*c.divergence_iteration) : nlohmann::json(nullptr)},
        {"initial_norm", json_number(c.initial_norm)},
        {"final_norm", json_number(c.final_norm)},
        {"initial_residual",
         c.initial_residual ? json_number(*c.initial_residual) : nlohmann::json(nullptr)},
        {"final_residual",
         c.final_residual ? json_number(*c.final_residual) : nlohmann::json(nullptr)},
        {"iterations_run", c.iterations_run},
        {"forward_passes", c.forward_passes},
        {"stop_reason", c.stop_reason},
        {"cg_histogram", hist},
        {"error", c.error},
    };
    if (c.coverage)
      cj["mode_coverage"] = {{"mode1", c.coverage->frac_mode1},
                             {"mode2", c.coverage->frac_mode2},
                             {"neither", c.coverage->frac_neither}};
    cells_json.push_back(std::move(cj));
  }
  nlohmann::json cfg;
  cgd::to_json(cfg, config);
  return {{"schema", "cgd-summary v1"}, {"config", cfg}, {"provenance", provenance},
          {"cells", cells_json}};
}

void write_trace_csv(const std::filesystem::path& path, const TraceRecord& trace) {
  std::ostringstream s;
  s << kTraceCsvVersion << " method=" << to_string(trace.method) << '\n';
  s << "iteration,forward_passes,cg_iters,cg_iters_cumulative,joint_norm,grad_norm_x,"
       "grad_norm_y,residual,cg_converged\n";
  for (const TraceEntry& e : trace.entries) {
    s << e.iteration << ',' << e.forward_passes_cumulative << ',' << e.cg_iters << ','
      << e.cg_iters_cumulative << ',' << fmt(e.joint_norm) << ',' << fmt(e.grad_norm_x) << ','
      << fmt(e.grad_norm_y) << ',' << (e.problem_residual ? fmt(*e.problem_residual) : "") << ','
      << (e.cg_converged ? 1 : 0) << '\n';
  }
  write_atomically(path, s.str());
}

SweepSummary run_sweep(const ExperimentConfig& config) {
  config.validate();
  SweepSummary summary;
  summary.config = config;
  summary.provenance = make_problem(config.problem).provenance;

  std::vector<std::pair<Method, double>> grid;
  for (Method m : config.methods)
    for (double eta : config.etas) grid.emplace_back(m, eta);
  summary.cells.resize(grid.size());
  const std::filesystem::path out = config.output_dir;

#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CellSummary& cell = summary.cells[i];
    cell.method = grid[i].first;
    cell.eta = grid[i].second;
    cell.id = cell_id(cell.method, cell.eta);
    try {
      ProblemInstance inst = make_problem(config.problem);
      SolverConfig sc;
      sc.method = cell.method;
      sc.eta = cell.eta;
      sc.gamma = config.gamma;
      sc.krylov = config.krylov;
      sc.rmsprop = config.rmsprop;
      sc.solve_side = config.solve_side;
      sc.seed = config.problem.seed;

      RunControls rc;
      rc.iterations = config.iterations;
      rc.abort_norm = config.abort_norm;
      rc.forward_pass_budget = config.forward_pass_budget;
      rc.record_stride = config.record_stride;
      const auto initial_residual = inst.game->residual(inst.start);
      if (config.target_residual_ratio && initial_residual)
        rc.target_residual = *config.target_residual_ratio * *initial_residual;

      auto* gan = dynamic_cast<GanGame*>(inst.game.get());
      JointPoint last = inst.start;
      Matrix dump_noise;
      const std::filesystem::path dump_dir = out / cell.id;
      const bool dumps = gan && config.dump_every > 0 && !config.output_dir.empty();
      auto dump = [&](const JointPoint& p) {
        const Matrix samples = generate(gan->problem(), p.x, dump_noise);
        write_sample_dump(dump_dir, p.iteration, samples);
        write_logit_dump(dump_dir, p.iteration, gan->problem(), p.y);
      };
      if (dumps) {
        std::mt19937_64 rng(config.problem.seed + 99);
        dump_noise = sample_noise(gan->problem().noise_dim, 1000, rng);
        dump(inst.start);
      }
      if (gan) {
        rc.on_iteration = [&](const SolverState& s) {
          if (!s.point.finite()) return;
          last = s.point;
          if (dumps && (s.point.iteration % config.dump_every == 0 ||
                        s.point.iteration == config.iterations))
            dump(s.point);
        };
      }

      cell.trace = run_cell(*inst.game, inst.start, sc, rc);
      const TraceRecord& tr = cell.trace;
      const TrajectoryVerdict v = classify_trajectory(tr, std::nullopt, config.thresholds);
      cell.verdict = v.kind;
      cell.rate = v.rate;
      cell.divergence_iteration = v.divergence_iteration;
      cell.initial_norm = tr.entries.front().joint_norm;
      cell.final_norm = tr.entries.back().joint_norm;
      cell.initial_residual = tr.entries.front().problem_residual;
      cell.final_residual = tr.entries.back().problem_residual;
      cell.iterations_run = tr.iterations_run;
      cell.forward_passes = tr.entries.back().forward_passes_cumulative;
      cell.stop_reason = tr.aborted ? "aborted: " + tr.abort_reason : tr.stop_reason;
      cell.cg_histogram = tr.cg_histogram;
      if (gan && last.finite()) {
        std::mt19937_64 rng(config.problem.seed + 123);
        const Matrix z = sample_noise(gan->problem().noise_dim, 10000, rng);
        cell.coverage = mode_coverage(generate(gan->problem(), last.x, z), gan->problem().mixture);
      }
      if (!config.output_dir.empty()) write_trace_csv(out / ("trace_" + cell.id + ".csv"), tr);
    } catch (const std::exception& e) {
      cell.error = e.what();
      cell.verdict = Verdict::Diverged;
    }
  }

  if (!config.output_dir.empty())
    write_atomically(out / "summary.json", summary.to_json().dump(2) + "\n");
  return summary;
}

namespace canned {

ExperimentConfig bilinear(double alpha) {
  ExperimentConfig c;
  c.name = "bilinear_alpha" + format_eta(alpha);
  c.problem.kind = ProblemKind::Bilinear;
  c.problem.alpha = alpha;
  c.methods = all_methods();
  c.etas = {0.2};
  c.gamma = 1.0;
  c.iterations = 50;
  return c;
}

ExperimentConfig quadratic(double alpha, QuadraticSign sign) {
  ExperimentConfig c = bilinear(alpha);
  c.problem.kind =
      sign == QuadraticSign::ConvexConcave ? ProblemKind::ConvexConcave : ProblemKind::ConcaveConvex;
  c.name = std::string(to_string(c.problem.kind)) + "_alpha" + format_eta(alpha);
  return c;
}

ExperimentConfig covariance(Index d, SigmaSource source) {
  ExperimentConfig c;
  c.name = "covariance_d" + std::to_string(d) + "_" + sigma_source_name(source);
  c.problem.kind = ProblemKind::Covariance;
  c.problem.d = d;
  c.problem.seed = 0;
  c.problem.covariance.source = source;
  c.methods = {Method::CGD, Method::OGDA, Method::SGA, Method::ConOpt};
  c.etas = {0.005, 0.025, 0.1, 0.4};
  c.gamma = 1.0;
  c.iterations = 20'000'000;
  c.target_residual_ratio = 1e-6;
  c.forward_pass_budget = source == SigmaSource::Deterministic ? 60'000'000 : 2'000'000;
  c.record_stride = 1000;
  c.thresholds.measure = TrajectoryMeasure::Residual;
  c.thresholds.converge_ratio = 1e-6;
  c.thresholds.converge_abs = 0.0;
  return c;
}

ExperimentConfig gan(bool full_scale) {
  ExperimentConfig c;
  c.name = full_scale ? "gan_full" : "gan_desk";
  c.problem.kind = ProblemKind::Gan;
  c.problem.gan_full_scale = full_scale;
  c.problem.seed = 0;
  c.methods = {Method::CGD, Method::OGDA, Method::SGA, Method::ConOpt};
  c.etas = {0.4, 0.1, 0.025, 0.005};
  c.gamma = 1.0;
  c.iterations = 2000;
  c.rmsprop = RmspropConfig{0.9, 1e-8};
  c.krylov.max_iter = 100;
  c.record_stride = 10;
  c.dump_every = 500;
  return c;
}

}  // namespace canned

}  // namespace cgd
