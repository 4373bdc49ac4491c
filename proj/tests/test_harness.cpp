#include "support.hpp"

#include "cgd/harness.hpp"

#include <fstream>
#include <sstream>

using namespace cgd;
using namespace cgd::test;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("cgd_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

TraceRecord bilinear_run(Method m, double alpha, std::int64_t iters) {
  BilinearGame g = make_bilinear(alpha, 1);
  SolverConfig c;
  c.method = m;
  c.eta = 0.2;
  RunControls rc;
  rc.iterations = iters;
  return run_cell(g, scalar_point(0.5, 0.5), c, rc);
}

}  // namespace

TEST_CASE("run_cell verdict examples on f = xy" * doctest::may_fail()) {
  CHECK(classify_trajectory(bilinear_run(Method::GDA, 1.0, 50)).kind == Verdict::Diverged);
  CHECK(classify_trajectory(bilinear_run(Method::CGD, 1.0, 50)).kind == Verdict::Converged);
}

TEST_CASE("run_cell examples") {
  const TraceRecord gda = bilinear_run(Method::GDA, 1.0, 50);
  CHECK(gda.entries.size() == 51);
  for (std::size_t k = 1; k < gda.entries.size(); ++k)
    CHECK(gda.entries[k].joint_norm > gda.entries[k - 1].joint_norm);

  const TraceRecord cgd = bilinear_run(Method::CGD, 1.0, 50);
  for (std::size_t k = 1; k < cgd.entries.size(); ++k)
    CHECK(cgd.entries[k].joint_norm < cgd.entries[k - 1].joint_norm);
  CHECK(classify_trajectory(bilinear_run(Method::CGD, 1.0, 500)).kind == Verdict::Converged);

  const TraceRecord none = bilinear_run(Method::CGD, 1.0, 0);
  CHECK(none.entries.size() == 1);
  CHECK(none.iterations_run == 0);
  CHECK(none.entries[0].joint_norm == doctest::Approx(std::sqrt(0.5)));
  CHECK(none.entries[0].grad_norm_x == doctest::Approx(0.5));
}

TEST_CASE("trace accounting is monotone and matches the cost model") {
  for (Method m : all_methods()) {
    CAPTURE(to_string(m));
    const TraceRecord t = bilinear_run(m, 1.0, 30);
    REQUIRE(t.entries.size() == 31);
    for (std::size_t k = 1; k < t.entries.size(); ++k) {
      const TraceEntry& a = t.entries[k - 1];
      const TraceEntry& b = t.entries[k];
      CHECK(b.iteration == a.iteration + 1);
      CHECK(b.forward_passes_cumulative - a.forward_passes_cumulative ==
            cost::per_iteration(m) + 2 * b.cg_iters);
      CHECK(b.cg_iters_cumulative == a.cg_iters_cumulative + b.cg_iters);
    }
    CHECK(forward_pass_total(m, t) == t.entries.back().forward_passes_cumulative);
  }
}

TEST_CASE("forward_pass_total examples") {
  const TraceRecord ogda = bilinear_run(Method::OGDA, 1.0, 100);
  CHECK(forward_pass_total(Method::OGDA, ogda) == 200);
  const TraceRecord conopt = bilinear_run(Method::ConOpt, 1.0, 100);
  CHECK(forward_pass_total(Method::ConOpt, conopt) == 600);

  TraceRecord t;
  t.iterations_run = 10;
  std::int64_t cum = 0;
  TraceEntry e0;
  t.entries.push_back(e0);
  for (std::int64_t cg : {3, 2, 2, 1, 1, 1, 1, 1, 1, 1}) {
    cum += cg;
    TraceEntry e;
    e.cg_iters = cg;
    e.cg_iters_cumulative = cum;
    t.entries.push_back(e);
  }
  CHECK(forward_pass_total(Method::CGD, t) == 68);
}

TEST_CASE("CG histogram and graceful degradation") {
  const TraceRecord t = bilinear_run(Method::CGD, 1.0, 50);
  std::int64_t total = 0;
  for (const auto& [iters, count] : t.cg_histogram) {
    CHECK(iters <= 2);
    total += count;
  }
  CHECK(total == 50);
}

TEST_CASE("abort on blow-up") {
  BilinearGame g = make_bilinear(6.0, 1);
  SolverConfig c;
  c.method = Method::GDA;
  c.eta = 0.2;
  RunControls rc;
  rc.iterations = 1000;
  rc.abort_norm = 1e3;
  const TraceRecord t = run_cell(g, scalar_point(0.5, 0.5), c, rc);
  CHECK(t.aborted);
  REQUIRE(t.abort_iteration.has_value());
  CHECK(*t.abort_iteration < 1000);
  CHECK(t.entries.back().joint_norm > 1e3);
  CHECK(classify_trajectory(t).kind == Verdict::Diverged);
}

TEST_CASE("record stride keeps initial and final state") {
  BilinearGame g = make_bilinear(1.0, 1);
  SolverConfig c;
  c.method = Method::CGD;
  RunControls rc;
  rc.iterations = 25;
  rc.record_stride = 10;
  rc.store_points = true;
  const TraceRecord t = run_cell(g, scalar_point(0.5, 0.5), c, rc);
  std::vector<std::int64_t> its;
  for (const auto& e : t.entries) its.push_back(e.iteration);
  CHECK(its == std::vector<std::int64_t>{0, 10, 20, 25});
  CHECK(t.entries.back().point.has_value());
  CHECK(forward_pass_total(Method::CGD, t) == t.entries.back().forward_passes_cumulative);
}

TEST_CASE("target and budget stops") {
  ProblemSpec spec;
  spec.kind = ProblemKind::Covariance;
  spec.d = 4;
  ProblemInstance inst = make_problem(spec);
  SolverConfig c;
  c.method = Method::CGD;
  c.eta = 0.4;
  RunControls rc;
  rc.iterations = 100000;
  const double r0 = *inst.game->residual(inst.start);
  rc.target_residual = 1e-3 * r0;
  const TraceRecord t = run_cell(*inst.game, inst.start, c, rc);
  CHECK(t.stop_reason == "target");
  CHECK(*t.entries.back().problem_residual <= 1e-3 * r0);

  rc.target_residual.reset();
  rc.forward_pass_budget = 100;
  const TraceRecord b = run_cell(*inst.game, inst.start, c, rc);
  CHECK(b.stop_reason == "budget");
  CHECK(b.entries.back().forward_passes_cumulative >= 100);
  CHECK(b.iterations_run < 100);
}

TEST_CASE("config validation and JSON round trip") {
  ExperimentConfig c = canned::covariance(20, SigmaSource::Stochastic);
  c.output_dir = "out/x";
  const nlohmann::json j = c;
  const ExperimentConfig back = j.get<ExperimentConfig>();
  CHECK(nlohmann::json(back) == j);
  CHECK(back.methods == c.methods);
  CHECK(back.etas == c.etas);
  CHECK(back.problem.covariance.source == SigmaSource::Stochastic);

  ExperimentConfig g = canned::gan(false);
  CHECK(nlohmann::json(nlohmann::json(g).get<ExperimentConfig>()) == nlohmann::json(g));
  CHECK(nlohmann::json(g)["rmsprop"]["rho"] == 0.9);

  ExperimentConfig bad = canned::bilinear(1.0);
  bad.etas.clear();
  CHECK_THROWS_AS(bad.validate(), ContractError);
  bad = canned::bilinear(1.0);
  bad.etas = {-0.1};
  CHECK_THROWS_AS(bad.validate(), ContractError);
  CHECK_THROWS_AS(run_sweep(bad), ContractError);
}

TEST_CASE("sweep completeness and byte-identical reruns") {
  ExperimentConfig c = canned::covariance(4, SigmaSource::Deterministic);
  c.iterations = 300;
  c.record_stride = 7;
  const auto a = scratch("sweep_a"), b = scratch("sweep_b");
  c.output_dir = a.string();
  const SweepSummary sa = run_sweep(c);
  c.output_dir = b.string();
  const SweepSummary sb = run_sweep(c);

  CHECK(sa.cells.size() == c.methods.size() * c.etas.size());
  for (Method m : c.methods)
    for (double eta : c.etas) {
      const CellSummary* cell = sa.find(m, eta);
      REQUIRE(cell != nullptr);
      CHECK(cell->error.empty());
      CHECK(cell->id == cell_id(m, eta));
      const auto f = a / ("trace_" + cell->id + ".csv");
      REQUIRE(std::filesystem::exists(f));
      CHECK(slurp(f) == slurp(b / f.filename()));
      CHECK(slurp(f).rfind(std::string(kTraceCsvVersion) + " method=", 0) == 0);
      if (cell->verdict == Verdict::Diverged && cell->error.empty())
        CHECK((cell->divergence_iteration.has_value() || cell->trace.aborted));
    }
  const nlohmann::json ja = nlohmann::json::parse(slurp(a / "summary.json"));
  CHECK(ja["schema"] == "cgd-summary v1");
  CHECK(ja["cells"].size() == sa.cells.size());
  CHECK(ja["provenance"].contains("U_row_major"));
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST_CASE("GAN sweep dumps") {
  ExperimentConfig c = canned::gan(false);
  c.methods = {Method::GDA};
  c.etas = {0.005};
  c.iterations = 10;
  c.dump_every = 4;
  const auto dir = scratch("gan_dumps");
  c.output_dir = dir.string();
  const SweepSummary s = run_sweep(c);
  REQUIRE(s.cells.size() == 1);
  CHECK(s.cells[0].error.empty());
  CHECK(s.cells[0].coverage.has_value());
  int samples = 0, logits = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir / s.cells[0].id)) {
    const std::string n = e.path().filename().string();
    samples += n.rfind("samples_", 0) == 0;
    logits += n.rfind("logits_", 0) == 0;
  }
  CHECK(samples == (10 + 3) / 4 + 1);
  CHECK(logits == samples);
  std::filesystem::remove_all(dir);
}

TEST_CASE("problem construction") {
  ProblemSpec s;
  s.kind = ProblemKind::ConcaveConvex;
  s.alpha = 3.0;
  ProblemInstance inst = make_problem(s);
  CHECK(inst.start.x[0] == 0.5);
  CHECK(inst.game->gradients(inst.start).gx[0] == doctest::Approx(-3.0));
  for (ProblemKind k : {ProblemKind::Bilinear, ProblemKind::ConvexConcave,
                        ProblemKind::ConcaveConvex, ProblemKind::Covariance, ProblemKind::Gan})
    CHECK(problem_kind_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(problem_kind_from_string("mnist"), ContractError);
}
