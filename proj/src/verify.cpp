#include "cgd/verify.hpp"

#include "cgd/hvp.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

namespace cgd::verify {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Vector joint(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

double rel(const Vector& a, const Vector& b) {
  const double s = std::max(a.norm(), b.norm());
  return s == 0.0 ? 0.0 : (a - b).norm() / s;
}

Vector gaussian(Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal;
  Vector v(n);
  for (auto& e : v) e = scale * normal(rng);
  return v;
}

JointPoint gaussian_point(const ZeroSumGame& g, std::mt19937_64& rng, double scale = 1.0) {
  return {gaussian(g.dim_x(), rng, scale), gaussian(g.dim_y(), rng, scale), 0};
}

/// Runs `body` and fills timing and the runtime part of the verdict.
template <class F>
CheckResult timed(int id, std::string title, double limit, F&& body) {
  CheckResult r;
  r.id = id;
  r.title = std::move(title);
  r.limit_seconds = limit;
  const auto t0 = Clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.summary = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  if (r.seconds >= limit) {
    r.passed = false;
    r.details.push_back(fmt("runtime %.1f s exceeds the %.0f s limit", r.seconds, limit));
  }
  return r;
}

SolverState fresh(const JointPoint& p) { return {p, std::nullopt, std::nullopt, std::nullopt}; }

std::string verdicts_line(const SweepSummary& s) {
  std::string out;
  for (const CellSummary& c : s.cells) {
    if (!out.empty()) out += ", ";
    out += std::string(to_string(c.method)) + "=" + std::string(to_string(c.verdict));
    if (c.rate) out += fmt("(%.4f)", *c.rate);
  }
  return out;
}

Verdict verdict_of(const SweepSummary& s, Method m) {
  const CellSummary* c = s.find(m, s.config.etas.front());
  if (!c) throw std::runtime_error("missing cell " + std::string(to_string(m)));
  return c->verdict;
}

/// Appends a failure line when `ok` is false.
void expect(CheckResult& r, bool ok, const std::string& what) {
  if (!ok) {
    r.passed = false;
    r.details.push_back("failed: " + what);
  }
}

GradientPair fd_value_gradient(ZeroSumGame& game, const JointPoint& p, double h = 1e-6) {
  GradientPair g{Vector(p.x.size()), Vector(p.y.size())};
  auto probe = [&](Vector JointPoint::*block, Index i) {
    JointPoint a = p, b = p;
    const double step = h * (1.0 + std::abs((p.*block)[i]));
    (a.*block)[i] += step;
    (b.*block)[i] -= step;
    return (game.value(a) - game.value(b)) / (2.0 * step);
  };
  for (Index i = 0; i < p.x.size(); ++i) g.gx[i] = probe(&JointPoint::x, i);
  for (Index i = 0; i < p.y.size(); ++i) g.gy[i] = probe(&JointPoint::y, i);
  return g;
}

}  // namespace

CheckResult closed_form_nash(std::uint64_t seed) {
  return timed(1, "closed-form Nash", 5.0, [&](CheckResult& r) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dim(1, 20);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst = 0.0;
    int br_rounds = 0;
    r.passed = true;
    for (int trial = 0; trial < 50; ++trial) {
      const Index m = dim(rng), n = dim(rng);
      QuadraticGame game = QuadraticGame::random(m, n, rng, 0.5 + 2.5 * unif(rng), unif(rng));
      const JointPoint p = gaussian_point(game, rng);
      DenseLocalGame lg = assemble_local_game(game, p, 1.0);
      const double s = Eigen::JacobiSVD<Matrix>(lg.Nxy).singularValues()[0];
      lg.eta = (0.1 + 0.8 * unif(rng)) / s;

      SolverConfig c;
      c.method = Method::CGD;
      c.eta = lg.eta;
      c.krylov.tol = 1e-10;
      SolverState st = fresh(p);
      const UpdateResult u = cgd_step(game, st, c);
      const auto [dx, dy] = dense_nash_solve(lg);
      const BestResponseResult br = best_response_iteration(lg, std::nullopt, 20000, 1e-13);
      expect(r, br.converged, fmt("best response did not converge in trial %d", trial));
      br_rounds = std::max(br_rounds, br.rounds);
      const Vector a = joint(u.delta_x, u.delta_y), b = joint(dx, dy),
                   c3 = joint(br.delta_x, br.delta_y);
      worst = std::max({worst, rel(a, b), rel(a, c3), rel(b, c3)});
    }
    expect(r, worst <= 1e-6, fmt("pairwise relative error %.3e > 1e-6", worst));
    r.summary = fmt("50 games, max pairwise rel err %.2e (tol 1e-6), best-response rounds <= %d",
                    worst, br_rounds);
  });
}

CheckResult series_recovery(std::uint64_t seed) {
  return timed(2, "series recovery", 5.0, [&](CheckResult& r) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dim(1, 10);
    r.passed = true;
    double e0 = 0.0, e1 = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      QuadraticGame game = QuadraticGame::random(dim(rng), dim(rng), rng, 1.5, 0.8);
      const JointPoint p = gaussian_point(game, rng);
      SolverConfig c;
      c.eta = 0.2;
      c.method = Method::GDA;
      SolverState s0 = fresh(p), s1 = fresh(p);
      const UpdateResult gda = explicit_step(Method::GDA, game, s0, c);
      const UpdateResult lcgd = explicit_step(Method::LCGD, game, s1, c);
      const UpdateResult l0 = lola_k_update(game, p, 0.2, 0);
      const UpdateResult l1 = lola_k_update(game, p, 0.2, 1);
      e0 = std::max(e0, rel(joint(l0.delta_x, l0.delta_y), joint(gda.delta_x, gda.delta_y)));
      e1 = std::max(e1, rel(joint(l1.delta_x, l1.delta_y), joint(lcgd.delta_x, lcgd.delta_y)));
    }
    expect(r, e0 <= 1e-12, fmt("order 0 vs GDA %.3e", e0));
    expect(r, e1 <= 1e-12, fmt("order 1 vs LCGD %.3e", e1));

    BilinearGame b = make_bilinear(1.0, 1);
    const JointPoint p{Vector::Constant(1, 0.5), Vector::Constant(1, 0.5), 0};
    SolverConfig c;
    c.method = Method::CGD;
    c.eta = 0.2;
    c.krylov.tol = 1e-14;
    SolverState st = fresh(p);
    const UpdateResult exact = cgd_step(b, st, c);
    const UpdateResult l50 = lola_k_update(b, p, 0.2, 50);
    const double e50 = rel(joint(l50.delta_x, l50.delta_y), joint(exact.delta_x, exact.delta_y));
    expect(r, e50 <= 1e-6, fmt("order 50 vs CGD %.3e", e50));
    r.summary = fmt("order0~GDA %.1e, order1~LCGD %.1e (tol 1e-12); order50~CGD %.1e (tol 1e-6)",
                    e0, e1, e50);
  });
}

CheckResult polynomial_bilinear() {
  return timed(3, "bilinear polynomial game", 1.0, [&](CheckResult& r) {
    r.passed = true;
    for (double alpha : {1.0, 3.0, 6.0}) {
      const SweepSummary s = run_sweep(canned::bilinear(alpha));
      r.details.push_back(fmt("alpha=%g: ", alpha) + verdicts_line(s));
      auto v = [&](Method m) { return verdict_of(s, m); };
      const std::string a = fmt("alpha=%g ", alpha);
      expect(r, v(Method::GDA) == Verdict::Diverged, a + "expected GDA Diverged");
      if (alpha == 1.0) {
        for (Method m : {Method::LCGD, Method::SGA, Method::ConOpt, Method::OGDA, Method::CGD})
          expect(r, v(m) == Verdict::Converged, a + "expected " + std::string(to_string(m)) + " Converged");
      } else if (alpha == 3.0) {
        expect(r, v(Method::OGDA) == Verdict::Diverged, a + "expected OGDA Diverged");
        expect(r, v(Method::ConOpt) != Verdict::Converged, a + "expected ConOpt not Converged");
        expect(r, v(Method::SGA) != Verdict::Converged, a + "expected SGA not Converged");
      } else {
        for (Method m : all_methods())
          if (m != Method::CGD)
            expect(r, v(m) != Verdict::Converged,
                   a + "expected " + std::string(to_string(m)) + " Diverged or Bounded");
        expect(r, v(Method::CGD) == Verdict::Converged, a + "expected CGD Converged");
      }
    }
    int failed = 0;
    for (const auto& d : r.details) failed += d.rfind("failed", 0) == 0;
    r.summary = failed ? fmt("%d sub-checks failed", failed) : "all verdicts as expected";
  });
}

CheckResult polynomial_quadratic() {
  return timed(4, "separable quadratic games", 1.0, [&](CheckResult& r) {
    r.passed = true;
    for (QuadraticSign sign : {QuadraticSign::ConvexConcave, QuadraticSign::ConcaveConvex}) {
      for (double alpha : {1.0, 3.0, 6.0}) {
        const SweepSummary s = run_sweep(canned::quadratic(alpha, sign));
        const bool cc = sign == QuadraticSign::ConvexConcave;
        const std::string a = fmt("%s alpha=%g ", cc ? "convex-concave" : "concave-convex", alpha);
        r.details.push_back(a + verdicts_line(s));
        auto v = [&](Method m) { return verdict_of(s, m); };
        if (cc && alpha == 1.0) {
          for (Method m : all_methods())
            expect(r, v(m) == Verdict::Converged, a + "expected " + std::string(to_string(m)) + " Converged");
          const double con = s.find(Method::ConOpt, 0.2)->rate.value_or(0.0);
          const double ogda = s.find(Method::OGDA, 0.2)->rate.value_or(-1e300);
          for (Method m : all_methods()) {
            const CellSummary* c = s.find(m, 0.2);
            if (m == Method::ConOpt || m == Method::OGDA || !c->rate) continue;
            expect(r, con < *c->rate, a + "expected ConOpt rate strictly fastest vs " +
                                          std::string(to_string(m)));
            expect(r, ogda > *c->rate, a + "expected OGDA rate strictly slowest vs " +
                                           std::string(to_string(m)));
          }
        } else if (cc && alpha == 3.0) {
          for (Method m : {Method::OGDA, Method::ConOpt})
            expect(r, v(m) == Verdict::Diverged, a + "expected " + std::string(to_string(m)) + " Diverged");
          for (Method m : {Method::GDA, Method::SGA, Method::LCGD, Method::CGD})
            expect(r, v(m) == Verdict::Converged, a + "expected " + std::string(to_string(m)) + " Converged");
        } else if (cc) {
          for (Method m : all_methods())
            expect(r, v(m) == Verdict::Diverged, a + "expected " + std::string(to_string(m)) + " Diverged");
        } else if (alpha == 1.0) {
          expect(r, v(Method::ConOpt) == Verdict::Converged, a + "expected ConOpt Converged");
          for (Method m : all_methods())
            if (m != Method::ConOpt)
              expect(r, v(m) == Verdict::Diverged, a + "expected " + std::string(to_string(m)) + " Diverged");
        } else {
          expect(r, v(Method::ConOpt) == Verdict::Diverged, a + "expected ConOpt Diverged");
        }
      }
    }
    int failed = 0;
    for (const auto& d : r.details) failed += d.rfind("failed", 0) == 0;
    r.summary = failed ? fmt("%d sub-checks failed", failed) : "all verdicts and rate orderings as expected";
  });
}

CheckResult theorem_bound(std::uint64_t seed) {
  return timed(5, "gradient-norm bound (L = 0)", 10.0, [&](CheckResult& r) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dim(1, 12);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst = std::numeric_limits<double>::infinity();
    double worst_phi = std::numeric_limits<double>::infinity();
    nlohmann::json worst_report;
    for (int trial = 0; trial < 100; ++trial) {
      const double eta = 0.02 + 0.5 * unif(rng);
      QuadraticGame game = QuadraticGame::random(dim(rng), dim(rng), rng, 4.0 * unif(rng),
                                                 unif(rng) / (18.0 * eta));
      const JointPoint p = gaussian_point(game, rng);
      const TheoremBoundReport rep = theorem_bound_report(game, p, eta, 0.0);
      if (rep.gap < worst) {
        worst = rep.gap;
        worst_report = rep.to_json();
      }
      worst_phi = std::min(
          worst_phi, theorem_bound_report(game, p, eta, 0.0, SpectralConvention::Phi).gap);
    }
    r.passed = worst >= -1e-8;
    if (!r.passed) r.details.push_back("worst case: " + worst_report.dump());
    r.details.push_back(fmt("informational: literal phi convention min gap %.3e", worst_phi));
    r.summary = fmt("100 points, min gap %.3e (tol -1e-8)", worst);
  });
}

CheckResult covariance(const std::string& output_dir) {
  return timed(6, "covariance estimation d=20", 300.0, [&](CheckResult& r) {
    ExperimentConfig c = canned::covariance(20, SigmaSource::Deterministic);
    c.output_dir = output_dir;
    const SweepSummary s = run_sweep(c);
    r.passed = true;
    std::optional<std::int64_t> best_cgd, best_base;
    std::string best_cgd_id, best_base_id;
    for (const CellSummary& cell : s.cells) {
      const bool conv = cell.verdict == Verdict::Converged;
      r.details.push_back(fmt("%-16s %-9s fp=%-10lld residual %.3e -> %.3e (%s)", cell.id.c_str(),
                              std::string(to_string(cell.verdict)).c_str(),
                              static_cast<long long>(cell.forward_passes),
                              cell.initial_residual.value_or(NAN),
                              cell.final_residual.value_or(NAN), cell.stop_reason.c_str()));
      if (!cell.error.empty()) r.details.push_back("  error: " + cell.error);
      if (!conv) continue;
      auto& best = cell.method == Method::CGD ? best_cgd : best_base;
      auto& id = cell.method == Method::CGD ? best_cgd_id : best_base_id;
      if (!best || cell.forward_passes < *best) {
        best = cell.forward_passes;
        id = cell.id;
      }
    }
    for (double eta : c.etas)
      expect(r, s.find(Method::CGD, eta)->verdict == Verdict::Converged,
             fmt("CGD eta=%g Converged", eta));
    int diverged = 0;
    for (Method m : {Method::OGDA, Method::SGA, Method::ConOpt})
      diverged += s.find(m, 0.4)->verdict == Verdict::Diverged;
    expect(r, diverged >= 2, fmt("only %d baselines Diverged at eta=0.4", diverged));
    std::string ratio = "no convergent baseline";
    if (best_cgd && best_base) {
      const double q = static_cast<double>(*best_cgd) / static_cast<double>(*best_base);
      ratio = fmt("best CGD %s %lld fp vs best baseline %s %lld fp, ratio %.3f", best_cgd_id.c_str(),
                  static_cast<long long>(*best_cgd), best_base_id.c_str(),
                  static_cast<long long>(*best_base), q);
      expect(r, q < 0.5, "forward-pass ratio below 1/2");
    } else {
      expect(r, best_cgd.has_value(), "a convergent CGD cell");
    }
    r.summary = fmt("%d/3 baselines Diverged at eta=0.4; ", diverged) + ratio;
  });
}

CheckResult cg_degradation() {
  return timed(7, "CG graceful degradation", 5.0, [&](CheckResult& r) {
    r.passed = true;
    struct Case {
      double alpha, eta;
      Index dim;
    };
    std::int64_t worst = 0;
    std::mt19937_64 rng(7);
    for (const Case& k : {Case{1.0, 0.2, 1}, Case{1.0, 0.2, 6}, Case{0.5, 0.4, 3},
                          Case{2.0, 0.1, 4}, Case{1.0, 0.1, 2}, Case{0.2, 1.0, 5}}) {
      BilinearGame g = make_bilinear(k.alpha, k.dim);
      SolverConfig c;
      c.method = Method::CGD;
      c.eta = k.eta;
      RunControls rc;
      rc.iterations = 50;
      const JointPoint start = k.dim == 1
                                   ? JointPoint{Vector::Constant(1, 0.5), Vector::Constant(1, 0.5), 0}
                                   : gaussian_point(g, rng);
      const TraceRecord t = run_cell(g, start, c, rc);
      for (const auto& [iters, count] : t.cg_histogram) worst = std::max(worst, iters);
      std::string hist;
      for (const auto& [iters, count] : t.cg_histogram)
        hist += fmt(" %lld:%lld", static_cast<long long>(iters), static_cast<long long>(count));
      r.details.push_back(fmt("alpha=%g eta=%g dim=%lld cg histogram", k.alpha, k.eta,
                              static_cast<long long>(k.dim)) + hist);
    }
    expect(r, worst <= 2, fmt("max cg_iters %lld > 2", static_cast<long long>(worst)));
    r.summary = fmt("max cg_iters per iteration %lld (limit 2)", static_cast<long long>(worst));
  });
}

CheckResult gan(const std::string& output_dir) {
  return timed(8, "GAN desk scale", 900.0, [&](CheckResult& r) {
    ExperimentConfig c = canned::gan(false);
    c.output_dir = output_dir;
    if (output_dir.empty()) c.dump_every = 0;
    const SweepSummary s = run_sweep(c);
    r.passed = true;
    bool covered = false;
    for (const CellSummary& cell : s.cells) {
      std::string cov = "n/a";
      if (cell.coverage)
        cov = fmt("%.3f/%.3f", cell.coverage->frac_mode1, cell.coverage->frac_mode2);
      r.details.push_back(fmt("%-16s %-9s norm %.3g -> %.3g coverage %s%s", cell.id.c_str(),
                              std::string(to_string(cell.verdict)).c_str(), cell.initial_norm,
                              cell.final_norm, cov.c_str(),
                              cell.method == Method::CGD ? "" : " (not gated)"));
      if (!cell.error.empty()) r.details.push_back("  error: " + cell.error);
      if (cell.method != Method::CGD) continue;
      expect(r, cell.error.empty() && cell.iterations_run == c.iterations &&
                    std::isfinite(cell.final_norm),
             cell.id + " did not run 2000 finite iterations");
      expect(r, cell.verdict != Verdict::Diverged, cell.id + " Diverged");
      if (cell.coverage && cell.coverage->frac_mode1 >= 0.2 && cell.coverage->frac_mode2 >= 0.2)
        covered = true;
    }
    expect(r, covered, "no CGD stepsize covers both modes at >= 0.2");
    int diverged = 0;
    for (double eta : c.etas) diverged += s.find(Method::CGD, eta)->verdict == Verdict::Diverged;
    r.summary = fmt("CGD Diverged at %d/4 stepsizes; both-mode coverage %s", diverged,
                    covered ? "reached" : "not reached");
  });
}

CheckResult oracle_hygiene(std::uint64_t seed) {
  return timed(9, "oracle hygiene", 60.0, [&](CheckResult& r) {
    std::mt19937_64 rng(seed);
    std::vector<std::unique_ptr<ZeroSumGame>> games;
    games.push_back(std::make_unique<BilinearGame>(make_bilinear(3.0, 4)));
    games.push_back(std::make_unique<SeparableQuadraticGame>(
        make_separable_quadratic(1.0, QuadraticSign::ConvexConcave, 3)));
    games.push_back(std::make_unique<SeparableQuadraticGame>(
        make_separable_quadratic(1.0, QuadraticSign::ConcaveConvex, 3)));
    games.push_back(std::make_unique<QuadraticGame>(QuadraticGame::random(6, 5, rng, 1.0, 1.0)));
    games.push_back(std::make_unique<CovarianceGame>(make_covariance_game(5, 1)));
    CovarianceOptions shared;
    shared.noise = GeneratorNoise::SharedSigma;
    games.push_back(std::make_unique<CovarianceGame>(make_covariance_game(5, 2, shared)));

    double adj = 0.0, grad = 0.0, hvp = 0.0;
    for (auto& g : games) {
      FiniteDifferenceGame fd(*g);
      for (int k = 0; k < 100; ++k) {
        const JointPoint p = gaussian_point(*g, rng);
        const Vector u = gaussian(g->dim_x(), rng), v = gaussian(g->dim_y(), rng);
        const double lhs = u.dot(g->mixed_xy(p, v));
        adj = std::max(adj, std::abs(lhs - g->mixed_yx(p, u).dot(v)) / (1.0 + std::abs(lhs)));
        if (k >= 20) continue;
        const GradientPair an = g->gradients(p), num = fd_value_gradient(*g, p);
        grad = std::max(grad, rel(joint(an.gx, an.gy), joint(num.gx, num.gy)));
        hvp = std::max({hvp, rel(g->mixed_xy(p, v), fd.mixed_xy(p, v)),
                        rel(g->mixed_yx(p, u), fd.mixed_yx(p, u))});
      }
    }
    expect(r, adj <= 1e-8, fmt("adjointness %.3e > 1e-8", adj));
    expect(r, grad <= 1e-5, fmt("gradient vs fd %.3e > 1e-5", grad));
    expect(r, hvp <= 1e-4, fmt("HVP vs fd %.3e > 1e-4", hvp));

    // GAN: exact gradients vs differences of the loss on a small net, fd adjointness.
    GanProblem tiny;
    tiny.noise_dim = 4;
    tiny.batch_real = tiny.batch_fake = 10;
    tiny.generator.layer_dims = {4, 8, 2};
    tiny.discriminator.layer_dims = {2, 8, 1};
    GanGame gg(tiny, seed);
    double gan_grad = 0.0, gan_adj = 0.0;
    for (int k = 0; k < 10; ++k) {
      JointPoint p = init_gan_point(tiny, seed + k);
      p.x += gaussian(p.x.size(), rng, 0.1);
      p.y += gaussian(p.y.size(), rng, 0.1);
      const GradientPair an = gg.gradients(p), num = fd_value_gradient(gg, p);
      gan_grad = std::max(gan_grad, rel(joint(an.gx, an.gy), joint(num.gx, num.gy)));
      const Vector u = gaussian(p.x.size(), rng), v = gaussian(p.y.size(), rng);
      const double lhs = u.dot(gg.mixed_xy(p, v));
      gan_adj = std::max(gan_adj, std::abs(lhs - gg.mixed_yx(p, u).dot(v)) / (1.0 + std::abs(lhs)));
    }
    expect(r, gan_grad <= 1e-4, fmt("GAN gradient vs fd %.3e > 1e-4", gan_grad));
    expect(r, gan_adj <= 1e-3, fmt("GAN fd adjointness %.3e > 1e-3", gan_adj));
    if (r.details.empty()) r.passed = true;
    r.summary = fmt("adjoint %.1e (1e-8), grad %.1e (1e-5), hvp %.1e (1e-4), gan grad %.1e (1e-4), "
                    "gan adjoint %.1e (1e-3)",
                    adj, grad, hvp, gan_grad, gan_adj);
  });
}

std::vector<CheckResult> all(const std::string& output_dir) {
  auto sub = [&](const char* name) {
    return output_dir.empty() ? std::string() : output_dir + "/" + name;
  };
  return {closed_form_nash(), series_recovery(),  polynomial_bilinear(),
          polynomial_quadratic(), theorem_bound(), covariance(sub("covariance")),
          cg_degradation(),   gan(sub("gan")),    oracle_hygiene()};
}

std::vector<CheckResult> fast() {
  return {closed_form_nash(), series_recovery(), polynomial_bilinear(), polynomial_quadratic(),
          theorem_bound(),    cg_degradation(),  oracle_hygiene()};
}

std::string format(const CheckResult& r, bool with_details) {
  std::string out = fmt("%s criterion %d %s: %s [%.2f s, limit %.0f s]",
                        r.passed ? "PASS" : "FAIL", r.id, r.title.c_str(), r.summary.c_str(),
                        r.seconds, r.limit_seconds);
  if (with_details)
    for (const auto& d : r.details) out += "\n    " + d;
  return out;
}

}  // namespace cgd::verify
