#include "support.hpp"

#include "cgd/problems.hpp"
#include "cgd/solvers.hpp"
#include "cgd/testkit.hpp"

using namespace cgd;
using namespace cgd::test;

namespace {

SolverConfig config_for(Method m, double eta = 0.2, double gamma = 1.0) {
  SolverConfig c;
  c.method = m;
  c.eta = eta;
  c.gamma = gamma;
  return c;
}

UpdateResult one_step(Method m, ZeroSumGame& game, const JointPoint& p, double eta = 0.2,
                      double gamma = 1.0) {
  SolverState s{p, std::nullopt, std::nullopt, std::nullopt};
  return step(game, s, config_for(m, eta, gamma));
}

Vector joint(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

/// Residuals of the local game's first-order conditions with diagonal
/// penalty weights: dx / (eta sx) + gx + N dy = 0 and dy / (eta sy) - gy - N' dx = 0.
double foc_residual(const DenseLocalGame& g, const Vector& sx, const Vector& sy,
                    const Vector& dx, const Vector& dy) {
  const Vector rx = dx.cwiseQuotient(g.eta * sx) + g.gx + g.Nxy * dy;
  const Vector ry = dy.cwiseQuotient(g.eta * sy) - g.gy - g.Nxy.transpose() * dx;
  return joint(rx, ry).norm() / std::max(1e-300, joint(g.gx, g.gy).norm());
}

}  // namespace

TEST_CASE("update rule examples on f = xy") {
  BilinearGame g = make_bilinear(1.0, 1);
  const JointPoint p = scalar_point(0.5, 0.5);

  const UpdateResult gda = one_step(Method::GDA, g, p);
  CHECK(gda.delta_x[0] == doctest::Approx(-0.1));
  CHECK(gda.delta_y[0] == doctest::Approx(0.1));
  CHECK(gda.cg_iters == 0);

  const UpdateResult lcgd = one_step(Method::LCGD, g, p);
  CHECK(lcgd.delta_x[0] == doctest::Approx(-0.12));
  CHECK(lcgd.delta_y[0] == doctest::Approx(0.08));

  const UpdateResult cgd = one_step(Method::CGD, g, p);
  CHECK(cgd.delta_x[0] == doctest::Approx(-0.2 * 0.6 / 1.04).epsilon(1e-6));
  CHECK(cgd.delta_y[0] == doctest::Approx(0.2 * 0.4 / 1.04).epsilon(1e-6));
  CHECK(cgd.delta_x[0] == doctest::Approx(-0.115385).epsilon(1e-5));
  CHECK(cgd.delta_y[0] == doctest::Approx(0.076923).epsilon(1e-5));

  // SGA and ConOpt coincide on a bilinear problem
  const UpdateResult sga = one_step(Method::SGA, g, p, 0.2, 0.2);
  CHECK(sga.delta_x[0] == doctest::Approx(lcgd.delta_x[0]));
  const UpdateResult con = one_step(Method::ConOpt, g, p, 0.2, 0.7);
  const UpdateResult sga7 = one_step(Method::SGA, g, p, 0.2, 0.7);
  CHECK(con.delta_x[0] == doctest::Approx(sga7.delta_x[0]));
  CHECK(con.delta_y[0] == doctest::Approx(sga7.delta_y[0]));
}

TEST_CASE("counter strategy") {
  BilinearGame g = make_bilinear(1.0, 1);
  const JointPoint p = scalar_point(0.5, 0.5);
  CHECK(counter_strategy(g, p, 0.2, Vector::Constant(1, -0.115385))[0] ==
        doctest::Approx(0.2 * (0.5 - 0.115385)));
  CHECK(counter_strategy(g, scalar_point(0.0, 0.3), 0.2, Vector::Zero(1))[0] == 0.0);
  CHECK(counter_strategy(g, p, 0.2, Vector::Zero(1))[0] ==
        doctest::Approx(one_step(Method::GDA, g, p).delta_y[0]));
}

TEST_CASE("ConOpt on x^2 - y^2 matches the dense oracle") {
  auto g = make_separable_quadratic(1.0, QuadraticSign::ConvexConcave, 1);
  const JointPoint p = scalar_point(0.5, 0.5);
  const UpdateResult u = one_step(Method::ConOpt, g, p, 0.2, 1.0);
  const auto [dx, dy] = dense_update(Method::ConOpt, assemble_local_game(g, p, 0.2),
                                     assemble_hessian(g, p), 1.0);
  CHECK(u.delta_x[0] == doctest::Approx(dx[0]));
  CHECK(u.delta_y[0] == doctest::Approx(dy[0]));
  CHECK(u.delta_x[0] == doctest::Approx(-0.6));
  CHECK(u.delta_y[0] == doctest::Approx(-0.6));
}

TEST_CASE("explicit methods match the dense update table") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    QuadraticGame g = QuadraticGame::random(4, 3, rng, 1.0, 0.8);
    const JointPoint p = random_point(4, 3, rng);
    const DenseLocalGame lg = assemble_local_game(g, p, 0.15);
    const DenseHessian h = assemble_hessian(g, p);
    for (Method m : {Method::GDA, Method::LCGD, Method::SGA, Method::ConOpt}) {
      const UpdateResult u = one_step(m, g, p, 0.15, 0.6);
      const auto [dx, dy] = dense_update(m, lg, h, 0.6);
      CAPTURE(to_string(m));
      CHECK(rel_err(joint(u.delta_x, u.delta_y), joint(dx, dy)) <= 1e-12);
    }
  }
}

TEST_CASE("OGDA uses past gradients after a GDA bootstrap") {
  std::mt19937_64 rng(22);
  QuadraticGame g = QuadraticGame::random(3, 3, rng, 1.0, 0.5);
  SolverState s{random_point(3, 3, rng), std::nullopt, std::nullopt, std::nullopt};
  const SolverConfig c = config_for(Method::OGDA, 0.1);
  const GradientPair g0 = g.gradients(s.point);
  const UpdateResult first = step(g, s, c);
  CHECK(rel_err(first.delta_x, -0.1 * g0.gx) <= 1e-14);
  CHECK(rel_err(first.delta_y, 0.1 * g0.gy) <= 1e-14);
  REQUIRE(s.previous_grads.has_value());
  apply_update(s, first);
  CHECK(s.point.iteration == 1);
  const GradientPair g1 = g.gradients(s.point);
  const UpdateResult second = step(g, s, c);
  CHECK(rel_err(second.delta_x, -0.1 * (2.0 * g1.gx - g0.gx)) <= 1e-14);
  CHECK(rel_err(second.delta_y, 0.1 * (2.0 * g1.gy - g0.gy)) <= 1e-14);
}

TEST_CASE("CGD agrees with the dense Nash solve and its first-order conditions") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    QuadraticGame g = QuadraticGame::random(6, 5, rng, 1.5, 0.5);
    const JointPoint p = random_point(6, 5, rng);
    const double eta = 0.3;
    const UpdateResult u = one_step(Method::CGD, g, p, eta);
    const DenseLocalGame lg = assemble_local_game(g, p, eta);
    const auto [dx, dy] = dense_nash_solve(lg);
    CHECK(rel_err(joint(u.delta_x, u.delta_y), joint(dx, dy)) <= 1e-5);
    CHECK(foc_residual(lg, Vector::Ones(6), Vector::Ones(5), u.delta_x, u.delta_y) <= 1e-5);
  }
  CovarianceGame cov = make_covariance_game(4, 1);
  for (int trial = 0; trial < 10; ++trial) {
    const JointPoint p = init_covariance_point(cov.U(), trial);
    const UpdateResult u = one_step(Method::CGD, cov, p, 0.1);
    const DenseLocalGame lg = assemble_local_game(cov, p, 0.1);
    CHECK(foc_residual(lg, Vector::Ones(16), Vector::Ones(16), u.delta_x, u.delta_y) <= 1e-5);
  }
}

TEST_CASE("y-side solve gives the same CGD update") {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 10; ++trial) {
    QuadraticGame g = QuadraticGame::random(5, 3, rng, 1.0, 0.3);
    const JointPoint p = random_point(5, 3, rng);
    SolverConfig c = config_for(Method::CGD, 0.4);
    c.krylov.tol = 1e-12;
    SolverState a{p, std::nullopt, std::nullopt, std::nullopt}, b = a;
    const UpdateResult ux = cgd_step(g, a, c);
    c.solve_side = SolveSide::Y;
    const UpdateResult uy = cgd_step(g, b, c);
    CHECK(rel_err(joint(ux.delta_x, ux.delta_y), joint(uy.delta_x, uy.delta_y)) <= 1e-9);
  }
}

TEST_CASE("CGD contracts the strongly coupled bilinear game") {
  BilinearGame g = make_bilinear(6.0, 1);
  const JointPoint p = scalar_point(0.5, 0.5);
  const UpdateResult u = one_step(Method::CGD, g, p);
  const auto [dx, dy] = dense_nash_solve(assemble_local_game(g, p, 0.2));
  CHECK(u.delta_x[0] == doctest::Approx(dx[0]).epsilon(1e-6));
  CHECK(u.delta_y[0] == doctest::Approx(dy[0]).epsilon(1e-6));
  const JointPoint q{p.x + u.delta_x, p.y + u.delta_y, 1};
  CHECK(q.norm() < p.norm());
}

TEST_CASE("series update recovers GDA, LCGD and CGD") {
  std::mt19937_64 rng(25);
  for (int trial = 0; trial < 20; ++trial) {
    QuadraticGame g = QuadraticGame::random(4, 4, rng, 1.0, 0.5);
    const JointPoint p = random_point(4, 4, rng);
    const UpdateResult l0 = lola_k_update(g, p, 0.2, 0);
    const UpdateResult l1 = lola_k_update(g, p, 0.2, 1);
    const UpdateResult gda = one_step(Method::GDA, g, p);
    const UpdateResult lcgd = one_step(Method::LCGD, g, p);
    CHECK(rel_err(joint(l0.delta_x, l0.delta_y), joint(gda.delta_x, gda.delta_y)) <= 1e-12);
    CHECK(rel_err(joint(l1.delta_x, l1.delta_y), joint(lcgd.delta_x, lcgd.delta_y)) <= 1e-12);
  }

  BilinearGame b = make_bilinear(1.0, 1);
  const JointPoint p = scalar_point(0.5, 0.5);
  SolverConfig c = config_for(Method::CGD);
  c.krylov.tol = 1e-14;
  SolverState s{p, std::nullopt, std::nullopt, std::nullopt};
  const UpdateResult exact = cgd_step(b, s, c);
  const Vector ref = joint(exact.delta_x, exact.delta_y);
  const UpdateResult l50 = lola_k_update(b, p, 0.2, 50);
  CHECK(rel_err(joint(l50.delta_x, l50.delta_y), ref) <= 1e-6);

  std::vector<double> err;
  for (int k = 0; k <= 12; ++k) {
    const UpdateResult l = lola_k_update(b, p, 0.2, k);
    err.push_back((joint(l.delta_x, l.delta_y) - ref).norm());
  }
  for (int k = 0; k + 2 < static_cast<int>(err.size()); ++k) {
    if (err[k] < 1e-13) break;
    CHECK(err[k + 2] <= 0.05 * err[k]);
  }
  CHECK_THROWS_AS(lola_k_update(b, p, 0.2, -1), ContractError);
}

TEST_CASE("scaled CGD") {
  std::mt19937_64 rng(26);
  KrylovSettings tight;
  tight.tol = 1e-12;

  SUBCASE("unit scaling is plain CGD") {
    QuadraticGame g = QuadraticGame::random(5, 4, rng, 1.0, 0.4);
    const JointPoint p = random_point(5, 4, rng);
    SolverConfig c = config_for(Method::CGD, 0.3);
    SolverState s{p, std::nullopt, std::nullopt, std::nullopt};
    const UpdateResult plain = cgd_step(g, s, c);
    const UpdateResult scaled = scaled_cgd_update(g, p, 0.3, Vector::Ones(5), Vector::Ones(4),
                                                  c.krylov, SolveSide::X, nullptr);
    CHECK(rel_err(joint(plain.delta_x, plain.delta_y),
                  joint(scaled.delta_x, scaled.delta_y)) <= 1e-12);
  }
  SUBCASE("first-order conditions of the scaled local game") {
    std::uniform_real_distribution<double> unif(0.1, 5.0);
    for (int trial = 0; trial < 30; ++trial) {
      QuadraticGame g = QuadraticGame::random(6, 4, rng, 1.0, 0.4);
      const JointPoint p = random_point(6, 4, rng);
      Vector sx(6), sy(4);
      for (auto& v : sx) v = unif(rng);
      for (auto& v : sy) v = unif(rng);
      const DenseLocalGame lg = assemble_local_game(g, p, 0.2);
      for (SolveSide side : {SolveSide::X, SolveSide::Y}) {
        const UpdateResult u = scaled_cgd_update(g, p, 0.2, sx, sy, tight, side, nullptr);
        CHECK(foc_residual(lg, sx, sy, u.delta_x, u.delta_y) <= 1e-6);
      }
    }
  }
  SUBCASE("scalar game with Sx = 4, Sy = 1") {
    BilinearGame g = make_bilinear(1.0, 1);
    const JointPoint p = scalar_point(0.5, 0.5);
    const double eta = 0.1;
    // dx / (eta 4) + 0.5 + dy = 0, dy / eta - 0.5 - dx = 0
    Matrix K(2, 2);
    K << 1.0 / (4.0 * eta), 1.0, -1.0, 1.0 / eta;
    const Eigen::Vector2d d = K.fullPivLu().solve(Eigen::Vector2d(-0.5, 0.5));
    const UpdateResult u = scaled_cgd_update(g, p, eta, Vector::Constant(1, 4.0),
                                             Vector::Ones(1), tight, SolveSide::X, nullptr);
    CHECK(u.delta_x[0] == doctest::Approx(d[0]).epsilon(1e-10));
    CHECK(u.delta_y[0] == doctest::Approx(d[1]).epsilon(1e-10));
  }
  SUBCASE("invalid scalings") {
    BilinearGame g = make_bilinear(1.0, 2);
    const JointPoint p{Vector::Ones(2), Vector::Ones(2), 0};
    CHECK_THROWS_AS(scaled_cgd_update(g, p, 0.1, Vector::Ones(3), Vector::Ones(2), tight,
                                      SolveSide::X, nullptr),
                    ContractError);
    CHECK_THROWS_AS(scaled_cgd_update(g, p, 0.1, -Vector::Ones(2), Vector::Ones(2), tight,
                                      SolveSide::X, nullptr),
                    ContractError);
  }
}

TEST_CASE("RMSProp step") {
  std::mt19937_64 rng(27);
  QuadraticGame g = QuadraticGame::random(3, 2, rng, 1.0, 0.3);
  const JointPoint p = random_point(3, 2, rng);
  const GradientPair g0 = g.gradients(p);
  SolverConfig c = config_for(Method::GDA, 0.01);
  c.rmsprop = RmspropConfig{0.9, 1e-8};
  SolverState s{p, std::nullopt, std::nullopt, std::nullopt};
  const UpdateResult u = rmsprop_preconditioned_step(g, s, c);
  REQUIRE(s.rmsprop_accum.has_value());
  CHECK(rel_err(s.rmsprop_accum->sx, 0.1 * g0.gx.cwiseAbs2()) <= 1e-14);
  CHECK(rel_err(s.rmsprop_accum->sy, 0.1 * g0.gy.cwiseAbs2()) <= 1e-14);
  const Vector Sx = (s.rmsprop_accum->sx.cwiseSqrt().array() + 1e-8).inverse().matrix();
  CHECK(rel_err(u.delta_x, -0.01 * Sx.cwiseProduct(g0.gx)) <= 1e-12);

  SolverConfig cc = config_for(Method::CGD, 0.01);
  cc.rmsprop = c.rmsprop;
  cc.krylov.tol = 1e-12;
  SolverState t{p, std::nullopt, std::nullopt, std::nullopt};
  const UpdateResult v = step(g, t, cc);
  const Vector sx = (t.rmsprop_accum->sx.cwiseSqrt().array() + 1e-8).inverse().matrix();
  const Vector sy = (t.rmsprop_accum->sy.cwiseSqrt().array() + 1e-8).inverse().matrix();
  CHECK(foc_residual(assemble_local_game(g, p, 0.01), sx, sy, v.delta_x, v.delta_y) <= 1e-6);

  SolverState none{p, std::nullopt, std::nullopt, std::nullopt};
  CHECK_THROWS_AS(rmsprop_preconditioned_step(g, none, config_for(Method::CGD)), ContractError);
}

TEST_CASE("critical points are fixed points of every method") {
  std::mt19937_64 rng(28);
  const Matrix A = Matrix::Identity(3, 3), C = -Matrix::Identity(2, 2);
  QuadraticGame g(Vector::Zero(3), Vector::Zero(2), A, random_matrix(3, 2, rng), C);
  const JointPoint o{Vector::Zero(3), Vector::Zero(2), 0};
  for (Method m : all_methods()) {
    CAPTURE(to_string(m));
    const UpdateResult u = one_step(m, g, o);
    CHECK(u.delta_x.norm() == 0.0);
    CHECK(u.delta_y.norm() == 0.0);
  }
}

TEST_CASE("GDA norm grows strictly on f = xy") {
  BilinearGame g = make_bilinear(1.0, 1);
  SolverState s{scalar_point(0.5, 0.5), std::nullopt, std::nullopt, std::nullopt};
  const SolverConfig c = config_for(Method::GDA);
  for (int k = 0; k < 50; ++k) {
    const double before = s.point.norm();
    apply_update(s, step(g, s, c));
    CHECK(s.point.norm() > before);
  }
}

TEST_CASE("forward passes per step follow the cost table") {
  std::mt19937_64 rng(29);
  QuadraticGame g = QuadraticGame::random(4, 4, rng, 1.0, 0.3);
  const JointPoint p = random_point(4, 4, rng);
  for (Method m : all_methods()) {
    CAPTURE(to_string(m));
    g.reset_counter();
    const UpdateResult u = one_step(m, g, p);
    const std::int64_t expected = cost::per_iteration(m) + 2 * u.cg_iters;
    CHECK(u.forward_passes == expected);
    CHECK(g.forward_passes() == expected);
  }
  CHECK(cost::per_iteration(Method::OGDA) == 2);
  CHECK(cost::per_iteration(Method::SGA) == 4);
  CHECK(cost::per_iteration(Method::ConOpt) == 6);
}

TEST_CASE("warm start reuses the previous solution") {
  BilinearGame g = make_bilinear(1.0, 1);
  SolverState s{scalar_point(0.5, 0.5), std::nullopt, std::nullopt, std::nullopt};
  const SolverConfig c = config_for(Method::CGD);
  const UpdateResult first = cgd_step(g, s, c);
  REQUIRE(s.warm_start.has_value());
  CHECK(s.warm_start->size() == 1);
  CHECK(first.cg_converged);
}

TEST_CASE("non-finite iterate is rejected") {
  BilinearGame g = make_bilinear(1.0, 1);
  SolverState s{scalar_point(std::numeric_limits<double>::infinity(), 0.0), std::nullopt,
                std::nullopt, std::nullopt};
  CHECK_THROWS_AS(step(g, s, config_for(Method::GDA)), NumericalError);
}
