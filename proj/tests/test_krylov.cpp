#include "support.hpp"

#include "cgd/hvp.hpp"
#include "cgd/krylov.hpp"
#include "cgd/problems.hpp"

using namespace cgd;
using namespace cgd::test;

namespace {

LinearMap dense_map(const Matrix& M) {
  return LinearMap{M.rows(), [M](const Vector& v) { return Vector(M * v); }};
}

Matrix assemble(const LinearMap& op) {
  Matrix M(op.dim, op.dim);
  for (Index j = 0; j < op.dim; ++j) M.col(j) = op(Vector::Unit(op.dim, j));
  return M;
}

}  // namespace

TEST_CASE("termination_check") {
  CHECK(termination_check(1e-7, 1.0, 1e-6));
  CHECK_FALSE(termination_check(1e-5, 1.0, 1e-6));
  CHECK(termination_check(0.0, 0.0, 1e-6));
}

TEST_CASE("cg_solve small systems") {
  KrylovSettings s;
  SUBCASE("identity") {
    const Vector rhs = Vector::LinSpaced(3, 1.0, 3.0);
    const KrylovResult r = cg_solve(dense_map(Matrix::Identity(3, 3)), rhs, nullptr, s);
    CHECK(r.converged);
    CHECK(r.iterations == 1);
    CHECK((r.solution - rhs).norm() <= 1e-14);
  }
  SUBCASE("diagonal") {
    const Matrix D = Eigen::Vector2d(2.0, 1.0).asDiagonal();
    const KrylovResult r = cg_solve(dense_map(D), Eigen::Vector2d(2.0, 1.0), nullptr, s);
    CHECK(r.converged);
    CHECK(r.solution[0] == doctest::Approx(1.0));
    CHECK(r.solution[1] == doctest::Approx(1.0));
  }
  SUBCASE("scalar equilibrium operator") {
    LinearMap op{1, [](const Vector& v) { return Vector(v * 1.36); }};
    const KrylovResult r = cg_solve(op, Vector::Constant(1, 0.6), nullptr, s);
    CHECK(r.solution[0] == doctest::Approx(0.6 / 1.36).epsilon(1e-12));
    CHECK(r.solution[0] == doctest::Approx(0.44118).epsilon(1e-5));
  }
  SUBCASE("zero rhs") {
    const KrylovResult r = cg_solve(dense_map(Matrix::Identity(4, 4)), Vector::Zero(4), nullptr, s);
    CHECK(r.iterations == 0);
    CHECK(r.converged);
    CHECK(r.solution.norm() == 0.0);
  }
}

TEST_CASE("cg_solve matches dense solves on random SPD systems") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> dim(1, 50);
  for (int trial = 0; trial < 40; ++trial) {
    const Index n = dim(rng);
    const Matrix A = random_matrix(n, n, rng, 1.0 / std::sqrt(static_cast<double>(n)));
    const Matrix M = A.transpose() * A + Matrix::Identity(n, n);
    const Vector b = random_vector(n, rng);
    KrylovSettings s;
    s.tol = 1e-10;
    s.max_iter = n + 5;
    const KrylovResult r = cg_solve(dense_map(M), b, nullptr, s);
    const Vector exact = M.ldlt().solve(b);
    CAPTURE(n);
    CHECK(r.converged);
    CHECK(r.iterations <= n + 5);
    CHECK(rel_err(r.solution, exact) <= 1e-6);
    CHECK(r.final_relative_residual <= s.tol);

    const KrylovResult warm = cg_solve(dense_map(M), b, &exact, s);
    CHECK(warm.iterations <= 1);
    CHECK(warm.converged);
  }
}

TEST_CASE("cg_solve on unscaled AtA + Id") {
  std::mt19937_64 rng(6);
  for (Index n : {10, 30, 50}) {
    const Matrix A = random_matrix(n, n, rng);
    const Matrix M = A.transpose() * A + Matrix::Identity(n, n);
    const Vector b = random_vector(n, rng);
    KrylovSettings s;
    s.tol = 1e-9;
    s.max_iter = 20 * n;
    const KrylovResult r = cg_solve(dense_map(M), b, nullptr, s);
    CHECK(r.converged);
    CHECK(rel_err(r.solution, M.ldlt().solve(b)) <= 1e-6);
  }
}

TEST_CASE("cg_solve reports non-convergence with the best iterate") {
  std::mt19937_64 rng(2);
  const Matrix A = random_matrix(30, 30, rng);
  const Matrix M = A.transpose() * A + 1e-2 * Matrix::Identity(30, 30);
  const Vector b = random_vector(30, rng);
  KrylovSettings s;
  s.tol = 1e-14;
  s.max_iter = 3;
  const KrylovResult r = cg_solve(dense_map(M), b, nullptr, s);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 3);
  CHECK((M * r.solution - b).norm() < b.norm());
}

TEST_CASE("linear map superposition") {
  std::mt19937_64 rng(3);
  BilinearGame g = make_bilinear(2.0, 3);
  const JointPoint p = random_point(3, 3, rng);
  const LinearMap op = equilibrium_operator(g, p, 0.3, Block::X);
  const Vector a = random_vector(3, rng), b = random_vector(3, rng);
  CHECK((op(2.0 * a - 3.0 * b) - (2.0 * op(a) - 3.0 * op(b))).norm() <= 1e-12);
}

TEST_CASE("fd_hvp examples") {
  Matrix A(2, 2);
  A << 1, 2, 0, 1;
  MatrixBilinear g(A);
  const JointPoint p{Vector::Zero(2), Vector::Zero(2), 0};
  const GradientComponent grad_y = [&](const JointPoint& q) { return g.gradients(q).gy; };
  const Vector out = fd_hvp(grad_y, p, Block::X, Eigen::Vector2d(1.0, 0.0), kDefaultStepScale);
  CHECK(out[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(out[1] == doctest::Approx(2.0).epsilon(1e-9));

  BilinearGame b = make_bilinear(3.0, 1);
  const GradientComponent bx = [&](const JointPoint& q) { return b.gradients(q).gx; };
  CHECK(fd_hvp(bx, scalar_point(0.5, 0.5), Block::Y, Vector::Ones(1), kDefaultStepScale)[0] ==
        doctest::Approx(3.0).epsilon(1e-9));

  int calls = 0;
  const GradientComponent counted = [&](const JointPoint& q) {
    ++calls;
    return b.gradients(q).gx;
  };
  const Vector z = fd_hvp(counted, scalar_point(0.5, 0.5), Block::Y, Vector::Zero(1),
                          kDefaultStepScale, 1);
  CHECK(calls == 0);
  CHECK(z.norm() == 0.0);
}

TEST_CASE("fd_hvp agrees with the analytic covariance HVP") {
  std::mt19937_64 rng(4);
  CovarianceGame g = make_covariance_game(5, 2);
  for (int k = 0; k < 20; ++k) {
    const JointPoint p = random_point(25, 25, rng);
    const Vector v = random_vector(25, rng), u = random_vector(25, rng);
    const GradientComponent gx = [&](const JointPoint& q) { return g.gradients(q).gx; };
    const GradientComponent gy = [&](const JointPoint& q) { return g.gradients(q).gy; };
    CHECK(rel_err(fd_hvp(gx, p, Block::Y, v, kDefaultStepScale), g.mixed_xy(p, v)) <= 1e-4);
    CHECK(rel_err(fd_hvp(gy, p, Block::X, u, kDefaultStepScale), g.mixed_yx(p, u)) <= 1e-4);
  }
}

TEST_CASE("equilibrium operator examples") {
  BilinearGame b3 = make_bilinear(3.0, 1);
  const JointPoint p = scalar_point(0.5, 0.5);
  b3.reset_counter();
  const LinearMap op = equilibrium_operator(b3, p, 0.2, Block::X);
  CHECK(op(Vector::Ones(1))[0] == doctest::Approx(1.36));
  CHECK(b3.forward_passes() == 2 * cost::kHvp);

  BilinearGame b6 = make_bilinear(6.0, 1);
  CHECK(equilibrium_operator(b6, p, 0.2, Block::X)(Vector::Ones(1))[0] ==
        doctest::Approx(2.44));
  CHECK(equilibrium_operator(b6, p, 0.2, Block::Y)(Vector::Ones(1))[0] ==
        doctest::Approx(1.0 + 0.04 * 36.0));

  CHECK(equilibrium_operator(b3, p, 0.0, Block::X)(Vector::Constant(1, 0.7))[0] == 0.7);

  Matrix A(2, 2);
  A << 1, 2, 0, 1;
  MatrixBilinear g(A);
  const JointPoint q{Vector::Zero(2), Vector::Zero(2), 0};
  Matrix expected(2, 2);
  expected << 6, 2, 2, 2;
  CHECK((assemble(equilibrium_operator(g, q, 1.0, Block::X)) - expected).norm() <= 1e-14);
  CHECK((assemble(equilibrium_operator(g, q, 1.0, Block::Y)) -
         (Matrix::Identity(2, 2) + A.transpose() * A))
            .norm() <= 1e-14);
}

TEST_CASE("equilibrium operator is SPD with bounded condition number") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix A = random_matrix(6, 4, rng);
    MatrixBilinear g(A);
    const double eta = 0.1 + 0.1 * trial;
    const JointPoint p = random_point(6, 4, rng);
    for (Block side : {Block::X, Block::Y}) {
      const Matrix M = assemble(equilibrium_operator(g, p, eta, side));
      CHECK((M - M.transpose()).norm() <= 1e-12 * M.norm());
      Eigen::SelfAdjointEigenSolver<Matrix> es(M);
      const double lmin = es.eigenvalues().minCoeff(), lmax = es.eigenvalues().maxCoeff();
      CHECK(lmin >= 1.0 - 1e-12);
      const double s = Eigen::JacobiSVD<Matrix>(A).singularValues()[0];
      CHECK(lmax / lmin <= 1.0 + eta * eta * s * s + 1e-9);
      const Vector v = random_vector(M.rows(), rng);
      CHECK(v.dot(M * v) >= v.squaredNorm() * (1.0 - 1e-12));
    }
  }
}
