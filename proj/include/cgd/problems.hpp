#pragma once

// Analytic test problems: the bilinear and separable quadratic polynomial
// games, a general quadratic game used by the verification oracles, and the
// covariance-estimation game.

#include "cgd/core.hpp"

#include <random>

namespace cgd {

/// f(x, y) = alpha <x, y>
class BilinearGame final : public ZeroSumGame {
 public:
  BilinearGame(double alpha, Index dim);

  Index dim_x() const override { return dim_; }
  Index dim_y() const override { return dim_; }
  double value(const JointPoint& p) override;
  GradientPair gradients(const JointPoint& p) override;
  Vector mixed_xy(const JointPoint& p, const Vector& v) override;
  Vector mixed_yx(const JointPoint& p, const Vector& u) override;
  Vector hessian_xx(const JointPoint& p, const Vector& u) override;
  Vector hessian_yy(const JointPoint& p, const Vector& v) override;
  std::string name() const override;

  double alpha() const { return alpha_; }

 private:
  double alpha_;
  Index dim_;
};

enum class QuadraticSign { ConvexConcave, ConcaveConvex };

/// f(x, y) = alpha (|x|^2 - |y|^2), or its negation for ConcaveConvex.
class SeparableQuadraticGame final : public ZeroSumGame {
 public:
  SeparableQuadraticGame(double alpha, QuadraticSign sign, Index dim);

  Index dim_x() const override { return dim_; }
  Index dim_y() const override { return dim_; }
  double value(const JointPoint& p) override;
  GradientPair gradients(const JointPoint& p) override;
  Vector mixed_xy(const JointPoint& p, const Vector& v) override;
  Vector mixed_yx(const JointPoint& p, const Vector& u) override;
  Vector hessian_xx(const JointPoint& p, const Vector& u) override;
  Vector hessian_yy(const JointPoint& p, const Vector& v) override;
  std::string name() const override;

 private:
  double scale_;  // +alpha or -alpha
  double alpha_;
  QuadraticSign sign_;
  Index dim_;
};

/// f(x, y) = a'x + b'y + x'Ax/2 + x'By + y'Cy/2 with symmetric A, C.
/// Its Hessian is constant, so the Hessian is trivially Lipschitz with L = 0.
class QuadraticGame final : public ZeroSumGame {
 public:
  QuadraticGame(Vector a, Vector b, Matrix A, Matrix B, Matrix C);

  /// Random instance: Gaussian B scaled by `coupling`; A and C symmetric
  /// with spectral norm at most `curvature_bound` (0 gives a bilinear game).
  static QuadraticGame random(Index m, Index n, std::mt19937_64& rng, double coupling,
                              double curvature_bound);

  Index dim_x() const override { return a_.size(); }
  Index dim_y() const override { return b_.size(); }
  double value(const JointPoint& p) override;
  GradientPair gradients(const JointPoint& p) override;
  Vector mixed_xy(const JointPoint& p, const Vector& v) override;
  Vector mixed_yx(const JointPoint& p, const Vector& u) override;
  Vector hessian_xx(const JointPoint& p, const Vector& u) override;
  Vector hessian_yy(const JointPoint& p, const Vector& v) override;
  std::string name() const override { return "quadratic"; }

  const Matrix& A() const { return A_; }
  const Matrix& B() const { return B_; }
  const Matrix& C() const { return C_; }

 private:
  Vector a_, b_;
  Matrix A_, B_, C_;
};

BilinearGame make_bilinear(double alpha, Index dim);
SeparableQuadraticGame make_separable_quadratic(double alpha, QuadraticSign sign, Index dim);

// --- covariance estimation ------------------------------------------------

enum class SigmaSource { Deterministic, Stochastic };

/// How the generator's term is formed. IdentityNoise: f = <W, S - V Sz V'>
/// where Sz is the covariance of the generator's N(0, I) input (Id when
/// deterministic). SharedSigma: the same S appears in both terms.
enum class GeneratorNoise { IdentityNoise, SharedSigma };

enum class BatchSharing { PerIteration, PerOracleCall };

struct CovarianceOptions {
  SigmaSource source = SigmaSource::Deterministic;
  Index batch = 1000;
  std::uint64_t sample_seed = 1;
  BatchSharing sharing = BatchSharing::PerIteration;
  GeneratorNoise noise = GeneratorNoise::IdentityNoise;
};

/// Players W (x, minimizes f) and V (y, maximizes f), both d x d and
/// flattened row-major.
///   f(W, V) = sum_ij W_ij (S - V Sz V')_ij
class CovarianceGame final : public ZeroSumGame {
 public:
  CovarianceGame(Matrix U, CovarianceOptions options);

  Index dim_x() const override { return d_ * d_; }
  Index dim_y() const override { return d_ * d_; }
  double value(const JointPoint& p) override;
  GradientPair gradients(const JointPoint& p) override;
  Vector mixed_xy(const JointPoint& p, const Vector& v) override;
  Vector mixed_yx(const JointPoint& p, const Vector& u) override;
  Vector hessian_xx(const JointPoint& p, const Vector& u) override;
  Vector hessian_yy(const JointPoint& p, const Vector& v) override;
  void begin_iteration(std::int64_t iteration) override;
  std::optional<double> residual(const JointPoint& p) const override;
  std::string name() const override;

  Index d() const { return d_; }
  const Matrix& U() const { return U_; }
  const Matrix& sigma() const { return sigma_; }
  const Matrix& sigma_hat() const { return sigma_hat_; }
  const CovarianceOptions& options() const { return options_; }

  /// Draws a fresh empirical covariance (no-op when deterministic).
  void resample();

 private:
  void maybe_resample_per_call();

  Index d_;
  Matrix U_;
  Matrix sigma_;
  Matrix sigma_hat_;       // data term
  Matrix sigma_hat_fake_;  // generator term
  bool fake_is_identity_ = false;
  CovarianceOptions options_;
  std::mt19937_64 rng_;
};

/// |W + W'|_F / 2 + |UU' - VV'|_F
double covariance_residual(const Matrix& W, const Matrix& V, const Matrix& U);

/// d x d ground-truth factor with i.i.d. standard normal entries.
Matrix draw_covariance_factor(Index d, std::uint64_t seed);

CovarianceGame make_covariance_game(Index d, std::uint64_t seed, CovarianceOptions options = {});

/// W = dW, V = U + dV with dW, dV i.i.d. uniform on [-0.5, 0.5].
JointPoint init_covariance_point(const Matrix& U, std::uint64_t seed);

/// Row-major flattening helpers shared with tests.
Vector flatten(const Matrix& M);
Matrix unflatten(const Vector& v, Index d);

}  // namespace cgd
