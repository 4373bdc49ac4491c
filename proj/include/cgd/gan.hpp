#pragma once

// GAN on a two-component Gaussian mixture in the plane. The generator's
// parameters are the x-player, the discriminator's the y-player, and the
// game value is minus the discriminator's cross-entropy loss.

#include "cgd/core.hpp"
#include "cgd/kernels.hpp"

#include <filesystem>
#include <random>

namespace cgd {

struct Mixture {
  Eigen::Vector2d mu1{0.0, 1.0};
  Eigen::Vector2d mu2{0.70710678118654752, 0.70710678118654752};
  double sigma = 0.1;
};

struct GanProblem {
  MlpSpec generator;      // noise_dim -> ... -> 2
  MlpSpec discriminator;  // 2 -> ... -> 1
  Index noise_dim = 64;
  Index batch_real = 64;
  Index batch_fake = 64;
  Mixture mixture;

  /// 2 hidden layers of 64, noise 64, batches 64 + 64.
  static GanProblem desk_scale();
  /// 4 hidden layers of 128, noise 512, batches 256 + 256.
  static GanProblem full_scale();
  void validate() const;
};

/// Seeded Gaussian matrix orthogonalized by QR: orthonormal rows when
/// rows <= cols, orthonormal columns otherwise.
Matrix orthonormal_init(Index rows, Index cols, std::uint64_t seed);

/// Orthonormal weights, zero biases. Layer l uses seed + l.
Vector init_mlp_params(const MlpSpec& spec, std::uint64_t seed);

/// Generator parameters in x, discriminator parameters in y.
JointPoint init_gan_point(const GanProblem& problem, std::uint64_t seed);

struct GanEvaluation {
  double disc_loss = 0.0;  // mean softplus(-l_real) + mean softplus(l_fake)
  GradientPair grads;      // of the game value -disc_loss
};

/// Exact gradients by reverse accumulation through both networks.
/// noise: noise_dim x batch_fake, real: 2 x batch_real.
GanEvaluation gan_value_and_grads(const GanProblem& problem, const JointPoint& params,
                                  const Matrix& noise, const Matrix& real,
                                  kernels::Backend backend = kernels::Backend::OpenMP);

/// Generator output (2 x batch) for the given noise.
Matrix generate(const GanProblem& problem, const Vector& gen_params, const Matrix& noise,
                kernels::Backend backend = kernels::Backend::OpenMP);

/// Discriminator logits (1 x batch).
Matrix discriminate(const GanProblem& problem, const Vector& disc_params, const Matrix& points,
                    kernels::Backend backend = kernels::Backend::OpenMP);

/// Equal-weight mixture samples, 2 x n.
Matrix sample_mixture(const Mixture& mixture, Index n, std::mt19937_64& rng);
Matrix sample_noise(Index dim, Index n, std::mt19937_64& rng);

struct ModeCoverage {
  double frac_mode1 = 0.0;
  double frac_mode2 = 0.0;
  double frac_neither = 0.0;
};

/// Fraction of samples (columns of a 2 x N matrix) within 3 sigma of each
/// mode center; a sample near both counts for the nearer.
ModeCoverage mode_coverage(const Matrix& samples, const Mixture& mixture);

/// Zero-sum game wrapper. Batches are redrawn in begin_iteration from a
/// stream seeded by (seed, iteration) and stay fixed until the next call.
/// Its second-order oracles are finite differences of the exact gradients.
class GanGame final : public ZeroSumGame {
 public:
  GanGame(GanProblem problem, std::uint64_t seed,
          kernels::Backend backend = kernels::Backend::OpenMP);

  Index dim_x() const override { return problem_.generator.num_params(); }
  Index dim_y() const override { return problem_.discriminator.num_params(); }
  double value(const JointPoint& p) override;
  GradientPair gradients(const JointPoint& p) override;
  Vector mixed_xy(const JointPoint& p, const Vector& v) override;
  Vector mixed_yx(const JointPoint& p, const Vector& u) override;
  void begin_iteration(std::int64_t iteration) override;
  std::string name() const override { return "gan"; }

  const GanProblem& problem() const { return problem_; }
  const Matrix& noise() const { return noise_; }
  const Matrix& real() const { return real_; }

 private:
  GanProblem problem_;
  std::uint64_t seed_;
  kernels::Backend backend_;
  Matrix noise_;
  Matrix real_;
};

/// samples_<iter>.csv: iteration,sample,x,y
void write_sample_dump(const std::filesystem::path& dir, std::int64_t iteration,
                       const Matrix& samples);
/// logits_<iter>.csv: iteration,gx,gy,logit over a grid x grid lattice of
/// [-1.5, 1.5]^2.
void write_logit_dump(const std::filesystem::path& dir, std::int64_t iteration,
                      const GanProblem& problem, const Vector& disc_params, Index grid = 61);

}  // namespace cgd
