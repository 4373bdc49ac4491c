#include "cgd/gan.hpp"

#include "cgd/hvp.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace cgd {

namespace {

double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

MlpSpec mlp(Index in, Index width, Index depth, Index out) {
  MlpSpec s;
  s.layer_dims.push_back(in);
  for (Index i = 0; i < depth; ++i) s.layer_dims.push_back(width);
  s.layer_dims.push_back(out);
  return s;
}

std::string padded(std::int64_t iteration) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06lld", static_cast<long long>(iteration));
  return buf;
}

}  // namespace

GanProblem GanProblem::desk_scale() {
  GanProblem p;
  p.noise_dim = 64;
  p.batch_real = p.batch_fake = 64;
  p.generator = mlp(64, 64, 2, 2);
  p.discriminator = mlp(2, 64, 2, 1);
  return p;
}

GanProblem GanProblem::full_scale() {
  GanProblem p;
  p.noise_dim = 512;
  p.batch_real = p.batch_fake = 256;
  p.generator = mlp(512, 128, 4, 2);
  p.discriminator = mlp(2, 128, 4, 1);
  return p;
}

void GanProblem::validate() const {
  generator.validate();
  discriminator.validate();
  if (generator.input_dim() != noise_dim || generator.output_dim() != 2)
    throw ContractError("GanProblem: generator must map noise_dim -> 2");
  if (discriminator.input_dim() != 2 || discriminator.output_dim() != 1)
    throw ContractError("GanProblem: discriminator must map 2 -> 1");
  if (batch_real < 1 || batch_fake < 1) throw ContractError("GanProblem: empty batch");
  if (!(mixture.sigma > 0.0)) throw ContractError("GanProblem: sigma must be positive");
}

Matrix orthonormal_init(Index rows, Index cols, std::uint64_t seed) {
  if (rows < 1 || cols < 1) throw ContractError("orthonormal_init: dims must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const bool tall = rows > cols;
  const Index r = tall ? rows : cols, c = tall ? cols : rows;
  Matrix G(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) G(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ() * Matrix::Identity(r, c);
  // Sign fix so the factorization is unique.
  const Matrix R = qr.matrixQR().topRows(c).triangularView<Eigen::Upper>();
  for (Index j = 0; j < c; ++j)
    if (R(j, j) < 0.0) Q.col(j) *= -1.0;
  return tall ? Q : Matrix(Q.transpose());
}

Vector init_mlp_params(const MlpSpec& spec, std::uint64_t seed) {
  spec.validate();
  Vector params = Vector::Zero(spec.num_params());
  for (Index l = 0; l < spec.num_layers(); ++l) {
    const Index in = spec.layer_dims[l], out = spec.layer_dims[l + 1];
    Eigen::Map<Matrix>(params.data() + spec.weight_offset(l), out, in) =
        orthonormal_init(out, in, seed + static_cast<std::uint64_t>(l));
  }
  return params;
}

JointPoint init_gan_point(const GanProblem& problem, std::uint64_t seed) {
  problem.validate();
  JointPoint p;
  p.x = init_mlp_params(problem.generator, seed);
  p.y = init_mlp_params(problem.discriminator, seed + 1000);
  return p;
}

Matrix generate(const GanProblem& problem, const Vector& gen_params, const Matrix& noise,
                kernels::Backend backend) {
  return kernels::forward(problem.generator, gen_params.data(), noise, nullptr, backend);
}

Matrix discriminate(const GanProblem& problem, const Vector& disc_params, const Matrix& points,
                    kernels::Backend backend) {
  return kernels::forward(problem.discriminator, disc_params.data(), points, nullptr, backend);
}

GanEvaluation gan_value_and_grads(const GanProblem& problem, const JointPoint& params,
                                  const Matrix& noise, const Matrix& real,
                                  kernels::Backend backend) {
  problem.validate();
  if (noise.cols() < 1 || real.cols() < 1) throw ContractError("gan: empty batch");
  if (noise.rows() != problem.noise_dim || real.rows() != 2)
    throw ContractError("gan: batch shape mismatch");
  if (params.x.size() != problem.generator.num_params() ||
      params.y.size() != problem.discriminator.num_params())
    throw ContractError("gan: parameter length mismatch");

  const MlpSpec& G = problem.generator;
  const MlpSpec& D = problem.discriminator;
  const Index nr = real.cols(), nf = noise.cols();

  kernels::ForwardCache gcache, dcache_real, dcache_fake;
  const Matrix fake = kernels::forward(G, params.x.data(), noise, &gcache, backend);
  const Matrix lr = kernels::forward(D, params.y.data(), real, &dcache_real, backend);
  const Matrix lf = kernels::forward(D, params.y.data(), fake, &dcache_fake, backend);

  GanEvaluation out;
  double loss = 0.0;
  Matrix dlr(1, nr), dlf(1, nf);
  for (Index i = 0; i < nr; ++i) {
    loss += softplus(-lr(0, i)) / static_cast<double>(nr);
    dlr(0, i) = -sigmoid(-lr(0, i)) / static_cast<double>(nr);
  }
  for (Index i = 0; i < nf; ++i) {
    loss += softplus(lf(0, i)) / static_cast<double>(nf);
    dlf(0, i) = sigmoid(lf(0, i)) / static_cast<double>(nf);
  }
  if (!std::isfinite(loss)) throw NumericalError("gan: non-finite loss", params);
  out.disc_loss = loss;

  Vector gD = Vector::Zero(D.num_params());
  Vector gG = Vector::Zero(G.num_params());
  Matrix dfake;
  kernels::backward(D, params.y.data(), dcache_real, dlr, gD.data(), nullptr, backend);
  kernels::backward(D, params.y.data(), dcache_fake, dlf, gD.data(), &dfake, backend);
  kernels::backward(G, params.x.data(), gcache, dfake, gG.data(), nullptr, backend);

  out.grads.gx = -gG;
  out.grads.gy = -gD;
  return out;
}

Matrix sample_mixture(const Mixture& mixture, Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::bernoulli_distribution coin(0.5);
  Matrix out(2, n);
  for (Index i = 0; i < n; ++i) {
    const Eigen::Vector2d& mu = coin(rng) ? mixture.mu2 : mixture.mu1;
    const double a = normal(rng), b = normal(rng);
    out(0, i) = mu[0] + mixture.sigma * a;
    out(1, i) = mu[1] + mixture.sigma * b;
  }
  return out;
}

Matrix sample_noise(Index dim, Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix out(dim, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < dim; ++i) out(i, j) = normal(rng);
  return out;
}

ModeCoverage mode_coverage(const Matrix& samples, const Mixture& mixture) {
  if (samples.rows() != 2 || samples.cols() < 1)
    throw ContractError("mode_coverage: need a nonempty 2 x N sample matrix");
  const double radius = 3.0 * mixture.sigma;
  Index n1 = 0, n2 = 0;
  for (Index i = 0; i < samples.cols(); ++i) {
    const Eigen::Vector2d s = samples.col(i);
    const double d1 = (s - mixture.mu1).norm(), d2 = (s - mixture.mu2).norm();
    if (d1 <= d2) {
      if (d1 <= radius) ++n1;
    } else if (d2 <= radius) {
      ++n2;
    }
  }
  const double n = static_cast<double>(samples.cols());
  return {n1 / n, n2 / n, (n - n1 - n2) / n};
}

GanGame::GanGame(GanProblem problem, std::uint64_t seed, kernels::Backend backend)
    : problem_(std::move(problem)), seed_(seed), backend_(backend) {
  problem_.validate();
  begin_iteration(0);
}

void GanGame::begin_iteration(std::int64_t iteration) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                    static_cast<std::uint32_t>(iteration),
                    static_cast<std::uint32_t>(static_cast<std::uint64_t>(iteration) >> 32)};
  std::mt19937_64 rng(seq);
  real_ = sample_mixture(problem_.mixture, problem_.batch_real, rng);
  noise_ = sample_noise(problem_.noise_dim, problem_.batch_fake, rng);
}

double GanGame::value(const JointPoint& p) {
  return -gan_value_and_grads(problem_, p, noise_, real_, backend_).disc_loss;
}

GradientPair GanGame::gradients(const JointPoint& p) {
  return gan_value_and_grads(problem_, p, noise_, real_, backend_).grads;
}

Vector GanGame::mixed_xy(const JointPoint& p, const Vector& v) {
  return fd_hvp([this](const JointPoint& q) { return gradients(q).gx; }, p, Block::Y, v,
                kDefaultStepScale, dim_x());
}

Vector GanGame::mixed_yx(const JointPoint& p, const Vector& u) {
  return fd_hvp([this](const JointPoint& q) { return gradients(q).gy; }, p, Block::X, u,
                kDefaultStepScale, dim_y());
}

void write_sample_dump(const std::filesystem::path& dir, std::int64_t iteration,
                       const Matrix& samples) {
  std::filesystem::create_directories(dir);
  const auto path = dir / ("samples_" + padded(iteration) + ".csv");
  std::ofstream f(path);
  f << "iteration,sample,x,y\n";
  f.precision(17);
  for (Index i = 0; i < samples.cols(); ++i)
    f << iteration << ',' << i << ',' << samples(0, i) << ',' << samples(1, i) << '\n';
}

void write_logit_dump(const std::filesystem::path& dir, std::int64_t iteration,
                      const GanProblem& problem, const Vector& disc_params, Index grid) {
  if (grid < 2) throw ContractError("write_logit_dump: grid must be at least 2");
  std::filesystem::create_directories(dir);
  Matrix pts(2, grid * grid);
  for (Index i = 0; i < grid; ++i)
    for (Index j = 0; j < grid; ++j) {
      pts(0, i * grid + j) = -1.5 + 3.0 * static_cast<double>(i) / static_cast<double>(grid - 1);
      pts(1, i * grid + j) = -1.5 + 3.0 * static_cast<double>(j) / static_cast<double>(grid - 1);
    }
  const Matrix logits = discriminate(problem, disc_params, pts);
  std::ofstream f(dir / ("logits_" + padded(iteration) + ".csv"));
  f << "iteration,gx,gy,logit\n";
  f.precision(17);
  for (Index k = 0; k < pts.cols(); ++k)
    f << iteration << ',' << pts(0, k) << ',' << pts(1, k) << ',' << logits(0, k) << '\n';
}

}  // namespace cgd
