#include "cgd/problems.hpp"

#include <cmath>
#include <sstream>

namespace cgd {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatView = Eigen::Map<const RowMat>;
using MatView = Eigen::Map<RowMat>;

ConstMatView view(const Vector& v, Index d) { return ConstMatView(v.data(), d, d); }

std::string format_alpha(double alpha) {
  std::ostringstream os;
  os << alpha;
  return os.str();
}

}  // namespace

// --- bilinear ---------------------------------------------------------------

BilinearGame::BilinearGame(double alpha, Index dim) : alpha_(alpha), dim_(dim) {
  if (dim < 1) throw ContractError("bilinear game needs dim >= 1");
}

double BilinearGame::value(const JointPoint& p) { return alpha_ * p.x.dot(p.y); }

GradientPair BilinearGame::gradients(const JointPoint& p) {
  return {alpha_ * p.y, alpha_ * p.x};
}

Vector BilinearGame::mixed_xy(const JointPoint&, const Vector& v) { return alpha_ * v; }
Vector BilinearGame::mixed_yx(const JointPoint&, const Vector& u) { return alpha_ * u; }
Vector BilinearGame::hessian_xx(const JointPoint&, const Vector& u) {
  return Vector::Zero(u.size());
}
Vector BilinearGame::hessian_yy(const JointPoint&, const Vector& v) {
  return Vector::Zero(v.size());
}

std::string BilinearGame::name() const { return "bilinear(alpha=" + format_alpha(alpha_) + ")"; }

// --- separable quadratic ----------------------------------------------------

SeparableQuadraticGame::SeparableQuadraticGame(double alpha, QuadraticSign sign, Index dim)
    : scale_(sign == QuadraticSign::ConvexConcave ? alpha : -alpha),
      alpha_(alpha),
      sign_(sign),
      dim_(dim) {
  if (dim < 1) throw ContractError("separable quadratic game needs dim >= 1");
}

double SeparableQuadraticGame::value(const JointPoint& p) {
  return scale_ * (p.x.squaredNorm() - p.y.squaredNorm());
}

GradientPair SeparableQuadraticGame::gradients(const JointPoint& p) {
  return {2.0 * scale_ * p.x, -2.0 * scale_ * p.y};
}

Vector SeparableQuadraticGame::mixed_xy(const JointPoint&, const Vector&) {
  return Vector::Zero(dim_);
}
Vector SeparableQuadraticGame::mixed_yx(const JointPoint&, const Vector&) {
  return Vector::Zero(dim_);
}
Vector SeparableQuadraticGame::hessian_xx(const JointPoint&, const Vector& u) {
  return 2.0 * scale_ * u;
}
Vector SeparableQuadraticGame::hessian_yy(const JointPoint&, const Vector& v) {
  return -2.0 * scale_ * v;
}

std::string SeparableQuadraticGame::name() const {
  return std::string(sign_ == QuadraticSign::ConvexConcave ? "convex-concave" : "concave-convex") +
         "(alpha=" + format_alpha(alpha_) + ")";
}

// --- general quadratic ------------------------------------------------------

QuadraticGame::QuadraticGame(Vector a, Vector b, Matrix A, Matrix B, Matrix C)
    : a_(std::move(a)), b_(std::move(b)), A_(std::move(A)), B_(std::move(B)), C_(std::move(C)) {
  const Index m = a_.size(), n = b_.size();
  if (A_.rows() != m || A_.cols() != m || B_.rows() != m || B_.cols() != n || C_.rows() != n ||
      C_.cols() != n) {
    throw ContractError("quadratic game: inconsistent block shapes");
  }
}

QuadraticGame QuadraticGame::random(Index m, Index n, std::mt19937_64& rng, double coupling,
                                    double curvature_bound) {
  std::normal_distribution<double> normal;
  auto gaussian = [&](Index r, Index c) {
    Matrix M(r, c);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j) M(i, j) = normal(rng);
    return M;
  };
  auto symmetric = [&](Index k) -> Matrix {
    if (curvature_bound == 0.0) return Matrix::Zero(k, k);
    Matrix S = gaussian(k, k);
    S = (0.5 * (S + S.transpose())).eval();
    const double spec = Eigen::SelfAdjointEigenSolver<Matrix>(S).eigenvalues().cwiseAbs().maxCoeff();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    return spec > 0.0 ? Matrix(S * (curvature_bound * unit(rng) / spec)) : S;
  };
  Vector a = gaussian(m, 1).col(0);
  Vector b = gaussian(n, 1).col(0);
  Matrix A = symmetric(m);
  Matrix C = symmetric(n);
  Matrix B = coupling * gaussian(m, n);
  return QuadraticGame(std::move(a), std::move(b), std::move(A), std::move(B), std::move(C));
}

double QuadraticGame::value(const JointPoint& p) {
  return a_.dot(p.x) + b_.dot(p.y) + 0.5 * p.x.dot(A_ * p.x) + p.x.dot(B_ * p.y) +
         0.5 * p.y.dot(C_ * p.y);
}

GradientPair QuadraticGame::gradients(const JointPoint& p) {
  return {a_ + A_ * p.x + B_ * p.y, b_ + B_.transpose() * p.x + C_ * p.y};
}

Vector QuadraticGame::mixed_xy(const JointPoint&, const Vector& v) { return B_ * v; }
Vector QuadraticGame::mixed_yx(const JointPoint&, const Vector& u) { return B_.transpose() * u; }
Vector QuadraticGame::hessian_xx(const JointPoint&, const Vector& u) { return A_ * u; }
Vector QuadraticGame::hessian_yy(const JointPoint&, const Vector& v) { return C_ * v; }

BilinearGame make_bilinear(double alpha, Index dim) { return BilinearGame(alpha, dim); }

SeparableQuadraticGame make_separable_quadratic(double alpha, QuadraticSign sign, Index dim) {
  return SeparableQuadraticGame(alpha, sign, dim);
}

// --- covariance estimation --------------------------------------------------

CovarianceGame::CovarianceGame(Matrix U, CovarianceOptions options)
    : d_(U.rows()), U_(std::move(U)), options_(options), rng_(options.sample_seed) {
  if (d_ < 1 || U_.cols() != d_) throw ContractError("covariance game needs a square U, d >= 1");
  if (options_.source == SigmaSource::Stochastic && options_.batch < 1)
    throw ContractError("covariance game: stochastic batch must be positive");
  sigma_ = U_ * U_.transpose();
  sigma_hat_ = sigma_;
  if (options_.noise == GeneratorNoise::SharedSigma) {
    sigma_hat_fake_ = sigma_hat_;
  } else {
    sigma_hat_fake_ = Matrix::Identity(d_, d_);
    fake_is_identity_ = true;
  }
  if (options_.source == SigmaSource::Stochastic) resample();
}

void CovarianceGame::resample() {
  if (options_.source != SigmaSource::Stochastic) return;
  std::normal_distribution<double> normal;
  auto empirical = [&]() {
    Matrix Z(d_, options_.batch);
    for (Index j = 0; j < Z.cols(); ++j)
      for (Index i = 0; i < d_; ++i) Z(i, j) = normal(rng_);
    Matrix S = Matrix::Zero(d_, d_);
    S.selfadjointView<Eigen::Lower>().rankUpdate(Z, 1.0 / static_cast<double>(options_.batch));
    return Matrix(S.selfadjointView<Eigen::Lower>());
  };
  const Matrix zz = empirical();
  sigma_hat_ = U_ * zz * U_.transpose();
  if (options_.noise == GeneratorNoise::SharedSigma) {
    sigma_hat_fake_ = sigma_hat_;
  } else {
    sigma_hat_fake_ = empirical();
  }
  fake_is_identity_ = false;
}

void CovarianceGame::maybe_resample_per_call() {
  if (options_.source == SigmaSource::Stochastic &&
      options_.sharing == BatchSharing::PerOracleCall) {
    resample();
  }
}

void CovarianceGame::begin_iteration(std::int64_t) {
  if (options_.sharing == BatchSharing::PerIteration) resample();
}

double CovarianceGame::value(const JointPoint& p) {
  check_dims(*this, p);
  maybe_resample_per_call();
  const auto W = view(p.x, d_);
  const auto V = view(p.y, d_);
  Matrix gen = fake_is_identity_ ? Matrix(V * V.transpose())
                                 : Matrix(V * sigma_hat_fake_ * V.transpose());
  return (W.array() * (sigma_hat_ - gen).array()).sum();
}

GradientPair CovarianceGame::gradients(const JointPoint& p) {
  maybe_resample_per_call();
  const auto W = view(p.x, d_);
  const auto V = view(p.y, d_);
  GradientPair g{Vector(d_ * d_), Vector(d_ * d_)};
  MatView gW(g.gx.data(), d_, d_);
  MatView gV(g.gy.data(), d_, d_);
  const RowMat Wsym = W + W.transpose();
  if (fake_is_identity_) {
    gW = sigma_hat_;
    gW.noalias() -= V * V.transpose();
    gV.noalias() = -Wsym * V;
  } else {
    const RowMat VS = V * sigma_hat_fake_;
    gW = sigma_hat_;
    gW.noalias() -= VS * V.transpose();
    gV.noalias() = -Wsym * VS;
  }
  return g;
}

Vector CovarianceGame::mixed_xy(const JointPoint& p, const Vector& v) {
  maybe_resample_per_call();
  const auto V = view(p.y, d_);
  const auto Vt = view(v, d_);
  RowMat P(d_, d_);
  if (fake_is_identity_) {
    P.noalias() = Vt * V.transpose();
  } else {
    P.noalias() = Vt * sigma_hat_fake_ * V.transpose();
  }
  Vector out(d_ * d_);
  MatView(out.data(), d_, d_) = -(P + P.transpose());
  return out;
}

Vector CovarianceGame::mixed_yx(const JointPoint& p, const Vector& u) {
  maybe_resample_per_call();
  const auto V = view(p.y, d_);
  const auto Wt = view(u, d_);
  const RowMat S = Wt + Wt.transpose();
  Vector out(d_ * d_);
  MatView o(out.data(), d_, d_);
  if (fake_is_identity_) {
    o.noalias() = -S * V;
  } else {
    o.noalias() = -S * (V * sigma_hat_fake_);
  }
  return out;
}

Vector CovarianceGame::hessian_xx(const JointPoint&, const Vector& u) {
  return Vector::Zero(u.size());
}

Vector CovarianceGame::hessian_yy(const JointPoint& p, const Vector& v) {
  maybe_resample_per_call();
  const auto W = view(p.x, d_);
  const auto Vt = view(v, d_);
  const RowMat Wsym = W + W.transpose();
  Vector out(d_ * d_);
  MatView o(out.data(), d_, d_);
  if (fake_is_identity_) {
    o.noalias() = -Wsym * Vt;
  } else {
    o.noalias() = -Wsym * (Vt * sigma_hat_fake_);
  }
  return out;
}

std::optional<double> CovarianceGame::residual(const JointPoint& p) const {
  if (p.x.size() != d_ * d_ || p.y.size() != d_ * d_) return std::nullopt;
  return covariance_residual(unflatten(p.x, d_), unflatten(p.y, d_), U_);
}

std::string CovarianceGame::name() const {
  std::string s = "covariance(d=" + std::to_string(d_);
  if (options_.source == SigmaSource::Stochastic) s += ", batch=" + std::to_string(options_.batch);
  if (options_.noise == GeneratorNoise::SharedSigma) s += ", shared-sigma";
  return s + ")";
}

double covariance_residual(const Matrix& W, const Matrix& V, const Matrix& U) {
  if (W.rows() != W.cols() || V.rows() != W.rows() || V.cols() != W.cols() ||
      U.rows() != W.rows() || U.cols() != W.cols()) {
    throw ContractError("covariance_residual: all matrices must be d x d");
  }
  return (W + W.transpose()).norm() / 2.0 + (U * U.transpose() - V * V.transpose()).norm();
}

Matrix draw_covariance_factor(Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix U(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) U(i, j) = normal(rng);
  return U;
}

CovarianceGame make_covariance_game(Index d, std::uint64_t seed, CovarianceOptions options) {
  if (d < 1) throw ContractError("covariance game needs d >= 1");
  return CovarianceGame(draw_covariance_factor(d, seed), options);
}

JointPoint init_covariance_point(const Matrix& U, std::uint64_t seed) {
  const Index d = U.rows();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-0.5, 0.5);
  Matrix W(d, d), V(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) W(i, j) = uniform(rng);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) V(i, j) = U(i, j) + uniform(rng);
  return JointPoint{flatten(W), flatten(V), 0};
}

Vector flatten(const Matrix& M) {
  Vector v(M.size());
  MatView(v.data(), M.rows(), M.cols()) = M;
  return v;
}

Matrix unflatten(const Vector& v, Index d) {
  if (v.size() != d * d) throw ContractError("unflatten: length is not d*d");
  return Matrix(view(v, d));
}

}  // namespace cgd
