#pragma once

#include "cgd/core.hpp"

#include <doctest.h>

#include <random>

namespace cgd::test {

inline Vector random_vector(Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = scale * normal(rng);
  return v;
}

inline Matrix random_matrix(Index r, Index c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal;
  Matrix M(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) M(i, j) = scale * normal(rng);
  return M;
}

inline JointPoint random_point(Index m, Index n, std::mt19937_64& rng, double scale = 1.0) {
  return JointPoint{random_vector(m, rng, scale), random_vector(n, rng, scale), 0};
}

inline JointPoint scalar_point(double x, double y) {
  return JointPoint{Vector::Constant(1, x), Vector::Constant(1, y), 0};
}

inline double rel_err(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(1e-300, std::max(a.norm(), b.norm()));
}

/// f(x, y) = x' A y, built only for tests.
class MatrixBilinear final : public ZeroSumGame {
 public:
  explicit MatrixBilinear(Matrix A) : A_(std::move(A)) {}
  Index dim_x() const override { return A_.rows(); }
  Index dim_y() const override { return A_.cols(); }
  double value(const JointPoint& p) override { return p.x.dot(A_ * p.y); }
  GradientPair gradients(const JointPoint& p) override {
    return {A_ * p.y, A_.transpose() * p.x};
  }
  Vector mixed_xy(const JointPoint&, const Vector& v) override { return A_ * v; }
  Vector mixed_yx(const JointPoint&, const Vector& u) override { return A_.transpose() * u; }
  std::string name() const override { return "matrix-bilinear"; }

 private:
  Matrix A_;
};

}  // namespace cgd::test

namespace cgd::test {

/// Central differences of the game value, one coordinate at a time.
inline GradientPair fd_value_gradient(ZeroSumGame& game, const JointPoint& p, double h = 1e-6) {
  GradientPair g{Vector(p.x.size()), Vector(p.y.size())};
  for (Index i = 0; i < p.x.size(); ++i) {
    JointPoint a = p, b = p;
    const double step = h * (1.0 + std::abs(p.x[i]));
    a.x[i] += step;
    b.x[i] -= step;
    g.gx[i] = (game.value(a) - game.value(b)) / (2.0 * step);
  }
  for (Index i = 0; i < p.y.size(); ++i) {
    JointPoint a = p, b = p;
    const double step = h * (1.0 + std::abs(p.y[i]));
    a.y[i] += step;
    b.y[i] -= step;
    g.gy[i] = (game.value(a) - game.value(b)) / (2.0 * step);
  }
  return g;
}

/// max over probes of |<u, Dxy v> - <Dyx u, v>| / (1 + |<u, Dxy v>|)
inline double adjointness_defect(ZeroSumGame& game, int probes, std::mt19937_64& rng,
                                 double scale = 1.0) {
  double worst = 0.0;
  for (int k = 0; k < probes; ++k) {
    const JointPoint p = random_point(game.dim_x(), game.dim_y(), rng, scale);
    const Vector u = random_vector(game.dim_x(), rng);
    const Vector v = random_vector(game.dim_y(), rng);
    const double lhs = u.dot(game.mixed_xy(p, v));
    const double rhs = game.mixed_yx(p, u).dot(v);
    worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
  }
  return worst;
}

}  // namespace cgd::test
