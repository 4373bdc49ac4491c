#include "cgd/testkit.hpp"

#include "cgd/solvers.hpp"

#include <cmath>
#include <limits>

namespace cgd {

namespace {

Matrix probe(Index rows, Index cols, const std::function<Vector(const Vector&)>& apply) {
  Matrix M(rows, cols);
  Vector e = Vector::Zero(cols);
  for (Index j = 0; j < cols; ++j) {
    e[j] = 1.0;
    M.col(j) = apply(e);
    e[j] = 0.0;
  }
  return M;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

nlohmann::json vec_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

DenseLocalGame assemble_local_game(ZeroSumGame& game, const JointPoint& p, double eta) {
  DenseLocalGame g;
  const GradientPair grads = evaluate_gradients(game, p);
  g.gx = grads.gx;
  g.gy = grads.gy;
  g.Nxy = probe(game.dim_x(), game.dim_y(),
                [&](const Vector& v) { return apply_mixed_xy(game, p, v); });
  g.eta = eta;
  return g;
}

DenseHessian assemble_hessian(ZeroSumGame& game, const JointPoint& p) {
  const Index m = game.dim_x(), n = game.dim_y();
  DenseHessian h;
  h.Dxx = probe(m, m, [&](const Vector& u) { return apply_hessian_xx(game, p, u); });
  h.Dxy = probe(m, n, [&](const Vector& v) { return apply_mixed_xy(game, p, v); });
  h.Dyx = probe(n, m, [&](const Vector& u) { return apply_mixed_yx(game, p, u); });
  h.Dyy = probe(n, n, [&](const Vector& v) { return apply_hessian_yy(game, p, v); });
  return h;
}

std::pair<Vector, Vector> dense_nash_solve(const DenseLocalGame& g) {
  const Index m = g.gx.size(), n = g.gy.size();
  if (g.Nxy.rows() != m || g.Nxy.cols() != n)
    throw ContractError("dense_nash_solve: N shape does not match gradients");
  if (m + n > 2000) throw ContractError("dense_nash_solve: system too large for a dense solve");
  Matrix K = Matrix::Identity(m + n, m + n);
  K.topRightCorner(m, n) = g.eta * g.Nxy;
  K.bottomLeftCorner(n, m) = -g.eta * g.Nxy.transpose();
  Vector rhs(m + n);
  rhs << -g.eta * g.gx, g.eta * g.gy;
  Eigen::FullPivLU<Matrix> lu(K);
  if (!lu.isInvertible()) throw std::runtime_error("dense_nash_solve: singular block system");
  const Vector d = lu.solve(rhs);
  return {d.head(m), d.tail(n)};
}

BestResponseResult best_response_iteration(const DenseLocalGame& g,
                                           std::optional<std::pair<Vector, Vector>> start,
                                           int max_rounds, double tol) {
  const Index m = g.gx.size(), n = g.gy.size();
  BestResponseResult r;
  r.delta_x = start ? start->first : Vector::Zero(m);
  r.delta_y = start ? start->second : Vector::Zero(n);
  for (int k = 1; k <= max_rounds; ++k) {
    r.delta_x = -g.eta * (g.gx + g.Nxy * r.delta_y);
    r.delta_y = g.eta * (g.gy + g.Nxy.transpose() * r.delta_x);
    r.rounds = k;
    if (!r.delta_x.allFinite() || !r.delta_y.allFinite()) return r;
    // y is already a best response to x; only x can be off.
    const double residual = (r.delta_x + g.eta * (g.gx + g.Nxy * r.delta_y)).norm();
    if (residual < tol) {
      r.converged = true;
      return r;
    }
  }
  return r;
}

std::pair<Vector, Vector> dense_update(Method method, const DenseLocalGame& g,
                                       const DenseHessian& h, double gamma) {
  const double eta = g.eta;
  const Matrix& N = g.Nxy;
  switch (method) {
    case Method::GDA:
      return {-eta * g.gx, eta * g.gy};
    case Method::LCGD:
      return {-eta * (g.gx + eta * N * g.gy), eta * (g.gy - eta * N.transpose() * g.gx)};
    case Method::SGA:
      return {-eta * (g.gx + gamma * N * g.gy), eta * (g.gy - gamma * N.transpose() * g.gx)};
    case Method::ConOpt:
      return {-eta * (g.gx + gamma * N * g.gy + gamma * h.Dxx * g.gx),
              eta * (g.gy - gamma * N.transpose() * g.gx - gamma * h.Dyy * g.gy)};
    case Method::OGDA:
      return {-eta * (g.gx + eta * N * g.gy - eta * h.Dxx * g.gx),
              eta * (g.gy - eta * N.transpose() * g.gx + eta * h.Dyy * g.gy)};
    case Method::CGD:
      return dense_nash_solve(g);
  }
  throw ContractError("dense_update: unknown method");
}

Matrix spectral_h(const Matrix& symmetric, SpectralConvention convention) {
  const Matrix S = 0.5 * (symmetric + symmetric.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  const double c = convention == SpectralConvention::HalfPhi ? 0.5 : 1.0;
  const Vector phi =
      es.eigenvalues().unaryExpr([c](double l) { return c * (2.0 * l - std::abs(l)); });
  return es.eigenvectors() * phi.asDiagonal() * es.eigenvectors().transpose();
}

nlohmann::json TheoremBoundReport::to_json() const {
  return {
      {"gap", gap},
      {"lhs", lhs},
      {"rhs", rhs},
      {"eta", eta},
      {"lipschitz", lipschitz},
      {"convention", convention == SpectralConvention::HalfPhi ? "half_phi" : "phi"},
      {"point", {{"x", vec_json(point.x)}, {"y", vec_json(point.y)}}},
      {"spectrum_xx", vec_json(spectrum_xx)},
      {"spectrum_yy", vec_json(spectrum_yy)},
      {"singular_values_xy", vec_json(spectrum_mixed)},
  };
}

TheoremBoundReport theorem_bound_report(ZeroSumGame& game, const JointPoint& p, double eta,
                                        double lipschitz, SpectralConvention convention,
                                        double krylov_tol) {
  if (!(eta > 0.0)) throw ContractError("theorem_bound: eta must be positive");
  if (!(lipschitz >= 0.0)) throw ContractError("theorem_bound: L must be nonnegative");
  const DenseHessian H = assemble_hessian(game, p);
  const Matrix Hxx = 0.5 * (H.Dxx + H.Dxx.transpose());
  const Matrix Hyy = 0.5 * (H.Dyy + H.Dyy.transpose());

  TheoremBoundReport r;
  r.eta = eta;
  r.lipschitz = lipschitz;
  r.convention = convention;
  r.point = p;
  r.spectrum_xx = Eigen::SelfAdjointEigenSolver<Matrix>(Hxx, Eigen::EigenvaluesOnly).eigenvalues();
  r.spectrum_yy = Eigen::SelfAdjointEigenSolver<Matrix>(Hyy, Eigen::EigenvaluesOnly).eigenvalues();
  r.spectrum_mixed = Eigen::JacobiSVD<Matrix>(H.Dxy).singularValues();

  constexpr double kBound = 1.0 / 18.0;
  const double slack = 1e-12;
  if (r.spectrum_xx.size() && eta * r.spectrum_xx.cwiseAbs().maxCoeff() > kBound + slack)
    throw ContractError("theorem_bound: eta |D_xx f| exceeds 1/18");
  if (r.spectrum_yy.size() && eta * r.spectrum_yy.cwiseAbs().maxCoeff() > kBound + slack)
    throw ContractError("theorem_bound: eta |D_yy f| exceeds 1/18");

  const GradientPair g0 = evaluate_gradients(game, p);
  const Vector& a = g0.gx;
  const Vector& b = g0.gy;

  SolverConfig cfg;
  cfg.method = Method::CGD;
  cfg.eta = eta;
  cfg.krylov.tol = krylov_tol;
  cfg.krylov.max_iter = 10 * (game.dim_x() + 10);
  cfg.warm_start = false;
  SolverState state{p, std::nullopt, std::nullopt, std::nullopt};
  const UpdateResult u = cgd_step(game, state, cfg);
  apply_update(state, u);
  const GradientPair g1 = evaluate_gradients(game, state.point);
  r.lhs = g1.gx.squaredNorm() + g1.gy.squaredNorm() - a.squaredNorm() - b.squaredNorm();

  const Index m = a.size(), n = b.size();
  const Matrix Mbar = eta * eta * H.Dxy * H.Dxy.transpose();
  const Matrix Mtil = eta * eta * H.Dxy.transpose() * H.Dxy;
  const Matrix Dbar = (Matrix::Identity(m, m) + Mbar).ldlt().solve(Mbar);
  const Matrix Dtil = (Matrix::Identity(n, n) + Mtil).ldlt().solve(Mtil);
  const Matrix Px = 2.0 * eta * spectral_h(Hxx, convention) + Dbar / 3.0;
  const Matrix Py = 2.0 * eta * spectral_h(-Hyy, convention) + Dtil / 3.0;
  const double na = a.norm(), nb = b.norm();
  const double penalty = 32.0 * eta * eta * lipschitz * (na + nb) +
                         768.0 * std::pow(eta, 4) * lipschitz * lipschitz;
  r.rhs = -a.dot(Px * a) - b.dot(Py * b) + penalty * (na * na + nb * nb);
  r.gap = r.rhs - r.lhs;
  return r;
}

double theorem_bound_gap(ZeroSumGame& game, const JointPoint& p, double eta, double lipschitz) {
  return theorem_bound_report(game, p, eta, lipschitz).gap;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Converged:
      return "Converged";
    case Verdict::Diverged:
      return "Diverged";
    case Verdict::Bounded:
      return "Bounded";
  }
  return "?";
}

TrajectoryVerdict classify_series(const std::vector<std::int64_t>& iterations,
                                  const std::vector<double>& values,
                                  const ClassifierThresholds& thresholds) {
  if (values.size() < 2 || iterations.size() != values.size())
    throw ContractError("classify: need at least two aligned entries");
  TrajectoryVerdict v;
  v.thresholds = thresholds;
  v.initial = values.front();
  v.final = values.back();

  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!std::isfinite(values[k])) {
      v.kind = Verdict::Diverged;
      v.final = values[k];
      v.divergence_iteration = iterations[k];
      return v;
    }
  }
  const double blowup = thresholds.diverge_ratio * v.initial;
  if (v.final >= blowup && v.final > thresholds.converge_abs) {
    v.kind = Verdict::Diverged;
    for (std::size_t k = 0; k < values.size(); ++k)
      if (values[k] >= blowup) {
        v.divergence_iteration = iterations[k];
        break;
      }
    return v;
  }
  if (v.final <= thresholds.converge_ratio * v.initial || v.final <= thresholds.converge_abs) {
    v.kind = Verdict::Converged;
    // least-squares slope of log(value) over the positive entries
    std::vector<double> t, l;
    for (std::size_t k = 0; k < values.size(); ++k)
      if (values[k] > 0.0) {
        t.push_back(static_cast<double>(iterations[k]));
        l.push_back(std::log(values[k]));
      }
    if (t.size() >= 2) {
      const Vector tv = to_vector(t), lv = to_vector(l);
      const double tm = tv.mean(), lm = lv.mean();
      const double denom = (tv.array() - tm).square().sum();
      if (denom > 0.0) v.rate = ((tv.array() - tm) * (lv.array() - lm)).sum() / denom;
    }
    return v;
  }
  v.kind = Verdict::Bounded;
  return v;
}

TrajectoryVerdict classify_trajectory(const TraceRecord& trace, std::optional<std::int64_t> horizon,
                                      const ClassifierThresholds& thresholds) {
  if (trace.aborted && (!horizon || (trace.abort_iteration && *trace.abort_iteration <= *horizon))) {
    TrajectoryVerdict v;
    v.kind = Verdict::Diverged;
    v.thresholds = thresholds;
    if (!trace.entries.empty()) {
      const TraceEntry& e = trace.entries.front();
      v.initial = thresholds.measure == TrajectoryMeasure::Residual
                      ? e.problem_residual.value_or(0.0)
                      : e.joint_norm;
    }
    v.final = std::numeric_limits<double>::infinity();
    v.divergence_iteration = trace.abort_iteration;
    return v;
  }
  std::vector<std::int64_t> its;
  std::vector<double> vals;
  for (const TraceEntry& e : trace.entries) {
    if (horizon && e.iteration > *horizon) break;
    its.push_back(e.iteration);
    if (thresholds.measure == TrajectoryMeasure::Residual) {
      if (!e.problem_residual) throw ContractError("classify: trace has no problem residual");
      vals.push_back(*e.problem_residual);
    } else {
      vals.push_back(e.joint_norm);
    }
  }
  return classify_series(its, vals, thresholds);
}

}  // namespace cgd
