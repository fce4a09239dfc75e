#include "thetanorm/solver.hpp"

#include "thetanorm/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace thetanorm {

namespace {

Vector pad(const Vector& s, std::size_t m) {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(m));
  const Eigen::Index keep = std::min(out.size(), s.size());
  out.head(keep) = s.head(keep);
  return out;
}

bool uses_box(RegularizerKind kind) {
  return kind == RegularizerKind::SpectralBox || kind == RegularizerKind::Cluster ||
         kind == RegularizerKind::CenteredCluster;
}

bool uses_ksupport(RegularizerKind kind) {
  return kind == RegularizerKind::SpectralKSupport ||
         kind == RegularizerKind::CenteredKSupport;
}

// Objective change used by the stopping rule.
bool relative_change_below(double previous, double current, double tol) {
  if (previous == 0.0) return current == 0.0;
  return std::abs(current - previous) / std::abs(previous) < tol;
}

}  // namespace

std::string to_string(RegularizerKind kind) {
  switch (kind) {
    case RegularizerKind::Trace: return "tr";
    case RegularizerKind::ElasticNet: return "en";
    case RegularizerKind::SpectralKSupport: return "ks";
    case RegularizerKind::SpectralBox: return "box";
    case RegularizerKind::Cluster: return "cn";
    case RegularizerKind::CenteredCluster: return "c-cn";
    case RegularizerKind::CenteredKSupport: return "c-ks";
  }
  return "?";
}

RegularizerKind parse_regularizer(const std::string& name) {
  for (auto kind : {RegularizerKind::Trace, RegularizerKind::ElasticNet,
                    RegularizerKind::SpectralKSupport, RegularizerKind::SpectralBox,
                    RegularizerKind::Cluster, RegularizerKind::CenteredCluster,
                    RegularizerKind::CenteredKSupport}) {
    if (to_string(kind) == name) return kind;
  }
  throw InvalidParams("unknown regularizer '" + name + "'");
}

bool Regularizer::centered() const {
  return kind == RegularizerKind::CenteredCluster ||
         kind == RegularizerKind::CenteredKSupport;
}

void Regularizer::validate(std::size_t cols) const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidParams("lambda must be finite and non-negative");
  }
  if (!(mean_weight >= 0.0)) throw InvalidParams("mean weight must be non-negative");
  switch (kind) {
    case RegularizerKind::Trace:
      break;
    case RegularizerKind::ElasticNet:
      if (!(mu >= 0.0)) throw InvalidParams("elastic-net mu must be non-negative");
      break;
    case RegularizerKind::SpectralKSupport:
    case RegularizerKind::CenteredKSupport:
      KSupportParams{k}.validate(cols);
      break;
    case RegularizerKind::SpectralBox:
      BoxParams::with_rank(a, b, static_cast<double>(k), cols).validate(cols);
      break;
    case RegularizerKind::Cluster:
    case RegularizerKind::CenteredCluster:
      ClusterParams{a, b, k}.validate(cols);
      break;
  }
}

double Regularizer::value_from_sigma(const Vector& sigma, std::size_t cols) const {
  if (lambda == 0.0) return 0.0;
  switch (kind) {
    case RegularizerKind::Trace:
      return lambda * sigma.sum();
    case RegularizerKind::ElasticNet:
      return lambda * (sigma.sum() + 0.5 * mu * sigma.squaredNorm());
    default:
      break;
  }
  const Vector s = pad(sigma, cols);
  double n = 0.0;
  if (uses_ksupport(kind)) {
    n = ksupport_norm(s, k);
  } else {
    n = theta_norm(s, BoxParams::with_rank(a, b, static_cast<double>(k), cols)).value;
  }
  return lambda * n * n;
}

double Regularizer::value(const Matrix& W) const {
  const SpectralOperand op(W);
  return value_from_sigma(op.sigma(), static_cast<std::size_t>(W.cols()));
}

SpectralProxResult Regularizer::prox(const Matrix& W, double step) const {
  const SpectralOperand op(W);
  const double t = step * lambda;
  switch (kind) {
    case RegularizerKind::Trace:
      return prox_trace_detailed(op, t);
    case RegularizerKind::ElasticNet:
      return prox_spectral_elastic_net_detailed(op, t, t * mu);
    default:
      break;
  }
  if (t == 0.0) return {W, op.sigma()};
  const auto m = static_cast<std::size_t>(W.cols());
  NormParams params = KSupportParams{k};
  if (uses_box(kind)) params = BoxParams::with_rank(a, b, static_cast<double>(k), m);
  // prox of t·‖·‖² is the prox of (λ'/2)‖·‖² with λ' = 2t.
  return spectral_prox_detailed(op, 2.0 * t, params);
}

LossEval loss_masked_sq(const Matrix& W, const ObservationSet& obs) {
  if (static_cast<std::size_t>(W.rows()) != obs.rows ||
      static_cast<std::size_t>(W.cols()) != obs.cols) {
    throw InvalidInput("matrix shape does not match the observation set");
  }
  LossEval out;
  out.gradient = Matrix::Zero(W.rows(), W.cols());
  for (const auto& e : obs.entries) {
    const auto i = static_cast<Eigen::Index>(e.row);
    const auto j = static_cast<Eigen::Index>(e.col);
    const double r = W(i, j) - e.value;
    out.value += 0.5 * r * r;
    out.gradient(i, j) += r;
  }
  return out;
}

MaskedSquaredLoss::MaskedSquaredLoss(ObservationSet obs) : obs_(std::move(obs)) {
  obs_.validate();
}

Eigen::Index MaskedSquaredLoss::rows() const { return static_cast<Eigen::Index>(obs_.rows); }
Eigen::Index MaskedSquaredLoss::cols() const { return static_cast<Eigen::Index>(obs_.cols); }

double MaskedSquaredLoss::value(const Matrix& W) const {
  double v = 0.0;
  for (const auto& e : obs_.entries) {
    const double r = W(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) - e.value;
    v += 0.5 * r * r;
  }
  return v;
}

LossEval MaskedSquaredLoss::evaluate(const Matrix& W) const {
  return loss_masked_sq(W, obs_);
}

MultitaskSquaredLoss::MultitaskSquaredLoss(std::vector<Matrix> designs,
                                           std::vector<Vector> targets)
    : designs_(std::move(designs)), targets_(std::move(targets)) {
  if (designs_.empty() || designs_.size() != targets_.size()) {
    throw InvalidInput("multitask loss needs one design and target per task");
  }
  features_ = designs_.front().cols();
  for (std::size_t t = 0; t < designs_.size(); ++t) {
    if (designs_[t].cols() != features_ || designs_[t].rows() != targets_[t].size()) {
      throw InvalidInput("task " + std::to_string(t) + " has inconsistent shapes");
    }
    if (designs_[t].rows() == 0) continue;
    Eigen::JacobiSVD<Matrix> svd(designs_[t]);
    const double s = svd.singularValues()[0];
    lipschitz_ = std::max(lipschitz_, s * s);
  }
  if (lipschitz_ == 0.0) lipschitz_ = 1.0;
}

double MultitaskSquaredLoss::value(const Matrix& W) const {
  double v = 0.0;
  for (std::size_t t = 0; t < designs_.size(); ++t) {
    v += 0.5 * (designs_[t] * W.col(static_cast<Eigen::Index>(t)) - targets_[t]).squaredNorm();
  }
  return v;
}

LossEval MultitaskSquaredLoss::evaluate(const Matrix& W) const {
  LossEval out;
  out.gradient.resize(W.rows(), W.cols());
  for (std::size_t t = 0; t < designs_.size(); ++t) {
    const auto j = static_cast<Eigen::Index>(t);
    const Vector r = designs_[t] * W.col(j) - targets_[t];
    out.value += 0.5 * r.squaredNorm();
    out.gradient.col(j) = designs_[t].transpose() * r;
  }
  return out;
}

void SolverConfig::validate() const {
  if (max_iterations < 1) throw InvalidParams("max_iterations must be >= 1");
  if (!(tolerance > 0.0)) throw InvalidParams("tolerance must be positive");
  if (step_size && !(*step_size > 0.0)) throw InvalidParams("step size must be positive");
}

SolveResult minimize(const SmoothLoss& loss, const Regularizer& reg,
                     const SolverConfig& config) {
  config.validate();
  const Eigen::Index d = loss.rows();
  const Eigen::Index m = loss.cols();
  const auto cols = static_cast<std::size_t>(m);
  reg.validate(cols);
  const bool centered = reg.centered();

  // Smooth part in W: loss + λ·εM·m‖w̄‖² (centred kinds only).
  const double mean_coef = centered ? reg.lambda * reg.mean_weight : 0.0;
  const double lip_w = loss.lipschitz() + 2.0 * mean_coef;
  // Joint (V, z) steps: ‖V + z1ᵀ‖² <= 2‖V‖² + 2m‖z‖² bounds the curvature in
  // the diagonal metric diag(I, m·I).
  const double step_v =
      config.step_size ? *config.step_size : (centered ? 0.5 : 1.0) / lip_w;
  const double step_z = centered ? step_v / static_cast<double>(m) : 0.0;

  auto model = [&](const Matrix& V, const Vector& z) -> Matrix {
    if (!centered) return V;
    return V + z * Eigen::RowVectorXd::Ones(m);
  };
  auto smooth_value = [&](const Matrix& W) {
    double v = loss.value(W);
    if (mean_coef > 0.0) {
      v += mean_coef * static_cast<double>(m) * W.rowwise().mean().squaredNorm();
    }
    return v;
  };

  SolverState st;
  st.iterate = config.warm_start ? *config.warm_start : Matrix::Zero(d, m);
  if (st.iterate.rows() != d || st.iterate.cols() != m) {
    throw InvalidParams("warm start has the wrong shape");
  }
  st.offset = centered ? (config.warm_offset ? *config.warm_offset : Vector::Zero(d))
                       : Vector();
  if (centered && st.offset.size() != d) throw InvalidParams("warm offset has the wrong size");

  st.initial_objective = smooth_value(model(st.iterate, st.offset)) + reg.value(st.iterate);
  double previous = st.initial_objective;
  const double blowup = 1e3 * std::max(std::abs(st.initial_objective),
                                       std::numeric_limits<double>::min());

  Matrix y = st.iterate;
  Vector yz = st.offset;
  Matrix x_prev = st.iterate;
  Vector z_prev = st.offset;
  double t = 1.0;

  for (std::size_t it = 1; it <= config.max_iterations; ++it) {
    const Matrix Wy = model(y, yz);
    LossEval ev = loss.evaluate(Wy);
    if (mean_coef > 0.0) {
      ev.gradient.colwise() += 2.0 * mean_coef * Wy.rowwise().mean();
    }
    SpectralProxResult px = reg.prox(y - step_v * ev.gradient, step_v);
    Vector z_new = centered ? Vector(yz - step_z * ev.gradient.rowwise().sum()) : Vector();

    const double current =
        smooth_value(model(px.X, z_new)) + reg.value_from_sigma(px.sigma, cols);
    if (!std::isfinite(current) || (current > blowup && current > st.initial_objective)) {
      throw DivergenceError("objective " + std::to_string(current) +
                            " exceeded 1e3x its initial value at iteration " +
                            std::to_string(it) + "; try a smaller step size");
    }
    if (config.record_trace) st.objective_trace.push_back(current);
    st.iterations_run = it;

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    y = px.X + beta * (px.X - x_prev);
    if (centered) yz = z_new + beta * (z_new - z_prev);
    x_prev = std::move(px.X);
    z_prev = std::move(z_new);
    t = t_next;

    const bool done = relative_change_below(previous, current, config.tolerance);
    previous = current;
    if (done) {
      st.converged = true;
      break;
    }
  }

  st.iterate = x_prev;
  st.offset = z_prev;
  st.extrapolation = y;
  st.momentum = t;
  st.final_objective = previous;

  SolveResult out;
  out.W = model(st.iterate, st.offset);
  out.z = st.offset;
  out.state = std::move(st);
  return out;
}

SolveResult fista(const CompletionProblem& problem, const SolverConfig& config) {
  const MaskedSquaredLoss loss(problem.observations.filtered(Split::Train));
  return minimize(loss, problem.regularizer, config);
}

SolveResult solve_centered(const CompletionProblem& problem, const SolverConfig& config) {
  if (!problem.regularizer.centered()) {
    throw InvalidParams("solve_centered requires a centred regularizer (c-cn or c-ks)");
  }
  return fista(problem, config);
}

double objective(const SmoothLoss& loss, const Regularizer& reg, const Matrix& W) {
  return loss.value(W) + reg.value(W);
}

double prox_gradient_residual(const SmoothLoss& loss, const Regularizer& reg,
                              const Matrix& X) {
  const double step = 1.0 / loss.lipschitz();
  const LossEval ev = loss.evaluate(X);
  const Matrix P = reg.prox(X - step * ev.gradient, step).X;
  return (X - P).norm() / (1.0 + X.norm());
}

}  // namespace thetanorm
