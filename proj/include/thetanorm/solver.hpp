#pragma once

#include "thetanorm/observations.hpp"
#include "thetanorm/spectral.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace thetanorm {

enum class RegularizerKind {
  Trace,             // tr
  ElasticNet,        // en
  SpectralKSupport,  // ks
  SpectralBox,       // box
  Cluster,           // cn
  CenteredCluster,   // c-cn
  CenteredKSupport,  // c-ks
};

std::string to_string(RegularizerKind kind);
/// Accepts the short names above; throws InvalidParams otherwise.
RegularizerKind parse_regularizer(const std::string& name);

/// Penalty λ·Ω applied to the (possibly centred) matrix variable:
///   tr:          λ‖W‖_tr
///   en:          λ(‖W‖_tr + (μ/2)‖W‖_F²)
///   ks, c-ks:    λ‖W‖²_(k)
///   box, cn, c-cn: λ‖W‖²_Θ with a, b and c = (b - a)k + m·a
struct Regularizer {
  RegularizerKind kind = RegularizerKind::Trace;
  double lambda = 1.0;
  std::size_t k = 1;
  double a = 1e-3;
  double b = 1.0;
  double mu = 0.0;
  /// Weight εM of the λ·εM·m‖w̄‖² mean penalty used by the centred kinds.
  double mean_weight = 0.0;

  bool centered() const;
  void validate(std::size_t cols) const;
  /// λ·Ω evaluated from a singular-value vector of the variable.
  double value_from_sigma(const Vector& sigma, std::size_t cols) const;
  double value(const Matrix& W) const;
  /// prox of step·λ·Ω.
  SpectralProxResult prox(const Matrix& W, double step) const;
};

struct LossEval {
  double value = 0.0;
  Matrix gradient;
};

/// Smooth data-fit term with a known gradient Lipschitz constant.
class SmoothLoss {
 public:
  virtual ~SmoothLoss() = default;
  virtual Eigen::Index rows() const = 0;
  virtual Eigen::Index cols() const = 0;
  virtual double value(const Matrix& W) const = 0;
  virtual LossEval evaluate(const Matrix& W) const = 0;
  virtual double lipschitz() const = 0;
};

/// (1/2)Σ_{(i,j)∈obs}(W_ij - y_ij)² over every entry of `obs`.
LossEval loss_masked_sq(const Matrix& W, const ObservationSet& obs);

class MaskedSquaredLoss final : public SmoothLoss {
 public:
  explicit MaskedSquaredLoss(ObservationSet obs);
  Eigen::Index rows() const override;
  Eigen::Index cols() const override;
  double value(const Matrix& W) const override;
  LossEval evaluate(const Matrix& W) const override;
  double lipschitz() const override { return 1.0; }

 private:
  ObservationSet obs_;
};

/// Multitask least squares (1/2)Σ_t ‖X_t w_t - y_t‖², one column per task.
class MultitaskSquaredLoss final : public SmoothLoss {
 public:
  MultitaskSquaredLoss(std::vector<Matrix> designs, std::vector<Vector> targets);
  Eigen::Index rows() const override { return features_; }
  Eigen::Index cols() const override { return static_cast<Eigen::Index>(designs_.size()); }
  double value(const Matrix& W) const override;
  LossEval evaluate(const Matrix& W) const override;
  double lipschitz() const override { return lipschitz_; }

 private:
  std::vector<Matrix> designs_;
  std::vector<Vector> targets_;
  Eigen::Index features_ = 0;
  double lipschitz_ = 0.0;
};

struct SolverConfig {
  std::size_t max_iterations = 1000;
  /// Relative objective change |f_t - f_{t-1}| / |f_{t-1}| that stops the run.
  double tolerance = 1e-5;
  /// Fixed step; defaults to 1/L from the loss.
  std::optional<double> step_size;
  bool record_trace = true;
  /// Starting point; zero when unset.
  std::optional<Matrix> warm_start;
  std::optional<Vector> warm_offset;

  void validate() const;
};

struct SolverState {
  Matrix iterate;
  /// Shared column offset z of the centred formulation; empty otherwise.
  Vector offset;
  Matrix extrapolation;
  double momentum = 1.0;
  std::vector<double> objective_trace;
  std::size_t iterations_run = 0;
  bool converged = false;
  double initial_objective = 0.0;
  double final_objective = 0.0;
};

struct SolveResult {
  /// The model matrix: the iterate, plus z·1ᵀ for centred regularizers.
  Matrix W;
  Vector z;
  SolverState state;
};

struct CompletionProblem {
  /// Only entries tagged Train enter the loss.
  ObservationSet observations;
  Regularizer regularizer;
};

/// FISTA on loss + λΩ. Centred regularizers are optimised jointly over
/// (V, z) with W = V + z·1ᵀ; the prox acts on V and leaves z unchanged.
SolveResult minimize(const SmoothLoss& loss, const Regularizer& reg,
                     const SolverConfig& config);

SolveResult fista(const CompletionProblem& problem, const SolverConfig& config);

/// Requires a centred regularizer (c-cn or c-ks).
SolveResult solve_centered(const CompletionProblem& problem, const SolverConfig& config);

/// Full objective loss(W) + λΩ(W) for a non-centred regularizer.
double objective(const SmoothLoss& loss, const Regularizer& reg, const Matrix& W);

/// ‖X - prox(X - t∇f(X))‖_F / (1 + ‖X‖_F) with t = 1/L.
double prox_gradient_residual(const SmoothLoss& loss, const Regularizer& reg,
                              const Matrix& X);

}  // namespace thetanorm
