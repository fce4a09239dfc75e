#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace thetanorm {

using Vector = Eigen::VectorXd;

/// Parameters of the box set {θ ∈ [a, b]^d : Σθ ≤ c}.
///
/// Feasibility depends on the dimension the params are applied at, so
/// operations call `validate(d)` themselves.
struct BoxParams {
  double a = 0.0;
  double b = 1.0;
  double c = 1.0;

  /// Normalised budget (c - d·a) / (b - a), in [0, d] when feasible.
  double rho(std::size_t d) const;
  /// floor(rho), clamped to [0, d] against rounding.
  std::size_t k(std::size_t d) const;

  /// Throws InvalidParams unless 0 < a < b and d·a <= c <= d·b.
  void validate(std::size_t d) const;

  /// Params whose budget is c = (b - a)·k + d·a, i.e. rho = k exactly.
  static BoxParams with_rank(double a, double b, double k, std::size_t d);
};

struct KSupportParams {
  std::size_t k = 1;

  void validate(std::size_t d) const;
};

/// Optimal θ together with its partition certificate. Entries are aligned
/// with the vector the assignment was computed from; `q` counts entries at
/// the upper bound, `ell` entries at the lower bound.
struct ThetaAssignment {
  Vector theta;
  std::size_t q = 0;
  std::size_t ell = 0;
  double alpha = 0.0;
};

/// |w| sorted non-increasing, with the map back to the original layout:
/// w[permutation[i]] == signs[i] * values[i].
struct SortedAbs {
  std::vector<double> values;
  std::vector<std::size_t> permutation;
  std::vector<std::int8_t> signs;

  std::size_t size() const { return values.size(); }
  /// Number of leading non-zero magnitudes.
  std::size_t nonzeros() const;
  Vector reconstruct() const;
  /// Scatters a vector given in sorted order back to the original layout.
  Vector unsort(std::span<const double> sorted_values) const;
};

struct NormResult {
  double value = 0.0;
  /// θ in the original coordinate order of w.
  ThetaAssignment assignment;
};

SortedAbs sort_abs(const Vector& w);

/// Budget function S(α) = Σ clamp(α|w_i| - λ, a, b).
double s_alpha(double alpha, const SortedAbs& absw, const BoxParams& p,
               double lambda);

/// Root of S(α) = c by sorted-breakpoint binary search and linear
/// interpolation. All magnitudes must be positive. The returned θ is in the
/// sorted order of `absw`.
ThetaAssignment solve_alpha(const SortedAbs& absw, const BoxParams& p,
                            double lambda);

/// Box Θ-norm sqrt(min_θ Σ w_i²/θ_i), evaluated in closed form from the
/// (q, ell) partition of the optimal θ.
NormResult theta_norm(const Vector& w, const BoxParams& p);

/// sqrt(a‖u‖² + (b-a)[Σ_{j≤k} (|u|↓_j)² + (ρ-k)(|u|↓_{k+1})²]).
double theta_dual_norm(const Vector& u, const BoxParams& p);

double ksupport_norm(const Vector& w, std::size_t k);

/// l2 norm of the k largest magnitudes.
double ksupport_dual_norm(const Vector& u, std::size_t k);

namespace detail {

/// Generalised box used by both the norm (lambda = 0) and the prox
/// (lambda > 0) paths. `lower` may be zero for the k-support prox.
struct ClampBox {
  double lower;
  double upper;
  double budget;
};

double budget_sum(double alpha, std::span<const double> absw,
                  const ClampBox& box, double lambda);

/// Solves Σ clamp(α·absw_i - λ, lower, upper) = budget for sorted,
/// strictly positive absw. A budget at or above n·upper returns θ = upper.
ThetaAssignment solve_budget(std::span<const double> absw, const ClampBox& box,
                             double lambda);

/// Full assignment for a sorted vector that may end in zeros: zeros take
/// θ = lower and the remaining budget is solved on the non-zero prefix.
ThetaAssignment assign_with_zeros(const SortedAbs& absw, const ClampBox& box,
                                  double lambda);

}  // namespace detail

}  // namespace thetanorm
