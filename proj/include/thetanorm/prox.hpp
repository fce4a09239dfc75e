#pragma once

#include "thetanorm/core_norms.hpp"

#include <variant>

namespace thetanorm {

using NormParams = std::variant<BoxParams, KSupportParams>;

/// Proximity operator request for (λ/2)‖·‖² of a box or k-support norm.
struct ProxRequest {
  Vector w;
  double lambda = 1.0;
  NormParams params = KSupportParams{1};
};

struct ProxSolution {
  Vector x;
  /// θ in the original coordinate order of w.
  ThetaAssignment assignment;
};

/// prox of (λ/2)‖·‖²_Θ: x_i = θ_i w_i / (θ_i + λ) with
/// θ_i = clamp(α|w_i| - λ, a, b) and Σθ = c. O(d log d).
Vector prox_sq_theta(const Vector& w, double lambda, const BoxParams& p);
ProxSolution prox_sq_theta_detailed(const Vector& w, double lambda,
                                    const BoxParams& p);

/// Same construction with a = 0, b = 1, c = k; θ_i may be exactly zero.
Vector prox_sq_ksupport(const Vector& w, double lambda, const KSupportParams& p);
ProxSolution prox_sq_ksupport_detailed(const Vector& w, double lambda,
                                       const KSupportParams& p);

/// Reference O(d(k + log d)) method: after sorting, scan the pairs
/// (number of entries at θ = 1, last entry with θ > 0) until the pair whose
/// induced multiplier satisfies all the clamp conditions is found. Used for
/// benchmarking and cross-validation only.
Vector prox_sq_ksupport_baseline(const Vector& w, double lambda,
                                 const KSupportParams& p);

Vector prox_sq(const ProxRequest& req);

}  // namespace thetanorm
