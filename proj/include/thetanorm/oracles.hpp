#pragma once

// Brute-force reference evaluations. They share no code with the
// closed-form routines and are limited to small dimensions.

#include "thetanorm/core_norms.hpp"

#include <cstddef>

namespace thetanorm::oracle {

inline constexpr std::size_t kMaxDualOracleDim = 12;
inline constexpr std::size_t kMaxInfconvDim = 6;

/// sqrt(max Σθ_i u_i²) over the extreme points of the closed box set:
/// every coordinate at a or b except at most one, which absorbs the
/// remaining budget.
double dual_norm_oracle(const Vector& u, const BoxParams& p);

/// Infimal convolution over all k-subsets g of
/// sqrt(Σ_{i∈g} v_{g,i}²/b + Σ_{i∉g} v_{g,i}²/a) subject to Σ_g v_g = w.
/// Requires c = (b-a)·k + d·a for an integer k.
double infconv_oracle(const Vector& w, const BoxParams& p);

/// Group-lasso-with-overlap form over all groups of size k (a -> 0).
double infconv_oracle(const Vector& w, const KSupportParams& p);

}  // namespace thetanorm::oracle
