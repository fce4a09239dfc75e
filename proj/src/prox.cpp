#include "thetanorm/prox.hpp"

#include "thetanorm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace thetanorm {

namespace {

void check_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidParams("prox requires a finite lambda > 0");
  }
}

ProxSolution shrink(const Vector& w, const SortedAbs& s, ThetaAssignment sorted,
                    double lambda) {
  const auto d = static_cast<Eigen::Index>(w.size());
  ProxSolution out;
  out.assignment = sorted;
  out.assignment.theta =
      s.unsort(std::span<const double>(sorted.theta.data(), static_cast<std::size_t>(d)));
  out.x.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double th = out.assignment.theta[i];
    out.x[i] = th * w[i] / (th + lambda);
  }
  return out;
}

}  // namespace

ProxSolution prox_sq_theta_detailed(const Vector& w, double lambda,
                                    const BoxParams& p) {
  check_lambda(lambda);
  const auto d = static_cast<std::size_t>(w.size());
  if (d == 0) throw InvalidInput("empty vector");
  p.validate(d);
  const SortedAbs s = sort_abs(w);
  return shrink(w, s, detail::assign_with_zeros(s, {p.a, p.b, p.c}, lambda), lambda);
}

Vector prox_sq_theta(const Vector& w, double lambda, const BoxParams& p) {
  return prox_sq_theta_detailed(w, lambda, p).x;
}

ProxSolution prox_sq_ksupport_detailed(const Vector& w, double lambda,
                                       const KSupportParams& p) {
  check_lambda(lambda);
  const auto d = static_cast<std::size_t>(w.size());
  if (d == 0) throw InvalidInput("empty vector");
  p.validate(d);
  const SortedAbs s = sort_abs(w);
  const detail::ClampBox box{0.0, 1.0, static_cast<double>(p.k)};
  return shrink(w, s, detail::assign_with_zeros(s, box, lambda), lambda);
}

Vector prox_sq_ksupport(const Vector& w, double lambda, const KSupportParams& p) {
  return prox_sq_ksupport_detailed(w, lambda, p).x;
}

Vector prox_sq_ksupport_baseline(const Vector& w, double lambda,
                                 const KSupportParams& p) {
  check_lambda(lambda);
  const auto d = static_cast<std::size_t>(w.size());
  if (d == 0) throw InvalidInput("empty vector");
  p.validate(d);
  const std::size_t k = p.k;
  const SortedAbs s = sort_abs(w);
  const auto& z = s.values;
  const std::size_t n = s.nonzeros();

  std::vector<double> theta(d, 0.0);
  if (n <= k) {
    // Every non-zero entry can sit at θ = 1 within the budget.
    std::fill(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(n), 1.0);
  } else {
    // prefix[i] = z_0 + ... + z_{i-1}
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + z[i];

    const double kd = static_cast<double>(k);
    const double slack = 1e-12;
    bool found = false;
    std::size_t best_q = 0;
    std::size_t best_l = 0;
    double best_alpha = 0.0;
    // Entries [0, q) at θ = 1, [q, l) interior, [l, n) at θ = 0. The budget
    // forces at least k entries with θ > 0, so l >= k.
    for (std::size_t r = 0; r < k && !found; ++r) {
      const std::size_t q = k - 1 - r;
      for (std::size_t l = k; l <= n; ++l) {
        const double mass = prefix[l] - prefix[q];
        const double alpha =
            (kd - static_cast<double>(q) + lambda * static_cast<double>(l - q)) / mass;
        const double tol = slack * (1.0 + lambda);
        if (q > 0 && alpha * z[q - 1] - lambda < 1.0 - tol) continue;
        if (alpha * z[q] - lambda > 1.0 + tol) continue;
        if (alpha * z[l - 1] - lambda < -tol) continue;
        if (l < n && alpha * z[l] - lambda > tol) continue;
        best_q = q;
        best_l = l;
        best_alpha = alpha;
        found = true;
        break;
      }
    }
    if (!found) {
      throw NumericalError("baseline k-support prox found no consistent partition");
    }
    for (std::size_t i = 0; i < best_q; ++i) theta[i] = 1.0;
    for (std::size_t i = best_q; i < best_l; ++i) {
      theta[i] = std::clamp(best_alpha * z[i] - lambda, 0.0, 1.0);
    }
  }

  Vector x(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) {
    const auto orig = static_cast<Eigen::Index>(s.permutation[i]);
    x[orig] = theta[i] * w[orig] / (theta[i] + lambda);
  }
  return x;
}

Vector prox_sq(const ProxRequest& req) {
  return std::visit(
      [&](const auto& params) -> Vector {
        using T = std::decay_t<decltype(params)>;
        if constexpr (std::is_same_v<T, BoxParams>) {
          return prox_sq_theta(req.w, req.lambda, params);
        } else {
          return prox_sq_ksupport(req.w, req.lambda, params);
        }
      },
      req.params);
}

}  // namespace thetanorm
