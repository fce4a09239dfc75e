#include "thetanorm/core_norms.hpp"

#include "thetanorm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace thetanorm {

namespace {

// Relative slack accepted on the budget bounds d·a <= c <= d·b.
constexpr double kBudgetSlack = 1e-12;

void require_finite(const Vector& w, const char* what) {
  if (!w.allFinite()) {
    throw InvalidInput(std::string(what) + " contains a non-finite entry");
  }
}

void check_box_shape(double a, double b) {
  if (!(std::isfinite(a) && std::isfinite(b)) || !(a > 0.0) || !(a < b)) {
    throw InvalidParams("box params require 0 < a < b (got a=" +
                        std::to_string(a) + ", b=" + std::to_string(b) + ")");
  }
}

bool budget_below(double c, double floor) {
  return c < floor - kBudgetSlack * std::max(1.0, std::abs(floor));
}

bool budget_above(double c, double ceil) {
  return c > ceil + kBudgetSlack * std::max(1.0, std::abs(ceil));
}

}  // namespace

double BoxParams::rho(std::size_t d) const {
  return (c - static_cast<double>(d) * a) / (b - a);
}

std::size_t BoxParams::k(std::size_t d) const {
  const double r = rho(d);
  if (r <= 0.0) return 0;
  // Absorb rounding so that rho = k computed from with_rank floors to k.
  const double fl = std::floor(r + 1e-12 * std::max(1.0, r));
  return std::min(d, static_cast<std::size_t>(fl));
}

void BoxParams::validate(std::size_t d) const {
  check_box_shape(a, b);
  if (!std::isfinite(c)) throw InvalidParams("box budget c must be finite");
  const double dd = static_cast<double>(d);
  if (budget_below(c, dd * a) || budget_above(c, dd * b)) {
    throw InvalidParams("box budget c=" + std::to_string(c) +
                        " outside [d*a, d*b] for d=" + std::to_string(d));
  }
}

BoxParams BoxParams::with_rank(double a, double b, double k, std::size_t d) {
  return BoxParams{a, b, (b - a) * k + static_cast<double>(d) * a};
}

void KSupportParams::validate(std::size_t d) const {
  if (k < 1 || k > d) {
    throw InvalidParams("k-support requires 1 <= k <= d (got k=" +
                        std::to_string(k) + ", d=" + std::to_string(d) + ")");
  }
}

std::size_t SortedAbs::nonzeros() const {
  // values are non-increasing, so zeros form the tail.
  auto it = std::find(values.begin(), values.end(), 0.0);
  return static_cast<std::size_t>(it - values.begin());
}

Vector SortedAbs::reconstruct() const {
  Vector w(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    w[static_cast<Eigen::Index>(permutation[i])] = signs[i] * values[i];
  }
  return w;
}

Vector SortedAbs::unsort(std::span<const double> sorted_values) const {
  Vector out(static_cast<Eigen::Index>(sorted_values.size()));
  for (std::size_t i = 0; i < sorted_values.size(); ++i) {
    out[static_cast<Eigen::Index>(permutation[i])] = sorted_values[i];
  }
  return out;
}

SortedAbs sort_abs(const Vector& w) {
  if (w.size() == 0) throw InvalidInput("empty vector");
  require_finite(w, "vector");
  const auto d = static_cast<std::size_t>(w.size());
  SortedAbs s;
  s.permutation.resize(d);
  std::iota(s.permutation.begin(), s.permutation.end(), std::size_t{0});
  std::stable_sort(s.permutation.begin(), s.permutation.end(),
                   [&](std::size_t i, std::size_t j) {
                     return std::abs(w[static_cast<Eigen::Index>(i)]) >
                            std::abs(w[static_cast<Eigen::Index>(j)]);
                   });
  s.values.resize(d);
  s.signs.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double v = w[static_cast<Eigen::Index>(s.permutation[i])];
    s.values[i] = std::abs(v);
    s.signs[i] = std::signbit(v) ? std::int8_t{-1} : std::int8_t{1};
  }
  return s;
}

namespace detail {

double budget_sum(double alpha, std::span<const double> absw,
                  const ClampBox& box, double lambda) {
  double total = 0.0;
  for (double v : absw) {
    total += std::clamp(alpha * v - lambda, box.lower, box.upper);
  }
  return total;
}

ThetaAssignment solve_budget(std::span<const double> absw, const ClampBox& box,
                             double lambda) {
  const std::size_t n = absw.size();
  ThetaAssignment out;
  out.theta = Vector::Zero(static_cast<Eigen::Index>(n));
  if (n == 0) return out;

  const double nd = static_cast<double>(n);
  if (budget_below(box.budget, nd * box.lower)) {
    throw InfeasibleBudget("budget " + std::to_string(box.budget) +
                           " below n*lower for n=" + std::to_string(n));
  }
  // Slack budget: the objective decreases in every θ_i, so all sit at upper.
  if (box.budget >= nd * box.upper) {
    out.theta.setConstant(box.upper);
    out.q = n;
    out.alpha = (box.upper + lambda) / absw[n - 1];
    return out;
  }
  if (box.budget <= nd * box.lower) {
    out.theta.setConstant(box.lower);
    out.ell = n;
    out.alpha = (box.lower + lambda) / absw[0];
    return out;
  }

  std::vector<double> breakpoints;
  breakpoints.reserve(2 * n);
  for (double v : absw) {
    breakpoints.push_back((box.lower + lambda) / v);
    breakpoints.push_back((box.upper + lambda) / v);
  }
  std::sort(breakpoints.begin(), breakpoints.end());

  // S(bp.front()) = n·lower < budget < n·upper = S(bp.back()). The strict
  // comparison keeps the smallest root when S is flat at the budget.
  std::size_t lo = 0;
  std::size_t hi = breakpoints.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (budget_sum(breakpoints[mid], absw, box, lambda) < box.budget) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double alpha_lo = breakpoints[lo];
  const double alpha_hi = breakpoints[hi];

  // No breakpoint lies strictly inside (alpha_lo, alpha_hi), so each
  // component keeps one regime over the whole bracket. S is affine there
  // and the interpolated root has a closed form.
  std::size_t q = 0;
  std::size_t ell = 0;
  double interior_sum = 0.0;
  std::size_t interior = 0;
  for (double v : absw) {
    if ((box.upper + lambda) / v <= alpha_lo) {
      ++q;
    } else if ((box.lower + lambda) / v >= alpha_hi) {
      ++ell;
    } else {
      interior_sum += v;
      ++interior;
    }
  }

  double alpha = alpha_lo;
  if (interior > 0) {
    const double p = box.budget - static_cast<double>(q) * box.upper -
                     static_cast<double>(ell) * box.lower;
    alpha = (p + lambda * static_cast<double>(interior)) / interior_sum;
    alpha = std::clamp(alpha, alpha_lo, alpha_hi);
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    if (i < q) {
      out.theta[idx] = box.upper;
    } else if (i >= n - ell) {
      out.theta[idx] = box.lower;
    } else {
      out.theta[idx] = std::clamp(alpha * absw[i] - lambda, box.lower, box.upper);
    }
  }
  out.q = q;
  out.ell = ell;
  out.alpha = alpha;
  return out;
}

ThetaAssignment assign_with_zeros(const SortedAbs& absw, const ClampBox& box,
                                  double lambda) {
  const std::size_t d = absw.size();
  const std::size_t n = absw.nonzeros();
  ClampBox reduced = box;
  reduced.budget = box.budget - static_cast<double>(d - n) * box.lower;

  ThetaAssignment head =
      solve_budget(std::span<const double>(absw.values.data(), n), reduced, lambda);

  ThetaAssignment out;
  out.theta = Vector::Constant(static_cast<Eigen::Index>(d), box.lower);
  out.theta.head(static_cast<Eigen::Index>(n)) = head.theta;
  out.q = head.q;
  out.ell = head.ell + (d - n);
  out.alpha = head.alpha;
  return out;
}

}  // namespace detail

double s_alpha(double alpha, const SortedAbs& absw, const BoxParams& p,
               double lambda) {
  check_box_shape(p.a, p.b);
  if (!(alpha > 0.0)) throw InvalidInput("alpha must be positive");
  if (!(lambda >= 0.0)) throw InvalidInput("lambda must be non-negative");
  return detail::budget_sum(alpha, absw.values, {p.a, p.b, p.c}, lambda);
}

ThetaAssignment solve_alpha(const SortedAbs& absw, const BoxParams& p,
                            double lambda) {
  check_box_shape(p.a, p.b);
  if (!(lambda >= 0.0)) throw InvalidInput("lambda must be non-negative");
  const std::size_t d = absw.size();
  if (d == 0) throw InvalidInput("empty vector");
  if (absw.nonzeros() != d) {
    throw InvalidInput("solve_alpha requires all magnitudes to be positive");
  }
  const double dd = static_cast<double>(d);
  if (budget_below(p.c, dd * p.a) || budget_above(p.c, dd * p.b)) {
    throw InfeasibleBudget("budget c=" + std::to_string(p.c) +
                           " outside [d*a, d*b]");
  }
  return detail::solve_budget(absw.values, {p.a, p.b, p.c}, lambda);
}

NormResult theta_norm(const Vector& w, const BoxParams& p) {
  const auto d = static_cast<std::size_t>(w.size());
  if (d == 0) throw InvalidInput("empty vector");
  p.validate(d);
  const SortedAbs s = sort_abs(w);
  ThetaAssignment sorted = detail::assign_with_zeros(s, {p.a, p.b, p.c}, 0.0);

  double upper_sq = 0.0;
  double interior_l1 = 0.0;
  double lower_sq = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double v = s.values[i];
    if (i < sorted.q) {
      upper_sq += v * v;
    } else if (i >= d - sorted.ell) {
      lower_sq += v * v;
    } else {
      interior_l1 += v;
    }
  }
  const double budget_left = p.c - static_cast<double>(sorted.q) * p.b -
                             static_cast<double>(sorted.ell) * p.a;
  double sq = upper_sq / p.b + lower_sq / p.a;
  if (interior_l1 > 0.0) sq += interior_l1 * interior_l1 / budget_left;

  NormResult out;
  out.value = std::sqrt(sq);
  out.assignment = sorted;
  out.assignment.theta = s.unsort(
      std::span<const double>(sorted.theta.data(), static_cast<std::size_t>(d)));
  return out;
}

double theta_dual_norm(const Vector& u, const BoxParams& p) {
  const auto d = static_cast<std::size_t>(u.size());
  if (d == 0) throw InvalidInput("empty vector");
  require_finite(u, "vector");
  p.validate(d);
  std::vector<double> sq(d);
  for (std::size_t i = 0; i < d; ++i) {
    sq[i] = u[static_cast<Eigen::Index>(i)] * u[static_cast<Eigen::Index>(i)];
  }
  std::sort(sq.begin(), sq.end(), std::greater<>());
  const double total = std::accumulate(sq.begin(), sq.end(), 0.0);
  const double rho = std::clamp(p.rho(d), 0.0, static_cast<double>(d));
  const std::size_t k = p.k(d);
  double top = std::accumulate(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(k), 0.0);
  if (k < d) top += std::max(0.0, rho - static_cast<double>(k)) * sq[k];
  return std::sqrt(p.a * total + (p.b - p.a) * top);
}

double ksupport_norm(const Vector& w, std::size_t k) {
  const auto d = static_cast<std::size_t>(w.size());
  KSupportParams{k}.validate(d);
  const SortedAbs s = sort_abs(w);
  const auto& z = s.values;

  // tail[q] = Σ_{j >= q} z_j (0-based), so tail[q] is the 1-based Σ_{j>q}.
  std::vector<double> tail(d + 1, 0.0);
  for (std::size_t j = d; j-- > 0;) tail[j] = tail[j + 1] + z[j];

  // Smallest q in {0..k-1} with tail/(k-q) > z_{q+1}; the left inequality
  // then holds because q-1 failed. If none does, the support has at most k
  // entries and q = k-1 reproduces the l2 norm.
  std::size_t q = k - 1;
  for (std::size_t cand = 0; cand < k; ++cand) {
    if (tail[cand] / static_cast<double>(k - cand) > z[cand]) {
      q = cand;
      break;
    }
  }
  double head = 0.0;
  for (std::size_t j = 0; j < q; ++j) head += z[j] * z[j];
  return std::sqrt(head + tail[q] * tail[q] / static_cast<double>(k - q));
}

double ksupport_dual_norm(const Vector& u, std::size_t k) {
  const auto d = static_cast<std::size_t>(u.size());
  KSupportParams{k}.validate(d);
  require_finite(u, "vector");
  std::vector<double> sq(d);
  for (std::size_t i = 0; i < d; ++i) {
    sq[i] = u[static_cast<Eigen::Index>(i)] * u[static_cast<Eigen::Index>(i)];
  }
  std::partial_sort(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(k), sq.end(),
                    std::greater<>());
  return std::sqrt(std::accumulate(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(k), 0.0));
}

}  // namespace thetanorm
