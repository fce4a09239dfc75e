#include "thetanorm/oracles.hpp"

#include "thetanorm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace thetanorm::oracle {

namespace {

using Groups = std::vector<std::vector<double>>;  // per group: t_{g,i}

void for_each_subset(std::size_t d, std::size_t k,
                     const std::function<void(const std::vector<bool>&)>& fn) {
  std::vector<bool> in(d, false);
  std::fill(in.begin(), in.begin() + static_cast<std::ptrdiff_t>(k), true);
  // prev_permutation walks all arrangements of k trues among d slots.
  do {
    fn(in);
  } while (std::prev_permutation(in.begin(), in.end()));
}

Groups build_groups(std::size_t d, std::size_t k, double inside, double outside) {
  Groups groups;
  for_each_subset(d, k, [&](const std::vector<bool>& in) {
    std::vector<double> t(d);
    for (std::size_t i = 0; i < d; ++i) t[i] = in[i] ? inside : outside;
    groups.push_back(std::move(t));
  });
  return groups;
}

// Euclidean projection onto the probability simplex.
void project_simplex(std::vector<double>& x) {
  std::vector<double> s(x);
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0;
  double tau = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    cum += s[j];
    const double t = (cum - 1.0) / static_cast<double>(j + 1);
    if (s[j] - t > 0.0) tau = t;
  }
  for (double& v : x) v = std::max(0.0, v - tau);
}

struct GroupObjective {
  const Groups& groups;
  std::vector<double> w2;

  std::vector<double> theta(const std::vector<double>& mu) const {
    std::vector<double> th(w2.size(), 0.0);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (mu[g] == 0.0) continue;
      for (std::size_t i = 0; i < w2.size(); ++i) th[i] += mu[g] * groups[g][i];
    }
    return th;
  }

  double value(const std::vector<double>& mu) const {
    const auto th = theta(mu);
    double f = 0.0;
    for (std::size_t i = 0; i < w2.size(); ++i) {
      if (w2[i] == 0.0) continue;
      if (th[i] <= 0.0) return std::numeric_limits<double>::infinity();
      f += w2[i] / th[i];
    }
    return f;
  }

  std::vector<double> gradient(const std::vector<double>& mu) const {
    const auto th = theta(mu);
    std::vector<double> g(groups.size(), 0.0);
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      for (std::size_t i = 0; i < w2.size(); ++i) {
        if (w2[i] == 0.0) continue;
        g[gi] -= w2[i] * groups[gi][i] / (th[i] * th[i]);
      }
    }
    return g;
  }
};

// For fixed group scales η_g > 0 the decomposition Σ v_g = w is solved
// coordinate-wise in closed form, leaving
//   ‖w‖² = min over group weights μ on the simplex of Σ_i w_i² / θ_i(μ),
//   θ_i(μ) = Σ_g μ_g t_{g,i}.
// That smooth convex problem is minimised by accelerated projected gradient
// with backtracking and function-value restarts.
double minimise_over_groups(const Vector& w, const Groups& groups) {
  GroupObjective obj{groups, {}};
  obj.w2.resize(static_cast<std::size_t>(w.size()));
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    obj.w2[static_cast<std::size_t>(i)] = w[i] * w[i];
  }
  if (std::all_of(obj.w2.begin(), obj.w2.end(), [](double v) { return v == 0.0; })) {
    return 0.0;
  }

  const std::size_t G = groups.size();
  std::vector<double> x(G, 1.0 / static_cast<double>(G));
  std::vector<double> y = x;
  double fx = obj.value(x);
  double step = 1.0 / std::max(1.0, fx);
  double t = 1.0;

  std::size_t stall = 0;
  for (int it = 0; it < 400000 && stall < 200; ++it) {
    double fy = obj.value(y);
    if (!std::isfinite(fy)) {
      y = x;
      t = 1.0;
      fy = fx;
    }
    const auto gy = obj.gradient(y);
    std::vector<double> xn(G);
    double fxn = 0.0;
    for (;;) {
      for (std::size_t g = 0; g < G; ++g) xn[g] = y[g] - step * gy[g];
      project_simplex(xn);
      fxn = obj.value(xn);
      double lin = fy;
      double quad = 0.0;
      for (std::size_t g = 0; g < G; ++g) {
        const double dlt = xn[g] - y[g];
        lin += gy[g] * dlt;
        quad += dlt * dlt;
      }
      if (fxn <= lin + quad / (2.0 * step) || step < 1e-300) break;
      step *= 0.5;
    }

    if (!(fxn <= fx)) {
      // Restart momentum from the last accepted point.
      y = x;
      t = 1.0;
      ++stall;
      continue;
    }
    const double rel = (fx - fxn) / std::max(fx, 1e-300);
    stall = rel < 1e-16 ? stall + 1 : 0;

    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t g = 0; g < G; ++g) {
      y[g] = xn[g] + ((t - 1.0) / tn) * (xn[g] - x[g]);
    }
    // Keep y feasible; the objective is only defined on the simplex.
    project_simplex(y);
    x = std::move(xn);
    fx = fxn;
    t = tn;
    step *= 1.25;
  }
  return std::sqrt(fx);
}

void check_infconv_dim(std::size_t d) {
  if (d == 0) throw InvalidInput("empty vector");
  if (d > kMaxInfconvDim) {
    throw TestScaleExceeded("infconv_oracle supports d <= " +
                            std::to_string(kMaxInfconvDim) + " (got " +
                            std::to_string(d) + ")");
  }
}

}  // namespace

double dual_norm_oracle(const Vector& u, const BoxParams& p) {
  const auto d = static_cast<std::size_t>(u.size());
  if (d == 0) throw InvalidInput("empty vector");
  if (d > kMaxDualOracleDim) {
    throw TestScaleExceeded("dual_norm_oracle supports d <= " +
                            std::to_string(kMaxDualOracleDim));
  }
  p.validate(d);

  const double tol = 1e-12 * std::max(1.0, std::abs(p.c));
  double best = -1.0;
  const std::size_t masks = std::size_t{1} << d;
  for (std::size_t mask = 0; mask < masks; ++mask) {
    double sum = 0.0;
    double val = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double th = (mask >> i & 1U) ? p.b : p.a;
      sum += th;
      val += th * u[static_cast<Eigen::Index>(i)] * u[static_cast<Eigen::Index>(i)];
    }
    if (sum <= p.c + tol) best = std::max(best, val);
    // One coordinate absorbs the budget that the others leave.
    for (std::size_t f = 0; f < d; ++f) {
      const double th_f = (mask >> f & 1U) ? p.b : p.a;
      const double frac = p.c - (sum - th_f);
      if (frac < p.a - tol || frac > p.b + tol) continue;
      const double uf = u[static_cast<Eigen::Index>(f)];
      best = std::max(best, val - th_f * uf * uf + frac * uf * uf);
    }
  }
  return std::sqrt(std::max(0.0, best));
}

double infconv_oracle(const Vector& w, const BoxParams& p) {
  const auto d = static_cast<std::size_t>(w.size());
  check_infconv_dim(d);
  p.validate(d);
  const double rho = p.rho(d);
  const double k = std::round(rho);
  if (std::abs(rho - k) > 1e-9 * std::max(1.0, rho) || k < 1.0) {
    throw InvalidParams("infconv_oracle requires c = (b-a)k + d*a for integer k >= 1");
  }
  const Groups groups = build_groups(d, static_cast<std::size_t>(k), p.b, p.a);
  return minimise_over_groups(w, groups);
}

double infconv_oracle(const Vector& w, const KSupportParams& p) {
  const auto d = static_cast<std::size_t>(w.size());
  check_infconv_dim(d);
  p.validate(d);
  const Groups groups = build_groups(d, p.k, 1.0, 0.0);
  return minimise_over_groups(w, groups);
}

}  // namespace thetanorm::oracle
