// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Tolerances are pinned here and never loosened at run time.

#include "test_oracles.hpp"
#include "thetanorm/core_norms.hpp"
#include "thetanorm/experiments.hpp"
#include "thetanorm/oracles.hpp"
#include "thetanorm/prox.hpp"
#include "thetanorm/solver.hpp"
#include "thetanorm/spectral.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace thetanorm;
using reference::random_box;
using reference::random_gaussian;
using reference::random_orthogonal;
using reference::relative_difference;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

Vector random_vector(std::mt19937_64& rng, std::size_t d) {
  return random_gaussian(static_cast<Eigen::Index>(d), rng);
}

std::size_t worker_threads() {
  return std::max(1u, std::thread::hardware_concurrency());
}

Outcome prox_oracle() {
  constexpr double kTol = 1e-8;
  std::mt19937_64 rng(101);
  double worst = 0.0;
  const auto start = std::chrono::steady_clock::now();
  for (int t = 0; t < 1000; ++t) {
    const std::size_t d = pick(rng, 1, 12);
    const Vector w = random_vector(rng, d);
    const BoxParams p = random_box(d, rng);
    const double lambda = log_uniform(rng, 0.01, 10.0);
    const Vector x = prox_sq_theta(w, lambda, p);
    const double got = reference::prox_objective(x, w, lambda, p);
    worst = std::max(worst, std::abs(got - reference::prox_objective_oracle(w, lambda, p)));
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst <= kTol && secs < 60.0,
          "max |objective - oracle| = " + fmt("%.3g", worst) + " (tol 1e-8), " +
              fmt("%.1f", secs) + " s (limit 60 s)"};
}

Outcome dual_oracle() {
  constexpr double kTol = 1e-10;
  std::mt19937_64 rng(102);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t d = pick(rng, 1, 12);
    const Vector u = random_vector(rng, d);
    const BoxParams p = random_box(d, rng);
    worst = std::max(worst, relative_difference(theta_dual_norm(u, p),
                                                oracle::dual_norm_oracle(u, p)));
  }
  return {worst <= kTol, "max relative difference = " + fmt("%.3g", worst) + " (tol 1e-10)"};
}

Outcome ksupport_specializations() {
  constexpr double kTol = 1e-12;
  std::mt19937_64 rng(103);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t d = pick(rng, 1, 50);
    const Vector w = random_vector(rng, d);
    worst = std::max(worst, relative_difference(ksupport_norm(w, 1), w.lpNorm<1>()));
    worst = std::max(worst, relative_difference(ksupport_norm(w, d), w.norm()));
  }
  return {worst <= kTol, "max relative difference = " + fmt("%.3g", worst) + " (tol 1e-12)"};
}

Outcome box_limit() {
  constexpr double kTol = 1e-4;
  std::mt19937_64 rng(104);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t d = pick(rng, 1, 50);
    const std::size_t k = pick(rng, 1, d);
    const Vector w = random_vector(rng, d);
    const BoxParams p{1e-8, 1.0, static_cast<double>(k)};
    worst = std::max(worst, relative_difference(theta_norm(w, p).value, ksupport_norm(w, k)));
  }
  return {worst <= kTol, "max relative difference = " + fmt("%.3g", worst) + " (tol 1e-4)"};
}

Outcome infconv() {
  constexpr double kTol = 1e-5;
  std::mt19937_64 rng(105);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = pick(rng, 1, 6);
    const std::size_t k = pick(rng, 1, d);
    const Vector w = random_vector(rng, d);
    if (t % 2 == 0) {
      worst = std::max(worst, relative_difference(ksupport_norm(w, k),
                                                  oracle::infconv_oracle(w, KSupportParams{k})));
    } else {
      const double a = log_uniform(rng, 0.01, 0.5);
      const double b = a + log_uniform(rng, 0.1, 2.0);
      const BoxParams p = BoxParams::with_rank(a, b, static_cast<double>(k), d);
      worst = std::max(worst,
                       relative_difference(theta_norm(w, p).value, oracle::infconv_oracle(w, p)));
    }
  }
  return {worst <= kTol, "max relative difference = " + fmt("%.3g", worst) + " (tol 1e-5)"};
}

Outcome complexity() {
  BenchOptions opt;
  for (std::size_t e = 14; e <= 18; ++e) opt.sizes.push_back(std::size_t{1} << e);
  opt.k_divisor = 100;
  opt.repeats = 20;
  opt.baseline_repeats = 3;
  const std::vector<BenchRow> rows = bench_prox(opt);

  bool pass = true;
  double worst_sorted = 0.0;
  std::ostringstream detail;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double r = rows[i + 1].seconds_sorted / rows[i].seconds_sorted;
    worst_sorted = std::max(worst_sorted, r);
    pass = pass && r <= 2.5 && rows[i].ok && rows[i + 1].ok;
  }
  const std::size_t steps = rows.size() - 1;
  const double sorted_growth =
      std::pow(rows.back().seconds_sorted / rows.front().seconds_sorted, 1.0 / steps);
  const double baseline_growth =
      std::pow(rows.back().seconds_baseline / rows.front().seconds_baseline, 1.0 / steps);
  pass = pass && baseline_growth > sorted_growth;
  detail << "max T(2d)/T(d) = " << fmt("%.3f", worst_sorted)
         << " (limit 2.5); mean doubling ratio sorted " << fmt("%.3f", sorted_growth)
         << " vs baseline " << fmt("%.3f", baseline_growth);
  return {pass, detail.str()};
}

Outcome spectral_invariance() {
  constexpr double kTol = 1e-8;
  std::mt19937_64 rng(107);
  double worst_norm = 0.0;
  double worst_prox = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index d = static_cast<Eigen::Index>(pick(rng, 1, 20));
    const Eigen::Index m = static_cast<Eigen::Index>(pick(rng, 1, 30));
    const Matrix W = random_gaussian(d, m, rng);
    const Matrix Q = random_orthogonal(d, rng);
    const Matrix P = random_orthogonal(m, rng);
    const Matrix R = Q * W * P.transpose();
    const auto cols = static_cast<std::size_t>(m);
    const std::size_t k = pick(rng, 1, cols);
    const double lambda = log_uniform(rng, 0.01, 10.0);
    NormParams params = KSupportParams{k};
    if (t % 2 == 0) {
      const double a = log_uniform(rng, 1e-3, 0.5);
      params = BoxParams::with_rank(a, 1.0, static_cast<double>(k), cols);
      const BoxParams& p = std::get<BoxParams>(params);
      worst_norm = std::max(worst_norm, relative_difference(spectral_theta_norm(SpectralOperand(R), p),
                                                            spectral_theta_norm(SpectralOperand(W), p)));
    } else {
      worst_norm = std::max(worst_norm,
                            relative_difference(spectral_ksupport_norm(SpectralOperand(R), k),
                                                spectral_ksupport_norm(SpectralOperand(W), k)));
    }
    const Matrix lhs = spectral_prox(SpectralOperand(R), lambda, params);
    const Matrix rhs = Q * spectral_prox(SpectralOperand(W), lambda, params) * P.transpose();
    worst_prox = std::max(worst_prox, (lhs - rhs).norm() / std::max(1.0, rhs.norm()));
  }
  return {worst_norm <= kTol && worst_prox <= kTol,
          "max norm relative difference = " + fmt("%.3g", worst_norm) +
              ", max prox relative Frobenius difference = " + fmt("%.3g", worst_prox) +
              " (tol 1e-8)"};
}

Outcome cluster_oracle() {
  constexpr double kTol = 1e-4;
  std::mt19937_64 rng(108);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Matrix W = random_gaussian(2, 2, rng);
    const double a = log_uniform(rng, 0.01, 0.5);
    const ClusterParams cp{a, a + log_uniform(rng, 0.1, 2.0), 1};
    worst = std::max(worst, relative_difference(cluster_norm(SpectralOperand(W), cp),
                                                reference::cluster_norm_2col_oracle(W, cp)));
  }
  return {worst <= kTol, "max relative difference = " + fmt("%.3g", worst) + " (tol 1e-4)"};
}

Outcome centered_minimum() {
  constexpr double kTol = 1e-8;
  std::mt19937_64 rng(109);
  double worst_equality = 0.0;
  double worst_violation = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Eigen::Index d = static_cast<Eigen::Index>(pick(rng, 1, 6));
    const Eigen::Index m = static_cast<Eigen::Index>(pick(rng, 2, 8));
    const Matrix W = random_gaussian(d, m, rng);
    const double a = log_uniform(rng, 0.01, 0.5);
    const ClusterParams cp{a, 1.0, pick(rng, 1, static_cast<std::size_t>(m) - 1)};
    const double centered = centered_cluster_norm(W, cp);
    const Matrix at_mean = W.colwise() - Vector(W.rowwise().mean());
    worst_equality =
        std::max(worst_equality,
                 relative_difference(centered, cluster_norm(SpectralOperand(at_mean), cp)));
    for (int s = 0; s < 100; ++s) {
      const Vector z = random_gaussian(d, rng);
      const double shifted = cluster_norm(SpectralOperand(W.colwise() - z), cp);
      worst_violation = std::max(worst_violation, (centered - shifted) / std::max(1.0, shifted));
    }
  }
  return {worst_equality <= kTol && worst_violation <= kTol,
          "equality at the mean: " + fmt("%.3g", worst_equality) +
              " (tol 1e-8); max excess over shifted values: " + fmt("%.3g", worst_violation)};
}

// Fraction of repeats on which `better` has a strictly lower test error.
double win_rate(const ResultsTable& table, const std::string& better, const std::string& worse) {
  const auto& x = table.find(better).test_errors;
  const auto& y = table.find(worse).test_errors;
  std::size_t wins = 0;
  for (std::size_t i = 0; i < x.size(); ++i) wins += x[i] < y[i] ? 1 : 0;
  return static_cast<double>(wins) / static_cast<double>(x.size());
}

Outcome completion_trend() {
  ExperimentSpec spec = preset_lowrank();
  spec.grids.erase(std::remove_if(spec.grids.begin(), spec.grids.end(),
                                  [](const RegularizerGrid& g) {
                                    return g.kind == RegularizerKind::ElasticNet;
                                  }),
                   spec.grids.end());
  spec.repeats = 20;
  spec.threads = worker_threads();
  const auto start = std::chrono::steady_clock::now();
  const ResultsTable table = grid_search(spec);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double ks = win_rate(table, "ks", "tr");
  const double box = win_rate(table, "box", "tr");
  std::ostringstream detail;
  detail << "ks beats tr on " << fmt("%.0f", 100 * ks) << "% of seeds, box on "
         << fmt("%.0f", 100 * box) << "% (need 70%); mean errors tr "
         << fmt("%.4f", table.find("tr").test_error_mean) << ", ks "
         << fmt("%.4f", table.find("ks").test_error_mean) << ", box "
         << fmt("%.4f", table.find("box").test_error_mean) << "; " << fmt("%.0f", secs)
         << " s (limit 600 s)";
  return {ks >= 0.7 && box >= 0.7 && secs < 600.0, detail.str()};
}

Outcome clustered_trend() {
  std::ostringstream detail;
  bool pass = true;
  const auto check = [&](const ResultsTable& table, const std::string& label,
                         const std::string& centered, const std::string& plain) {
    const double rate = win_rate(table, centered, plain);
    pass = pass && rate >= 0.7;
    detail << label << ' ' << centered << " beats " << plain << " on " << fmt("%.0f", 100 * rate)
           << "%; ";
  };

  ExperimentSpec block = preset_block();
  block.repeats = 20;
  block.threads = worker_threads();
  const ResultsTable block_table = grid_search(block);
  check(block_table, "block:", "c-ks", "ks");
  check(block_table, "block:", "c-cn", "box");

  ExperimentSpec mtl = preset_multitask();
  mtl.repeats = 20;
  mtl.threads = worker_threads();
  const ResultsTable mtl_table = grid_search(mtl);
  check(mtl_table, "multitask:", "c-ks", "ks");
  check(mtl_table, "multitask:", "c-cn", "cn");
  detail << "need 70% each";
  return {pass, detail.str()};
}

Outcome fista_correctness() {
  constexpr double kObjectiveTol = 1e-4;
  std::mt19937_64 rng(112);
  const Matrix Y = random_gaussian(5, 2, rng) * random_gaussian(2, 5, rng);
  ObservationSet obs;
  obs.rows = 5;
  obs.cols = 5;
  std::bernoulli_distribution keep(0.6);
  for (std::size_t j = 0; j < 5; ++j) {
    for (std::size_t i = 0; i < 5; ++i) {
      if (keep(rng)) {
        obs.entries.push_back({i, j, Y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                               Split::Train});
      }
    }
  }
  const MaskedSquaredLoss loss(obs);
  const Regularizer reg{RegularizerKind::Trace, 0.3};
  SolverConfig cfg;
  cfg.tolerance = 1e-9;
  cfg.max_iterations = 100000;
  const SolveResult r = minimize(loss, reg, cfg);
  const Matrix ref = reference::ista_reference(loss, reg, 1e-12, 5000000);
  const double gap = relative_difference(objective(loss, reg, r.W), objective(loss, reg, ref));
  const double residual = prox_gradient_residual(loss, reg, r.W);
  const double residual_limit = 10.0 * cfg.tolerance;
  std::ostringstream detail;
  detail << "objective gap " << fmt("%.3g", gap) << " (tol 1e-4); converged "
         << (r.state.converged ? "yes" : "no") << "; residual " << fmt("%.3g", residual)
         << " (limit 10*tolerance = " << fmt("%.3g", residual_limit) << ")";
  return {gap <= kObjectiveTol && r.state.converged && residual <= residual_limit, detail.str()};
}

}  // namespace

// Optional arguments select criteria by number; all run by default.
int main(int argc, char** argv) {
  std::vector<bool> selected(12, argc <= 1);
  for (int i = 1; i < argc; ++i) {
    const int n = std::atoi(argv[i]);
    if (n >= 1 && n <= 12) selected[static_cast<std::size_t>(n - 1)] = true;
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"prox oracle equivalence", prox_oracle},
      {"dual norm equivalence", dual_oracle},
      {"k-support l1/l2 specializations", ksupport_specializations},
      {"box norm to k-support limit", box_limit},
      {"infimal convolution oracle", infconv},
      {"prox complexity signature", complexity},
      {"spectral orthogonal invariance", spectral_invariance},
      {"cluster norm oracle", cluster_oracle},
      {"centered norm minimized at the mean", centered_minimum},
      {"matrix completion trend", completion_trend},
      {"clustered centered trend", clustered_trend},
      {"FISTA correctness", fista_correctness},
  };
  int failures = 0;
  int ran = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected[i]) continue;
    ++ran;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("[%s] %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", ran - failures, ran);
  return failures == 0 ? 0 : 1;
}
