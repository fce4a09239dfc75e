#include "thetanorm/errors.hpp"
#include "thetanorm/experiments.hpp"
#include "thetanorm/prox.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <ostream>
#include <random>

namespace thetanorm {

namespace {

constexpr double kAgreementTolerance = 1e-10;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

template <typename F>
double seconds(F&& f, Vector& out) {
  const auto start = std::chrono::steady_clock::now();
  out = f();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(stop - start).count();
}

}  // namespace

std::vector<BenchRow> bench_prox(const BenchOptions& options) {
  if (options.sizes.empty()) throw InvalidParams("bench needs at least one size");
  if (!std::is_sorted(options.sizes.begin(), options.sizes.end())) {
    throw InvalidParams("bench sizes must be ascending");
  }
  if (options.k_divisor == 0) throw InvalidParams("k divisor must be positive");
  if (options.repeats == 0 || options.baseline_repeats == 0) {
    throw InvalidParams("bench repeats must be positive");
  }

  std::vector<BenchRow> rows;
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t d : options.sizes) {
    if (d == 0) throw InvalidParams("bench size must be positive");
    BenchRow row;
    row.d = d;
    row.k = std::max<std::size_t>(1, d / options.k_divisor);
    const KSupportParams params{row.k};

    Vector w(static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = normal(rng);

    Vector sorted_x;
    Vector baseline_x;
    std::vector<double> t_sorted;
    std::vector<double> t_baseline;
    for (std::size_t r = 0; r < options.repeats; ++r) {
      t_sorted.push_back(
          seconds([&] { return prox_sq_ksupport(w, options.lambda, params); }, sorted_x));
    }
    for (std::size_t r = 0; r < options.baseline_repeats; ++r) {
      t_baseline.push_back(seconds(
          [&] { return prox_sq_ksupport_baseline(w, options.lambda, params); }, baseline_x));
    }
    row.seconds_sorted = median(t_sorted);
    row.seconds_baseline = median(t_baseline);
    row.max_abs_diff = (sorted_x - baseline_x).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, sorted_x.cwiseAbs().maxCoeff());
    row.ok = row.max_abs_diff <= kAgreementTolerance * scale;
    rows.push_back(row);
  }
  return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "d,k,baseline_seconds,sorted_seconds,max_abs_diff,ok\n";
  for (const auto& r : rows) {
    out << r.d << ',' << r.k << ',' << std::setprecision(6) << r.seconds_baseline << ','
        << r.seconds_sorted << ',' << r.max_abs_diff << ',' << (r.ok ? "true" : "false")
        << '\n';
  }
}

}  // namespace thetanorm
