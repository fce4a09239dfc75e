#include "thetanorm/errors.hpp"
#include "thetanorm/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace thetanorm {

namespace {

Matrix gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(rows, cols);
  // Column-major fill keeps the draw order independent of Eigen internals.
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
  }
  return out;
}

std::size_t rounded(double x) { return static_cast<std::size_t>(std::llround(x)); }

}  // namespace

Matrix gen_lowrank(std::size_t m, std::size_t r, double noise_sd, std::uint64_t seed) {
  if (r > m) {
    throw InvalidParams("gen_lowrank requires r <= m (got r=" + std::to_string(r) +
                        ", m=" + std::to_string(m) + ")");
  }
  if (!(noise_sd >= 0.0)) throw InvalidParams("noise_sd must be non-negative");
  std::mt19937_64 rng(seed);
  const auto n = static_cast<Eigen::Index>(m);
  const auto rr = static_cast<Eigen::Index>(r);
  const Matrix U = gaussian(rng, n, rr);
  const Matrix V = gaussian(rng, n, rr);
  const Matrix E = gaussian(rng, n, n);
  return U * V.transpose() + noise_sd * E;
}

Matrix gen_block(std::size_t m, std::size_t blocks, std::size_t block_size,
                 std::pair<double, double> levels, double noise_sd, std::uint64_t seed) {
  if (blocks * block_size > m) {
    throw InvalidParams("gen_block requires blocks*block_size <= m");
  }
  if (!(levels.first <= levels.second)) throw InvalidParams("empty level range");
  if (!(noise_sd >= 0.0)) throw InvalidParams("noise_sd must be non-negative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> level(levels.first, levels.second);
  const auto n = static_cast<Eigen::Index>(m);
  const auto bs = static_cast<Eigen::Index>(block_size);
  Matrix out = Matrix::Zero(n, n);
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    const auto start = static_cast<Eigen::Index>(blk) * bs;
    out.block(start, start, bs, bs).setConstant(level(rng));
  }
  out += noise_sd * gaussian(rng, n, n);
  return out;
}

MultitaskData gen_multitask(const MultitaskShape& shape, std::uint64_t seed) {
  if (shape.tasks == 0 || shape.samples_per_task == 0 || shape.clusters == 0) {
    throw InvalidParams("multitask shape needs tasks, samples and clusters >= 1");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  const auto p = static_cast<Eigen::Index>(shape.attributes + 1);

  const Vector mean = gaussian(rng, p, 1);
  std::vector<Vector> centers;
  for (std::size_t c = 0; c < shape.clusters; ++c) {
    centers.push_back(mean + shape.between_sd * gaussian(rng, p, 1));
  }

  MultitaskData out;
  out.true_weights.resize(p, static_cast<Eigen::Index>(shape.tasks));
  for (std::size_t t = 0; t < shape.tasks; ++t) {
    const Vector w = centers[t % shape.clusters] + shape.within_sd * gaussian(rng, p, 1);
    out.true_weights.col(static_cast<Eigen::Index>(t)) = w;

    const auto n = static_cast<Eigen::Index>(shape.samples_per_task);
    Matrix X(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j + 1 < p; ++j) X(i, j) = coin(rng) ? 1.0 : -1.0;
      X(i, p - 1) = 1.0;
    }
    Vector y = X * w;
    for (Eigen::Index i = 0; i < n; ++i) y[i] += shape.noise_sd * normal(rng);
    out.designs.push_back(std::move(X));
    out.targets.push_back(std::move(y));
  }
  return out;
}

ObservationSet sample_mask(const ObservationSet& available, SampleMode mode, double amount,
                           std::uint64_t seed) {
  available.validate();
  if (!(amount > 0.0) || !std::isfinite(amount)) {
    throw InvalidParams("sample amount must be positive");
  }
  if (mode != SampleMode::PerRowCount && amount > 1.0) {
    throw InvalidParams("sample fraction exceeds 1");
  }
  std::mt19937_64 rng(seed);
  const std::size_t n = available.entries.size();
  std::vector<char> sampled(n, 0);

  if (mode == SampleMode::GlobalFraction) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t take = std::min(n, rounded(amount * static_cast<double>(n)));
    for (std::size_t i = 0; i < take; ++i) sampled[order[i]] = 1;
  } else {
    std::vector<std::vector<std::size_t>> by_row(available.rows);
    for (std::size_t i = 0; i < n; ++i) by_row[available.entries[i].row].push_back(i);
    for (std::size_t r = 0; r < by_row.size(); ++r) {
      auto& idx = by_row[r];
      std::size_t take = 0;
      if (mode == SampleMode::PerRowFraction) {
        take = rounded(amount * static_cast<double>(idx.size()));
      } else {
        take = rounded(amount);
        if (take > idx.size()) {
          throw InvalidParams("row " + std::to_string(r) + " has " +
                              std::to_string(idx.size()) + " entries, cannot sample " +
                              std::to_string(take));
        }
      }
      std::shuffle(idx.begin(), idx.end(), rng);
      for (std::size_t i = 0; i < take; ++i) sampled[idx[i]] = 1;
    }
  }

  ObservationSet out{available.rows, available.cols, available.entries};
  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < n; ++i) {
    out.entries[i].split = sampled[i] ? Split::Train : Split::Test;
    if (sampled[i]) chosen.push_back(i);
  }
  std::shuffle(chosen.begin(), chosen.end(), rng);
  const std::size_t validation = rounded(0.1 * static_cast<double>(chosen.size()));
  for (std::size_t i = 0; i < validation; ++i) out.entries[chosen[i]].split = Split::Validation;
  return out;
}

ObservationSet sample_mask(const Matrix& full, SampleMode mode, double amount,
                           std::uint64_t seed) {
  return sample_mask(ObservationSet::from_dense(full), mode, amount, seed);
}

}  // namespace thetanorm
