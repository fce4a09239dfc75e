#include "thetanorm/observations.hpp"

#include "thetanorm/errors.hpp"

#include <algorithm>
#include <string>

namespace thetanorm {

void ObservationSet::validate() const {
  std::vector<std::size_t> keys;
  keys.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.row >= rows || e.col >= cols) {
      throw InvalidInput("observation (" + std::to_string(e.row) + ", " +
                         std::to_string(e.col) + ") outside " + std::to_string(rows) +
                         "x" + std::to_string(cols));
    }
    keys.push_back(e.row * cols + e.col);
  }
  std::sort(keys.begin(), keys.end());
  const auto dup = std::adjacent_find(keys.begin(), keys.end());
  if (dup != keys.end()) {
    throw DuplicateEntry("duplicate observation at (" + std::to_string(*dup / cols) +
                         ", " + std::to_string(*dup % cols) + ")");
  }
}

std::size_t ObservationSet::count(Split s) const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(),
                     [s](const Observation& e) { return e.split == s; }));
}

ObservationSet ObservationSet::filtered(Split s) const {
  ObservationSet out{rows, cols, {}};
  for (const auto& e : entries) {
    if (e.split == s) out.entries.push_back(e);
  }
  return out;
}

ObservationSet ObservationSet::from_dense(const Eigen::MatrixXd& m, Split split) {
  ObservationSet out{static_cast<std::size_t>(m.rows()),
                     static_cast<std::size_t>(m.cols()), {}};
  out.entries.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out.entries.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                             m(i, j), split});
    }
  }
  return out;
}

}  // namespace thetanorm
