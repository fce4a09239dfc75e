#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace thetanorm {

enum class Split { Train, Validation, Test };

struct Observation {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
  Split split = Split::Train;
};

/// Sparse entries of a rows×cols matrix. Indices are in range and every
/// (row, col) appears at most once.
struct ObservationSet {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Observation> entries;

  /// Throws InvalidInput on out-of-range indices and DuplicateEntry on a
  /// repeated (row, col).
  void validate() const;

  std::size_t count(Split s) const;
  ObservationSet filtered(Split s) const;

  /// All cells of a dense matrix, tagged with `split`.
  static ObservationSet from_dense(const Eigen::MatrixXd& m, Split split = Split::Train);
};

}  // namespace thetanorm
