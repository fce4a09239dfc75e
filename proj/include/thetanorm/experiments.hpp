#pragma once

#include "thetanorm/observations.hpp"
#include "thetanorm/solver.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace thetanorm {

// ---------------------------------------------------------------------------
// Synthetic data

/// m×m matrix U·Vᵀ + noise_sd·E with U, V of shape m×r; all entries i.i.d.
/// standard Gaussian from a generator seeded with `seed`.
Matrix gen_lowrank(std::size_t m, std::size_t r, double noise_sd, std::uint64_t seed);

/// m×m block-diagonal matrix: `blocks` diagonal blocks of side `block_size`,
/// each constant at a level drawn uniformly from `levels`, plus Gaussian noise.
Matrix gen_block(std::size_t m, std::size_t blocks, std::size_t block_size,
                 std::pair<double, double> levels, double noise_sd, std::uint64_t seed);

/// Tasks with a shared mean, clustered deviations and ±1 attribute designs
/// (plus a bias column), shaped after the personal-computer rating study.
struct MultitaskData {
  std::vector<Matrix> designs;  // per task: samples × features (bias last)
  std::vector<Vector> targets;
  Matrix true_weights;          // features × tasks
};

struct MultitaskShape {
  std::size_t tasks = 180;
  std::size_t samples_per_task = 20;
  std::size_t attributes = 13;
  std::size_t clusters = 3;
  double between_sd = 1.0;
  double within_sd = 0.1;
  double noise_sd = 1.0;
};

MultitaskData gen_multitask(const MultitaskShape& shape, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Masking

enum class SampleMode {
  GlobalFraction,  // fraction of all available entries
  PerRowFraction,  // fraction of each row's available entries
  PerRowCount,     // fixed number of entries per row
};

/// Samples training entries from `available`; 10% of the sampled entries
/// (rounded) are re-tagged Validation and every unsampled entry is Test.
ObservationSet sample_mask(const ObservationSet& available, SampleMode mode,
                           double amount, std::uint64_t seed);
ObservationSet sample_mask(const Matrix& full, SampleMode mode, double amount,
                           std::uint64_t seed);

// ---------------------------------------------------------------------------
// Rating files

/// `user<TAB>item<TAB>rating<TAB>timestamp` lines with 1-based ids and
/// ratings in [1, 5]. The shape defaults to the largest ids seen.
ObservationSet load_movielens(const std::string& path);
ObservationSet read_movielens(std::istream& in, std::size_t rows = 0, std::size_t cols = 0);
void write_movielens(std::ostream& out, const ObservationSet& obs);

inline constexpr double kJesterMissing = 99.0;

/// Dense CSV, one row per user, `width` columns, 99 marking a missing
/// rating; ratings lie in [-10, 10].
ObservationSet load_jester(const std::string& path, std::size_t width = 100);
ObservationSet read_jester(std::istream& in, std::size_t width = 100);
void write_jester(std::ostream& out, const ObservationSet& obs);

/// CSV with header `task,y,f1,...,fp`; a bias feature is appended.
MultitaskData load_multitask_csv(const std::string& path);
MultitaskData read_multitask_csv(std::istream& in);

// ---------------------------------------------------------------------------
// Metrics

/// ‖truth - prediction‖² / ‖truth‖² over the whole matrix.
double metric_relative_error(const Matrix& truth, const Matrix& prediction);
/// Same ratio restricted to the entries of `scope` (their values are truth).
double metric_relative_error(const ObservationSet& scope, const Matrix& prediction);

/// Mean absolute error over the entries of `scope`, divided by the rating
/// range. `literal` selects ‖truth - prediction‖² / (#obs / (r_max - r_min)).
double metric_nmae(const ObservationSet& scope, const Matrix& prediction, double r_min,
                   double r_max, bool literal = false);

/// Mean over tasks of the per-task root mean squared error.
double metric_task_rmse(const std::vector<Matrix>& designs,
                        const std::vector<Vector>& targets, const Matrix& W);

// ---------------------------------------------------------------------------
// Experiments

enum class DatasetKind { SyntheticLowRank, SyntheticBlock, MovieLens, Jester, Multitask };

std::string to_string(DatasetKind kind);
DatasetKind parse_dataset(const std::string& name);

struct DatasetSpec {
  DatasetKind kind = DatasetKind::SyntheticLowRank;
  std::string label;  // table label; defaults to the kind name
  std::size_t m = 50;
  std::size_t rank = 5;
  double noise_sd = 1.0;
  std::size_t blocks = 5;
  std::size_t block_size = 10;
  std::pair<double, double> levels{1.0, 10.0};
  SampleMode sample_mode = SampleMode::GlobalFraction;
  double sample_amount = 0.2;
  std::string path;       // MovieLens / Jester / multitask CSV
  std::size_t jester_width = 100;
  MultitaskShape multitask;
  std::size_t train_per_task = 8;
  bool nmae_literal = false;
  bool clamp_predictions = false;
};

struct RegularizerGrid {
  RegularizerKind kind = RegularizerKind::Trace;
  std::vector<double> lambdas{1.0};
  std::vector<std::size_t> ks{1};
  std::vector<double> as{1e-3};
  std::vector<double> mus{0.0};
  double b = 1.0;
  double mean_weight = 0.0;
};

struct ExperimentSpec {
  DatasetSpec data;
  std::vector<RegularizerGrid> grids;
  std::size_t repeats = 1;
  std::uint64_t seed = 1;
  double tolerance = 1e-5;
  std::size_t max_iterations = 2000;
  /// Solve each λ path from the largest λ down, warm-starting each solve.
  bool warm_start = true;
  /// Fixed solver step; 1/L of the loss when unset.
  std::optional<double> step_size;
  std::size_t threads = 1;

  void validate() const;
};

/// One table row. Hyperparameters, N and r are means over repeats.
struct ResultRow {
  std::string dataset;
  std::string norm;
  double test_error_mean = 0.0;
  double test_error_sd = 0.0;
  double iterations = 0.0;
  double rank = 0.0;
  double k = 0.0;
  double a = 0.0;
  double lambda = 0.0;
  std::vector<double> test_errors;  // one per repeat, in repeat order
  std::size_t failed_cells = 0;     // diverged grid cells
};

struct ResultsTable {
  std::vector<ResultRow> rows;

  const ResultRow& find(const std::string& norm) const;
};

/// Seed of one random stream of one repeat: stream 1 generates the data,
/// stream 2 draws the train/validation/test split.
std::uint64_t repeat_seed(std::uint64_t base, std::size_t repeat, std::uint64_t stream);

ResultsTable grid_search(const ExperimentSpec& spec);

void write_results_csv(std::ostream& out, const ResultsTable& table);
void write_results_json(std::ostream& out, const ResultsTable& table);

/// Desk-scale experiment presets behind the `synth` and `mtl` commands.
/// 50×50 rank-5 completion at 20% sampling with tr, en, ks and box.
ExperimentSpec preset_lowrank();
/// 100×100 completion with five 20×20 blocks, using ks, c-ks, box and c-cn.
ExperimentSpec preset_block();
/// Clustered synthetic multitask regression with tr, ks, c-ks, cn and c-cn.
ExperimentSpec preset_multitask();

// ---------------------------------------------------------------------------
// Prox benchmark

struct BenchRow {
  std::size_t d = 0;
  std::size_t k = 0;
  double seconds_baseline = 0.0;  // median over repeats
  double seconds_sorted = 0.0;    // median over repeats
  double max_abs_diff = 0.0;
  bool ok = false;
};

struct BenchOptions {
  std::vector<std::size_t> sizes;
  std::size_t k_divisor = 100;  // k = max(1, d / k_divisor)
  std::size_t repeats = 20;
  std::size_t baseline_repeats = 20;
  double lambda = 1.0;
  std::uint64_t seed = 1;
};

std::vector<BenchRow> bench_prox(const BenchOptions& options);
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

}  // namespace thetanorm
