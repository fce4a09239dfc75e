#include "thetanorm/errors.hpp"
#include "thetanorm/experiments.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>
#include <random>
#include <thread>

namespace thetanorm {

namespace {

constexpr double kRankTolerance = 1e-6;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}


/// One repeat of one dataset: a training loss plus validation and test scores.
class Instance {
 public:
  virtual ~Instance() = default;
  virtual const SmoothLoss& loss() const = 0;
  virtual double validation_error(const Matrix& W) const = 0;
  virtual double test_error(const Matrix& W) const = 0;
};

class CompletionInstance final : public Instance {
 public:
  CompletionInstance(const ObservationSet& sampled, const DatasetSpec& data)
      : loss_(sampled.filtered(Split::Train)),
        validation_(sampled.filtered(Split::Validation)),
        test_(sampled.filtered(Split::Test)),
        data_(data) {
    if (data.kind == DatasetKind::MovieLens) range_ = {1.0, 5.0};
    if (data.kind == DatasetKind::Jester) range_ = {-10.0, 10.0};
    if (validation_.entries.empty()) {
      throw InvalidParams("sampling left no validation entries");
    }
  }

  const SmoothLoss& loss() const override { return loss_; }
  double validation_error(const Matrix& W) const override { return score(validation_, W); }
  double test_error(const Matrix& W) const override { return score(test_, W); }

 private:
  bool rating_data() const {
    return data_.kind == DatasetKind::MovieLens || data_.kind == DatasetKind::Jester;
  }

  double score(const ObservationSet& scope, const Matrix& W) const {
    if (!rating_data()) return metric_relative_error(scope, W);
    if (data_.clamp_predictions) {
      const Matrix clamped = W.cwiseMax(range_.first).cwiseMin(range_.second);
      return metric_nmae(scope, clamped, range_.first, range_.second, data_.nmae_literal);
    }
    return metric_nmae(scope, W, range_.first, range_.second, data_.nmae_literal);
  }

  MaskedSquaredLoss loss_;
  ObservationSet validation_;
  ObservationSet test_;
  const DatasetSpec& data_;
  std::pair<double, double> range_{0.0, 1.0};
};

struct TaskSplit {
  std::vector<Matrix> designs;
  std::vector<Vector> targets;
};

class MultitaskInstance final : public Instance {
 public:
  MultitaskInstance(const MultitaskData& all, std::size_t train_per_task, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    TaskSplit train;
    for (std::size_t t = 0; t < all.designs.size(); ++t) {
      const Matrix& X = all.designs[t];
      const Vector& y = all.targets[t];
      const auto n = static_cast<std::size_t>(X.rows());
      if (n < train_per_task + 2) {
        throw InvalidParams("task " + std::to_string(t) + " has " + std::to_string(n) +
                            " samples; need train_per_task + 2");
      }
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::shuffle(order.begin(), order.end(), rng);
      // Held-out samples are split evenly between validation and test.
      const std::size_t n_val = (n - train_per_task) / 2;
      auto take = [&](std::size_t from, std::size_t count, TaskSplit& into) {
        Matrix Xs(static_cast<Eigen::Index>(count), X.cols());
        Vector ys(static_cast<Eigen::Index>(count));
        for (std::size_t i = 0; i < count; ++i) {
          const auto src = static_cast<Eigen::Index>(order[from + i]);
          Xs.row(static_cast<Eigen::Index>(i)) = X.row(src);
          ys[static_cast<Eigen::Index>(i)] = y[src];
        }
        into.designs.push_back(std::move(Xs));
        into.targets.push_back(std::move(ys));
      };
      take(0, train_per_task, train);
      take(train_per_task, n_val, validation_);
      take(train_per_task + n_val, n - train_per_task - n_val, test_);
    }
    loss_ = std::make_unique<MultitaskSquaredLoss>(std::move(train.designs),
                                                   std::move(train.targets));
  }

  const SmoothLoss& loss() const override { return *loss_; }
  double validation_error(const Matrix& W) const override {
    return metric_task_rmse(validation_.designs, validation_.targets, W);
  }
  double test_error(const Matrix& W) const override {
    return metric_task_rmse(test_.designs, test_.targets, W);
  }

 private:
  std::unique_ptr<MultitaskSquaredLoss> loss_;
  TaskSplit validation_;
  TaskSplit test_;
};

/// Data shared by every repeat (files are read once).
struct SharedData {
  ObservationSet ratings;
  MultitaskData multitask;
  bool has_multitask_file = false;
};

SharedData load_shared(const DatasetSpec& data) {
  SharedData out;
  switch (data.kind) {
    case DatasetKind::MovieLens:
      out.ratings = load_movielens(data.path);
      break;
    case DatasetKind::Jester:
      out.ratings = load_jester(data.path, data.jester_width);
      break;
    case DatasetKind::Multitask:
      if (!data.path.empty()) {
        out.multitask = load_multitask_csv(data.path);
        out.has_multitask_file = true;
      }
      break;
    default:
      break;
  }
  return out;
}

std::unique_ptr<Instance> make_instance(const DatasetSpec& data, const SharedData& shared,
                                        std::uint64_t base_seed, std::size_t repeat) {
  const std::uint64_t data_seed = repeat_seed(base_seed, repeat, 1);
  const std::uint64_t mask_seed = repeat_seed(base_seed, repeat, 2);
  switch (data.kind) {
    case DatasetKind::SyntheticLowRank: {
      const Matrix full = gen_lowrank(data.m, data.rank, data.noise_sd, data_seed);
      return std::make_unique<CompletionInstance>(
          sample_mask(full, data.sample_mode, data.sample_amount, mask_seed), data);
    }
    case DatasetKind::SyntheticBlock: {
      const Matrix full =
          gen_block(data.m, data.blocks, data.block_size, data.levels, data.noise_sd, data_seed);
      return std::make_unique<CompletionInstance>(
          sample_mask(full, data.sample_mode, data.sample_amount, mask_seed), data);
    }
    case DatasetKind::MovieLens:
    case DatasetKind::Jester:
      return std::make_unique<CompletionInstance>(
          sample_mask(shared.ratings, data.sample_mode, data.sample_amount, mask_seed), data);
    case DatasetKind::Multitask: {
      if (shared.has_multitask_file) {
        return std::make_unique<MultitaskInstance>(shared.multitask, data.train_per_task,
                                                   mask_seed);
      }
      return std::make_unique<MultitaskInstance>(gen_multitask(data.multitask, data_seed),
                                                 data.train_per_task, mask_seed);
    }
  }
  throw InvalidParams("unknown dataset kind");
}

/// Outcome of the validation search for one regularizer on one repeat.
struct RepeatOutcome {
  bool ok = false;
  double test_error = std::numeric_limits<double>::quiet_NaN();
  double iterations = 0.0;
  double rank = 0.0;
  double k = 0.0;
  double a = 0.0;
  double lambda = 0.0;
  std::size_t failed_cells = 0;
};

bool uses_k(RegularizerKind kind) {
  return kind != RegularizerKind::Trace && kind != RegularizerKind::ElasticNet;
}

bool uses_a(RegularizerKind kind) {
  return kind == RegularizerKind::SpectralBox || kind == RegularizerKind::Cluster ||
         kind == RegularizerKind::CenteredCluster;
}

RepeatOutcome run_grid(const Instance& inst, const RegularizerGrid& grid,
                       const ExperimentSpec& spec) {
  RepeatOutcome best;
  double best_validation = std::numeric_limits<double>::infinity();

  std::vector<double> lambdas = grid.lambdas;
  std::sort(lambdas.begin(), lambdas.end(), std::greater<>());
  const std::vector<std::size_t> ks = uses_k(grid.kind) ? grid.ks : std::vector<std::size_t>{0};
  const std::vector<double> as = uses_a(grid.kind) ? grid.as : std::vector<double>{0.0};
  const std::vector<double> mus =
      grid.kind == RegularizerKind::ElasticNet ? grid.mus : std::vector<double>{0.0};

  for (std::size_t k : ks) {
    for (double a : as) {
      for (double mu : mus) {
        SolverConfig cfg;
        cfg.tolerance = spec.tolerance;
        cfg.max_iterations = spec.max_iterations;
        cfg.record_trace = false;
        cfg.step_size = spec.step_size;
        for (double lambda : lambdas) {
          Regularizer reg;
          reg.kind = grid.kind;
          reg.lambda = lambda;
          reg.k = std::max<std::size_t>(k, 1);
          reg.a = uses_a(grid.kind) ? a : reg.a;
          reg.b = grid.b;
          reg.mu = mu;
          reg.mean_weight = grid.mean_weight;
          SolveResult res;
          try {
            res = minimize(inst.loss(), reg, cfg);
          } catch (const DivergenceError&) {
            ++best.failed_cells;
            cfg.warm_start.reset();
            cfg.warm_offset.reset();
            continue;
          }
          if (spec.warm_start) {
            cfg.warm_start = res.state.iterate;
            if (reg.centered()) cfg.warm_offset = res.state.offset;
          }
          const double v = inst.validation_error(res.W);
          if (v < best_validation) {
            best_validation = v;
            best.ok = true;
            best.test_error = inst.test_error(res.W);
            best.iterations = static_cast<double>(res.state.iterations_run);
            best.rank = static_cast<double>(SpectralOperand(res.W).numerical_rank(kRankTolerance));
            best.k = static_cast<double>(k);
            best.a = a;
            best.lambda = lambda;
          }
        }
      }
    }
  }
  return best;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - mu) * (x - mu);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

std::string csv_number(double v) {
  std::ostringstream ss;
  ss << std::setprecision(6) << v;
  return ss.str();
}

}  // namespace

std::uint64_t repeat_seed(std::uint64_t base, std::size_t repeat, std::uint64_t stream) {
  return splitmix64(splitmix64(base ^ splitmix64(repeat)) + stream);
}

std::string to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::SyntheticLowRank: return "synthetic-lowrank";
    case DatasetKind::SyntheticBlock: return "synthetic-block";
    case DatasetKind::MovieLens: return "movielens";
    case DatasetKind::Jester: return "jester";
    case DatasetKind::Multitask: return "multitask";
  }
  return "unknown";
}

DatasetKind parse_dataset(const std::string& name) {
  for (DatasetKind k : {DatasetKind::SyntheticLowRank, DatasetKind::SyntheticBlock,
                        DatasetKind::MovieLens, DatasetKind::Jester, DatasetKind::Multitask}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidParams("unknown dataset '" + name + "'");
}

void ExperimentSpec::validate() const {
  if (grids.empty()) throw InvalidParams("no regularizers configured");
  if (repeats < 1) throw InvalidParams("repeats must be >= 1");
  if (!(tolerance > 0.0)) throw InvalidParams("tolerance must be positive");
  if (max_iterations < 1) throw InvalidParams("max_iterations must be >= 1");
  if (step_size && !(*step_size > 0.0)) throw InvalidParams("step_size must be positive");
  for (const auto& g : grids) {
    const std::string name = to_string(g.kind);
    if (g.lambdas.empty()) throw InvalidParams(name + ": empty lambda grid");
    if (uses_k(g.kind) && g.ks.empty()) throw InvalidParams(name + ": empty k grid");
    if (uses_a(g.kind) && g.as.empty()) throw InvalidParams(name + ": empty a grid");
    if (g.kind == RegularizerKind::ElasticNet && g.mus.empty()) {
      throw InvalidParams(name + ": empty mu grid");
    }
    for (double l : g.lambdas) {
      if (!(l >= 0.0) || !std::isfinite(l)) throw InvalidParams(name + ": bad lambda");
    }
  }
  const bool needs_file = data.kind == DatasetKind::MovieLens || data.kind == DatasetKind::Jester;
  if (needs_file && data.path.empty()) {
    throw InvalidParams(to_string(data.kind) + " requires a data path");
  }
}

const ResultRow& ResultsTable::find(const std::string& norm) const {
  for (const auto& r : rows) {
    if (r.norm == norm) return r;
  }
  throw InvalidParams("no result row for '" + norm + "'");
}

ResultsTable grid_search(const ExperimentSpec& spec) {
  spec.validate();
  const SharedData shared = load_shared(spec.data);

  // Jobs are (repeat, grid) pairs; each job writes only its own slot.
  const std::size_t n_grids = spec.grids.size();
  const std::size_t n_jobs = spec.repeats * n_grids;
  std::vector<RepeatOutcome> outcomes(n_jobs);
  std::vector<std::exception_ptr> errors(spec.repeats);

  std::atomic<std::size_t> next_repeat{0};
  auto worker = [&]() {
    for (std::size_t r = next_repeat++; r < spec.repeats; r = next_repeat++) {
      try {
        const auto inst = make_instance(spec.data, shared, spec.seed, r);
        for (std::size_t g = 0; g < n_grids; ++g) {
          outcomes[r * n_grids + g] = run_grid(*inst, spec.grids[g], spec);
        }
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };

  std::size_t threads = spec.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, spec.repeats);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  const std::string label = spec.data.label.empty() ? to_string(spec.data.kind) : spec.data.label;
  ResultsTable table;
  for (std::size_t g = 0; g < n_grids; ++g) {
    ResultRow row;
    row.dataset = label;
    row.norm = to_string(spec.grids[g].kind);
    std::vector<double> good;
    std::vector<double> its, ranks, ks, as, lambdas;
    for (std::size_t r = 0; r < spec.repeats; ++r) {
      const RepeatOutcome& o = outcomes[r * n_grids + g];
      row.test_errors.push_back(o.test_error);
      row.failed_cells += o.failed_cells;
      if (!o.ok) continue;
      good.push_back(o.test_error);
      its.push_back(o.iterations);
      ranks.push_back(o.rank);
      ks.push_back(o.k);
      as.push_back(o.a);
      lambdas.push_back(o.lambda);
    }
    row.test_error_mean = mean_of(good);
    row.test_error_sd = sample_sd(good);
    row.iterations = mean_of(its);
    row.rank = mean_of(ranks);
    row.k = mean_of(ks);
    row.a = mean_of(as);
    row.lambda = mean_of(lambdas);
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_results_csv(std::ostream& out, const ResultsTable& table) {
  out << "dataset,norm,test_error_mean,test_error_sd,N,r,k,a,lambda\n";
  for (const auto& r : table.rows) {
    out << r.dataset << ',' << r.norm << ',' << csv_number(r.test_error_mean) << ','
        << csv_number(r.test_error_sd) << ',' << csv_number(r.iterations) << ','
        << csv_number(r.rank) << ',' << csv_number(r.k) << ',' << csv_number(r.a) << ','
        << csv_number(r.lambda) << '\n';
  }
}

void write_results_json(std::ostream& out, const ResultsTable& table) {
  // ordered_json keeps the documented column order.
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : table.rows) {
    nlohmann::ordered_json j;
    j["dataset"] = r.dataset;
    j["norm"] = r.norm;
    j["test_error_mean"] = r.test_error_mean;
    j["test_error_sd"] = r.test_error_sd;
    j["N"] = r.iterations;
    j["r"] = r.rank;
    j["k"] = r.k;
    j["a"] = r.a;
    j["lambda"] = r.lambda;
    j["test_errors"] = r.test_errors;
    j["failed_cells"] = r.failed_cells;
    rows.push_back(std::move(j));
  }
  out << rows.dump(2) << '\n';
}

}  // namespace thetanorm
