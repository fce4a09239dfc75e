#include "thetanorm/cli.hpp"

#include "thetanorm/core_norms.hpp"
#include "thetanorm/errors.hpp"
#include "thetanorm/prox.hpp"
#include "thetanorm/spectral.hpp"

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

namespace thetanorm::cli {

namespace {

constexpr double kRealDataTolerance = 1e-3;

/// Raised for inconsistent flag combinations detected after parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

double parse_number(const std::string& tok, std::size_t line) {
  double v = 0.0;
  const auto* end = tok.data() + tok.size();
  const auto res = std::from_chars(tok.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
    throw ParseError("not a finite number: '" + tok + "'", line);
  }
  return v;
}

std::vector<double> parse_row(const std::string& line, std::size_t lineno) {
  std::vector<double> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(parse_number(tok, lineno));
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_scalar(double v) {
  std::ostringstream ss;
  ss << std::setprecision(6) << v;
  return ss.str();
}

void print_vector(std::ostream& out, const Vector& x) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(6);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (i) ss << ' ';
    ss << x[i];
  }
  out << ss.str() << '\n';
}

// ---------------------------------------------------------------------------
// Config parsing

std::vector<double> parse_list(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v.rfind("logspace(", 0) == 0 && v.back() == ')') {
    const auto parts = parse_list(key, v.substr(9, v.size() - 10));
    if (parts.size() != 3 || parts[2] < 1 || parts[2] != std::floor(parts[2])) {
      throw InvalidParams(key + ": logspace takes (lo, hi, count)");
    }
    std::vector<double> out;
    const auto n = static_cast<std::size_t>(parts[2]);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
      out.push_back(std::pow(10.0, parts[0] + t * (parts[1] - parts[0])));
    }
    return out;
  }
  std::vector<double> out;
  std::istringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const std::string t = trim(tok);
    double x = 0.0;
    const auto* end = t.data() + t.size();
    const auto res = std::from_chars(t.data(), end, x);
    if (t.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(x)) {
      throw InvalidParams(key + ": bad number '" + t + "'");
    }
    out.push_back(x);
  }
  if (out.empty()) throw InvalidParams(key + ": empty list");
  return out;
}

double parse_one(const std::string& key, const std::string& raw) {
  const auto v = parse_list(key, raw);
  if (v.size() != 1) throw InvalidParams(key + ": expected a single number");
  return v[0];
}

std::size_t parse_count(const std::string& key, const std::string& raw) {
  const double v = parse_one(key, raw);
  if (v < 0 || v != std::floor(v)) throw InvalidParams(key + ": expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InvalidParams(key + ": expected true or false");
}

SampleMode parse_sample_mode(const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "global-fraction") return SampleMode::GlobalFraction;
  if (v == "per-row-fraction") return SampleMode::PerRowFraction;
  if (v == "per-row-count") return SampleMode::PerRowCount;
  throw InvalidParams("sample_mode: expected global-fraction, per-row-fraction or per-row-count");
}

void apply_experiment_key(ExperimentSpec& spec, const std::string& key, const std::string& v) {
  DatasetSpec& d = spec.data;
  if (key == "dataset") d.kind = parse_dataset(trim(v));
  else if (key == "label") d.label = trim(v);
  else if (key == "m") d.m = parse_count(key, v);
  else if (key == "rank") d.rank = parse_count(key, v);
  else if (key == "noise_sd") d.noise_sd = parse_one(key, v);
  else if (key == "blocks") d.blocks = parse_count(key, v);
  else if (key == "block_size") d.block_size = parse_count(key, v);
  else if (key == "level_min") d.levels.first = parse_one(key, v);
  else if (key == "level_max") d.levels.second = parse_one(key, v);
  else if (key == "sample_mode") d.sample_mode = parse_sample_mode(v);
  else if (key == "sample_amount") d.sample_amount = parse_one(key, v);
  else if (key == "path") d.path = trim(v);
  else if (key == "jester_width") d.jester_width = parse_count(key, v);
  else if (key == "train_per_task") d.train_per_task = parse_count(key, v);
  else if (key == "tasks") d.multitask.tasks = parse_count(key, v);
  else if (key == "samples_per_task") d.multitask.samples_per_task = parse_count(key, v);
  else if (key == "attributes") d.multitask.attributes = parse_count(key, v);
  else if (key == "clusters") d.multitask.clusters = parse_count(key, v);
  else if (key == "between_sd") d.multitask.between_sd = parse_one(key, v);
  else if (key == "within_sd") d.multitask.within_sd = parse_one(key, v);
  else if (key == "task_noise_sd") d.multitask.noise_sd = parse_one(key, v);
  else if (key == "nmae_literal") d.nmae_literal = parse_bool(key, v);
  else if (key == "clamp") d.clamp_predictions = parse_bool(key, v);
  else if (key == "repeats") spec.repeats = parse_count(key, v);
  else if (key == "seed") spec.seed = parse_count(key, v);
  else if (key == "tolerance") spec.tolerance = parse_one(key, v);
  else if (key == "max_iterations") spec.max_iterations = parse_count(key, v);
  else if (key == "warm_start") spec.warm_start = parse_bool(key, v);
  else if (key == "step_size") spec.step_size = parse_one(key, v);
  else if (key == "threads") spec.threads = parse_count(key, v);
  else throw InvalidParams("[experiment]: unknown key '" + key + "'");
}

RegularizerGrid parse_grid(const std::string& section,
                           const boost::property_tree::ptree& keys) {
  RegularizerGrid g;
  g.kind = parse_regularizer(section);
  for (const auto& [key, node] : keys) {
    const std::string v = node.get_value<std::string>();
    const std::string where = "[" + section + "] " + key;
    if (key == "lambda") {
      g.lambdas = parse_list(where, v);
    } else if (key == "k") {
      g.ks.clear();
      for (double x : parse_list(where, v)) {
        if (x < 1 || x != std::floor(x)) throw InvalidParams(where + ": k must be integers >= 1");
        g.ks.push_back(static_cast<std::size_t>(x));
      }
    } else if (key == "a") {
      g.as = parse_list(where, v);
    } else if (key == "b") {
      g.b = parse_one(where, v);
    } else if (key == "mu") {
      g.mus = parse_list(where, v);
    } else if (key == "mean_weight") {
      g.mean_weight = parse_one(where, v);
    } else {
      throw InvalidParams(where + ": unknown key");
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Commands

struct NormFlags {
  bool box = false;
  bool ksupport = false;
  bool trace = false;
  bool cluster = false;
  std::optional<double> a;
  std::optional<double> b;
  std::optional<double> c;
  std::optional<std::size_t> k;
};

void add_norm_flags(CLI::App* cmd, NormFlags& f, bool matrix) {
  cmd->add_flag("--box", f.box, "box norm with -a -b -c (cluster/spectral: -a -b -c)");
  cmd->add_flag("--ksupport", f.ksupport, "k-support norm with -k");
  if (matrix) {
    cmd->add_flag("--trace", f.trace, "trace (nuclear) norm");
    cmd->add_flag("--cluster", f.cluster, "cluster norm with -a -b -k");
  }
  cmd->add_option("-a", f.a, "lower bound a");
  cmd->add_option("-b", f.b, "upper bound b");
  cmd->add_option("-c", f.c, "budget c");
  cmd->add_option("-k", f.k, "k");
}

NormParams vector_params(const NormFlags& f) {
  if (f.box == f.ksupport) throw UsageError("choose exactly one of --box or --ksupport");
  if (f.box) {
    if (!f.a || !f.b || !f.c) throw UsageError("--box needs -a, -b and -c");
    if (f.k) throw UsageError("-k does not apply to --box");
    return BoxParams{*f.a, *f.b, *f.c};
  }
  if (!f.k) throw UsageError("--ksupport needs -k");
  if (f.a || f.b || f.c) throw UsageError("-a/-b/-c do not apply to --ksupport");
  return KSupportParams{*f.k};
}

std::istream& open_input(const std::string& path, std::ifstream& file, std::istream& fallback) {
  if (path.empty() || path == "-") return fallback;
  file.open(path);
  if (!file) throw InvalidInput("cannot open '" + path + "'");
  return file;
}

class OutputSink {
 public:
  OutputSink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw InvalidInput("cannot write '" + path + "'");
      out_ = &file_;
    }
  }
  std::ostream& stream() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

std::size_t resolve_threads(const std::optional<std::size_t>& flag, std::size_t fallback) {
  if (flag) return *flag;
  if (const char* env = std::getenv("THETA_NORMS_THREADS")) {
    std::size_t v = 0;
    const std::string s(env);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw UsageError("THETA_NORMS_THREADS must be a non-negative integer");
    }
    return v;
  }
  return fallback;
}

struct ExperimentFlags {
  std::string config;
  std::string output;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> repeats;
  std::optional<double> tolerance;
  std::optional<std::size_t> max_iterations;
  std::optional<std::size_t> threads;
  std::string dataset;
  std::string data_path;
  bool nmae_literal = false;
  bool clamp = false;
};

void add_experiment_flags(CLI::App* cmd, ExperimentFlags& f, bool config_required) {
  auto* opt = cmd->add_option("--config", f.config, "experiment config file");
  if (config_required) opt->required();
  cmd->add_option("-o,--output", f.output, "output file (default stdout)");
  cmd->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--seed", f.seed, "base seed");
  cmd->add_option("--repeats", f.repeats, "number of repeats");
  cmd->add_option("--tolerance", f.tolerance, "solver relative objective tolerance");
  cmd->add_option("--max-iterations", f.max_iterations, "solver iteration cap");
  cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)");
  cmd->add_flag("--nmae-literal", f.nmae_literal, "use the printed NMAE variant");
  cmd->add_flag("--clamp", f.clamp, "clamp predictions to the rating range");
}

int run_experiment(ExperimentSpec spec, const ExperimentFlags& f, std::ostream& out) {
  if (!f.config.empty()) {
    std::ifstream file(f.config);
    if (!file) throw InvalidInput("cannot open config '" + f.config + "'");
    spec = parse_config(file, spec);
  }
  if (!f.data_path.empty()) spec.data.path = f.data_path;
  if (f.seed) spec.seed = *f.seed;
  if (f.repeats) spec.repeats = *f.repeats;
  if (f.tolerance) spec.tolerance = *f.tolerance;
  if (f.max_iterations) spec.max_iterations = *f.max_iterations;
  if (f.nmae_literal) spec.data.nmae_literal = true;
  if (f.clamp) spec.data.clamp_predictions = true;
  spec.threads = resolve_threads(f.threads, spec.threads);

  const ResultsTable table = grid_search(spec);
  OutputSink sink(f.output, out);
  if (f.format == "json") {
    write_results_json(sink.stream(), table);
  } else {
    write_results_csv(sink.stream(), table);
  }
  for (const auto& row : table.rows) {
    for (double e : row.test_errors) {
      if (std::isnan(e)) {
        throw DivergenceError(row.norm + ": every grid cell diverged on at least one repeat");
      }
    }
  }
  return kOk;
}

std::vector<std::size_t> parse_sizes(const std::string& raw) {
  std::vector<std::size_t> out;
  for (double x : parse_list("--sizes", raw)) {
    if (x < 1 || x != std::floor(x)) throw UsageError("--sizes takes positive integers");
    out.push_back(static_cast<std::size_t>(x));
  }
  return out;
}

int dispatch(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Box Θ-norm regularizers: norms, proximity operators and experiments",
               "thetanorm"};
  app.require_subcommand(1);

  std::string input;
  NormFlags nf;
  double lambda = 0.0;

  auto* norm = app.add_subcommand("norm", "box or k-support norm of a vector");
  auto* dual = app.add_subcommand("dual", "dual norm of a vector");
  auto* prox = app.add_subcommand("prox", "prox of (lambda/2)||.||^2 at a vector");
  auto* snorm = app.add_subcommand("spectral-norm", "orthogonally invariant norm of a matrix");
  for (auto* cmd : {norm, dual, prox, snorm}) {
    cmd->add_option("-i,--input", input, "input file (default stdin)");
    add_norm_flags(cmd, nf, cmd == snorm);
  }
  prox->add_option("--lambda", lambda, "prox weight (> 0)")->required();

  ExperimentFlags ef;
  auto* complete = app.add_subcommand("complete", "matrix completion grid search");
  add_experiment_flags(complete, ef, true);
  complete->add_option("--data", ef.data_path, "rating file overriding the config path");
  auto* mtl = app.add_subcommand("mtl", "clustered multitask grid search");
  add_experiment_flags(mtl, ef, false);
  mtl->add_option("--data", ef.data_path, "multitask CSV (default: synthetic)");
  auto* synth = app.add_subcommand("synth", "synthetic completion trend experiment");
  add_experiment_flags(synth, ef, false);
  synth->add_option("--dataset", ef.dataset, "lowrank or block")
      ->check(CLI::IsMember({"lowrank", "block"}));

  BenchOptions bo;
  std::string sizes = "16384,32768,65536,131072,262144";
  std::string bench_output;
  auto* bench = app.add_subcommand("bench", "timing of the two k-support prox algorithms");
  bench->add_option("--sizes", sizes, "comma-separated ascending dimensions");
  bench->add_option("--repeats", bo.repeats, "timed runs per size (sorted method)");
  bench->add_option("--baseline-repeats", bo.baseline_repeats, "timed runs per size (baseline)");
  bench->add_option("--k-divisor", bo.k_divisor, "k = max(1, d / divisor)");
  bench->add_option("--lambda", bo.lambda, "prox weight");
  bench->add_option("--seed", bo.seed, "random seed");
  bench->add_option("-o,--output", bench_output, "output file (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error[usage]: " << one_line(e.what()) << '\n' << app.help();
    return kUsage;
  }

  if (norm->parsed() || dual->parsed() || prox->parsed()) {
    const NormParams params = vector_params(nf);
    std::ifstream file;
    const Vector w = read_vector(open_input(input, file, in));
    if (prox->parsed()) {
      print_vector(out, prox_sq({w, lambda, params}));
      return kOk;
    }
    double value = 0.0;
    if (const auto* bp = std::get_if<BoxParams>(&params)) {
      value = norm->parsed() ? theta_norm(w, *bp).value : theta_dual_norm(w, *bp);
    } else {
      const auto& kp = std::get<KSupportParams>(params);
      value = norm->parsed() ? ksupport_norm(w, kp.k) : ksupport_dual_norm(w, kp.k);
    }
    out << format_scalar(value) << '\n';
    return kOk;
  }

  if (snorm->parsed()) {
    const int families = int(nf.box) + int(nf.ksupport) + int(nf.trace) + int(nf.cluster);
    if (families != 1) {
      throw UsageError("choose exactly one of --box, --ksupport, --trace or --cluster");
    }
    std::ifstream file;
    const SpectralOperand W(read_matrix(open_input(input, file, in)));
    double value = 0.0;
    if (nf.trace) {
      value = W.sigma().sum();
    } else if (nf.cluster) {
      if (!nf.a || !nf.b || !nf.k) throw UsageError("--cluster needs -a, -b and -k");
      value = cluster_norm(W, ClusterParams{*nf.a, *nf.b, *nf.k});
    } else {
      const NormParams params = vector_params(nf);
      if (const auto* bp = std::get_if<BoxParams>(&params)) {
        value = spectral_theta_norm(W, *bp);
      } else {
        value = spectral_ksupport_norm(W, std::get<KSupportParams>(params).k);
      }
    }
    out << format_scalar(value) << '\n';
    return kOk;
  }

  if (complete->parsed()) return run_experiment(ExperimentSpec{}, ef, out);
  if (mtl->parsed()) {
    ExperimentSpec spec = preset_multitask();
    if (!ef.data_path.empty()) spec.data.label = "multitask-file";
    return run_experiment(spec, ef, out);
  }
  if (synth->parsed()) {
    return run_experiment(ef.dataset == "block" ? preset_block() : preset_lowrank(), ef, out);
  }
  if (bench->parsed()) {
    bo.sizes = parse_sizes(sizes);
    const auto rows = bench_prox(bo);
    OutputSink sink(bench_output, out);
    write_bench_csv(sink.stream(), rows);
    return kOk;
  }
  err << "error[usage]: no command\n";
  return kUsage;
}

}  // namespace

Vector read_vector(std::istream& in) {
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    for (double v : parse_row(line, lineno)) values.push_back(v);
  }
  if (values.empty()) throw InvalidInput("empty input vector");
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Matrix read_matrix(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto row = parse_row(line, lineno);
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError("row has " + std::to_string(row.size()) + " entries, expected " +
                           std::to_string(rows.front().size()),
                       lineno);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidInput("empty input matrix");
  Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return M;
}

ExperimentSpec parse_config(std::istream& in, ExperimentSpec base) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError(e.message(), e.line());
  }
  bool grids_reset = false;
  bool tolerance_set = false;
  for (const auto& [section, keys] : tree) {
    if (keys.empty()) {
      throw InvalidParams("config key '" + section + "' must be inside a section");
    }
    if (section == "experiment") {
      for (const auto& [key, node] : keys) {
        apply_experiment_key(base, key, node.get_value<std::string>());
        if (key == "tolerance") tolerance_set = true;
      }
      continue;
    }
    // Any regularizer section replaces the preset list.
    if (!grids_reset) {
      base.grids.clear();
      grids_reset = true;
    }
    base.grids.push_back(parse_grid(section, keys));
  }
  const bool real_data =
      base.data.kind == DatasetKind::MovieLens || base.data.kind == DatasetKind::Jester;
  if (real_data && !tolerance_set) base.tolerance = kRealDataTolerance;
  return base;
}

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  try {
    return dispatch(args, in, out, err);
  } catch (const UsageError& e) {
    err << "error[usage]: " << one_line(e.what()) << '\n';
    return kUsage;
  } catch (const DivergenceError& e) {
    err << "error[" << e.code() << "]: " << one_line(e.what()) << '\n';
    return kDivergence;
  } catch (const NumericalError& e) {
    err << "error[" << e.code() << "]: " << one_line(e.what()) << '\n';
    return kInternal;
  } catch (const Error& e) {
    err << "error[" << e.code() << "]: " << one_line(e.what()) << '\n';
    return kData;
  } catch (const std::exception& e) {
    err << "error[internal]: " << one_line(e.what()) << '\n';
    return kInternal;
  }
}

int run(int argc, char** argv, std::istream& in, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, in, out, err);
}

}  // namespace thetanorm::cli
