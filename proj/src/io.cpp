#include "thetanorm/errors.hpp"
#include "thetanorm/experiments.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace thetanorm {

namespace {

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  return in;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& raw, std::size_t line, const char* what) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
    throw ParseError(std::string("bad ") + what + " '" + s + "'", line);
  }
  return v;
}

long long parse_int(const std::string& raw, std::size_t line, const char* what) {
  const std::string s = trim(raw);
  long long v = 0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != end) {
    throw ParseError(std::string("bad ") + what + " '" + s + "'", line);
  }
  return v;
}

void write_value(std::ostream& out, double v) {
  out << std::setprecision(17) << v;
}

}  // namespace

ObservationSet read_movielens(std::istream& in, std::size_t rows, std::size_t cols) {
  ObservationSet obs;
  std::string line;
  std::size_t lineno = 0;
  std::size_t max_user = 0;
  std::size_t max_item = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split(line, '\t');
    if (f.size() != 4) {
      throw ParseError("expected 4 tab-separated fields, got " + std::to_string(f.size()),
                       lineno);
    }
    const long long user = parse_int(f[0], lineno, "user id");
    const long long item = parse_int(f[1], lineno, "item id");
    const double rating = parse_double(f[2], lineno, "rating");
    parse_int(f[3], lineno, "timestamp");
    if (user < 1 || item < 1) throw ParseError("ids are 1-based", lineno);
    if (rating < 1.0 || rating > 5.0) {
      throw ValidationError("line " + std::to_string(lineno) + ": rating " +
                            std::to_string(rating) + " outside [1, 5]");
    }
    const auto u = static_cast<std::size_t>(user - 1);
    const auto i = static_cast<std::size_t>(item - 1);
    max_user = std::max(max_user, u + 1);
    max_item = std::max(max_item, i + 1);
    obs.entries.push_back({u, i, rating, Split::Train});
  }
  obs.rows = rows ? rows : max_user;
  obs.cols = cols ? cols : max_item;
  obs.validate();
  return obs;
}

ObservationSet load_movielens(const std::string& path) {
  auto in = open_or_throw(path);
  return read_movielens(in);
}

void write_movielens(std::ostream& out, const ObservationSet& obs) {
  for (const auto& e : obs.entries) {
    out << e.row + 1 << '\t' << e.col + 1 << '\t';
    write_value(out, e.value);
    out << "\t0\n";
  }
}

ObservationSet read_jester(std::istream& in, std::size_t width) {
  ObservationSet obs;
  obs.cols = width;
  std::string line;
  std::size_t lineno = 0;
  std::size_t user = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " columns, got " +
                           std::to_string(f.size()),
                       lineno);
    }
    for (std::size_t j = 0; j < width; ++j) {
      const double v = parse_double(f[j], lineno, "rating");
      if (v == kJesterMissing) continue;
      if (v < -10.0 || v > 10.0) {
        throw ValidationError("line " + std::to_string(lineno) + ": rating " +
                              std::to_string(v) + " outside [-10, 10]");
      }
      obs.entries.push_back({user, j, v, Split::Train});
    }
    ++user;
  }
  obs.rows = user;
  return obs;
}

ObservationSet load_jester(const std::string& path, std::size_t width) {
  auto in = open_or_throw(path);
  return read_jester(in, width);
}

void write_jester(std::ostream& out, const ObservationSet& obs) {
  std::vector<std::vector<double>> dense(obs.rows,
                                         std::vector<double>(obs.cols, kJesterMissing));
  for (const auto& e : obs.entries) dense[e.row][e.col] = e.value;
  for (const auto& row : dense) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      write_value(out, row[j]);
    }
    out << '\n';
  }
}

MultitaskData read_multitask_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::size_t features = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto header = split(line, ',');
    if (header.size() < 3 || trim(header[0]) != "task" || trim(header[1]) != "y") {
      throw ParseError("header must be task,y,f1,...", lineno);
    }
    features = header.size() - 2;
    break;
  }
  if (features == 0) throw ParseError("missing header", lineno);

  std::map<long long, std::size_t> task_index;
  std::vector<std::vector<std::vector<double>>> rows;
  std::vector<std::vector<double>> ys;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != features + 2) {
      throw ParseError("expected " + std::to_string(features + 2) + " fields", lineno);
    }
    const long long task = parse_int(f[0], lineno, "task id");
    auto [it, inserted] = task_index.emplace(task, rows.size());
    if (inserted) {
      rows.emplace_back();
      ys.emplace_back();
    }
    ys[it->second].push_back(parse_double(f[1], lineno, "target"));
    std::vector<double> x(features);
    for (std::size_t j = 0; j < features; ++j) x[j] = parse_double(f[j + 2], lineno, "feature");
    rows[it->second].push_back(std::move(x));
  }

  MultitaskData out;
  const auto p = static_cast<Eigen::Index>(features + 1);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const auto n = static_cast<Eigen::Index>(rows[t].size());
    Matrix X(n, p);
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j + 1 < p; ++j) {
        X(i, j) = rows[t][static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      }
      X(i, p - 1) = 1.0;
      y[i] = ys[t][static_cast<std::size_t>(i)];
    }
    out.designs.push_back(std::move(X));
    out.targets.push_back(std::move(y));
  }
  return out;
}

MultitaskData load_multitask_csv(const std::string& path) {
  auto in = open_or_throw(path);
  return read_multitask_csv(in);
}

}  // namespace thetanorm
