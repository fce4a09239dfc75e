#include "thetanorm/errors.hpp"
#include "thetanorm/experiments.hpp"

#include <cmath>

namespace thetanorm {

double metric_relative_error(const Matrix& truth, const Matrix& prediction) {
  if (truth.rows() != prediction.rows() || truth.cols() != prediction.cols()) {
    throw InvalidInput("truth and prediction shapes differ");
  }
  const double denom = truth.squaredNorm();
  if (denom == 0.0) throw UndefinedMetric("relative error of a zero truth matrix");
  return (truth - prediction).squaredNorm() / denom;
}

double metric_relative_error(const ObservationSet& scope, const Matrix& prediction) {
  double num = 0.0;
  double denom = 0.0;
  for (const auto& e : scope.entries) {
    const double p = prediction(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col));
    num += (e.value - p) * (e.value - p);
    denom += e.value * e.value;
  }
  if (denom == 0.0) throw UndefinedMetric("relative error over an empty or zero scope");
  return num / denom;
}

double metric_nmae(const ObservationSet& scope, const Matrix& prediction, double r_min,
                   double r_max, bool literal) {
  if (!(r_max > r_min)) throw InvalidParams("NMAE requires r_max > r_min");
  if (scope.entries.empty()) throw UndefinedMetric("NMAE over an empty test set");
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  for (const auto& e : scope.entries) {
    const double diff =
        e.value - prediction(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col));
    abs_sum += std::abs(diff);
    sq_sum += diff * diff;
  }
  const auto n = static_cast<double>(scope.entries.size());
  if (literal) return sq_sum / (n / (r_max - r_min));
  return abs_sum / n / (r_max - r_min);
}

double metric_task_rmse(const std::vector<Matrix>& designs, const std::vector<Vector>& targets,
                        const Matrix& W) {
  double total = 0.0;
  std::size_t tasks = 0;
  for (std::size_t t = 0; t < designs.size(); ++t) {
    if (designs[t].rows() == 0) continue;
    const Vector r = designs[t] * W.col(static_cast<Eigen::Index>(t)) - targets[t];
    total += std::sqrt(r.squaredNorm() / static_cast<double>(r.size()));
    ++tasks;
  }
  if (tasks == 0) throw UndefinedMetric("task RMSE with no evaluation samples");
  return total / static_cast<double>(tasks);
}

}  // namespace thetanorm
