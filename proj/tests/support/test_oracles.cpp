#include "test_oracles.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace thetanorm::reference {

double prox_objective_oracle(const Vector& w, double lambda, const BoxParams& p) {
  const auto d = static_cast<std::size_t>(w.size());
  std::size_t patterns = 1;
  for (std::size_t i = 0; i < d; ++i) patterns *= 3;

  std::vector<int> state(d, 0);  // 0: at a, 1: at b, 2: free
  double best = std::numeric_limits<double>::infinity();
  const double feas_tol = 1e-12 * (1.0 + std::abs(p.c));

  for (std::size_t code = 0; code < patterns; ++code) {
    std::size_t rest = code;
    double fixed_sum = 0.0;
    double free_mass = 0.0;
    std::size_t free_count = 0;
    for (std::size_t i = 0; i < d; ++i) {
      state[i] = static_cast<int>(rest % 3);
      rest /= 3;
      if (state[i] == 0) fixed_sum += p.a;
      if (state[i] == 1) fixed_sum += p.b;
      if (state[i] == 2) {
        free_mass += std::abs(w[static_cast<Eigen::Index>(i)]);
        ++free_count;
      }
    }

    double scale = 0.0;  // free θ_i = |w_i| / scale - λ
    if (free_count == 0) {
      if (fixed_sum > p.c + feas_tol) continue;
    } else {
      const double budget = p.c - fixed_sum + lambda * static_cast<double>(free_count);
      if (!(free_mass > 0.0) || !(budget > 0.0)) continue;
      scale = free_mass / budget;
    }

    double value = 0.0;
    bool feasible = true;
    for (std::size_t i = 0; i < d && feasible; ++i) {
      const double wi = w[static_cast<Eigen::Index>(i)];
      double theta = state[i] == 0 ? p.a : p.b;
      if (state[i] == 2) {
        theta = std::abs(wi) / scale - lambda;
        const double tol = 1e-12 * (1.0 + p.b);
        if (theta < p.a - tol || theta > p.b + tol) feasible = false;
        theta = std::clamp(theta, p.a, p.b);
      }
      value += 0.5 * lambda * wi * wi / (theta + lambda);
    }
    if (feasible) best = std::min(best, value);
  }
  return best;
}

double prox_objective(const Vector& x, const Vector& w, double lambda, const BoxParams& p) {
  const double n = theta_norm(x, p).value;
  return 0.5 * (x - w).squaredNorm() + 0.5 * lambda * n * n;
}

namespace {

double cluster_objective(const Matrix& W, double phi, double theta1, double theta2) {
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  Eigen::Vector2d r1(c, s);
  Eigen::Vector2d r2(-s, c);
  return (W * r1).squaredNorm() / theta1 + (W * r2).squaredNorm() / theta2;
}

}  // namespace

double cluster_norm_2col_oracle(const Matrix& W, const ClusterParams& cp) {
  const BoxParams box = cp.box(2);
  const double t_lo = box.a;
  const double t_hi = std::min(box.b, box.c - box.a);
  auto second = [&](double t1) { return std::min(box.b, box.c - t1); };
  auto eval = [&](double phi, double t1) {
    t1 = std::clamp(t1, t_lo, t_hi);
    return cluster_objective(W, phi, t1, second(t1));
  };

  const double pi = std::numbers::pi;
  double best = std::numeric_limits<double>::infinity();
  double best_phi = 0.0;
  double best_t = t_lo;
  const int coarse = 400;
  for (int i = 0; i < coarse; ++i) {
    const double phi = pi * i / coarse;
    for (int j = 0; j <= coarse; ++j) {
      const double t1 = t_lo + (t_hi - t_lo) * j / coarse;
      const double v = eval(phi, t1);
      if (v < best) {
        best = v;
        best_phi = phi;
        best_t = t1;
      }
    }
  }

  double span_phi = pi / coarse;
  double span_t = (t_hi - t_lo) / coarse;
  for (int round = 0; round < 100; ++round) {
    const int n = 10;
    double round_phi = best_phi;
    double round_t = best_t;
    for (int i = -n; i <= n; ++i) {
      const double phi = best_phi + span_phi * i / n;
      for (int j = -n; j <= n; ++j) {
        const double t1 = std::clamp(best_t + span_t * j / n, t_lo, t_hi);
        const double v = eval(phi, t1);
        if (v < best) {
          best = v;
          round_phi = phi;
          round_t = t1;
        }
      }
    }
    best_phi = round_phi;
    best_t = round_t;
    span_phi *= 0.6;
    span_t *= 0.6;
  }
  return std::sqrt(best);
}

Matrix ista_reference(const SmoothLoss& loss, const Regularizer& reg, double tolerance,
                      std::size_t max_iterations) {
  const double step = 1.0 / loss.lipschitz();
  auto prox = [&](const Matrix& Y) -> Matrix {
    if (reg.kind != RegularizerKind::Trace) return reg.prox(Y, step).X;
    Eigen::JacobiSVD<Matrix> svd(Y, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector s = (svd.singularValues().array() - step * reg.lambda).max(0.0).matrix();
    return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
  };
  auto objective = [&](const Matrix& X) {
    if (reg.kind != RegularizerKind::Trace) return loss.value(X) + reg.value(X);
    Eigen::JacobiSVD<Matrix> svd(X);
    return loss.value(X) + reg.lambda * svd.singularValues().sum();
  };

  Matrix X = Matrix::Zero(loss.rows(), loss.cols());
  double previous = objective(X);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    X = prox(X - step * loss.evaluate(X).gradient);
    const double current = objective(X);
    if (std::abs(previous - current) <= tolerance * std::abs(previous)) break;
    previous = current;
  }
  return X;
}

Matrix numeric_gradient(const SmoothLoss& loss, const Matrix& W, double h) {
  Matrix G(W.rows(), W.cols());
  Matrix probe = W;
  for (Eigen::Index j = 0; j < W.cols(); ++j) {
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
      probe(i, j) = W(i, j) + h;
      const double up = loss.value(probe);
      probe(i, j) = W(i, j) - h;
      const double down = loss.value(probe);
      probe(i, j) = W(i, j);
      G(i, j) = (up - down) / (2.0 * h);
    }
  }
  return G;
}

Matrix random_gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix M(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = normal(rng);
  }
  return M;
}

Vector random_gaussian(Eigen::Index n, std::mt19937_64& rng) {
  return random_gaussian(n, 1, rng).col(0);
}

Matrix random_orthogonal(Eigen::Index n, std::mt19937_64& rng) {
  const Eigen::HouseholderQR<Matrix> qr(random_gaussian(n, n, rng));
  Matrix Q = qr.householderQ();
  const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (R(i, i) < 0) Q.col(i) *= -1.0;
  }
  return Q;
}

BoxParams random_box(std::size_t d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  BoxParams p;
  p.a = 0.01 + 0.5 * unit(rng);
  p.b = p.a + 0.1 + 2.0 * unit(rng);
  const double dd = static_cast<double>(d);
  p.c = dd * p.a + unit(rng) * dd * (p.b - p.a);
  return p;
}

double relative_difference(double x, double y) {
  const double scale = std::max({std::abs(x), std::abs(y), std::numeric_limits<double>::min()});
  return std::abs(x - y) / scale;
}

}  // namespace thetanorm::reference
