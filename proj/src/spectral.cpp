#include "thetanorm/spectral.hpp"

#include "thetanorm/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

namespace thetanorm {

namespace {

void check_threshold(double lambda, const char* what) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidParams(std::string(what) + " must be finite and non-negative");
  }
}

std::size_t column_dim(const SpectralOperand& W) {
  return static_cast<std::size_t>(W.cols());
}

}  // namespace

SpectralOperand::SpectralOperand(Matrix matrix) : matrix_(std::move(matrix)) {
  if (!matrix_.allFinite()) {
    throw InvalidInput("matrix contains a non-finite entry");
  }
  const Eigen::Index r = std::min(matrix_.rows(), matrix_.cols());
  if (r == 0) {
    u_.resize(matrix_.rows(), 0);
    v_.resize(matrix_.cols(), 0);
    sigma_.resize(0);
    return;
  }
  Eigen::BDCSVD<Matrix> svd(matrix_, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw NumericalError("SVD failed for a " + std::to_string(matrix_.rows()) + "x" +
                         std::to_string(matrix_.cols()) + " matrix");
  }
  u_ = svd.matrixU();
  v_ = svd.matrixV();
  sigma_ = svd.singularValues();
  for (Eigen::Index j = 0; j < r; ++j) {
    Eigen::Index imax = 0;
    u_.col(j).cwiseAbs().maxCoeff(&imax);
    if (u_(imax, j) < 0.0) {
      u_.col(j) *= -1.0;
      v_.col(j) *= -1.0;
    }
  }
}

Vector SpectralOperand::padded_sigma(Eigen::Index n) const {
  Vector out = Vector::Zero(n);
  const Eigen::Index keep = std::min(n, sigma_.size());
  out.head(keep) = sigma_.head(keep);
  return out;
}

std::size_t SpectralOperand::numerical_rank(double rel_tol) const {
  if (sigma_.size() == 0 || sigma_[0] == 0.0) return 0;
  const double cut = rel_tol * sigma_[0];
  return static_cast<std::size_t>((sigma_.array() > cut).count());
}

Matrix SpectralOperand::rebuild(const Vector& s) const {
  return u_ * s.asDiagonal() * v_.transpose();
}

void ClusterParams::validate(std::size_t m) const {
  if (m < 2) throw InvalidParams("cluster norm requires m >= 2 columns");
  if (!(a > 0.0) || !(a < b) || !std::isfinite(b)) {
    throw InvalidParams("cluster params require 0 < a < b");
  }
  if (k < 1 || k > m - 1) {
    throw InvalidParams("cluster params require 1 <= k <= m-1 (got k=" +
                        std::to_string(k) + ", m=" + std::to_string(m) + ")");
  }
}

BoxParams ClusterParams::box(std::size_t m) const {
  return BoxParams::with_rank(a, b, static_cast<double>(k), m);
}

double spectral_theta_norm(const SpectralOperand& W, const BoxParams& p) {
  const std::size_t m = column_dim(W);
  p.validate(m);
  return theta_norm(W.padded_sigma(W.cols()), p).value;
}

double spectral_ksupport_norm(const SpectralOperand& W, std::size_t k) {
  return ksupport_norm(W.padded_sigma(W.cols()), k);
}

double cluster_norm(const SpectralOperand& W, const ClusterParams& cp) {
  const std::size_t m = column_dim(W);
  cp.validate(m);
  return spectral_theta_norm(W, cp.box(m));
}

SpectralProxResult spectral_prox_detailed(const SpectralOperand& W, double lambda,
                                          const NormParams& p) {
  const Eigen::Index m = W.cols();
  const Eigen::Index r = W.sigma().size();
  const Vector shrunk = prox_sq(ProxRequest{W.padded_sigma(m), lambda, p});
  // Padded entries are zero and stay zero; only the first r carry vectors.
  Vector s = Vector::Zero(r);
  s.head(std::min(r, m)) = shrunk.head(std::min(r, m));
  return {W.rebuild(s), s};
}

Matrix spectral_prox(const SpectralOperand& W, double lambda, const NormParams& p) {
  return spectral_prox_detailed(W, lambda, p).X;
}

SpectralProxResult prox_trace_detailed(const SpectralOperand& W, double lambda) {
  check_threshold(lambda, "trace-norm threshold");
  const Vector s = (W.sigma().array() - lambda).max(0.0).matrix();
  return {W.rebuild(s), s};
}

Matrix prox_trace(const SpectralOperand& W, double lambda) {
  return prox_trace_detailed(W, lambda).X;
}

SpectralProxResult prox_spectral_elastic_net_detailed(const SpectralOperand& W,
                                                      double lambda, double mu) {
  check_threshold(lambda, "elastic-net threshold");
  check_threshold(mu, "elastic-net ridge weight");
  const Vector s = ((W.sigma().array() - lambda).max(0.0) / (1.0 + mu)).matrix();
  return {W.rebuild(s), s};
}

Matrix prox_spectral_elastic_net(const SpectralOperand& W, double lambda, double mu) {
  return prox_spectral_elastic_net_detailed(W, lambda, mu).X;
}

Matrix centering(const Matrix& W) {
  if (W.cols() == 0) return W;
  const Vector mean = W.rowwise().mean();
  return W.colwise() - mean;
}

double centered_cluster_norm(const Matrix& W, const ClusterParams& cp) {
  return cluster_norm(SpectralOperand(centering(W)), cp);
}

}  // namespace thetanorm
