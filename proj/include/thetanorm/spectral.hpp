#pragma once

#include "thetanorm/core_norms.hpp"
#include "thetanorm/prox.hpp"

#include <Eigen/Core>

#include <cstddef>

namespace thetanorm {

using Matrix = Eigen::MatrixXd;

/// Dense d×m matrix with its thin SVD computed once at construction.
/// Singular values are non-increasing; each left singular vector is signed
/// so that its largest-magnitude entry is positive.
class SpectralOperand {
 public:
  explicit SpectralOperand(Matrix matrix);

  const Matrix& matrix() const { return matrix_; }
  const Matrix& U() const { return u_; }
  const Vector& sigma() const { return sigma_; }
  const Matrix& V() const { return v_; }

  Eigen::Index rows() const { return matrix_.rows(); }
  Eigen::Index cols() const { return matrix_.cols(); }

  /// σ zero-padded (or truncated) to length n.
  Vector padded_sigma(Eigen::Index n) const;

  /// Count of singular values above rel_tol·σ_max.
  std::size_t numerical_rank(double rel_tol = 1e-10) const;

  /// U·diag(s)·Vᵀ for a replacement spectrum of length r = min(d, m).
  Matrix rebuild(const Vector& s) const;

 private:
  Matrix matrix_;
  Matrix u_;
  Vector sigma_;
  Matrix v_;
};

/// Cluster-norm parameters; the induced budget is c = (b - a)·k + m·a.
struct ClusterParams {
  double a = 0.0;
  double b = 1.0;
  std::size_t k = 1;

  void validate(std::size_t m) const;
  BoxParams box(std::size_t m) const;
};

/// Box Θ-norm of σ(W) zero-padded to the column dimension m.
double spectral_theta_norm(const SpectralOperand& W, const BoxParams& p);
double spectral_ksupport_norm(const SpectralOperand& W, std::size_t k);
double cluster_norm(const SpectralOperand& W, const ClusterParams& cp);

/// Matrix prox together with the singular values of the result.
struct SpectralProxResult {
  Matrix X;
  Vector sigma;
};

/// U·diag(prox of (λ/2)‖·‖² on padded σ)·Vᵀ.
Matrix spectral_prox(const SpectralOperand& W, double lambda, const NormParams& p);
SpectralProxResult spectral_prox_detailed(const SpectralOperand& W, double lambda,
                                          const NormParams& p);

/// Singular-value soft thresholding.
Matrix prox_trace(const SpectralOperand& W, double lambda);
SpectralProxResult prox_trace_detailed(const SpectralOperand& W, double lambda);

/// Soft threshold at λ, then shrink by 1/(1 + μ).
Matrix prox_spectral_elastic_net(const SpectralOperand& W, double lambda, double mu);
SpectralProxResult prox_spectral_elastic_net_detailed(const SpectralOperand& W,
                                                      double lambda, double mu);

/// W·(I - 11ᵀ/m): subtracts the column mean from every column.
Matrix centering(const Matrix& W);

double centered_cluster_norm(const Matrix& W, const ClusterParams& cp);

}  // namespace thetanorm
