#pragma once

#include <Eigen/Dense>

#include "segstitch/grid.hpp"
#include "segstitch/rng.hpp"

namespace segstitch {

/// RBF kernel parameters: density rho and repulsion length ell, the latter in
/// coarse-cell units.
struct KernelParams {
  double rho = 1.0;
  double ell = 1.0;
};

/// L-ensemble similarity matrix over the coarse grid, flattened row-major
/// (cell (r, c) has index r * coarse_w + c).
class KernelMatrix {
 public:
  KernelMatrix(int grid_rows, int grid_cols, double rho, Eigen::MatrixXd entries);

  int grid_rows() const noexcept { return grid_rows_; }
  int grid_cols() const noexcept { return grid_cols_; }
  int n() const noexcept { return static_cast<int>(entries_.rows()); }
  double rho() const noexcept { return rho_; }
  const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  double operator()(int l, int m) const { return entries_(l, m); }

 private:
  int grid_rows_;
  int grid_cols_;
  double rho_;
  Eigen::MatrixXd entries_;
};

/// S[l, m] = rho * exp(-|r_l - r_m|^2 / (2 ell^2)) with unit-spaced integer
/// coarse coordinates.
KernelMatrix build_rbf_kernel(const GridSpec& grid, const KernelParams& params);

/// Same kernel on an explicit coarse grid shape (used by tests on tiny grids
/// that do not correspond to any native image size).
KernelMatrix build_rbf_kernel(int coarse_rows, int coarse_cols, const KernelParams& params);

/// log det of a symmetric PSD matrix through Cholesky. On factorization
/// failure an additive diagonal jitter of jitter_base (then 10x, 100x) is
/// tried; returns -infinity when all attempts fail. Empty matrix -> 0.
double log_det_psd(const Eigen::MatrixXd& m, double jitter_base);

struct DppLogProb {
  double log_prob;       // log det(S_w) - log det(S + I), -inf if S_w singular
  double log_det_subset; // log det(S_w), 0 for the empty subset
  double log_partition;  // log det(S + I)
};

/// Exact log-probability of a subset under the L-ensemble.
DppLogProb dpp_log_prob(const KernelMatrix& kernel, const BinaryField& subset);

/// log det(S + I).
double dpp_log_partition(const KernelMatrix& kernel);

/// tr(S (S + I)^-1), the expected subset size.
double dpp_expected_cardinality(const KernelMatrix& kernel);

/// One exact draw. Decomposes the kernel on every call; use DppSampler for
/// repeated draws from the same kernel.
BinaryField dpp_sample(const KernelMatrix& kernel, Rng& rng);

/// Exact L-ensemble sampler with a cached eigendecomposition: eigenvector i
/// is kept with probability lambda_i / (1 + lambda_i), then the selected
/// projection DPP is sampled by sequential elimination.
class DppSampler {
 public:
  explicit DppSampler(const KernelMatrix& kernel);

  BinaryField sample(Rng& rng) const;
  const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }

 private:
  int grid_rows_;
  int grid_cols_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
};

/// Monte-Carlo estimate of KL[Bernoulli(p) || DPP(S)] from n_mc i.i.d. fields
/// drawn from p. Unbiased; terms with p in {0, 1} use 0 log 0 = 0.
double grid_kl_mc(const ProbField& p, const KernelMatrix& kernel, int n_mc, Rng& rng);

/// Evaluates the same estimator for a fixed field omega (a single MC term).
double grid_kl_term(const ProbField& p, const KernelMatrix& kernel, const BinaryField& omega);

}  // namespace segstitch
