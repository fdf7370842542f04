#include "segstitch/dpp.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace segstitch {

namespace {

constexpr double kJitterScale = 1e-10;
constexpr int kJitterRetries = 3;

void check_same_grid(const KernelMatrix& kernel, int rows, int cols, const char* what) {
  if (rows != kernel.grid_rows() || cols != kernel.grid_cols()) {
    std::ostringstream os;
    os << what << ": field is " << rows << "x" << cols << " but kernel grid is "
       << kernel.grid_rows() << "x" << kernel.grid_cols();
    throw DimensionError(os.str());
  }
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& s, const std::vector<int>& idx) {
  const auto k = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd out(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) out(a, b) = s(idx[a], idx[b]);
  return out;
}

std::vector<int> selected(const BinaryField& f) {
  std::vector<int> idx;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f[i] != 0) idx.push_back(static_cast<int>(i));
  return idx;
}

double log_partition_of(const KernelMatrix& kernel) {
  const Eigen::MatrixXd shifted =
      kernel.entries() + Eigen::MatrixXd::Identity(kernel.n(), kernel.n());
  const double v = log_det_psd(shifted, kJitterScale * kernel.rho());
  if (!std::isfinite(v)) throw NumericalError("dpp: S + I is not positive definite");
  return v;
}

}  // namespace

KernelMatrix::KernelMatrix(int grid_rows, int grid_cols, double rho, Eigen::MatrixXd entries)
    : grid_rows_(grid_rows), grid_cols_(grid_cols), rho_(rho), entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() != grid_rows * grid_cols)
    throw DimensionError("KernelMatrix: entries must be (rows*cols) square");
}

KernelMatrix build_rbf_kernel(int coarse_rows, int coarse_cols, const KernelParams& params) {
  if (!(params.rho > 0.0)) throw ParameterError("build_rbf_kernel: rho must be positive");
  if (!(params.ell > 0.0)) throw ParameterError("build_rbf_kernel: ell must be positive");
  if (coarse_rows <= 0 || coarse_cols <= 0) throw DimensionError("build_rbf_kernel: empty grid");

  const int n = coarse_rows * coarse_cols;
  const double inv_two_ell2 = 1.0 / (2.0 * params.ell * params.ell);
  Eigen::MatrixXd s(n, n);
  for (int l = 0; l < n; ++l) {
    const int rl = l / coarse_cols;
    const int cl = l % coarse_cols;
    s(l, l) = params.rho;
    for (int m = l + 1; m < n; ++m) {
      const double dr = rl - m / coarse_cols;
      const double dc = cl - m % coarse_cols;
      // exp underflows to exactly 0 as ell -> 0+, giving a diagonal kernel.
      const double v = params.rho * std::exp(-(dr * dr + dc * dc) * inv_two_ell2);
      s(l, m) = v;
      s(m, l) = v;
    }
  }
  return KernelMatrix(coarse_rows, coarse_cols, params.rho, std::move(s));
}

KernelMatrix build_rbf_kernel(const GridSpec& grid, const KernelParams& params) {
  return build_rbf_kernel(grid.coarse_h(), grid.coarse_w(), params);
}

double log_det_psd(const Eigen::MatrixXd& m, double jitter_base) {
  if (m.rows() == 0) return 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  double jitter = jitter_base;
  for (int attempt = 0; attempt <= kJitterRetries; ++attempt) {
    if (attempt > 0) {
      Eigen::MatrixXd j = m;
      j.diagonal().array() += jitter;
      llt.compute(j);
      jitter *= 10.0;
    }
    if (llt.info() == Eigen::Success) {
      const auto diag = llt.matrixLLT().diagonal();
      if ((diag.array() > 0.0).all()) return 2.0 * diag.array().log().sum();
    }
  }
  return -std::numeric_limits<double>::infinity();
}

double dpp_log_partition(const KernelMatrix& kernel) { return log_partition_of(kernel); }

DppLogProb dpp_log_prob(const KernelMatrix& kernel, const BinaryField& subset) {
  check_same_grid(kernel, subset.rows(), subset.cols(), "dpp_log_prob");
  const double log_z = log_partition_of(kernel);
  const auto idx = selected(subset);
  const double log_det_w =
      idx.empty() ? 0.0 : log_det_psd(submatrix(kernel.entries(), idx), kJitterScale * kernel.rho());
  return {log_det_w - log_z, log_det_w, log_z};
}

double dpp_expected_cardinality(const KernelMatrix& kernel) {
  const int n = kernel.n();
  const Eigen::MatrixXd shifted = kernel.entries() + Eigen::MatrixXd::Identity(n, n);
  Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  if (llt.info() != Eigen::Success)
    throw NumericalError("dpp_expected_cardinality: S + I is not positive definite");
  // tr(S (S+I)^-1) = n - tr((S+I)^-1)
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  return static_cast<double>(n) - inv.trace();
}

DppSampler::DppSampler(const KernelMatrix& kernel)
    : grid_rows_(kernel.grid_rows()), grid_cols_(kernel.grid_cols()) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(kernel.entries());
  if (eig.info() != Eigen::Success) {
    const auto& s = kernel.entries();
    std::ostringstream os;
    os << "DppSampler: eigendecomposition failed (n=" << s.rows() << ", rho=" << kernel.rho()
       << ", min diag=" << s.diagonal().minCoeff()
       << ", asymmetry=" << (s - s.transpose()).cwiseAbs().maxCoeff() << ")";
    throw NumericalError(os.str());
  }
  eigenvalues_ = eig.eigenvalues();
  eigenvectors_ = eig.eigenvectors();
}

BinaryField DppSampler::sample(Rng& rng) const {
  const auto n = eigenvectors_.rows();
  BinaryField out(grid_rows_, grid_cols_);

  std::vector<Eigen::Index> chosen;
  for (Eigen::Index i = 0; i < eigenvalues_.size(); ++i) {
    const double lambda = std::max(0.0, eigenvalues_(i));
    if (uniform01(rng) < lambda / (1.0 + lambda)) chosen.push_back(i);
  }
  if (chosen.empty()) return out;

  Eigen::MatrixXd v(n, static_cast<Eigen::Index>(chosen.size()));
  for (std::size_t j = 0; j < chosen.size(); ++j) v.col(static_cast<Eigen::Index>(j)) = eigenvectors_.col(chosen[j]);

  Eigen::VectorXd weights(n);
  while (v.cols() > 0) {
    const auto k = v.cols();
    // P(item i) = (1/k) * sum_j V(i, j)^2
    weights = v.rowwise().squaredNorm();
    const double total = weights.sum();
    double u = uniform01(rng) * total;
    Eigen::Index item = n - 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      u -= weights(i);
      if (u < 0.0) {
        item = i;
        break;
      }
    }
    // Guard against landing on a zero-weight row through rounding.
    while (weights(item) <= 0.0 && item > 0) --item;
    out[static_cast<std::size_t>(item)] = 1;
    if (k == 1) break;

    // Eliminate: pick the column with the largest |V(item, j)|, subtract it
    // from the others so that row `item` becomes zero, drop it, re-orthonormalize.
    Eigen::Index pivot = 0;
    v.row(item).cwiseAbs().maxCoeff(&pivot);
    const Eigen::VectorXd pivot_col = v.col(pivot);
    const double pivot_val = pivot_col(item);
    Eigen::MatrixXd next(n, k - 1);
    for (Eigen::Index j = 0, t = 0; j < k; ++j) {
      if (j == pivot) continue;
      next.col(t++) = v.col(j) - pivot_col * (v(item, j) / pivot_val);
    }
    // Modified Gram-Schmidt.
    for (Eigen::Index j = 0; j < next.cols(); ++j) {
      for (Eigen::Index i = 0; i < j; ++i) next.col(j) -= next.col(i).dot(next.col(j)) * next.col(i);
      const double norm = next.col(j).norm();
      if (norm > 0.0) next.col(j) /= norm;
    }
    v = std::move(next);
  }
  return out;
}

BinaryField dpp_sample(const KernelMatrix& kernel, Rng& rng) { return DppSampler(kernel).sample(rng); }

double grid_kl_term(const ProbField& p, const KernelMatrix& kernel, const BinaryField& omega) {
  check_same_grid(kernel, p.rows(), p.cols(), "grid_kl_term");
  check_same_grid(kernel, omega.rows(), omega.cols(), "grid_kl_term");
  double cross = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = p[i];
    if (std::isnan(pi)) throw ParameterError("grid_kl_mc: NaN in probability field");
    if (omega[i] != 0) {
      if (pi > 0.0) cross += std::log(pi);
    } else {
      if (pi < 1.0) cross += std::log1p(-pi);
    }
  }
  const auto lp = dpp_log_prob(kernel, omega);
  return cross - lp.log_det_subset + lp.log_partition;
}

double grid_kl_mc(const ProbField& p, const KernelMatrix& kernel, int n_mc, Rng& rng) {
  if (n_mc < 1) throw ParameterError("grid_kl_mc: n_mc must be >= 1");
  check_same_grid(kernel, p.rows(), p.cols(), "grid_kl_mc");
  p.validate();

  const double log_z = log_partition_of(kernel);
  double cross_sum = 0.0;
  double logdet_sum = 0.0;
  BinaryField omega(p.rows(), p.cols());
  std::vector<int> idx;
  for (int s = 0; s < n_mc; ++s) {
    idx.clear();
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double pi = p[i];
      const bool on = uniform01(rng) < pi;
      omega[i] = on ? 1 : 0;
      if (on) {
        idx.push_back(static_cast<int>(i));
        cross_sum += std::log(pi);  // pi > 0 here since u < pi
      } else if (pi < 1.0) {
        cross_sum += std::log1p(-pi);
      }
    }
    if (!idx.empty())
      logdet_sum += log_det_psd(submatrix(kernel.entries(), idx), kJitterScale * kernel.rho());
  }
  const double est = cross_sum / n_mc - logdet_sum / n_mc + log_z;
  if (std::isnan(est)) throw NumericalError("grid_kl_mc: estimate is NaN");
  return est;
}

}  // namespace segstitch
