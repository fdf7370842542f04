#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "segstitch/boxes.hpp"
#include "segstitch/scene.hpp"

namespace segstitch {

/// Normalized loss terms of one evaluation.
struct LossTerms {
  double rec = 0.0;
  double kl_bg = 0.0;
  double kl_fg = 0.0;
  double kl_box = 0.0;
  double kl_grid = 0.0;
  double total_kl = 0.0;
};

/// Exponential moving average used to normalize the grid KL term.
struct NGridState {
  double ema = 0.0;
  double decay = 0.9;
  bool initialized = false;

  /// Returns the state after observing one |grid KL| value. The first
  /// observation initializes the average.
  NGridState updated(double observation) const;
};

struct QValues {
  double density = 0.0;
  double area = 0.0;
  double rec = 0.0;
};

enum class Constraint { rec = 0, density = 1, area = 2 };
inline constexpr std::array<Constraint, 3> kConstraints{Constraint::rec, Constraint::density, Constraint::area};
std::string_view constraint_name(Constraint c);

inline constexpr double kLambdaLo = 0.1;
inline constexpr double kLambdaHi = 10.0;
inline constexpr double kDefaultLambdaStep = 0.1;

struct ConstraintState {
  double lambda = 1.0;
  double lambda_lo = kLambdaLo;
  double lambda_hi = kLambdaHi;
  double q_lo = 0.0;
  double q_hi = 1.0;
  double step = kDefaultLambdaStep;
};

/// Multipliers and bounds for the rec, density and area constraints.
struct SaprState {
  std::array<ConstraintState, 3> constraints{};

  ConstraintState& operator[](Constraint c) { return constraints[static_cast<std::size_t>(c)]; }
  const ConstraintState& operator[](Constraint c) const { return constraints[static_cast<std::size_t>(c)]; }

  /// Throws ParameterError when bounds are inverted or a lambda sits outside its range.
  void validate() const;
};

/// u(Q; Q_lo) = Q * sign(Q - Q_lo).
double sapr_u(double q, double q_lo);
/// v(Q; Q_lo, Q_hi) = min(Q - Q_lo, Q_hi - Q); negative when the constraint is violated.
double sapr_v(double q, double q_lo, double q_hi);

struct SaprStep {
  double loss = 0.0;
  SaprState state;
};

/// loss = kl + sum_beta [lambda_beta u + lambda_beta v], evaluated with the
/// current multipliers. Each multiplier then takes one explicit descent step on
/// the loss with u held fixed: lambda <- clamp(lambda - step * v, lo, hi), so
/// violations (v < 0) raise lambda and satisfied constraints decay it.
SaprStep sapr_step(const QValues& q, const SaprState& state, double kl);

/// (1 / |G_nat|) (1 / 2 sigma^2) sum_p sum_k pi_k(p) |x(p) - y_k(p)|^2 with
/// layers[0] the background and layers[k] instance k.
double recon_loss(const Image& x, const MixingStack& pi, std::span<const Image> layers, double sigma);

/// 0.5 * sum_i (sigma_i^2 + mu_i^2 - 1 - log sigma_i^2).
double gaussian_kl(std::span<const double> mu, std::span<const double> sigma);

struct GaussianPosterior {
  std::vector<double> mu;
  std::vector<double> sigma;
};

inline constexpr int kReferenceLatentDims = 20;

struct LatentDims {
  int d_bg = kReferenceLatentDims;
  int d_fg = kReferenceLatentDims;
};

struct KlTotal {
  LossTerms terms;
  NGridState state;
};

/// Applies the per-term prefactors 1/D_bg, 1/(D_fg K), 1/(4 K) and 1/N_grid,
/// where K = fg.size() = box.size() and N_grid is the EMA of |grid_kl| after
/// this observation. K = 0 zeroes the fg and box terms.
KlTotal kl_total(const GaussianPosterior& bg, std::span<const GaussianPosterior> fg,
                 std::span<const GaussianPosterior> box, double grid_kl_value, const LatentDims& dims,
                 const NGridState& state);

/// density = mean of c; area = (sum_k A_mask + sum_k A_box) / (2 |G_nat|) with
/// A_mask = sum_p pi_k(p) and A_box = w * h; rec passes through.
QValues q_values(const BinaryField& c, const MixingStack& pi, std::span<const BoundingBox> boxes,
                 const GridSpec& grid, double rec);

/// lambda * sum_p sum_{k != k'} w_k(p) w_k'(p), ordered pairs.
double overlap_penalty(std::span<const Array2D<double>> weights, double lambda_overlap);

inline constexpr double kWarmupFraction = 0.4;

/// Ranks proposals by the mean residual inside their (integer-clipped) boxes,
/// rank 1 = smallest mean, |G_obj| = largest, ties to the lower index, and
/// returns (1 - f) p + f rank / |G_obj|.
ProbField warmup_blend(const ProbField& p, const Array2D<double>& residual, std::span<const BoundingBox> boxes,
                       double f);
ProbField warmup_blend(const ProbField& p, const Array2D<double>& residual, const ProposalSet& proposals, double f);

/// Pixel-wise squared residual |x - y_0|^2.
Array2D<double> background_residual(const Image& x, const Image& background);

struct SigmaEstimate {
  enum class Method { gaussian_mixture, otsu };
  double sigma = 0.0;
  Method method = Method::gaussian_mixture;
  double foreground_mean = 0.0;
  double background_mean = 0.0;
};

/// Fits a two-component 1-D Gaussian mixture by EM to the pixel intensities
/// and returns the standard deviation of the brighter component. A collapsed
/// fit falls back to an Otsu split. Throws ParameterError on a constant image.
SigmaEstimate estimate_sigma(const Image& image);

}  // namespace segstitch
