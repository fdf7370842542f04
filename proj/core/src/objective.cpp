#include "segstitch/objective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace segstitch {

NGridState NGridState::updated(double observation) const {
  NGridState next = *this;
  const double v = std::abs(observation);
  if (!initialized) {
    next.ema = v;
    next.initialized = true;
  } else {
    next.ema = decay * ema + (1.0 - decay) * v;
  }
  return next;
}

double recon_loss(const Image& x, const MixingStack& pi, std::span<const Image> layers, double sigma) {
  if (!(sigma > 0.0)) throw ParameterError("recon_loss: sigma must be positive");
  if (static_cast<int>(layers.size()) != pi.instances() + 1)
    throw DimensionError("recon_loss: need one layer per mixing plane (background first)");
  if (x.height() != pi.height() || x.width() != pi.width())
    throw DimensionError("recon_loss: image and stack differ in shape");
  for (const auto& l : layers)
    if (!l.same_shape(x)) throw DimensionError("recon_loss: layer shape mismatch");

  double total = 0.0;
  for (int k = 0; k <= pi.instances(); ++k) {
    const auto& y = layers[static_cast<std::size_t>(k)];
    for (int r = 0; r < x.height(); ++r)
      for (int c = 0; c < x.width(); ++c) {
        double d2 = 0.0;
        for (int ch = 0; ch < x.channels(); ++ch) {
          const double d = x(r, c, ch) - y(r, c, ch);
          d2 += d * d;
        }
        total += pi.at(k, r, c) * d2;
      }
  }
  const double n = static_cast<double>(x.height()) * x.width();
  return total / (n * 2.0 * sigma * sigma);
}

double gaussian_kl(std::span<const double> mu, std::span<const double> sigma) {
  if (mu.size() != sigma.size()) throw DimensionError("gaussian_kl: mu and sigma differ in length");
  double acc = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double s = sigma[i];
    if (!(s > 0.0)) throw ParameterError("gaussian_kl: sigma must be positive");
    const double s2 = s * s;
    acc += s2 + mu[i] * mu[i] - 1.0 - std::log(s2);
  }
  return 0.5 * acc;
}

KlTotal kl_total(const GaussianPosterior& bg, std::span<const GaussianPosterior> fg,
                 std::span<const GaussianPosterior> box, double grid_kl_value, const LatentDims& dims,
                 const NGridState& state) {
  if (fg.size() != box.size()) throw DimensionError("kl_total: fg and box lists must both have K entries");
  if (dims.d_bg <= 0 || dims.d_fg <= 0) throw ParameterError("kl_total: latent dims must be positive");
  if (static_cast<int>(bg.mu.size()) != dims.d_bg) throw DimensionError("kl_total: background posterior has wrong dim");
  if (!std::isfinite(grid_kl_value)) throw ParameterError("kl_total: grid KL must be finite");

  KlTotal out;
  out.terms.kl_bg = gaussian_kl(bg.mu, bg.sigma) / dims.d_bg;

  const auto k_hat = static_cast<double>(fg.size());
  if (!fg.empty()) {
    double fg_sum = 0.0;
    double box_sum = 0.0;
    for (const auto& z : fg) {
      if (static_cast<int>(z.mu.size()) != dims.d_fg) throw DimensionError("kl_total: foreground posterior has wrong dim");
      fg_sum += gaussian_kl(z.mu, z.sigma);
    }
    for (const auto& v : box) {
      if (v.mu.size() != 4) throw DimensionError("kl_total: box posterior must be 4-dimensional");
      box_sum += gaussian_kl(v.mu, v.sigma);
    }
    out.terms.kl_fg = fg_sum / (dims.d_fg * k_hat);
    out.terms.kl_box = box_sum / (4.0 * k_hat);
  }

  out.state = state.updated(grid_kl_value);
  out.terms.kl_grid = out.state.ema > 0.0 ? grid_kl_value / out.state.ema : 0.0;
  out.terms.total_kl = out.terms.kl_bg + out.terms.kl_fg + out.terms.kl_box + out.terms.kl_grid;
  return out;
}

QValues q_values(const BinaryField& c, const MixingStack& pi, std::span<const BoundingBox> boxes,
                 const GridSpec& grid, double rec) {
  if (c.rows() != grid.coarse_h() || c.cols() != grid.coarse_w())
    throw DimensionError("q_values: presence field does not match the coarse grid");
  if (pi.height() != grid.height_px() || pi.width() != grid.width_px())
    throw DimensionError("q_values: mixing stack does not match the native grid");
  if (static_cast<int>(boxes.size()) != pi.instances())
    throw DimensionError("q_values: need one box per instance plane");

  QValues q;
  q.density = static_cast<double>(c.cardinality()) / static_cast<double>(c.size());
  double mask_area = 0.0;
  for (int k = 1; k <= pi.instances(); ++k) {
    const auto plane = pi.plane(k);
    mask_area += std::accumulate(plane.begin(), plane.end(), 0.0);
  }
  double box_area = 0.0;
  for (const auto& b : boxes) box_area += b.w * b.h;
  const double n = static_cast<double>(grid.native_size());
  q.area = mask_area / (2.0 * n) + box_area / (2.0 * n);
  q.rec = rec;
  return q;
}

double overlap_penalty(std::span<const Array2D<double>> weights, double lambda_overlap) {
  if (!(lambda_overlap >= 0.0)) throw ParameterError("overlap_penalty: lambda must be >= 0");
  if (weights.empty()) return 0.0;
  const auto n = weights.front().size();
  for (const auto& w : weights)
    if (!w.same_shape(weights.front())) throw DimensionError("overlap_penalty: weight planes differ in shape");
  // sum_{k != k'} w_k w_k' = (sum_k w_k)^2 - sum_k w_k^2
  double total = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    double s = 0.0;
    double s2 = 0.0;
    for (const auto& w : weights) {
      s += w[p];
      s2 += w[p] * w[p];
    }
    total += std::max(0.0, s * s - s2);
  }
  return lambda_overlap * total;
}

Array2D<double> background_residual(const Image& x, const Image& background) {
  if (!x.same_shape(background)) throw DimensionError("background_residual: shape mismatch");
  Array2D<double> d(x.height(), x.width(), 0.0);
  for (int r = 0; r < x.height(); ++r)
    for (int c = 0; c < x.width(); ++c)
      for (int ch = 0; ch < x.channels(); ++ch) {
        const double v = x(r, c, ch) - background(r, c, ch);
        d(r, c) += v * v;
      }
  return d;
}

ProbField warmup_blend(const ProbField& p, const Array2D<double>& residual, std::span<const BoundingBox> boxes,
                       double f) {
  if (!(f >= 0.0 && f <= 1.0)) throw ParameterError("warmup_blend: f must lie in [0, 1]");
  if (boxes.size() != p.size()) throw DimensionError("warmup_blend: need one box per coarse cell");
  if (f == 0.0) return p;

  const std::size_t n = p.size();
  std::vector<double> mean(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& b = boxes[i];
    const int r0 = std::clamp(static_cast<int>(std::floor(b.y0())), 0, residual.rows());
    const int r1 = std::clamp(static_cast<int>(std::ceil(b.y1())), 0, residual.rows());
    const int c0 = std::clamp(static_cast<int>(std::floor(b.x0())), 0, residual.cols());
    const int c1 = std::clamp(static_cast<int>(std::ceil(b.x1())), 0, residual.cols());
    double acc = 0.0;
    int count = 0;
    for (int r = r0; r < r1; ++r)
      for (int c = c0; c < c1; ++c) {
        acc += residual(r, c);
        ++count;
      }
    mean[i] = count > 0 ? acc / count : 0.0;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mean[a] < mean[b]; });

  ProbField out(p.rows(), p.cols());
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t i = order[r];
    const double rank = static_cast<double>(r + 1);
    out[i] = (1.0 - f) * p[i] + f * rank / static_cast<double>(n);
  }
  return out;
}

ProbField warmup_blend(const ProbField& p, const Array2D<double>& residual, const ProposalSet& proposals,
                       double f) {
  return warmup_blend(p, residual, proposals.boxes, f);
}

}  // namespace segstitch
