#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "segstitch/objective.hpp"

namespace segstitch {

namespace {

constexpr int kEmIterations = 500;
constexpr double kEmTolerance = 1e-10;
constexpr double kMinWeight = 1e-3;
constexpr int kOtsuBins = 256;

struct Component {
  double weight;
  double mean;
  double var;
};

double quantile(std::vector<double> v, double q) {
  const auto idx = static_cast<std::size_t>(q * static_cast<double>(v.size() - 1));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(idx), v.end());
  return v[idx];
}

double log_normal_pdf(double x, const Component& c) {
  const double d = x - c.mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * c.var) + d * d / c.var);
}

// Returns false when a component collapses.
bool fit_em(const std::vector<double>& xs, std::array<Component, 2>& comp, double var_floor) {
  const auto n = static_cast<double>(xs.size());
  std::vector<double> resp(xs.size());
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < kEmIterations; ++it) {
    double ll = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double a = std::log(comp[0].weight) + log_normal_pdf(xs[i], comp[0]);
      const double b = std::log(comp[1].weight) + log_normal_pdf(xs[i], comp[1]);
      const double m = std::max(a, b);
      const double lse = m + std::log(std::exp(a - m) + std::exp(b - m));
      resp[i] = std::exp(b - lse);
      ll += lse;
    }
    double r1 = 0.0, s1 = 0.0, s0 = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      r1 += resp[i];
      s1 += resp[i] * xs[i];
      s0 += (1.0 - resp[i]) * xs[i];
    }
    const double r0 = n - r1;
    if (r0 < kMinWeight * n || r1 < kMinWeight * n) return false;
    comp[0].mean = s0 / r0;
    comp[1].mean = s1 / r1;
    double v0 = 0.0, v1 = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double d0 = xs[i] - comp[0].mean;
      const double d1 = xs[i] - comp[1].mean;
      v0 += (1.0 - resp[i]) * d0 * d0;
      v1 += resp[i] * d1 * d1;
    }
    comp[0].var = v0 / r0;
    comp[1].var = v1 / r1;
    comp[0].weight = r0 / n;
    comp[1].weight = r1 / n;
    if (comp[0].var < var_floor || comp[1].var < var_floor) return false;
    if (std::abs(ll - prev_ll) < kEmTolerance * std::abs(ll)) break;
    prev_ll = ll;
  }
  return true;
}

SigmaEstimate otsu(const std::vector<double>& xs, double lo, double hi) {
  std::array<double, kOtsuBins> hist{};
  const double width = (hi - lo) / kOtsuBins;
  for (double x : xs) {
    auto b = static_cast<int>((x - lo) / width);
    hist[static_cast<std::size_t>(std::clamp(b, 0, kOtsuBins - 1))] += 1.0;
  }
  const auto n = static_cast<double>(xs.size());
  double total_mean = 0.0;
  for (int b = 0; b < kOtsuBins; ++b) total_mean += (lo + (b + 0.5) * width) * hist[static_cast<std::size_t>(b)];
  total_mean /= n;

  double best = -1.0;
  int best_bin = 0;
  double w0 = 0.0, mu0_acc = 0.0;
  for (int b = 0; b < kOtsuBins - 1; ++b) {
    w0 += hist[static_cast<std::size_t>(b)];
    mu0_acc += (lo + (b + 0.5) * width) * hist[static_cast<std::size_t>(b)];
    const double w1 = n - w0;
    if (w0 <= 0.0 || w1 <= 0.0) continue;
    const double mu0 = mu0_acc / w0;
    const double mu1 = (total_mean * n - mu0_acc) / w1;
    const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (between > best) {
      best = between;
      best_bin = b;
    }
  }
  const double threshold = lo + (best_bin + 1) * width;
  double s0 = 0.0, s1 = 0.0, c0 = 0.0, c1 = 0.0;
  for (double x : xs) (x >= threshold ? (s1 += x, c1 += 1.0) : (s0 += x, c0 += 1.0));
  const double m1 = c1 > 0.0 ? s1 / c1 : threshold;
  const double m0 = c0 > 0.0 ? s0 / c0 : threshold;
  double v1 = 0.0;
  for (double x : xs)
    if (x >= threshold) v1 += (x - m1) * (x - m1);
  SigmaEstimate out;
  out.method = SigmaEstimate::Method::otsu;
  out.sigma = c1 > 1.0 ? std::sqrt(v1 / (c1 - 1.0)) : 0.0;
  out.foreground_mean = m1;
  out.background_mean = m0;
  return out;
}

}  // namespace

SigmaEstimate estimate_sigma(const Image& image) {
  std::vector<double> xs(image.values().begin(), image.values().end());
  if (xs.empty()) throw ParameterError("estimate_sigma: empty image");
  const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
  const double lo = *mn;
  const double hi = *mx;
  if (!(hi > lo)) throw ParameterError("estimate_sigma: image is constant");

  const double range = hi - lo;
  const double q10 = quantile(xs, 0.1);
  const double q90 = quantile(xs, 0.9);
  const double spread = std::max(q90 - q10, 0.01 * range);
  std::array<Component, 2> comp{
      Component{0.5, q10, spread * spread / 4.0},
      Component{0.5, q90, spread * spread / 4.0},
  };
  const double var_floor = 1e-12 * range * range;
  if (fit_em(xs, comp, var_floor)) {
    const auto& fg = comp[1].mean >= comp[0].mean ? comp[1] : comp[0];
    const auto& bg = comp[1].mean >= comp[0].mean ? comp[0] : comp[1];
    return {std::sqrt(fg.var), SigmaEstimate::Method::gaussian_mixture, fg.mean, bg.mean};
  }
  return otsu(xs, lo, hi);
}

}  // namespace segstitch
