#include "segstitch/consensus/graph.hpp"

#include <algorithm>
#include <cmath>

namespace segstitch {

namespace {

// Exact fixed-point accumulation makes the reduction order irrelevant.
constexpr double kFixedScale = 0x1.0p40;

// Non-zero instance memberships per window pixel, CSR layout.
struct SparseStack {
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> start;  // pixels + 1
  std::vector<std::int32_t> k;
  std::vector<double> v;

  explicit SparseStack(const MixingStack& pi) : height(pi.height()), width(pi.width()) {
    const std::size_t n = pi.pixels();
    std::vector<std::uint32_t> count(n, 0);
    for (int kk = 1; kk <= pi.instances(); ++kk) {
      const auto plane = pi.plane(kk);
      for (std::size_t p = 0; p < n; ++p)
        if (plane[p] > 0.0) ++count[p];
    }
    start.assign(n + 1, 0);
    for (std::size_t p = 0; p < n; ++p) start[p + 1] = start[p] + count[p];
    k.resize(start[n]);
    v.resize(start[n]);
    std::vector<std::uint32_t> fill(start.begin(), start.end() - 1);
    for (int kk = 1; kk <= pi.instances(); ++kk) {
      const auto plane = pi.plane(kk);
      for (std::size_t p = 0; p < n; ++p)
        if (plane[p] > 0.0) {
          k[fill[p]] = kk;
          v[fill[p]] = plane[p];
          ++fill[p];
        }
    }
  }

  bool occupied(std::size_t p) const { return start[p + 1] > start[p]; }

  double dot(std::size_t a, std::size_t b) const {
    double s = 0.0;
    auto i = start[a];
    auto j = start[b];
    while (i < start[a + 1] && j < start[b + 1]) {
      if (k[i] == k[j]) {
        s += v[i] * v[j];
        ++i;
        ++j;
      } else if (k[i] < k[j]) {
        ++i;
      } else {
        ++j;
      }
    }
    return s;
  }
};

// Calls emit(y, x, d_index, q_y, q_x, e) for every qualifying pair inside the window.
template <typename Emit>
void for_each_window_edge(const MixingStack& pi, const IndexMatrix& idx, const std::vector<Displacement>& disp,
                          double e_min, Emit&& emit) {
  if (pi.height() != idx.rows() || pi.width() != idx.cols())
    throw DimensionError("window_edges: stack and index crop differ in shape");
  const SparseStack s(pi);
  const int h = pi.height();
  const int w = pi.width();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const auto p = static_cast<std::size_t>(y) * w + x;
      if (!s.occupied(p) || idx[p] < 0) continue;
      for (std::size_t d = 0; d < disp.size(); ++d) {
        const int qy = y + disp[d].dy;
        const int qx = x + disp[d].dx;
        if (qy >= h || qx < 0 || qx >= w) continue;
        const auto q = static_cast<std::size_t>(qy) * w + qx;
        if (!s.occupied(q) || idx[q] < 0) continue;
        const double e = s.dot(p, q);
        if (e > 0.0 && e >= e_min) emit(y, x, d, qy, qx, e);
      }
    }
}

}  // namespace

void ResolutionConfig::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ParameterError("ResolutionConfig: gamma must be positive");
  if (!(d_c >= 1.0)) throw ParameterError("ResolutionConfig: d_c must be >= 1");
  if (!(e_min >= 0.0 && e_min < 1.0)) throw ParameterError("ResolutionConfig: e_min must lie in [0, 1)");
  if (restarts < 1) throw ParameterError("ResolutionConfig: restarts must be >= 1");
}

std::vector<Displacement> half_plane_displacements(double d_c) {
  std::vector<Displacement> out;
  const int r = static_cast<int>(std::ceil(d_c));
  for (int dy = 0; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      if (dy == 0 && dx <= 0) continue;
      if (static_cast<double>(dy * dy + dx * dx) < d_c * d_c) out.push_back({dy, dx});
    }
  return out;
}

EdgeList window_edges(const MixingStack& pi, const IndexMatrix& idx, const ResolutionConfig& cfg) {
  cfg.validate();
  const auto disp = half_plane_displacements(cfg.d_c);
  EdgeList out;
  for_each_window_edge(pi, idx, disp, cfg.e_min, [&](int y, int x, std::size_t, int qy, int qx, double e) {
    auto a = static_cast<std::uint32_t>(idx(y, x));
    auto b = static_cast<std::uint32_t>(idx(qy, qx));
    if (a > b) std::swap(a, b);
    out.push_back({a, b, e});
  });
  return out;
}

EdgeList merge_edges(std::span<const EdgeList> parts, int n_post) {
  if (n_post <= 0) throw ParameterError("merge_edges: n_post must be positive");
  EdgeList all;
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  all.reserve(total);
  for (const auto& p : parts)
    for (auto e : p) {
      if (e.i > e.j) std::swap(e.i, e.j);
      if (e.i == e.j) continue;
      all.push_back(e);
    }
  std::sort(all.begin(), all.end(), [](const Edge& a, const Edge& b) {
    if (a.i != b.i) return a.i < b.i;
    if (a.j != b.j) return a.j < b.j;
    return a.w < b.w;
  });
  EdgeList out;
  for (std::size_t a = 0; a < all.size();) {
    std::size_t b = a;
    double sum = 0.0;
    while (b < all.size() && all[b].i == all[a].i && all[b].j == all[a].j) sum += all[b++].w;
    if (sum > 0.0) out.push_back({all[a].i, all[a].j, sum / n_post});
    a = b;
  }
  return out;
}

LabelMap point_estimate(const MixingStack& pi) {
  LabelMap out(pi.height(), pi.width(), 0);
  for (int y = 0; y < pi.height(); ++y)
    for (int x = 0; x < pi.width(); ++x) {
      int best = 0;
      double best_v = pi.at(0, y, x);
      for (int k = 1; k <= pi.instances(); ++k)
        if (pi.at(k, y, x) > best_v) {
          best_v = pi.at(k, y, x);
          best = k;
        }
      out(y, x) = best;
    }
  return out;
}

EdgeAccumulator::EdgeAccumulator(const WindowPlan& plan, const ResolutionConfig& cfg)
    : plan_(plan), cfg_(cfg), disp_(half_plane_displacements(cfg.d_c)) {
  cfg.validate();
  sum_.assign(static_cast<std::size_t>(plan.height) * plan.width * disp_.size(), 0);
  mass_.assign(static_cast<std::size_t>(plan.height) * plan.width, 0);
}

void EdgeAccumulator::add_window(std::size_t w, const MixingStack& pi) {
  if (w >= plan_.windows.size()) throw ParameterError("EdgeAccumulator: window out of range");
  if (pi.height() != plan_.window_px || pi.width() != plan_.window_px)
    throw DimensionError("EdgeAccumulator: sample does not match the window size");
  const int row0 = plan_.image_row(w);
  const int col0 = plan_.image_col(w);
  const SparseStack s(pi);
  const int n = plan_.window_px;
  const std::size_t nd = disp_.size();
  // Restrict to the part of the window that lies on the image.
  const int y_lo = std::max(0, -row0);
  const int y_hi = std::min(n, plan_.height - row0);
  const int x_lo = std::max(0, -col0);
  const int x_hi = std::min(n, plan_.width - col0);
  for (int y = y_lo; y < y_hi; ++y)
    for (int x = x_lo; x < x_hi; ++x) {
      const auto p = static_cast<std::size_t>(y) * n + x;
      if (!s.occupied(p)) continue;
      const auto gp = static_cast<std::size_t>(y + row0) * plan_.width + (x + col0);
      mass_[gp] += std::llround((1.0 - pi.at(0, y, x)) * kFixedScale);
      for (std::size_t d = 0; d < nd; ++d) {
        const int qy = y + disp_[d].dy;
        const int qx = x + disp_[d].dx;
        if (qy >= y_hi || qx < x_lo || qx >= x_hi) continue;
        const auto q = static_cast<std::size_t>(qy) * n + qx;
        if (!s.occupied(q)) continue;
        const double e = s.dot(p, q);
        if (e > 0.0 && e >= cfg_.e_min) sum_[gp * nd + d] += std::llround(e * kFixedScale);
      }
    }
}

void EdgeAccumulator::merge(const EdgeAccumulator& other) {
  if (other.sum_.size() != sum_.size()) throw DimensionError("EdgeAccumulator: incompatible accumulators");
  for (std::size_t i = 0; i < sum_.size(); ++i) sum_[i] += other.sum_[i];
  for (std::size_t i = 0; i < mass_.size(); ++i) mass_[i] += other.mass_[i];
}

Array2D<double> EdgeAccumulator::foreground_mass(int n_post) const {
  if (n_post <= 0) throw ParameterError("EdgeAccumulator: n_post must be positive");
  Array2D<double> out(plan_.height, plan_.width, 0.0);
  for (int y = 0; y < plan_.height; ++y)
    for (int x = 0; x < plan_.width; ++x) {
      const auto raw = mass_[static_cast<std::size_t>(y) * plan_.width + x];
      out(y, x) = static_cast<double>(raw) / kFixedScale / (static_cast<double>(n_post) * plan_.multiplicity(y, x));
    }
  return out;
}

EdgeList EdgeAccumulator::finalize(int n_post) const {
  if (n_post <= 0) throw ParameterError("EdgeAccumulator: n_post must be positive");
  EdgeList out;
  const std::size_t nd = disp_.size();
  for (int y = 0; y < plan_.height; ++y)
    for (int x = 0; x < plan_.width; ++x) {
      const auto p = static_cast<std::size_t>(y) * plan_.width + x;
      for (std::size_t d = 0; d < nd; ++d) {
        const auto raw = sum_[p * nd + d];
        if (raw == 0) continue;
        const int qy = y + disp_[d].dy;
        const int qx = x + disp_[d].dx;
        const int m = plan_.pair_multiplicity(y, x, qy, qx);
        const double w = static_cast<double>(raw) / kFixedScale / (static_cast<double>(n_post) * m);
        auto a = static_cast<std::uint32_t>(p);
        auto b = static_cast<std::uint32_t>(static_cast<std::size_t>(qy) * plan_.width + qx);
        if (a > b) std::swap(a, b);
        out.push_back({a, b, std::min(w, 1.0)});
      }
    }
  std::sort(out.begin(), out.end(), [](const Edge& a, const Edge& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
  return out;
}

}  // namespace segstitch
