#include "segstitch/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>
#include <vector>

namespace segstitch {

namespace {

struct Contingency {
  std::map<std::pair<std::int32_t, std::int32_t>, double> joint;
  std::unordered_map<std::int32_t, double> rows;
  std::unordered_map<std::int32_t, double> cols;
  double n = 0.0;
};

Contingency contingency(const LabelMap& a, const LabelMap& b, const auto& keep) {
  if (!a.same_shape(b)) throw DimensionError("metrics: labelings differ in shape");
  Contingency t;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!keep(i)) continue;
    t.joint[{a[i], b[i]}] += 1.0;
    t.rows[a[i]] += 1.0;
    t.cols[b[i]] += 1.0;
    t.n += 1.0;
  }
  return t;
}

double choose2(double x) { return 0.5 * x * (x - 1.0); }

double entropy(const std::unordered_map<std::int32_t, double>& counts, double n) {
  double h = 0.0;
  for (const auto& [label, c] : counts) {
    const double p = c / n;
    h -= p * std::log(p);
  }
  return h;
}

double nmi_from(const Contingency& t) {
  if (t.n == 0.0) return 0.0;
  const double ha = entropy(t.rows, t.n);
  const double hb = entropy(t.cols, t.n);
  if (ha == 0.0 && hb == 0.0) return 1.0;
  double mi = 0.0;
  for (const auto& [key, c] : t.joint) {
    const double pa = t.rows.at(key.first) / t.n;
    const double pb = t.cols.at(key.second) / t.n;
    const double p = c / t.n;
    mi += p * std::log(p / (pa * pb));
  }
  return std::clamp(2.0 * mi / (ha + hb), 0.0, 1.0);
}

}  // namespace

double adjusted_rand_index(const LabelMap& a, const LabelMap& b) {
  const auto t = contingency(a, b, [](std::size_t) { return true; });
  if (t.n < 2.0) return 1.0;
  double index = 0.0;
  for (const auto& [key, c] : t.joint) index += choose2(c);
  double sum_a = 0.0;
  double sum_b = 0.0;
  for (const auto& [l, c] : t.rows) sum_a += choose2(c);
  for (const auto& [l, c] : t.cols) sum_b += choose2(c);
  const double expected = sum_a * sum_b / choose2(t.n);
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

double normalized_mutual_information(const LabelMap& a, const LabelMap& b, const Array2D<std::uint8_t>& mask) {
  if (!mask.empty() && mask.size() != a.size()) throw DimensionError("metrics: mask differs in shape");
  return nmi_from(contingency(a, b, [&](std::size_t i) { return mask.empty() || mask[i] != 0; }));
}

double foreground_nmi(const LabelMap& a, const LabelMap& b) {
  return nmi_from(contingency(a, b, [&](std::size_t i) { return a[i] > 0 && b[i] > 0; }));
}

int count_segments(const LabelMap& labels, int min_px) {
  std::unordered_map<std::int32_t, int> sizes;
  for (auto v : labels.values())
    if (v > 0) ++sizes[v];
  return static_cast<int>(std::count_if(sizes.begin(), sizes.end(), [&](const auto& kv) { return kv.second >= min_px; }));
}

int boundary_split_count(const LabelMap& truth, const LabelMap& predicted, double min_fraction) {
  if (!truth.same_shape(predicted)) throw DimensionError("boundary_split_count: shape mismatch");
  std::unordered_map<std::int32_t, int> truth_size;
  std::map<std::pair<std::int32_t, std::int32_t>, int> overlap;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] <= 0) continue;
    ++truth_size[truth[i]];
    if (predicted[i] > 0) ++overlap[{truth[i], predicted[i]}];
  }
  std::unordered_map<std::int32_t, int> covering;
  for (const auto& [key, c] : overlap)
    if (c >= min_fraction * truth_size[key.first]) ++covering[key.first];
  int splits = 0;
  for (const auto& [label, n] : covering) splits += std::max(0, n - 1);
  return splits;
}

LabelMap relabel_sequential(const LabelMap& labels) {
  LabelMap out(labels.rows(), labels.cols(), 0);
  std::unordered_map<std::int32_t, std::int32_t> remap;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 0) continue;
    auto [it, inserted] = remap.try_emplace(labels[i], static_cast<std::int32_t>(remap.size() + 1));
    out[i] = it->second;
  }
  return out;
}

}  // namespace segstitch
