#include "segstitch/cli/eval.hpp"

#include <cmath>
#include <cstdlib>

#include "segstitch/metrics.hpp"

namespace segstitch::cli {

Interval mean_interval(const std::vector<double>& xs) {
  if (xs.empty()) return {};
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double n = static_cast<double>(xs.size());
  const double mean = sum / n;
  if (xs.size() < 2) return {mean, mean, mean};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double half = 1.959963984540054 * std::sqrt(ss / (n - 1.0) / n);
  return {mean, mean - half, mean + half};
}

double EvalReport::count_accuracy(int tolerance) const {
  if (scenes.empty()) return 0.0;
  int ok = 0;
  for (const auto& s : scenes) ok += std::abs(s.est_k - s.true_k) <= tolerance ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(scenes.size());
}

Interval EvalReport::ari() const {
  std::vector<double> xs;
  for (const auto& s : scenes) xs.push_back(s.ari);
  return mean_interval(xs);
}

Interval EvalReport::nmi() const {
  std::vector<double> xs;
  for (const auto& s : scenes) xs.push_back(s.nmi);
  return mean_interval(xs);
}

int EvalReport::total_splits() const {
  int total = 0;
  for (const auto& s : scenes) total += s.boundary_splits;
  return total;
}

SceneScore score_scene(const LabelMap& truth, const LabelMap& predicted, int min_segment_px) {
  return {count_segments(truth, min_segment_px), count_segments(predicted, min_segment_px),
          adjusted_rand_index(truth, predicted), normalized_mutual_information(truth, predicted),
          boundary_split_count(truth, predicted)};
}

nlohmann::json to_json(const SceneScore& s) {
  return {{"true_k", s.true_k}, {"est_k", s.est_k}, {"ari", s.ari}, {"nmi", s.nmi},
          {"boundary_splits", s.boundary_splits}};
}

namespace {
nlohmann::json interval_json(const Interval& i) { return {{"mean", i.mean}, {"ci95", {i.lo, i.hi}}}; }
}  // namespace

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json scenes = nlohmann::json::array();
  for (const auto& s : r.scenes) scenes.push_back(to_json(s));
  std::vector<double> hits;
  for (const auto& s : r.scenes) hits.push_back(std::abs(s.est_k - s.true_k) <= 1 ? 1.0 : 0.0);
  return {{"scenes", scenes},
          {"aggregate",
           {{"n", r.scenes.size()},
            {"count_within_1", interval_json(mean_interval(hits))},
            {"count_exact", r.count_accuracy(0)},
            {"ari", interval_json(r.ari())},
            {"nmi", interval_json(r.nmi())},
            {"boundary_splits", r.total_splits()}}}};
}

}  // namespace segstitch::cli
