#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "segstitch/scene.hpp"

namespace segstitch::cli {

struct SceneScore {
  int true_k = 0;
  int est_k = 0;
  double ari = 0.0;
  double nmi = 0.0;
  int boundary_splits = 0;
};

/// Mean with a normal-approximation 95% interval.
struct Interval {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

Interval mean_interval(const std::vector<double>& xs);

struct EvalReport {
  std::vector<SceneScore> scenes;

  /// Share of scenes with |est_k - true_k| <= tolerance.
  double count_accuracy(int tolerance = 1) const;
  Interval ari() const;
  Interval nmi() const;
  int total_splits() const;
};

/// Segments smaller than min_segment_px are ignored when counting instances.
SceneScore score_scene(const LabelMap& truth, const LabelMap& predicted, int min_segment_px);

nlohmann::json to_json(const SceneScore& s);
nlohmann::json to_json(const EvalReport& r);

}  // namespace segstitch::cli
