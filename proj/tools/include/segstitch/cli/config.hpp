#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "segstitch/consensus.hpp"
#include "segstitch/objective.hpp"
#include "segstitch/scene.hpp"

namespace segstitch::cli {

/// Every tunable of the pipeline. Defaults follow the reference multi-digit
/// setup (80 x 80 canvas) unless noted.
struct RunConfig {
  struct Scene {
    int height = 80;
    int width = 80;
    int min_obj_px = 20;
    int max_obj_px = 40;
    double sigma = 0.05;
    double rho = 0.55;
    double ell = 1.0;
    int raster_px = 28;
    std::string background = "flat";  // flat | grid
    double background_level = 0.0;
    double grid_contrast = 0.3;
    double grid_spacing_min_px = 6.0;
    double grid_spacing_max_px = 14.0;
  } scene;

  struct Proposals {
    double alpha_train = kNmsAlphaTrain;
    double alpha_test = kNmsAlphaTest;
    int k_max = kMaxInstancesDigits;
  } proposals;

  struct Sapr {
    double lambda_lo = kLambdaLo;
    double lambda_hi = kLambdaHi;
    double lambda_init = 1.0;
    double step = kDefaultLambdaStep;
    // Density bounds: 1.5 to 6.5 instances on the 4 x 4 reference grid.
    double density_lo = 1.5 / 16.0;
    double density_hi = 6.5 / 16.0;
    double area_lo = 0.05;
    double area_hi = 0.15;
    double rec_lo = 0.0;
    double rec_hi = 1.0;
    int d_bg = kReferenceLatentDims;
    int d_fg = kReferenceLatentDims;
    double n_grid_decay = 0.9;
    double warmup_fraction = kWarmupFraction;
  } sapr;

  struct Posterior {
    int n_post = 8;
    double mask_jitter = 0.1;
    double box_jitter_px = 2.0;
    double drop_prob = 0.05;
    double split_prob = 0.05;
  } posterior;

  struct Consensus {
    int window_px = 80;
    int stride_px = 20;
    std::string objective = "cpm";  // cpm | rb
    double gamma = 0.01;
    std::vector<double> gamma_grid{0.002, 0.005, 0.01, 0.02, 0.05};
    double d_c = 0.0;  // 0 = min_obj_px / 4
    double e_min = kDefaultEdgeMin;
    int restarts = 3;  // community detection runs, best kept
    double foreground_threshold = 0.5;
    int min_segment_px = 20;
  } consensus;

  struct Dataset {
    int train_count = 5000;
    int test_count = 500;
  } dataset;

  std::uint64_t seed = 1;

  /// Throws ParameterError on inconsistent values.
  void validate() const;

  SceneConfig scene_config() const;
  PosteriorNoise posterior_noise() const;
  ResolutionConfig resolution() const;
  ConsensusConfig consensus_config() const;
  SaprState sapr_state() const;
  double cutoff_px() const;
};

nlohmann::json to_json(const RunConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

}  // namespace segstitch::cli
