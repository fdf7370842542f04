#include "segstitch/cli/config.hpp"

#include <fstream>
#include <set>

#include "segstitch/cli/formats.hpp"

namespace segstitch::cli {

namespace {

using nlohmann::json;

// Reads j[key] into value when present; records the key as known.
template <typename T>
void take(const json& j, const char* key, T& value, std::set<std::string>& known) {
  known.insert(key);
  if (!j.contains(key)) return;
  try {
    value = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParameterError(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw ParameterError("config: unknown key '" + where + key + "'");
}

const json& section(const json& j, const char* name) {
  static const json empty = json::object();
  if (!j.contains(name)) return empty;
  if (!j.at(name).is_object()) throw ParameterError(std::string("config: '") + name + "' must be an object");
  return j.at(name);
}

}  // namespace

void RunConfig::validate() const {
  (void)scene_config();
  if (scene.background != "flat" && scene.background != "grid")
    throw ParameterError("config: scene.background must be 'flat' or 'grid'");
  if (!(scene.sigma > 0.0)) throw ParameterError("config: scene.sigma must be positive");
  if (!(proposals.alpha_train > 0.0 && proposals.alpha_train <= 1.0) ||
      !(proposals.alpha_test > 0.0 && proposals.alpha_test <= 1.0))
    throw ParameterError("config: NMS thresholds must lie in (0, 1]");
  if (proposals.k_max < 1) throw ParameterError("config: proposals.k_max must be >= 1");
  sapr_state().validate();
  if (sapr.d_bg <= 0 || sapr.d_fg <= 0) throw ParameterError("config: latent dims must be positive");
  if (!(sapr.n_grid_decay > 0.0 && sapr.n_grid_decay < 1.0))
    throw ParameterError("config: sapr.n_grid_decay must lie in (0, 1)");
  if (!(sapr.warmup_fraction >= 0.0 && sapr.warmup_fraction <= 1.0))
    throw ParameterError("config: sapr.warmup_fraction must lie in [0, 1]");
  posterior_noise().validate();
  consensus_config().validate();
  if (consensus.objective != "cpm" && consensus.objective != "rb")
    throw ParameterError("config: consensus.objective must be 'cpm' or 'rb'");
  if (consensus.min_segment_px < 1) throw ParameterError("config: consensus.min_segment_px must be >= 1");
  if (dataset.train_count < 0 || dataset.test_count < 0) throw ParameterError("config: dataset counts must be >= 0");
}

SceneConfig RunConfig::scene_config() const {
  SceneConfig c;
  c.grid = GridSpec(scene.height, scene.width, scene.min_obj_px, scene.max_obj_px);
  c.kernel = {scene.rho, scene.ell};
  c.raster_h = c.raster_w = scene.raster_px;
  c.sigma = scene.sigma;
  c.background.kind = scene.background == "grid" ? BackgroundKind::oriented_grid : BackgroundKind::flat;
  c.background.level = scene.background_level;
  c.background.contrast = scene.grid_contrast;
  c.background.spacing_min_px = scene.grid_spacing_min_px;
  c.background.spacing_max_px = scene.grid_spacing_max_px;
  return c;
}

PosteriorNoise RunConfig::posterior_noise() const {
  return {posterior.mask_jitter, posterior.box_jitter_px, posterior.drop_prob, posterior.split_prob};
}

double RunConfig::cutoff_px() const {
  return consensus.d_c > 0.0 ? consensus.d_c : std::max(1.0, scene.min_obj_px / 4.0);
}

ResolutionConfig RunConfig::resolution() const {
  ResolutionConfig r;
  r.objective = consensus.objective == "rb" ? Objective::rb : Objective::cpm;
  r.gamma = consensus.gamma;
  r.d_c = cutoff_px();
  r.e_min = consensus.e_min;
  r.restarts = consensus.restarts;
  return r;
}

ConsensusConfig RunConfig::consensus_config() const {
  ConsensusConfig c;
  c.window_px = consensus.window_px;
  c.stride_px = consensus.stride_px;
  c.n_post = posterior.n_post;
  c.resolution = resolution();
  c.foreground_threshold = consensus.foreground_threshold;
  return c;
}

SaprState RunConfig::sapr_state() const {
  SaprState s;
  auto fill = [&](Constraint c, double lo, double hi) {
    auto& x = s[c];
    x.lambda = sapr.lambda_init;
    x.lambda_lo = sapr.lambda_lo;
    x.lambda_hi = sapr.lambda_hi;
    x.q_lo = lo;
    x.q_hi = hi;
    x.step = sapr.step;
  };
  fill(Constraint::rec, sapr.rec_lo, sapr.rec_hi);
  fill(Constraint::density, sapr.density_lo, sapr.density_hi);
  fill(Constraint::area, sapr.area_lo, sapr.area_hi);
  return s;
}

nlohmann::json to_json(const RunConfig& c) {
  return {
      {"scene",
       {{"height", c.scene.height},
        {"width", c.scene.width},
        {"min_obj_px", c.scene.min_obj_px},
        {"max_obj_px", c.scene.max_obj_px},
        {"sigma", c.scene.sigma},
        {"rho", c.scene.rho},
        {"ell", c.scene.ell},
        {"raster_px", c.scene.raster_px},
        {"background", c.scene.background},
        {"background_level", c.scene.background_level},
        {"grid_contrast", c.scene.grid_contrast},
        {"grid_spacing_min_px", c.scene.grid_spacing_min_px},
        {"grid_spacing_max_px", c.scene.grid_spacing_max_px}}},
      {"proposals",
       {{"alpha_train", c.proposals.alpha_train}, {"alpha_test", c.proposals.alpha_test}, {"k_max", c.proposals.k_max}}},
      {"sapr",
       {{"lambda_lo", c.sapr.lambda_lo},
        {"lambda_hi", c.sapr.lambda_hi},
        {"lambda_init", c.sapr.lambda_init},
        {"step", c.sapr.step},
        {"density_lo", c.sapr.density_lo},
        {"density_hi", c.sapr.density_hi},
        {"area_lo", c.sapr.area_lo},
        {"area_hi", c.sapr.area_hi},
        {"rec_lo", c.sapr.rec_lo},
        {"rec_hi", c.sapr.rec_hi},
        {"d_bg", c.sapr.d_bg},
        {"d_fg", c.sapr.d_fg},
        {"n_grid_decay", c.sapr.n_grid_decay},
        {"warmup_fraction", c.sapr.warmup_fraction}}},
      {"posterior",
       {{"n_post", c.posterior.n_post},
        {"mask_jitter", c.posterior.mask_jitter},
        {"box_jitter_px", c.posterior.box_jitter_px},
        {"drop_prob", c.posterior.drop_prob},
        {"split_prob", c.posterior.split_prob}}},
      {"consensus",
       {{"window_px", c.consensus.window_px},
        {"stride_px", c.consensus.stride_px},
        {"objective", c.consensus.objective},
        {"gamma", c.consensus.gamma},
        {"gamma_grid", c.consensus.gamma_grid},
        {"d_c", c.consensus.d_c},
        {"e_min", c.consensus.e_min},
        {"restarts", c.consensus.restarts},
        {"foreground_threshold", c.consensus.foreground_threshold},
        {"min_segment_px", c.consensus.min_segment_px}}},
      {"dataset", {{"train_count", c.dataset.train_count}, {"test_count", c.dataset.test_count}}},
      {"seed", c.seed},
  };
}

RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParameterError("config: top level must be an object");
  RunConfig c;
  std::set<std::string> top{"scene", "proposals", "sapr", "posterior", "consensus", "dataset"};
  take(j, "seed", c.seed, top);
  reject_unknown(j, top, "");

  std::set<std::string> k;
  const auto& s = section(j, "scene");
  take(s, "height", c.scene.height, k);
  take(s, "width", c.scene.width, k);
  take(s, "min_obj_px", c.scene.min_obj_px, k);
  take(s, "max_obj_px", c.scene.max_obj_px, k);
  take(s, "sigma", c.scene.sigma, k);
  take(s, "rho", c.scene.rho, k);
  take(s, "ell", c.scene.ell, k);
  take(s, "raster_px", c.scene.raster_px, k);
  take(s, "background", c.scene.background, k);
  take(s, "background_level", c.scene.background_level, k);
  take(s, "grid_contrast", c.scene.grid_contrast, k);
  take(s, "grid_spacing_min_px", c.scene.grid_spacing_min_px, k);
  take(s, "grid_spacing_max_px", c.scene.grid_spacing_max_px, k);
  reject_unknown(s, k, "scene.");

  k.clear();
  const auto& p = section(j, "proposals");
  take(p, "alpha_train", c.proposals.alpha_train, k);
  take(p, "alpha_test", c.proposals.alpha_test, k);
  take(p, "k_max", c.proposals.k_max, k);
  reject_unknown(p, k, "proposals.");

  k.clear();
  const auto& a = section(j, "sapr");
  take(a, "lambda_lo", c.sapr.lambda_lo, k);
  take(a, "lambda_hi", c.sapr.lambda_hi, k);
  take(a, "lambda_init", c.sapr.lambda_init, k);
  take(a, "step", c.sapr.step, k);
  take(a, "density_lo", c.sapr.density_lo, k);
  take(a, "density_hi", c.sapr.density_hi, k);
  take(a, "area_lo", c.sapr.area_lo, k);
  take(a, "area_hi", c.sapr.area_hi, k);
  take(a, "rec_lo", c.sapr.rec_lo, k);
  take(a, "rec_hi", c.sapr.rec_hi, k);
  take(a, "d_bg", c.sapr.d_bg, k);
  take(a, "d_fg", c.sapr.d_fg, k);
  take(a, "n_grid_decay", c.sapr.n_grid_decay, k);
  take(a, "warmup_fraction", c.sapr.warmup_fraction, k);
  reject_unknown(a, k, "sapr.");

  k.clear();
  const auto& q = section(j, "posterior");
  take(q, "n_post", c.posterior.n_post, k);
  take(q, "mask_jitter", c.posterior.mask_jitter, k);
  take(q, "box_jitter_px", c.posterior.box_jitter_px, k);
  take(q, "drop_prob", c.posterior.drop_prob, k);
  take(q, "split_prob", c.posterior.split_prob, k);
  reject_unknown(q, k, "posterior.");

  k.clear();
  const auto& n = section(j, "consensus");
  take(n, "window_px", c.consensus.window_px, k);
  take(n, "stride_px", c.consensus.stride_px, k);
  take(n, "objective", c.consensus.objective, k);
  take(n, "gamma", c.consensus.gamma, k);
  take(n, "gamma_grid", c.consensus.gamma_grid, k);
  take(n, "d_c", c.consensus.d_c, k);
  take(n, "e_min", c.consensus.e_min, k);
  take(n, "restarts", c.consensus.restarts, k);
  take(n, "foreground_threshold", c.consensus.foreground_threshold, k);
  take(n, "min_segment_px", c.consensus.min_segment_px, k);
  reject_unknown(n, k, "consensus.");

  k.clear();
  const auto& d = section(j, "dataset");
  take(d, "train_count", c.dataset.train_count, k);
  take(d, "test_count", c.dataset.test_count, k);
  reject_unknown(d, k, "dataset.");

  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  const auto bytes = read_file(path);
  try {
    return config_from_json(nlohmann::json::parse(bytes.begin(), bytes.end()));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParameterError("config: " + path + ": " + e.what());
  }
}

}  // namespace segstitch::cli
