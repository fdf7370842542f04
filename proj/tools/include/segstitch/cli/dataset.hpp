#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "segstitch/cli/config.hpp"
#include "segstitch/scene.hpp"

namespace segstitch::cli {

/// A scene as stored on disk. Truth fields are empty for a bare image.
struct SceneData {
  Image image;
  MixingStack truth_pi;
  LabelMap truth_labels;
  std::vector<BoundingBox> truth_boxes;
  double sigma = 0.0;

  bool has_truth() const noexcept { return truth_pi.instances() > 0 || truth_pi.pixels() > 0; }
};

/// Files written for one scene, relative to its directory.
inline constexpr const char* kSceneFiles[] = {"image.png", "image.mimg", "truth_pi.mimg", "truth_labels.png",
                                              "truth_labels.mimg", "scene.json"};

/// Writes the bundle into dir (created if needed) and returns
/// {file name: checksum} for every file written.
nlohmann::json save_scene(const std::filesystem::path& dir, const SceneBundle& bundle);

/// Loads a scene directory, or a bare PNG / MIMG image without truth.
SceneData load_scene(const std::filesystem::path& path);

/// True when path holds a saved scene.
bool is_scene_dir(const std::filesystem::path& path);

/// Scene directories directly under root (sorted), or root itself when it is
/// a scene.
std::vector<std::filesystem::path> list_scenes(const std::filesystem::path& root);

/// Coarse presence field implied by box centers.
BinaryField presence_from_boxes(std::span<const BoundingBox> boxes, const GridSpec& grid);

struct SynthSummary {
  int train = 0;
  int test = 0;
  nlohmann::json manifest;
};

/// Generates train then test scenes under out_dir/{train,test}/scene_NNNNN.
/// Scene i (global index across both splits) draws from make_rng(seed,
/// "scene", i), so output is identical for any worker count. Writes
/// manifest.json with per-file checksums. log receives one record per scene.
SynthSummary synthesize(const RunConfig& cfg, const std::filesystem::path& out_dir, int train, int test,
                        const std::function<void(const nlohmann::json&)>& log = {});

}  // namespace segstitch::cli
