#include "segstitch/cli/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "segstitch/cli/formats.hpp"
#include "segstitch/cli/runlog.hpp"
#include "segstitch/objective.hpp"
#include "segstitch/parallel.hpp"

namespace segstitch::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string scene_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%05d", index);
  return buf;
}

std::span<const std::uint8_t> as_bytes(const std::string& s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

json boxes_json(std::span<const BoundingBox> boxes) {
  json out = json::array();
  for (const auto& b : boxes) out.push_back({{"cx", b.cx}, {"cy", b.cy}, {"w", b.w}, {"h", b.h}});
  return out;
}

}  // namespace

json save_scene(const fs::path& dir, const SceneBundle& bundle) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw FormatError("cannot create " + dir.string() + ": " + ec.message());
  json sums = json::object();
  auto put = [&](const char* name, const std::vector<std::uint8_t>& bytes) {
    write_file(dir / name, bytes);
    sums[name] = checksum(bytes);
  };
  put("image.png", encode_gray_png(bundle.image, 16));
  put("image.mimg", encode_tensor(to_tensor(bundle.image)));
  put("truth_pi.mimg", encode_tensor(to_tensor(bundle.truth_pi)));
  write_label_png(dir / "truth_labels.png", bundle.truth_labels);
  sums["truth_labels.png"] = checksum(read_file(dir / "truth_labels.png"));
  put("truth_labels.mimg", encode_tensor(to_tensor(bundle.truth_labels)));
  const json meta{{"height", bundle.grid.height_px()},
                  {"width", bundle.grid.width_px()},
                  {"min_obj_px", bundle.grid.min_obj_px()},
                  {"max_obj_px", bundle.grid.max_obj_px()},
                  {"sigma", bundle.sigma},
                  {"instances", bundle.truth_boxes.size()},
                  {"boxes", boxes_json(bundle.truth_boxes)}};
  const std::string text = meta.dump(2) + "\n";
  write_text(dir / "scene.json", text);
  sums["scene.json"] = checksum(as_bytes(text));
  return sums;
}

bool is_scene_dir(const fs::path& path) {
  return fs::is_directory(path) && fs::exists(path / "scene.json");
}

SceneData load_scene(const fs::path& path) {
  SceneData s;
  if (!fs::exists(path)) throw FormatError("no such scene or image: " + path.string());
  if (!fs::is_directory(path)) {
    s.image = path.extension() == ".mimg" ? image_from_tensor(read_tensor(path)) : read_gray_png(path);
    return s;
  }
  if (!is_scene_dir(path)) throw FormatError(path.string() + " is not a scene directory");
  s.image = fs::exists(path / "image.mimg") ? image_from_tensor(read_tensor(path / "image.mimg"))
                                            : read_gray_png(path / "image.png");
  const auto text = read_file(path / "scene.json");
  json meta;
  try {
    meta = json::parse(text.begin(), text.end());
    s.sigma = meta.value("sigma", 0.0);
    for (const auto& b : meta.at("boxes"))
      s.truth_boxes.push_back({b.at("cx").get<double>(), b.at("cy").get<double>(), b.at("w").get<double>(),
                               b.at("h").get<double>()});
  } catch (const json::exception& e) {
    throw FormatError(path.string() + "/scene.json: " + e.what());
  }
  if (fs::exists(path / "truth_pi.mimg")) {
    s.truth_pi = stack_from_tensor(read_tensor(path / "truth_pi.mimg"));
    if (s.truth_pi.height() != s.image.height() || s.truth_pi.width() != s.image.width())
      throw FormatError(path.string() + ": truth stack does not match the image size");
  }
  if (fs::exists(path / "truth_labels.mimg")) s.truth_labels = labels_from_tensor(read_tensor(path / "truth_labels.mimg"));
  return s;
}

std::vector<fs::path> list_scenes(const fs::path& root) {
  if (is_scene_dir(root)) return {root};
  std::vector<fs::path> out;
  if (!fs::is_directory(root)) throw FormatError("not a directory: " + root.string());
  for (const auto& e : fs::directory_iterator(root))
    if (is_scene_dir(e.path())) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

BinaryField presence_from_boxes(std::span<const BoundingBox> boxes, const GridSpec& grid) {
  BinaryField c(grid.coarse_h(), grid.coarse_w());
  const double cell_h = static_cast<double>(grid.height_px()) / grid.coarse_h();
  const double cell_w = static_cast<double>(grid.width_px()) / grid.coarse_w();
  for (const auto& b : boxes) {
    const int iy = std::clamp(static_cast<int>(b.cy / cell_h), 0, grid.coarse_h() - 1);
    const int ix = std::clamp(static_cast<int>(b.cx / cell_w), 0, grid.coarse_w() - 1);
    c(iy, ix) = 1;
  }
  return c;
}

SynthSummary synthesize(const RunConfig& cfg, const fs::path& out_dir, int train, int test,
                        const std::function<void(const json&)>& log) {
  cfg.validate();
  if (train < 0 || test < 0) throw ParameterError("synthesize: scene counts must be >= 0");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw FormatError("cannot create " + out_dir.string() + ": " + ec.message());

  const SceneGenerator gen(cfg.scene_config());
  const int total = train + test;
  std::vector<json> sums(static_cast<std::size_t>(total));
  std::vector<json> records(static_cast<std::size_t>(total));
  const SaprState bounds = cfg.sapr_state();
  parallel_for(static_cast<std::size_t>(total), [&](std::size_t i) {
    const int index = static_cast<int>(i);
    const bool is_train = index < train;
    const fs::path dir = out_dir / (is_train ? "train" : "test") / scene_name(is_train ? index : index - train);
    Rng rng = make_rng(cfg.seed, "scene", i);
    const SceneBundle bundle = gen.generate(rng);
    sums[i] = save_scene(dir, bundle);
    const QValues q = q_values(presence_from_boxes(bundle.truth_boxes, bundle.grid), bundle.truth_pi,
                               bundle.truth_boxes, bundle.grid, 0.0);
    json slack = json::object();
    for (Constraint c : {Constraint::density, Constraint::area})
      slack[std::string(constraint_name(c))] =
          sapr_v(c == Constraint::density ? q.density : q.area, bounds[c].q_lo, bounds[c].q_hi);
    records[i] = {{"split", is_train ? "train" : "test"},
                  {"scene", fs::relative(dir, out_dir).generic_string()},
                  {"instances", bundle.truth_boxes.size()},
                  {"q", to_json(q)},
                  {"slack", slack}};
  });

  json files = json::object();
  for (int i = 0; i < total; ++i) {
    const bool is_train = i < train;
    const std::string rel = std::string(is_train ? "train/" : "test/") + scene_name(is_train ? i : i - train);
    for (const auto& [name, sum] : sums[static_cast<std::size_t>(i)].items()) files[rel + "/" + name] = sum;
    if (log) log(records[static_cast<std::size_t>(i)]);
  }
  SynthSummary out{train, test, json::object()};
  out.manifest = {{"format", "segstitch-scenes"},
                  {"version", 1},
                  {"seed", cfg.seed},
                  {"train", train},
                  {"test", test},
                  {"config", to_json(cfg)},
                  {"files", files}};
  // Digest over the sorted file table so two runs can be compared at a glance.
  const std::string table = files.dump();
  out.manifest["checksum"] = checksum(as_bytes(table));
  write_text(out_dir / "manifest.json", out.manifest.dump(2) + "\n");
  return out;
}

}  // namespace segstitch::cli
