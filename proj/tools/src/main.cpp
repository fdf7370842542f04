#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "segstitch/cli/commands.hpp"
#include "segstitch/cli/formats.hpp"

namespace {

using namespace segstitch::cli;

Region parse_region(const std::string& text) {
  Region r;
  char c1 = 0, c2 = 0, c3 = 0;
  std::istringstream in(text);
  if (!(in >> r.x >> c1 >> r.y >> c2 >> r.w >> c3 >> r.h) || c1 != ',' || c2 != ',' || c3 != ',' || !in.eof())
    throw CLI::ValidationError("--region", "expected x,y,w,h");
  return r;
}

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;

  void add(CLI::App* app) {
    app->add_option("-c,--config", config_path, "JSON run configuration (defaults when omitted)")
        ->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "Root seed (overrides the config)");
  }

  RunConfig load() const {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (seed) cfg.seed = *seed;
    cfg.validate();
    return cfg;
  }
};

const std::map<std::string, WindowMode> kWindowModes{{"overlapping", WindowMode::overlapping},
                                                     {"disjoint", WindowMode::disjoint}};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sliding-window consensus segmentation of modular scenes"};
  app.require_subcommand(1);

  Common synth_common, seg_common, samples_common, serve_common;

  SynthArgs synth;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic train/test scene set");
  synth_common.add(synth_cmd);
  synth_cmd->add_option("-o,--out", synth_out, "Output directory")->required();
  synth_cmd->add_option("--train", synth.train, "Training scene count");
  synth_cmd->add_option("--test", synth.test, "Test scene count");
  synth_cmd->add_option("--log", synth.log_path, "Line-delimited JSON run log");

  SegmentArgs seg;
  std::string seg_input, seg_out, seg_samples_dir, seg_region, seg_source = "simulate";
  std::string seg_windows = "overlapping", seg_resolution = "fixed";
  auto* seg_cmd = app.add_subcommand("segment", "Segment a scene, a scene set, or an image");
  seg_common.add(seg_cmd);
  seg_cmd->add_option("input", seg_input, "Scene directory, directory of scenes, or image file")->required();
  seg_cmd->add_option("--samples", seg_source, "Posterior sample source")
      ->check(CLI::IsMember({"simulate", "files"}));
  seg_cmd->add_option("--samples-dir", seg_samples_dir, "Directory of window sample stacks (with --samples files)");
  seg_cmd->add_option("--windows", seg_windows, "Window layout")->check(CLI::IsMember({"overlapping", "disjoint"}));
  seg_cmd->add_option("--resolution", seg_resolution, "Resolution selection")
      ->check(CLI::IsMember({"fixed", "auto"}));
  seg_cmd->add_option("--gamma", seg.gammas, "Resolution value(s); several run a sweep")->delimiter(',');
  seg_cmd->add_option("--region", seg_region, "Sub-rectangle x,y,w,h");
  seg_cmd->add_option("-o,--out", seg_out, "Directory for labels and report.json");
  seg_cmd->add_option("--log", seg.log_path, "Line-delimited JSON run log");
  seg_cmd->add_option("--limit", seg.limit, "Segment at most this many scenes")->check(CLI::NonNegativeNumber);
  seg_cmd->add_flag("--save-graph", seg.save_graph, "Also write the consensus graph");

  SamplesArgs samples;
  std::string samples_scene, samples_out, samples_windows = "overlapping";
  auto* samples_cmd = app.add_subcommand("samples", "Export simulated window samples for --samples files");
  samples_common.add(samples_cmd);
  samples_cmd->add_option("scene", samples_scene, "Scene directory")->required();
  samples_cmd->add_option("-o,--out", samples_out, "Output directory")->required();
  samples_cmd->add_option("--windows", samples_windows, "Window layout")
      ->check(CLI::IsMember({"overlapping", "disjoint"}));

  ServeArgs serve;
  std::string serve_scene;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the interactive resolution API");
  serve_common.add(serve_cmd);
  serve_cmd->add_option("scene", serve_scene, "Scene directory or image")->required();
  serve_cmd->add_option("--host", serve.host, "Bind address");
  serve_cmd->add_option("-p,--port", serve.port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));

  Common config_common;
  auto* config_cmd = app.add_subcommand("config", "Print the effective configuration as JSON");
  config_common.add(config_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) {
      synth.config = synth_common.load();
      synth.out_dir = synth_out;
      return cmd_synth(synth, std::cout);
    }
    if (*seg_cmd) {
      seg.config = seg_common.load();
      seg.input = seg_input;
      seg.out_dir = seg_out;
      seg.windows = kWindowModes.at(seg_windows);
      seg.resolution = seg_resolution == "auto" ? ResolutionMode::automatic : ResolutionMode::fixed;
      if (!seg_region.empty()) seg.region = parse_region(seg_region);
      if (seg_source == "files") {
        if (seg_samples_dir.empty()) throw segstitch::ParameterError("--samples files needs --samples-dir");
        seg.samples_dir = seg_samples_dir;
      } else if (!seg_samples_dir.empty()) {
        throw segstitch::ParameterError("--samples-dir needs --samples files");
      }
      return cmd_segment(seg, std::cout);
    }
    if (*samples_cmd) {
      samples.config = samples_common.load();
      samples.scene = samples_scene;
      samples.out_dir = samples_out;
      samples.windows = kWindowModes.at(samples_windows);
      return cmd_samples(samples, std::cout);
    }
    if (*serve_cmd) {
      serve.config = serve_common.load();
      serve.scene = serve_scene;
      return cmd_serve(serve, std::cout);
    }
    if (*config_cmd) {
      std::cout << to_json(config_common.load()).dump(2) << '\n';
      return 0;
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const segstitch::ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
