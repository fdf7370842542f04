#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "segstitch/cli/config.hpp"
#include "segstitch/cli/pipeline.hpp"

namespace segstitch::cli {

struct SynthArgs {
  RunConfig config;
  std::filesystem::path out_dir;
  std::optional<int> train;  // defaults from the config
  std::optional<int> test;
  std::string log_path;
};

struct SegmentArgs {
  RunConfig config;
  std::filesystem::path input;  // scene dir, directory of scenes, or image file
  WindowMode windows = WindowMode::overlapping;
  ResolutionMode resolution = ResolutionMode::fixed;
  std::vector<double> gammas;  // empty: config gamma; several: sweep
  std::filesystem::path samples_dir;
  Region region;
  std::filesystem::path out_dir;
  std::string log_path;
  int limit = 0;  // 0 = every scene
  bool save_graph = false;
};

struct SamplesArgs {
  RunConfig config;
  std::filesystem::path scene;
  std::filesystem::path out_dir;
  WindowMode windows = WindowMode::overlapping;
};

struct ServeArgs {
  RunConfig config;
  std::filesystem::path scene;
  std::string host = "127.0.0.1";
  int port = 8080;
};

/// Each command prints a JSON summary to out and returns a process exit code.
int cmd_synth(const SynthArgs& args, std::ostream& out);
int cmd_segment(const SegmentArgs& args, std::ostream& out);
int cmd_samples(const SamplesArgs& args, std::ostream& out);
int cmd_serve(const ServeArgs& args, std::ostream& out);

}  // namespace segstitch::cli
