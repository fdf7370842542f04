#include "segstitch/cli/commands.hpp"

#include <pthread.h>

#include <csignal>
#include <cstdio>
#include <ostream>
#include <thread>

#include "segstitch/cli/eval.hpp"
#include "segstitch/cli/formats.hpp"
#include "segstitch/cli/runlog.hpp"
#include "segstitch/cli/service.hpp"

namespace segstitch::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int cmd_synth(const SynthArgs& args, std::ostream& out) {
  RunLog log(args.log_path);
  const int train = args.train.value_or(args.config.dataset.train_count);
  const int test = args.test.value_or(args.config.dataset.test_count);
  const auto summary =
      synthesize(args.config, args.out_dir, train, test, [&](const json& rec) { log.write("scene", rec); });
  out << json{{"out", args.out_dir.string()},
              {"train", summary.train},
              {"test", summary.test},
              {"checksum", summary.manifest.at("checksum")}}
             .dump()
      << '\n';
  return 0;
}

namespace {

std::string gamma_tag(double g) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "gamma_%g", g);
  return buf;
}

json output_json(const SegmentOutput& o, WindowMode mode) {
  json j{{"communities", o.communities}, {"edges", o.edges}};
  if (mode == WindowMode::overlapping) j["gamma"] = o.gamma;
  if (!o.gamma_scores.empty()) j["gamma_scores"] = o.gamma_scores;
  return j;
}

void save_output(const fs::path& dir, const SegmentOutput& o) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw FormatError("cannot create " + dir.string() + ": " + ec.message());
  write_label_png(dir / "labels.png", o.labels);
  write_tensor(dir / "labels.mimg", to_tensor(o.labels));
  if (!o.graph.empty()) write_edges(dir / "graph.edges", o.graph);
}

}  // namespace

int cmd_segment(const SegmentArgs& args, std::ostream& out) {
  args.config.validate();
  if (args.resolution == ResolutionMode::automatic && args.gammas.size() == 1)
    throw ParameterError("--resolution auto takes its candidates from the config, not --gamma");
  RunLog log(args.log_path);

  std::vector<fs::path> inputs;
  if (fs::is_directory(args.input)) {
    inputs = list_scenes(args.input);
    if (inputs.empty()) throw FormatError("no scenes under " + args.input.string());
  } else {
    inputs.push_back(args.input);
  }
  if (args.limit > 0 && inputs.size() > static_cast<std::size_t>(args.limit)) inputs.resize(args.limit);
  if (!args.samples_dir.empty() && inputs.size() != 1)
    throw ParameterError("--samples-dir applies to a single scene or image");

  std::vector<std::optional<double>> gammas;
  if (args.gammas.empty() || args.windows == WindowMode::disjoint || args.resolution == ResolutionMode::automatic)
    gammas.push_back(std::nullopt);
  else
    for (double g : args.gammas) gammas.emplace_back(g);

  std::vector<EvalReport> reports(gammas.size());
  json runs = json::array();
  for (const auto& path : inputs) {
    const SceneData scene = load_scene(path);
    for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
      SegmentOptions opt;
      opt.windows = args.windows;
      opt.resolution = args.resolution;
      opt.gamma = gammas[gi];
      opt.seed = args.config.seed;
      opt.region = args.region;
      opt.samples_dir = args.samples_dir;
      opt.keep_graph = args.save_graph;
      const SegmentOutput o = run_segment(scene, args.config, opt);

      json rec = output_json(o, args.windows);
      rec["scene"] = path.string();
      if (!o.truth.empty()) {
        const SceneScore s = score_scene(o.truth, o.labels, args.config.consensus.min_segment_px);
        reports[gi].scenes.push_back(s);
        rec["eval"] = to_json(s);
      }
      log.write("segment", rec);
      if (!args.out_dir.empty()) {
        fs::path dir = args.out_dir;
        if (inputs.size() > 1) dir /= path.filename();
        if (gammas.size() > 1) dir /= gamma_tag(*gammas[gi]);
        save_output(dir, o);
      }
      runs.push_back(std::move(rec));
    }
  }

  json summary{{"mode", args.windows == WindowMode::overlapping ? "overlapping" : "disjoint"},
               {"resolution", args.resolution == ResolutionMode::fixed ? "fixed" : "auto"},
               {"scenes", inputs.size()}};
  json sweep = json::array();
  for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
    json entry = json::object();
    if (gammas[gi]) entry["gamma"] = *gammas[gi];
    if (!reports[gi].scenes.empty()) entry["report"] = to_json(reports[gi])["aggregate"];
    json communities = json::array();
    for (std::size_t r = gi; r < runs.size(); r += gammas.size()) communities.push_back(runs[r]["communities"]);
    entry["communities"] = communities;
    sweep.push_back(std::move(entry));
  }
  summary["runs"] = sweep;
  if (!args.out_dir.empty()) {
    json report = summary;
    report["per_scene"] = runs;
    if (gammas.size() == 1 && !reports[0].scenes.empty()) report["eval"] = to_json(reports[0]);
    write_text(args.out_dir / "report.json", report.dump(2) + "\n");
  }
  out << summary.dump() << '\n';
  return 0;
}

int cmd_samples(const SamplesArgs& args, std::ostream& out) {
  const SceneData scene = load_scene(args.scene);
  export_samples(scene, args.config, args.windows, args.config.seed, args.out_dir);
  out << json{{"out", args.out_dir.string()}}.dump() << '\n';
  return 0;
}

int cmd_serve(const ServeArgs& args, std::ostream& out) {
  // Block termination signals in every thread and take them on a dedicated
  // waiter, which can then shut the server down outside signal context.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Service service(load_scene(args.scene), args.config);
  const int port = service.bind(args.host, args.port);
  out << json{{"host", args.host}, {"port", port}}.dump() << std::endl;
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    service.stop();
  });
  service.run();
  waiter.join();
  return 0;
}

}  // namespace segstitch::cli
