#include "segstitch/cli/service.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "segstitch/cli/formats.hpp"
#include "segstitch/cli/pipeline.hpp"

namespace segstitch::cli {

using nlohmann::json;

namespace {

constexpr const char* kJson = "application/json";

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void fail(httplib::Response& res, int status, const std::string& message) {
  reply(res, status, {{"error", message}});
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body);
  if (!j.is_object()) throw ParameterError("request body must be a JSON object");
  return j;
}

double read_gamma(const json& body, double fallback) {
  if (!body.contains("gamma")) return fallback;
  if (!body.at("gamma").is_number()) throw ParameterError("gamma must be a number");
  const double g = body.at("gamma").get<double>();
  if (!std::isfinite(g) || g <= 0.0) throw ParameterError("gamma must be positive and finite");
  return g;
}

std::uint64_t read_seed(const json& body, std::uint64_t fallback) {
  if (!body.contains("seed")) return fallback;
  if (!body.at("seed").is_number_unsigned()) throw ParameterError("seed must be a non-negative integer");
  return body.at("seed").get<std::uint64_t>();
}

Region read_region(const json& body) {
  if (!body.contains("region")) return {};
  const json& r = body.at("region");
  try {
    return {r.at("x").get<int>(), r.at("y").get<int>(), r.at("w").get<int>(), r.at("h").get<int>()};
  } catch (const json::exception&) {
    throw ParameterError("region needs integer x, y, w, h");
  }
}

json region_json(const Region& r, int height, int width) {
  if (r.whole()) return {{"x", 0}, {"y", 0}, {"w", width}, {"h", height}};
  return {{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}};
}

}  // namespace

struct Service::Impl {
  enum class Status { running, done, failed };
  struct Job {
    Status status = Status::running;
    double gamma = 0.0;
    std::uint64_t seed = 0;
    json result;
    std::string error;
  };

  SceneData scene;
  RunConfig cfg;
  httplib::Server server;

  std::mutex mutex;
  std::map<int, Job> jobs;
  int next_id = 1;
  int running = 0;  // id of the running job, 0 if none
  std::thread worker;

  Impl(SceneData s, RunConfig c) : scene(std::move(s)), cfg(std::move(c)) { routes(); }

  SegmentOutput segment(const Region& region, double gamma, std::uint64_t seed, bool score) const {
    SegmentOptions opt;
    opt.region = region;
    opt.gamma = gamma;
    opt.seed = seed;
    opt.score = score;
    return run_segment(scene, cfg, opt);
  }

  json meta() const {
    const auto& grid = cfg.consensus.gamma_grid;
    return {{"height", scene.image.height()},
            {"width", scene.image.width()},
            {"channels", scene.image.channels()},
            {"has_truth", scene.has_truth()},
            {"window_px", cfg.consensus.window_px},
            {"stride_px", cfg.consensus.stride_px},
            {"n_post", cfg.posterior.n_post},
            {"objective", cfg.consensus.objective},
            {"gamma", cfg.consensus.gamma},
            {"gamma_grid", grid},
            {"gamma_min", grid.empty() ? cfg.consensus.gamma : *std::min_element(grid.begin(), grid.end())},
            {"gamma_max", grid.empty() ? cfg.consensus.gamma : *std::max_element(grid.begin(), grid.end())},
            {"seed", cfg.seed}};
  }

  json job_json(int id, const Job& job) const {
    static constexpr const char* names[] = {"running", "done", "failed"};
    json j{{"id", id}, {"status", names[static_cast<int>(job.status)]}, {"gamma", job.gamma}, {"seed", job.seed}};
    if (job.status == Status::done) j["result"] = job.result;
    if (job.status == Status::failed) j["error"] = job.error;
    return j;
  }

  // Runs a handler, mapping bad input to 400 and anything else to 500.
  template <typename F>
  static void guarded(httplib::Response& res, F&& f) {
    try {
      f();
    } catch (const json::exception& e) {
      fail(res, 400, std::string("bad JSON: ") + e.what());
    } catch (const ParameterError& e) {
      fail(res, 400, e.what());
    } catch (const std::exception& e) {
      fail(res, 500, e.what());
    }
  }

  void routes() {
    server.Get("/v1/image/meta", [this](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, meta());
    });

    server.Get("/v1/region", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        auto num = [&](const char* key) {
          if (!req.has_param(key)) throw ParameterError(std::string("missing query parameter ") + key);
          try {
            return std::stoi(req.get_param_value(key));
          } catch (const std::exception&) {
            throw ParameterError(std::string("bad query parameter ") + key);
          }
        };
        const Region r{num("x"), num("y"), num("w"), num("h")};
        if (r.w <= 0 || r.h <= 0) throw ParameterError("region must have positive width and height");
        r.validate(scene.image.height(), scene.image.width());
        Image tile(r.h, r.w, scene.image.channels());
        for (int y = 0; y < r.h; ++y)
          for (int x = 0; x < r.w; ++x)
            for (int c = 0; c < tile.channels(); ++c) tile(y, x, c) = scene.image(r.y + y, r.x + x, c);
        const auto png = encode_gray_png(tile, 8);
        res.status = 200;
        res.set_content(std::string(png.begin(), png.end()), "image/png");
      });
    });

    server.Post("/v1/segment", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = parse_body(req);
        const Region region = read_region(body);
        const double gamma = read_gamma(body, cfg.consensus.gamma);
        const std::uint64_t seed = read_seed(body, cfg.seed);
        region.validate(scene.image.height(), scene.image.width());
        const SegmentOutput out = segment(region, gamma, seed, true);
        reply(res, 200,
              {{"region", region_json(region, scene.image.height(), scene.image.width())},
               {"gamma", gamma},
               {"seed", seed},
               {"communities", out.communities},
               {"nmi", out.score},
               {"labels", labels_to_rle(out.labels)}});
      });
    });

    server.Post("/v1/commit", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = parse_body(req);
        const double gamma = read_gamma(body, cfg.consensus.gamma);
        const std::uint64_t seed = read_seed(body, cfg.seed);
        std::lock_guard lock(mutex);
        if (running != 0) {
          reply(res, 409, {{"error", "a job is already running"}, {"job", running}});
          return;
        }
        if (worker.joinable()) worker.join();
        const int id = next_id++;
        jobs[id] = Job{Status::running, gamma, seed, {}, {}};
        running = id;
        worker = std::thread([this, id, gamma, seed] { run_job(id, gamma, seed); });
        reply(res, 202, {{"job", id}, {"status", "running"}});
      });
    });

    server.Get(R"(/v1/job/(\d+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const int id = std::stoi(req.matches[1].str());
        std::lock_guard lock(mutex);
        const auto it = jobs.find(id);
        if (it == jobs.end()) {
          fail(res, 404, "no such job");
          return;
        }
        reply(res, 200, job_json(id, it->second));
      });
    });
  }

  void run_job(int id, double gamma, std::uint64_t seed) {
    json result;
    std::string error;
    try {
      const SegmentOutput out = segment({}, gamma, seed, false);
      result = {{"communities", out.communities}, {"edges", out.edges}, {"labels", labels_to_rle(out.labels)}};
    } catch (const std::exception& e) {
      error = e.what();
    }
    std::lock_guard lock(mutex);
    Job& job = jobs[id];
    job.status = error.empty() ? Status::done : Status::failed;
    job.result = std::move(result);
    job.error = std::move(error);
    running = 0;
  }
};

Service::Service(SceneData scene, RunConfig cfg) {
  cfg.validate();
  impl_ = std::make_unique<Impl>(std::move(scene), std::move(cfg));
}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw FormatError("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void Service::run() { impl_->server.listen_after_bind(); }

void Service::stop() {
  if (!impl_) return;
  impl_->server.stop();
  std::thread worker;
  {
    std::lock_guard lock(impl_->mutex);
    worker = std::move(impl_->worker);
  }
  if (worker.joinable()) worker.join();
}

}  // namespace segstitch::cli
