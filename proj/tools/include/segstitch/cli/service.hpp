#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "segstitch/cli/config.hpp"
#include "segstitch/cli/dataset.hpp"

namespace segstitch::cli {

/// HTTP/JSON service over one scene, versioned under /v1:
///   GET  /v1/image/meta
///   GET  /v1/region?x=&y=&w=&h=      8-bit grayscale PNG tile
///   POST /v1/segment {region, gamma, seed}  labels as run lengths + NMI
///   POST /v1/commit  {gamma, seed}   starts a full-image job (409 while one runs)
///   GET  /v1/job/:id
/// Read requests are served concurrently; at most one job runs at a time.
class Service {
 public:
  Service(SceneData scene, RunConfig cfg);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Requires bind().
  void run();
  /// Stops serving and waits for a running job.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace segstitch::cli
