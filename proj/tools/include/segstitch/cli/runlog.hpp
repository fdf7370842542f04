#pragma once

#include <fstream>
#include <mutex>
#include <string>

#include <nlohmann/json.hpp>

#include "segstitch/objective.hpp"

namespace segstitch::cli {

nlohmann::json to_json(const LossTerms& t);
nlohmann::json to_json(const QValues& q);
nlohmann::json to_json(const SaprState& s);

/// Line-delimited JSON records. Each record gets a "type" field and a
/// sequence number. Thread-safe; an empty path discards records.
class RunLog {
 public:
  RunLog() = default;
  explicit RunLog(const std::string& path);

  void write(const std::string& type, nlohmann::json record);
  bool enabled() const noexcept { return out_.is_open(); }

 private:
  std::mutex mutex_;
  std::ofstream out_;
  long long seq_ = 0;
};

}  // namespace segstitch::cli
