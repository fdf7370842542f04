#include "segstitch/cli/runlog.hpp"

#include <filesystem>

#include "segstitch/cli/formats.hpp"

namespace segstitch::cli {

nlohmann::json to_json(const LossTerms& t) {
  return {{"rec", t.rec},       {"kl_bg", t.kl_bg},     {"kl_fg", t.kl_fg},
          {"kl_box", t.kl_box}, {"kl_grid", t.kl_grid}, {"total_kl", t.total_kl}};
}

nlohmann::json to_json(const QValues& q) { return {{"density", q.density}, {"area", q.area}, {"rec", q.rec}}; }

nlohmann::json to_json(const SaprState& s) {
  nlohmann::json out = nlohmann::json::object();
  for (Constraint c : kConstraints) {
    const auto& x = s[c];
    out[std::string(constraint_name(c))] = {{"lambda", x.lambda}, {"lambda_lo", x.lambda_lo},
                                            {"lambda_hi", x.lambda_hi}, {"q_lo", x.q_lo},
                                            {"q_hi", x.q_hi},         {"step", x.step}};
  }
  return out;
}

RunLog::RunLog(const std::string& path) {
  if (path.empty()) return;
  const auto parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  out_.open(path, std::ios::out | std::ios::trunc);
  if (!out_) throw FormatError("cannot open run log " + path);
}

void RunLog::write(const std::string& type, nlohmann::json record) {
  if (!out_.is_open()) return;
  std::lock_guard lock(mutex_);
  record["type"] = type;
  record["seq"] = seq_++;
  out_ << record.dump() << '\n';
  out_.flush();
  if (!out_) throw FormatError("run log write failed");
}

}  // namespace segstitch::cli
