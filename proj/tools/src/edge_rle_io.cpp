#include <algorithm>
#include <bit>
#include <cstring>

#include "segstitch/cli/formats.hpp"

namespace segstitch::cli {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(p[b]) << (8 * b);
  return v;
}

}  // namespace

void write_edges(const std::filesystem::path& path, const EdgeList& edges) {
  std::vector<std::uint8_t> out(kEdgeMagic, kEdgeMagic + 8);
  out.reserve(8 + 12 * edges.size());
  EdgeList sorted = edges;
  std::sort(sorted.begin(), sorted.end(), [](const Edge& a, const Edge& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  for (const auto& e : sorted) {
    put_u32(out, e.i);
    put_u32(out, e.j);
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(e.w)));
  }
  write_file(path, out);
}

EdgeList read_edges(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kEdgeMagic, 8) != 0) throw FormatError("edges: bad magic");
  if ((bytes.size() - 8) % 12 != 0) throw FormatError("edges: truncated triplet");
  EdgeList edges;
  edges.reserve((bytes.size() - 8) / 12);
  for (std::size_t o = 8; o < bytes.size(); o += 12)
    edges.push_back({get_u32(&bytes[o]), get_u32(&bytes[o + 4]), std::bit_cast<float>(get_u32(&bytes[o + 8]))});
  return edges;
}

nlohmann::json labels_to_rle(const LabelMap& labels) {
  nlohmann::json runs = nlohmann::json::array();
  const auto v = labels.values();
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    runs.push_back({v[i], j - i});
    i = j;
  }
  return {{"height", labels.rows()}, {"width", labels.cols()}, {"runs", std::move(runs)}};
}

LabelMap labels_from_rle(const nlohmann::json& j) {
  try {
    const int h = j.at("height").get<int>();
    const int w = j.at("width").get<int>();
    if (h < 0 || w < 0) throw FormatError("rle: negative extent");
    LabelMap out(h, w, 0);
    std::size_t o = 0;
    for (const auto& run : j.at("runs")) {
      const auto label = run.at(0).get<std::int32_t>();
      const auto n = run.at(1).get<std::size_t>();
      if (o + n > out.size()) throw FormatError("rle: runs exceed the label map");
      std::fill_n(out.values().begin() + static_cast<std::ptrdiff_t>(o), n, label);
      o += n;
    }
    if (o != out.size()) throw FormatError("rle: runs do not cover the label map");
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("rle: ") + e.what());
  }
}

}  // namespace segstitch::cli
