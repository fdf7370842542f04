#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "segstitch/consensus/graph.hpp"
#include "segstitch/scene.hpp"

namespace segstitch::cli {

/// Thrown for unreadable, unwritable or malformed files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DType : std::uint8_t { f32 = 0, u8 = 1, i32 = 2 };

std::size_t dtype_size(DType t);

/// "MIMG" | u16 version | u8 dtype | u8 rank | u32 dims[rank] | payload, all
/// little-endian, payload row-major.
struct TensorContainer {
  static constexpr std::uint16_t kVersion = 1;

  DType dtype = DType::f32;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> payload;  // little-endian element bytes

  std::size_t elements() const;
  void validate() const;

  static TensorContainer from_f32(std::vector<std::uint32_t> dims, std::span<const float> values);
  static TensorContainer from_u8(std::vector<std::uint32_t> dims, std::span<const std::uint8_t> values);
  static TensorContainer from_i32(std::vector<std::uint32_t> dims, std::span<const std::int32_t> values);
  std::vector<float> to_f32() const;
  std::vector<std::uint8_t> to_u8() const;
  std::vector<std::int32_t> to_i32() const;

  friend bool operator==(const TensorContainer&, const TensorContainer&) = default;
};

std::vector<std::uint8_t> encode_tensor(const TensorContainer& t);
TensorContainer decode_tensor(std::span<const std::uint8_t> bytes);
void write_tensor(const std::filesystem::path& path, const TensorContainer& t);
TensorContainer read_tensor(const std::filesystem::path& path);

/// Image -> f32 [H, W, C]; LabelMap -> i32 [H, W]; MixingStack -> f32 [K+1, H, W].
TensorContainer to_tensor(const Image& image);
TensorContainer to_tensor(const LabelMap& labels);
TensorContainer to_tensor(const MixingStack& pi);
Image image_from_tensor(const TensorContainer& t);
LabelMap labels_from_tensor(const TensorContainer& t);
MixingStack stack_from_tensor(const TensorContainer& t);

/// Grayscale PNG at 8 or 16 bits; values are clamped to [0, 1]. Only the
/// first channel is written.
void write_gray_png(const std::filesystem::path& path, const Image& image, int bit_depth = 16);
std::vector<std::uint8_t> encode_gray_png(const Image& image, int bit_depth = 16);
/// Reads 8- or 16-bit grayscale into [0, 1].
Image read_gray_png(const std::filesystem::path& path);
Image decode_gray_png(std::span<const std::uint8_t> bytes);

/// 32-bit labels as 8-bit RGBA: R is the low byte, A the high byte.
void write_label_png(const std::filesystem::path& path, const LabelMap& labels);
LabelMap read_label_png(const std::filesystem::path& path);

/// 8-byte magic, then (u32 i, u32 j, f32 w) per edge, sorted by (i, j).
inline constexpr char kEdgeMagic[8] = {'S', 'S', 'E', 'D', 'G', 'E', '0', '1'};
void write_edges(const std::filesystem::path& path, const EdgeList& edges);
EdgeList read_edges(const std::filesystem::path& path);

/// {"height", "width", "runs": [[label, length], ...]} over the row-major scan.
nlohmann::json labels_to_rle(const LabelMap& labels);
LabelMap labels_from_rle(const nlohmann::json& j);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, const std::string& text);

/// FNV-1a 64 of the bytes, as 16 hex digits.
std::string checksum(std::span<const std::uint8_t> bytes);

}  // namespace segstitch::cli
