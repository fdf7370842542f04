#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "segstitch/cli/formats.hpp"

namespace segstitch::cli {

namespace {

constexpr char kMagic[4] = {'M', 'I', 'M', 'G'};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  using U = std::make_unsigned_t<std::conditional_t<std::is_floating_point_v<T>, std::uint32_t, T>>;
  U bits;
  if constexpr (std::is_floating_point_v<T>) {
    bits = std::bit_cast<std::uint32_t>(value);
  } else {
    bits = static_cast<U>(value);
  }
  for (std::size_t b = 0; b < sizeof(U); ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
}

template <typename U>
U get_le(std::span<const std::uint8_t> in, std::size_t offset) {
  U v = 0;
  for (std::size_t b = 0; b < sizeof(U); ++b) v |= static_cast<U>(static_cast<U>(in[offset + b]) << (8 * b));
  return v;
}

void check_payload(const TensorContainer& t, DType want) {
  t.validate();
  if (t.dtype != want) throw FormatError("tensor: unexpected dtype");
}

}  // namespace

std::size_t dtype_size(DType t) {
  switch (t) {
    case DType::f32: return 4;
    case DType::u8: return 1;
    case DType::i32: return 4;
  }
  throw FormatError("tensor: unknown dtype");
}

std::size_t TensorContainer::elements() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

void TensorContainer::validate() const {
  if (dims.size() > 255) throw FormatError("tensor: rank above 255");
  if (payload.size() != elements() * dtype_size(dtype)) throw FormatError("tensor: payload length does not match dims");
}

TensorContainer TensorContainer::from_f32(std::vector<std::uint32_t> dims, std::span<const float> values) {
  TensorContainer t{DType::f32, std::move(dims), {}};
  t.payload.reserve(values.size() * 4);
  for (float v : values) put_le(t.payload, v);
  t.validate();
  return t;
}

TensorContainer TensorContainer::from_u8(std::vector<std::uint32_t> dims, std::span<const std::uint8_t> values) {
  TensorContainer t{DType::u8, std::move(dims), {values.begin(), values.end()}};
  t.validate();
  return t;
}

TensorContainer TensorContainer::from_i32(std::vector<std::uint32_t> dims, std::span<const std::int32_t> values) {
  TensorContainer t{DType::i32, std::move(dims), {}};
  t.payload.reserve(values.size() * 4);
  for (auto v : values) put_le(t.payload, static_cast<std::uint32_t>(v));
  t.validate();
  return t;
}

std::vector<float> TensorContainer::to_f32() const {
  check_payload(*this, DType::f32);
  std::vector<float> out(elements());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::bit_cast<float>(get_le<std::uint32_t>(payload, 4 * i));
  return out;
}

std::vector<std::uint8_t> TensorContainer::to_u8() const {
  check_payload(*this, DType::u8);
  return payload;
}

std::vector<std::int32_t> TensorContainer::to_i32() const {
  check_payload(*this, DType::i32);
  std::vector<std::int32_t> out(elements());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<std::int32_t>(get_le<std::uint32_t>(payload, 4 * i));
  return out;
}

std::vector<std::uint8_t> encode_tensor(const TensorContainer& t) {
  t.validate();
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put_le(out, TensorContainer::kVersion);
  out.push_back(static_cast<std::uint8_t>(t.dtype));
  out.push_back(static_cast<std::uint8_t>(t.dims.size()));
  for (auto d : t.dims) put_le(out, d);
  out.insert(out.end(), t.payload.begin(), t.payload.end());
  return out;
}

TensorContainer decode_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("tensor: bad magic");
  if (get_le<std::uint16_t>(bytes, 4) != TensorContainer::kVersion) throw FormatError("tensor: unsupported version");
  const auto code = bytes[6];
  if (code > static_cast<std::uint8_t>(DType::i32)) throw FormatError("tensor: unknown dtype");
  TensorContainer t;
  t.dtype = static_cast<DType>(code);
  const std::size_t rank = bytes[7];
  if (bytes.size() < 8 + 4 * rank) throw FormatError("tensor: truncated header");
  for (std::size_t r = 0; r < rank; ++r) t.dims.push_back(get_le<std::uint32_t>(bytes, 8 + 4 * r));
  t.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(8 + 4 * rank), bytes.end());
  t.validate();
  return t;
}

void write_tensor(const std::filesystem::path& path, const TensorContainer& t) { write_file(path, encode_tensor(t)); }

TensorContainer read_tensor(const std::filesystem::path& path) { return decode_tensor(read_file(path)); }

TensorContainer to_tensor(const Image& image) {
  std::vector<float> v(image.values().begin(), image.values().end());
  return TensorContainer::from_f32({static_cast<std::uint32_t>(image.height()), static_cast<std::uint32_t>(image.width()),
                                    static_cast<std::uint32_t>(image.channels())},
                                   v);
}

TensorContainer to_tensor(const LabelMap& labels) {
  return TensorContainer::from_i32({static_cast<std::uint32_t>(labels.rows()), static_cast<std::uint32_t>(labels.cols())},
                                   labels.values());
}

TensorContainer to_tensor(const MixingStack& pi) {
  std::vector<float> v;
  v.reserve(pi.pixels() * static_cast<std::size_t>(pi.instances() + 1));
  for (int k = 0; k <= pi.instances(); ++k)
    for (double x : pi.plane(k)) v.push_back(static_cast<float>(x));
  return TensorContainer::from_f32({static_cast<std::uint32_t>(pi.instances() + 1), static_cast<std::uint32_t>(pi.height()),
                                    static_cast<std::uint32_t>(pi.width())},
                                   v);
}

Image image_from_tensor(const TensorContainer& t) {
  if (t.dims.size() != 3) throw FormatError("tensor: image needs rank 3 [H, W, C]");
  const auto v = t.to_f32();
  Image img(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]), static_cast<int>(t.dims[2]));
  std::copy(v.begin(), v.end(), img.values().begin());
  return img;
}

LabelMap labels_from_tensor(const TensorContainer& t) {
  if (t.dims.size() != 2) throw FormatError("tensor: labels need rank 2 [H, W]");
  const auto v = t.to_i32();
  LabelMap m(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]), 0);
  std::copy(v.begin(), v.end(), m.values().begin());
  return m;
}

MixingStack stack_from_tensor(const TensorContainer& t) {
  if (t.dims.size() != 3 || t.dims[0] < 1) throw FormatError("tensor: mixing stack needs rank 3 [K+1, H, W]");
  const auto v = t.to_f32();
  MixingStack pi(static_cast<int>(t.dims[0]) - 1, static_cast<int>(t.dims[1]), static_cast<int>(t.dims[2]));
  for (int k = 0; k <= pi.instances(); ++k) {
    auto plane = pi.plane(k);
    for (std::size_t p = 0; p < plane.size(); ++p) plane[p] = v[static_cast<std::size_t>(k) * plane.size() + p];
  }
  // Stored as f32, so allow single-precision rounding in the column sums.
  pi.validate(1e-5);
  return pi;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed for " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

std::string checksum(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace segstitch::cli
