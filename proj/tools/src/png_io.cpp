#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "segstitch/cli/formats.hpp"

namespace segstitch::cli {

namespace {

struct WriteBuffer {
  std::vector<std::uint8_t> bytes;
};

void on_write(png_structp png, png_bytep data, png_size_t length) {
  auto* buf = static_cast<WriteBuffer*>(png_get_io_ptr(png));
  buf->bytes.insert(buf->bytes.end(), data, data + length);
}

void on_flush(png_structp) {}

struct ReadBuffer {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

void on_read(png_structp png, png_bytep data, png_size_t length) {
  auto* buf = static_cast<ReadBuffer*>(png_get_io_ptr(png));
  if (buf->offset + length > buf->bytes.size()) png_error(png, "truncated data");
  std::memcpy(data, buf->bytes.data() + buf->offset, length);
  buf->offset += length;
}

struct ErrorSink {
  char message[256] = {};
};

[[noreturn]] void on_error(png_structp png, png_const_charp msg) {
  auto* sink = static_cast<ErrorSink*>(png_get_error_ptr(png));
  std::snprintf(sink->message, sizeof sink->message, "%s", msg);
  png_longjmp(png, 1);
}

void on_warning(png_structp, png_const_charp) {}

// libpng reports errors by longjmp; keep these frames free of objects that
// are constructed after setjmp.
bool encode_rows(int width, int height, int bit_depth, int color_type, const std::uint8_t* rows, std::size_t stride,
                 WriteBuffer* buf, ErrorSink* sink) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, sink, on_error, on_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, buf, on_write, on_flush);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) png_write_row(png, const_cast<png_bytep>(rows + static_cast<std::size_t>(y) * stride));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

std::vector<std::uint8_t> encode(int width, int height, int bit_depth, int color_type, int bytes_per_px,
                                 const std::vector<std::uint8_t>& rows) {
  WriteBuffer buf;
  ErrorSink sink;
  if (!encode_rows(width, height, bit_depth, color_type, rows.data(), static_cast<std::size_t>(width) * bytes_per_px,
                   &buf, &sink))
    throw FormatError(std::string("png: ") + sink.message);
  return std::move(buf.bytes);
}

struct Decoded {
  int width = 0;
  int height = 0;
  int bit_depth = 0;
  int color_type = 0;
  std::vector<std::uint8_t> rows;
  std::size_t stride = 0;
};

constexpr std::size_t kMaxPixels = std::size_t{1} << 30;

bool decode_rows(ReadBuffer* buf, Decoded* d, ErrorSink* sink) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, sink, on_error, on_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, buf, on_read);
  png_read_info(png, info);
  d->width = static_cast<int>(png_get_image_width(png, info));
  d->height = static_cast<int>(png_get_image_height(png, info));
  if (png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);
  d->bit_depth = png_get_bit_depth(png, info);
  d->color_type = png_get_color_type(png, info);
  d->stride = png_get_rowbytes(png, info);
  if (static_cast<std::size_t>(d->width) * static_cast<std::size_t>(d->height) > kMaxPixels) {
    std::snprintf(sink->message, sizeof sink->message, "%s", "image too large");
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  d->rows.resize(d->stride * static_cast<std::size_t>(d->height));
  for (int y = 0; y < d->height; ++y) png_read_row(png, d->rows.data() + static_cast<std::size_t>(y) * d->stride, nullptr);
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

Decoded decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw FormatError("png: bad signature");
  ReadBuffer buf{bytes, 0};
  Decoded d;
  ErrorSink sink;
  if (!decode_rows(&buf, &d, &sink)) throw FormatError(std::string("png: ") + sink.message);
  return d;
}

}  // namespace

std::vector<std::uint8_t> encode_gray_png(const Image& image, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw FormatError("png: bit depth must be 8 or 16");
  const int bpp = bit_depth / 8;
  const double top = bit_depth == 8 ? 255.0 : 65535.0;
  std::vector<std::uint8_t> rows(static_cast<std::size_t>(image.height()) * image.width() * bpp);
  std::size_t o = 0;
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x) {
      const auto v = static_cast<std::uint32_t>(std::lround(std::clamp(image(y, x, 0), 0.0, 1.0) * top));
      if (bpp == 2) rows[o++] = static_cast<std::uint8_t>(v >> 8);  // PNG samples are big-endian
      rows[o++] = static_cast<std::uint8_t>(v & 0xff);
    }
  return encode(image.width(), image.height(), bit_depth, PNG_COLOR_TYPE_GRAY, bpp, rows);
}

void write_gray_png(const std::filesystem::path& path, const Image& image, int bit_depth) {
  write_file(path, encode_gray_png(image, bit_depth));
}

Image decode_gray_png(std::span<const std::uint8_t> bytes) {
  const Decoded d = decode(bytes);
  if (d.color_type != PNG_COLOR_TYPE_GRAY) throw FormatError("png: expected a grayscale image");
  Image img(d.height, d.width, 1);
  const double top = d.bit_depth == 16 ? 65535.0 : 255.0;
  for (int y = 0; y < d.height; ++y) {
    const auto* row = d.rows.data() + static_cast<std::size_t>(y) * d.stride;
    for (int x = 0; x < d.width; ++x) {
      const unsigned v = d.bit_depth == 16 ? (row[2 * x] << 8) | row[2 * x + 1] : row[x];
      img(y, x) = v / top;
    }
  }
  return img;
}

Image read_gray_png(const std::filesystem::path& path) { return decode_gray_png(read_file(path)); }

void write_label_png(const std::filesystem::path& path, const LabelMap& labels) {
  std::vector<std::uint8_t> rows;
  rows.reserve(labels.size() * 4);
  for (auto v : labels.values()) {
    const auto u = static_cast<std::uint32_t>(v);
    for (int b = 0; b < 4; ++b) rows.push_back(static_cast<std::uint8_t>(u >> (8 * b)));
  }
  write_file(path, encode(labels.cols(), labels.rows(), 8, PNG_COLOR_TYPE_RGBA, 4, rows));
}

LabelMap read_label_png(const std::filesystem::path& path) {
  const Decoded d = decode(read_file(path));
  if (d.color_type != PNG_COLOR_TYPE_RGBA || d.bit_depth != 8) throw FormatError("png: expected 8-bit RGBA labels");
  LabelMap out(d.height, d.width, 0);
  for (int y = 0; y < d.height; ++y) {
    const auto* row = d.rows.data() + static_cast<std::size_t>(y) * d.stride;
    for (int x = 0; x < d.width; ++x) {
      std::uint32_t u = 0;
      for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(row[4 * x + b]) << (8 * b);
      out(y, x) = static_cast<std::int32_t>(u);
    }
  }
  return out;
}

}  // namespace segstitch::cli
