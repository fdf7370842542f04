#include <gtest/gtest.h>

#include <filesystem>
#include <string_view>

#include "segstitch/cli/formats.hpp"
#include "segstitch/rng.hpp"

namespace segstitch::cli {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "segstitch_formats_test";
  fs::create_directories(dir);
  return dir / name;
}

std::vector<std::uint8_t> bytes_of(std::string_view s) { return {s.begin(), s.end()}; }

TEST(Tensor, RoundTripsEveryDtype) {
  const std::vector<float> f{0.0f, -1.5f, 3.25f, 1e-7f, 7.0f, 8.0f};
  const std::vector<std::uint8_t> u{0, 1, 2, 254, 255, 7};
  const std::vector<std::int32_t> i{0, -1, 2147483647, -2147483647 - 1, 5, 6};
  for (const auto& t : {TensorContainer::from_f32({2, 3}, f), TensorContainer::from_u8({3, 2}, u),
                        TensorContainer::from_i32({6}, i)}) {
    const auto back = decode_tensor(encode_tensor(t));
    EXPECT_EQ(back, t);
  }
  EXPECT_EQ(decode_tensor(encode_tensor(TensorContainer::from_f32({2, 3}, f))).to_f32(), f);
  EXPECT_EQ(decode_tensor(encode_tensor(TensorContainer::from_u8({3, 2}, u))).to_u8(), u);
  EXPECT_EQ(decode_tensor(encode_tensor(TensorContainer::from_i32({6}, i))).to_i32(), i);
}

TEST(Tensor, HeaderIsLittleEndian) {
  const auto bytes = encode_tensor(TensorContainer::from_i32({1}, std::vector<std::int32_t>{0x01020304}));
  ASSERT_EQ(bytes.size(), 4u + 2 + 1 + 1 + 4 + 4);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "MIMG");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5], 0);
  EXPECT_EQ(bytes[6], static_cast<std::uint8_t>(DType::i32));
  EXPECT_EQ(bytes[7], 1);
  EXPECT_EQ(bytes[12], 0x04);
  EXPECT_EQ(bytes[15], 0x01);
}

TEST(Tensor, RejectsCorruptInput) {
  const auto good = encode_tensor(TensorContainer::from_f32({2, 2}, std::vector<float>{1, 2, 3, 4}));
  auto bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_tensor(bad_magic), FormatError);
  auto bad_version = good;
  bad_version[4] = 9;
  EXPECT_THROW(decode_tensor(bad_version), FormatError);
  auto bad_dtype = good;
  bad_dtype[6] = 17;
  EXPECT_THROW(decode_tensor(bad_dtype), FormatError);
  const std::vector<std::uint8_t> truncated(good.begin(), good.end() - 1);
  EXPECT_THROW(decode_tensor(truncated), FormatError);
  auto trailing = good;
  trailing.push_back(0);
  EXPECT_THROW(decode_tensor(trailing), FormatError);
  EXPECT_THROW(decode_tensor(std::vector<std::uint8_t>{}), FormatError);
  EXPECT_THROW(read_tensor(scratch("absent.mimg")), FormatError);
}

TEST(Tensor, SceneObjectsRoundTrip) {
  Image img(3, 4, 2);
  for (std::size_t k = 0; k < img.size(); ++k) img.values()[k] = 0.125 * static_cast<double>(k);
  EXPECT_EQ(image_from_tensor(to_tensor(img)), img);

  LabelMap labels(2, 3, 0);
  labels(1, 2) = 70000;
  labels(0, 1) = 3;
  EXPECT_EQ(labels_from_tensor(to_tensor(labels)), labels);

  Array2D<double> a(2, 2, 0.5);
  a(0, 0) = 0.25;
  const std::vector<Array2D<double>> planes{a};
  const MixingStack pi = mix(planes, 2, 2);
  const MixingStack back = stack_from_tensor(to_tensor(pi));
  ASSERT_EQ(back.instances(), 1);
  for (int k = 0; k <= 1; ++k)
    for (int y = 0; y < 2; ++y)
      for (int x = 0; x < 2; ++x) EXPECT_NEAR(back.at(k, y, x), pi.at(k, y, x), 1e-7);
}

TEST(Png, SixteenBitRoundTripIsExactOnTheGrid) {
  Image img(5, 7);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 7; ++x) img(y, x) = static_cast<double>(y * 7 + x) * 1000.0 / 65535.0;
  const auto path = scratch("g16.png");
  write_gray_png(path, img, 16);
  const Image back = read_gray_png(path);
  ASSERT_EQ(back.height(), 5);
  ASSERT_EQ(back.width(), 7);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 7; ++x) EXPECT_NEAR(back(y, x), img(y, x), 1e-12);
}

TEST(Png, EightBitQuantizesAndClamps) {
  Image img(1, 4);
  img(0, 0) = -0.5;
  img(0, 1) = 0.5;
  img(0, 2) = 1.0;
  img(0, 3) = 2.0;
  const Image back = decode_gray_png(encode_gray_png(img, 8));
  EXPECT_EQ(back(0, 0), 0.0);
  EXPECT_NEAR(back(0, 1), 0.5, 0.5 / 255.0 + 1e-12);
  EXPECT_EQ(back(0, 2), 1.0);
  EXPECT_EQ(back(0, 3), 1.0);
  EXPECT_THROW(encode_gray_png(img, 12), FormatError);
  EXPECT_THROW(decode_gray_png(bytes_of("not a png")), FormatError);
}

TEST(Png, LabelRoundTripCoversAllBytes) {
  LabelMap labels(2, 3, 0);
  labels(0, 1) = 255;
  labels(0, 2) = 256;
  labels(1, 0) = 0x00ABCDEF;
  labels(1, 2) = 0x12345678;
  const auto path = scratch("labels.png");
  write_label_png(path, labels);
  EXPECT_EQ(read_label_png(path), labels);
}

TEST(Edges, RoundTripSortsByEndpoints) {
  const EdgeList edges{{4, 9, 0.5}, {0, 1, 0.25}, {0, 3, 1.0}};
  const auto path = scratch("g.edges");
  write_edges(path, edges);
  const auto back = read_edges(path);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[0].i, 0u);
  EXPECT_EQ(back[0].j, 1u);
  EXPECT_EQ(back[1].j, 3u);
  EXPECT_EQ(back[2].i, 4u);
  EXPECT_FLOAT_EQ(static_cast<float>(back[2].w), 0.5f);
  const auto raw = read_file(path);
  EXPECT_EQ(std::string(raw.begin(), raw.begin() + 8), "SSEDGE01");
  EXPECT_EQ(raw.size(), 8u + 3 * 12);
  write_text(path, "SSEDGE01xyz");
  EXPECT_THROW(read_edges(path), FormatError);
}

TEST(Rle, RoundTripAndLayout) {
  LabelMap labels(2, 3, 0);
  labels(0, 2) = 4;
  labels(1, 0) = 4;
  labels(1, 1) = 2;
  const auto j = labels_to_rle(labels);
  EXPECT_EQ(j.at("height"), 2);
  EXPECT_EQ(j.at("width"), 3);
  EXPECT_EQ(j.at("runs"), nlohmann::json::parse("[[0,2],[4,2],[2,1],[0,1]]"));
  EXPECT_EQ(labels_from_rle(j), labels);
  auto short_runs = j;
  short_runs["runs"] = nlohmann::json::parse("[[0,5]]");
  EXPECT_THROW(labels_from_rle(short_runs), FormatError);
}

TEST(Checksum, MatchesFnv1aReference) {
  EXPECT_EQ(checksum(bytes_of("")), "cbf29ce484222325");
  EXPECT_EQ(checksum(bytes_of("a")), "af63dc4c8601ec8c");
  EXPECT_NE(checksum(bytes_of("ab")), checksum(bytes_of("ba")));
}

}  // namespace
}  // namespace segstitch::cli
