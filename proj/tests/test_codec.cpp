#include "mkmr/codec.hpp"

#include <gtest/gtest.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

namespace mkmr {
namespace {

const FieldParams kField = FieldParams::default_params();

GrayImage random_image(std::uint32_t r, std::uint32_t c, std::uint64_t seed) {
  GrayImage img;
  img.rows = r;
  img.cols = c;
  img.pixels.resize(std::size_t{r} * c);
  std::mt19937_64 gen(seed);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(gen());
  return img;
}

int circular_error(std::uint8_t a, std::uint8_t b) {
  const int d = std::abs(static_cast<int>(a) - static_cast<int>(b));
  return std::min(d, 256 - d);
}

TEST(WindowWidth, FollowsBitLengthOfModulus) {
  EXPECT_EQ(window_width(FieldParams::default_params()), 3u);       // 31-bit q
  EXPECT_EQ(window_width(FieldParams::make(1048573)), 2u);          // 2^20 - 3
  EXPECT_EQ(window_width(FieldParams::make(1099511627689ull)), 4u); // 2^40 - 87
}

TEST(Encode, PacksWindowsBigEndianWithWrapAround) {
  GrayImage img;
  img.rows = 1;
  img.cols = 3;
  img.pixels = {1, 2, 3};
  const WindowStream ws = encode_image(img, 3);
  ASSERT_EQ(ws.elems.size(), 3u);
  EXPECT_EQ(ws.elems[0].value, 0x010203u);
  EXPECT_EQ(ws.elems[1].value, 0x020301u);
  EXPECT_EQ(ws.elems[2].value, 0x030102u);

  img.pixels = {0, 0, 0};
  const WindowStream zero = encode_image(img, 3);
  for (const auto& e : zero.elems) EXPECT_EQ(e.value, 0u);
}

TEST(Encode, StreamLengthEqualsPixelCountAndValuesFitWindow) {
  const GrayImage img = random_image(9, 17, 1);
  const WindowStream ws = encode_image(img, 3);
  EXPECT_EQ(ws.elems.size(), img.pixels.size());
  for (const auto& e : ws.elems) EXPECT_LT(e.value, 1u << 24);
}

TEST(Encode, EveryPixelSitsInEachWindowPosition) {
  const GrayImage img = random_image(4, 11, 2);
  const std::size_t t = 3;
  const WindowStream ws = encode_image(img, t);
  for (std::uint32_t y = 0; y < img.rows; ++y) {
    for (std::uint32_t x = 0; x < img.cols; ++x) {
      for (std::size_t u = 0; u < t; ++u) {
        const std::uint32_t start = (x + img.cols - static_cast<std::uint32_t>(u)) % img.cols;
        const std::uint64_t elem = ws.elems[std::size_t{y} * img.cols + start].value;
        const std::uint8_t byte = static_cast<std::uint8_t>(elem >> (8 * (t - 1 - u)));
        EXPECT_EQ(byte, img.at(y, x)) << "pixel (" << y << "," << x << ") position " << u;
      }
    }
  }
}

TEST(Encode, ValidatesArguments) {
  GrayImage img = random_image(2, 2, 3);
  EXPECT_THROW(encode_image(img, 3), std::invalid_argument);  // row shorter than window
  EXPECT_THROW(encode_image(img, 0), std::invalid_argument);
  img.pixels.pop_back();
  EXPECT_THROW(encode_image(img, 2), std::invalid_argument);  // buffer size mismatch
}

TEST(Decode, ExactInverseWithoutNoise) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const GrayImage img = random_image(16, 16, seed);
    EXPECT_EQ(decode_stream(encode_image(img, 3), kField), img) << "seed " << seed;
  }
}

TEST(Decode, ToleratesSupportBoundNoiseWithinOnePixelStep) {
  std::mt19937_64 gen(77);
  const GrayImage img = random_image(8, 16, 4);
  WindowStream ws = encode_image(img, 3);
  for (auto& e : ws.elems) {
    const std::int64_t noise = static_cast<std::int64_t>(gen() % 41) - 20;
    e = kField.add(e, kField.from_centered(noise));
  }
  const GrayImage dec = decode_stream(ws, kField);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    ASSERT_LE(circular_error(dec.pixels[i], img.pixels[i]), 1) << "pixel " << i;
  }
}

TEST(Decode, ToleratesFullByteNoiseWithinOnePixelStep) {
  // the guarantee holds for any |e| <= 255, not just the sampler's support
  std::mt19937_64 gen(78);
  const GrayImage img = random_image(8, 16, 5);
  WindowStream ws = encode_image(img, 3);
  for (auto& e : ws.elems) {
    const std::int64_t noise = static_cast<std::int64_t>(gen() % 511) - 255;
    e = kField.add(e, kField.from_centered(noise));
  }
  const GrayImage dec = decode_stream(ws, kField);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    ASSERT_LE(circular_error(dec.pixels[i], img.pixels[i]), 1) << "pixel " << i;
  }
}

TEST(Decode, NegativeCenteredValueClampsToZero) {
  WindowStream ws;
  ws.rows = 1;
  ws.cols = 3;
  ws.t = 3;
  ws.elems.assign(3, kField.from_centered(-5));  // all-zero window plus e = -5
  const GrayImage dec = decode_stream(ws, kField);
  for (const auto p : dec.pixels) EXPECT_EQ(p, 0);
}

TEST(Decode, TwoByteWindowFallsBackToTopByte) {
  const FieldParams narrow = FieldParams::make(1048573);
  GrayImage img;
  img.rows = 1;
  img.cols = 4;
  img.pixels = {10, 200, 30, 250};
  const WindowStream ws = encode_image(img, window_width(narrow));
  ASSERT_EQ(ws.t, 2u);
  EXPECT_EQ(decode_stream(ws, narrow), img);
}

TEST(Decode, ValidatesShape) {
  WindowStream ws;
  ws.rows = 2;
  ws.cols = 4;
  ws.t = 3;
  ws.elems.resize(7);  // should be 8
  EXPECT_THROW((void)decode_stream(ws, kField), std::invalid_argument);
  ws.elems.resize(8);
  ws.t = 5;  // wider than the row
  EXPECT_THROW((void)decode_stream(ws, kField), std::invalid_argument);
}

TEST(DecodeVote, AgreesOnCleanInputAndOutvotesOneBadElement) {
  const GrayImage img = random_image(6, 12, 6);
  const WindowStream clean = encode_image(img, 3);
  EXPECT_EQ(decode_stream_vote(clean, kField), decode_stream(clean, kField));

  // wreck a single element; the majority of each affected pixel's three
  // windows is still intact
  WindowStream dirty = clean;
  dirty.elems[14] = kField.add(dirty.elems[14], FieldElement{kField.q / 3});
  EXPECT_EQ(decode_stream_vote(dirty, kField), img);
  EXPECT_NE(decode_stream(dirty, kField), img);
}

TEST(PackMessages, LaysOutPayloadPaddingAndDecoys) {
  Rng rng(Seed::from_u64(1));
  std::vector<std::vector<FieldElement>> streams{
      {FieldElement{5}, FieldElement{6}, FieldElement{7}},
      {FieldElement{9}},
  };
  const MessageMatrix M = pack_messages(kField, streams, 4, rng);
  EXPECT_EQ(M.l, 3u);
  EXPECT_EQ(M.at(0, 0).value, 5u);
  EXPECT_EQ(M.at(0, 2).value, 7u);
  EXPECT_EQ(M.at(1, 0).value, 9u);
  EXPECT_EQ(M.lengths, (std::vector<std::uint32_t>{3, 1, 0, 0}));
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 4; ++j) EXPECT_LT(M.at(j, i).value, kField.q);
  }
}

TEST(PackMessages, EqualLengthStreamsFillLedgerWithL) {
  Rng rng(Seed::from_u64(2));
  std::vector<std::vector<FieldElement>> streams{
      {FieldElement{1}, FieldElement{2}},
      {FieldElement{3}, FieldElement{4}},
  };
  const MessageMatrix M = pack_messages(kField, streams, 2, rng);
  EXPECT_EQ(M.lengths, (std::vector<std::uint32_t>{2, 2}));
}

TEST(PackMessages, ZeroStreamsNeedExplicitLength) {
  Rng a(Seed::from_u64(3)), b(Seed::from_u64(4));
  const std::span<const std::vector<FieldElement>> none;
  EXPECT_THROW((void)pack_messages(kField, none, 3, a), std::invalid_argument);
  const MessageMatrix Ma = pack_messages(kField, none, 3, a, 16);
  const MessageMatrix Mb = pack_messages(kField, none, 3, b, 16);
  EXPECT_EQ(Ma.l, 16u);
  EXPECT_NE(Ma.entries, Mb.entries);  // different seeds, different fill
  EXPECT_EQ(Ma.lengths, (std::vector<std::uint32_t>{0, 0, 0}));
}

TEST(PackMessages, ValidatesArguments) {
  Rng rng(Seed::from_u64(5));
  std::vector<std::vector<FieldElement>> three(3, std::vector<FieldElement>{FieldElement{1}});
  EXPECT_THROW((void)pack_messages(kField, three, 2, rng), std::invalid_argument);

  std::vector<std::vector<FieldElement>> big{{FieldElement{kField.q}}};
  EXPECT_THROW((void)pack_messages(kField, big, 2, rng), std::invalid_argument);

  std::vector<std::vector<FieldElement>> two{{FieldElement{1}, FieldElement{2}}};
  EXPECT_THROW((void)pack_messages(kField, two, 2, rng, 1), std::invalid_argument);
}

class CodecFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() / "mkmr_codec_test";
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

TEST_F(CodecFiles, PgmRoundTrip) {
  const GrayImage img = random_image(13, 21, 7);
  const auto path = dir_ / "img.pgm";
  write_pgm(path, img);
  EXPECT_EQ(read_pgm(path), img);
}

TEST_F(CodecFiles, PgmHeaderCommentsAndErrors) {
  const auto path = dir_ / "crafted.pgm";
  {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n# a comment line\n 2 # trailing\n2\n255\n";
    out.write("\x01\x02\x03\x04", 4);
  }
  const GrayImage img = read_pgm(path);
  EXPECT_EQ(img.rows, 2u);
  EXPECT_EQ(img.cols, 2u);
  EXPECT_EQ(img.pixels, (std::vector<std::uint8_t>{1, 2, 3, 4}));

  {
    std::ofstream out(dir_ / "ascii.pgm", std::ios::binary);
    out << "P2\n2 2\n255\n1 2 3 4\n";
  }
  EXPECT_THROW((void)read_pgm(dir_ / "ascii.pgm"), std::runtime_error);

  {
    std::ofstream out(dir_ / "deep.pgm", std::ios::binary);
    out << "P5\n2 2\n65535\n";
    out.write("\0\1\0\2\0\3\0\4", 8);
  }
  EXPECT_THROW((void)read_pgm(dir_ / "deep.pgm"), std::runtime_error);

  {
    std::ofstream out(dir_ / "short.pgm", std::ios::binary);
    out << "P5\n4 4\n255\n";
    out.write("\x01\x02", 2);
  }
  EXPECT_THROW((void)read_pgm(dir_ / "short.pgm"), std::runtime_error);
}

TEST_F(CodecFiles, RawRoundTripAndTruncation) {
  const GrayImage img = random_image(5, 8, 8);
  const auto path = dir_ / "img.raw";
  write_raw_image(path, img);
  EXPECT_EQ(read_raw_image(path), img);

  auto bytes = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, bytes - 3);
  EXPECT_THROW((void)read_raw_image(path), std::runtime_error);
}

}  // namespace
}  // namespace mkmr
