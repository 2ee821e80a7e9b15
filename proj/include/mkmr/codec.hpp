#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "mkmr/field.hpp"
#include "mkmr/rng.hpp"
#include "mkmr/scheme.hpp"

namespace mkmr {

/// 8-bit grayscale, row-major.
struct GrayImage {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(std::uint32_t y, std::uint32_t x) const { return pixels[std::size_t{y} * cols + x]; }
  std::uint8_t& at(std::uint32_t y, std::uint32_t x) { return pixels[std::size_t{y} * cols + x]; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

/// One field element per pixel position: the t-pixel window starting there,
/// packed big-endian with wrap-around at the row end.
struct WindowStream {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::size_t t = 0;
  std::vector<FieldElement> elems;  // length rows*cols, row 0 positions 0..c-1 first
};

/// Window width in pixels: one byte per pixel, as many whole bytes as fit
/// strictly inside log2(q). Requires q >= 2^16 so at least two bytes fit.
std::size_t window_width(const FieldParams& field);

/// Element at (y, x) packs pixels (y, x), (y, x+1 mod c), ..., first pixel
/// most significant. Every packed value is < 2^(8t).
WindowStream encode_image(const GrayImage& img, std::size_t t);

/// Inverse of encode_image, tolerant of small additive noise: each pixel is
/// read from the second-most-significant byte of the window in which it sits
/// second. Centered values are clamped to [0, 2^(8t)) first. For t = 2 the
/// top byte of the pixel's own window is used instead (no middle position
/// exists).
GrayImage decode_stream(const WindowStream& ws, const FieldParams& field);

/// Diagnostic decode: every pixel appears in t windows; take the majority
/// byte across all of them (ties fall back to the decode_stream choice).
/// Agrees with decode_stream exactly on noiseless input.
GrayImage decode_stream_vote(const WindowStream& ws, const FieldParams& field);

/// Lay out up to m payload streams as rows 0..k-1 of an m x l message
/// matrix, padding short rows with uniform field elements and filling the
/// remaining rows entirely with them. l defaults to the longest stream;
/// pass it explicitly when streams is empty.
MessageMatrix pack_messages(const FieldParams& field,
                            std::span<const std::vector<FieldElement>> streams, std::size_t m,
                            Rng& rng, std::optional<std::size_t> l = std::nullopt);

// Image files: binary PGM (P5, maxval 255) and a raw format with an 8-byte
// header (rows u32 LE, cols u32 LE) followed by rows*cols pixel bytes.
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);
GrayImage read_raw_image(const std::filesystem::path& path);
void write_raw_image(const std::filesystem::path& path, const GrayImage& img);

}  // namespace mkmr
