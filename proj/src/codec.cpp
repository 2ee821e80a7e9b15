#include "mkmr/codec.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <fstream>
#include <stdexcept>
#include <string>

namespace mkmr {

namespace {

void check_image(const GrayImage& img) {
  if (img.rows < 1 || img.cols < 1) throw std::invalid_argument("image: empty");
  if (img.pixels.size() != std::size_t{img.rows} * img.cols) {
    throw std::invalid_argument("image: pixel buffer does not match dimensions");
  }
}

void check_stream(const WindowStream& ws) {
  if (ws.rows < 1 || ws.cols < 1) throw std::invalid_argument("stream: empty");
  if (ws.t < 1 || 8 * ws.t > 63) throw std::invalid_argument("stream: bad window width");
  if (ws.cols < ws.t) throw std::invalid_argument("stream: row shorter than window");
  if (ws.elems.size() != std::size_t{ws.rows} * ws.cols) {
    throw std::invalid_argument("stream: element count does not match dimensions");
  }
}

// Centered value clamped into the payload range [0, 2^(8t)).
std::uint64_t clamp_payload(const FieldParams& field, FieldElement e, std::size_t t) {
  const std::int64_t d = field.centered(e);
  const std::int64_t top = std::int64_t{1} << (8 * t);
  if (d < 0) return 0;
  if (d >= top) return static_cast<std::uint64_t>(top - 1);
  return static_cast<std::uint64_t>(d);
}

// Byte u of a t-byte big-endian value (u = 0 is most significant).
std::uint8_t byte_at(std::uint64_t value, std::size_t t, std::size_t u) {
  return static_cast<std::uint8_t>(value >> (8 * (t - 1 - u)));
}

}  // namespace

std::size_t window_width(const FieldParams& field) {
  const unsigned floor_log2 = std::bit_width(field.q) - 1;
  if (floor_log2 < 16) throw std::invalid_argument("window_width: q too small for a byte window");
  return floor_log2 / 8;
}

WindowStream encode_image(const GrayImage& img, std::size_t t) {
  check_image(img);
  if (t < 1 || 8 * t > 63) throw std::invalid_argument("encode_image: bad window width");
  if (img.cols < t) throw std::invalid_argument("encode_image: row shorter than window");

  WindowStream ws;
  ws.rows = img.rows;
  ws.cols = img.cols;
  ws.t = t;
  ws.elems.resize(img.pixels.size());
  for (std::uint32_t y = 0; y < img.rows; ++y) {
    for (std::uint32_t x = 0; x < img.cols; ++x) {
      std::uint64_t v = 0;
      for (std::size_t u = 0; u < t; ++u) {
        v = (v << 8) | img.at(y, (x + u) % img.cols);
      }
      ws.elems[std::size_t{y} * img.cols + x] = FieldElement{v};
    }
  }
  return ws;
}

GrayImage decode_stream(const WindowStream& ws, const FieldParams& field) {
  check_stream(ws);
  GrayImage img;
  img.rows = ws.rows;
  img.cols = ws.cols;
  img.pixels.resize(ws.elems.size());

  // A pixel sits second in the window starting one position to its left, so
  // it lands in the second-most-significant byte there. With only two bytes
  // per window that byte is the low one, so fall back to the top byte of the
  // pixel's own window.
  const bool middle = ws.t >= 3;
  for (std::uint32_t y = 0; y < ws.rows; ++y) {
    for (std::uint32_t x = 0; x < ws.cols; ++x) {
      const std::uint32_t start = middle ? (x + ws.cols - 1) % ws.cols : x;
      const std::uint64_t v = clamp_payload(field, ws.elems[std::size_t{y} * ws.cols + start], ws.t);
      img.at(y, x) = byte_at(v, ws.t, middle ? 1 : 0);
    }
  }
  return img;
}

GrayImage decode_stream_vote(const WindowStream& ws, const FieldParams& field) {
  check_stream(ws);
  GrayImage img;
  img.rows = ws.rows;
  img.cols = ws.cols;
  img.pixels.resize(ws.elems.size());

  const std::size_t canonical = ws.t >= 3 ? 1 : 0;
  std::vector<std::uint8_t> candidate(ws.t);
  for (std::uint32_t y = 0; y < ws.rows; ++y) {
    for (std::uint32_t x = 0; x < ws.cols; ++x) {
      // Window starting u positions to the left holds this pixel at byte u.
      for (std::size_t u = 0; u < ws.t; ++u) {
        const std::uint32_t start = (x + ws.cols - static_cast<std::uint32_t>(u)) % ws.cols;
        const std::uint64_t v = clamp_payload(field, ws.elems[std::size_t{y} * ws.cols + start], ws.t);
        candidate[u] = byte_at(v, ws.t, u);
      }
      std::size_t best_count = 0;
      std::uint8_t best = candidate[canonical];
      for (std::size_t u = 0; u < ws.t; ++u) {
        const std::size_t count =
            static_cast<std::size_t>(std::count(candidate.begin(), candidate.end(), candidate[u]));
        if (count > best_count || (count == best_count && candidate[u] == candidate[canonical])) {
          best_count = count;
          best = candidate[u];
        }
      }
      img.at(y, x) = best;
    }
  }
  return img;
}

MessageMatrix pack_messages(const FieldParams& field,
                            std::span<const std::vector<FieldElement>> streams, std::size_t m,
                            Rng& rng, std::optional<std::size_t> l) {
  if (streams.size() > m) throw std::invalid_argument("pack_messages: more streams than rows");
  std::size_t longest = 0;
  for (const auto& s : streams) longest = std::max(longest, s.size());
  const std::size_t cols = l.value_or(longest);
  if (cols == 0) throw std::invalid_argument("pack_messages: no streams and no length given");
  if (cols < longest) throw std::invalid_argument("pack_messages: length shorter than a stream");

  MessageMatrix M(field, m, cols);
  for (std::size_t j = 0; j < m; ++j) {
    const bool payload = j < streams.size();
    const auto& s = payload ? streams[j] : std::vector<FieldElement>{};
    for (std::size_t i = 0; i < cols; ++i) {
      if (i < s.size()) {
        if (s[i].value >= field.q) throw std::invalid_argument("pack_messages: entry >= q");
        M.at(j, i) = s[i];
      } else {
        M.at(j, i) = FieldElement{rng.next_below(field.q)};
      }
    }
    M.lengths[j] = payload ? static_cast<std::uint32_t>(s.size()) : 0;
  }
  return M;
}

namespace {

// One PGM header token, skipping whitespace and # comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  if (tok.empty()) throw std::runtime_error("pgm: unexpected end of header");
  return tok;
}

std::uint32_t pgm_number(std::istream& in) {
  const std::string tok = pgm_token(in);
  try {
    return static_cast<std::uint32_t>(std::stoul(tok));
  } catch (const std::exception&) {
    throw std::runtime_error("pgm: bad header number '" + tok + "'");
  }
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  if (pgm_token(in) != "P5") throw std::runtime_error("pgm: not a binary PGM (P5)");
  const std::uint32_t cols = pgm_number(in);
  const std::uint32_t rows = pgm_number(in);
  const std::uint32_t maxval = pgm_number(in);
  if (rows < 1 || cols < 1) throw std::runtime_error("pgm: empty image");
  if (maxval != 255) throw std::runtime_error("pgm: only maxval 255 supported");

  GrayImage img;
  img.rows = rows;
  img.cols = cols;
  img.pixels.resize(std::size_t{rows} * cols);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
    throw std::runtime_error("pgm: truncated pixel data");
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  check_image(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "P5\n" << img.cols << " " << img.rows << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

GrayImage read_raw_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  std::array<std::uint8_t, 8> header;
  in.read(reinterpret_cast<char*>(header.data()), 8);
  if (in.gcount() != 8) throw std::runtime_error("raw image: truncated header");
  std::uint32_t rows = 0, cols = 0;
  for (int i = 0; i < 4; ++i) rows |= static_cast<std::uint32_t>(header[i]) << (8 * i);
  for (int i = 0; i < 4; ++i) cols |= static_cast<std::uint32_t>(header[4 + i]) << (8 * i);
  if (rows < 1 || cols < 1) throw std::runtime_error("raw image: empty");

  GrayImage img;
  img.rows = rows;
  img.cols = cols;
  img.pixels.resize(std::size_t{rows} * cols);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
    throw std::runtime_error("raw image: truncated pixel data");
  }
  return img;
}

void write_raw_image(const std::filesystem::path& path, const GrayImage& img) {
  check_image(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  std::array<std::uint8_t, 8> header;
  for (int i = 0; i < 4; ++i) header[i] = static_cast<std::uint8_t>(img.rows >> (8 * i));
  for (int i = 0; i < 4; ++i) header[4 + i] = static_cast<std::uint8_t>(img.cols >> (8 * i));
  out.write(reinterpret_cast<const char*>(header.data()), 8);
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace mkmr
