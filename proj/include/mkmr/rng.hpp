#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <random>
#include <stdexcept>
#include <string>

namespace mkmr {

/// 32-byte seed for the deterministic generator.
struct Seed {
  std::array<std::uint8_t, 32> bytes{};

  static Seed from_u64(std::uint64_t v) {
    Seed s;
    std::memcpy(s.bytes.data(), &v, sizeof(v));
    return s;
  }

  /// Parses up to 64 hex digits (left-padded with zeros when shorter).
  static Seed from_hex(const std::string& hex) {
    if (hex.empty() || hex.size() > 64) throw std::invalid_argument("Seed: expected 1-64 hex digits");
    Seed s;
    std::string padded(64 - hex.size(), '0');
    padded += hex;
    for (std::size_t i = 0; i < 32; ++i) {
      auto nib = [&](char c) -> unsigned {
        if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0');
        if (c >= 'a' && c <= 'f') return static_cast<unsigned>(c - 'a' + 10);
        if (c >= 'A' && c <= 'F') return static_cast<unsigned>(c - 'A' + 10);
        throw std::invalid_argument("Seed: invalid hex digit");
      };
      s.bytes[i] = static_cast<std::uint8_t>(nib(padded[2 * i]) << 4 | nib(padded[2 * i + 1]));
    }
    return s;
  }

  static Seed from_os_entropy() {
    Seed s;
    std::random_device rd;
    for (std::size_t off = 0; off < s.bytes.size(); off += 4) {
      std::uint32_t w = rd();
      std::memcpy(s.bytes.data() + off, &w, 4);
    }
    return s;
  }

  friend bool operator==(const Seed&, const Seed&) = default;
};

/// Deterministic generator: the ChaCha20 keystream keyed by a Seed.
/// One instance is single-owner; parallel workers call fork(), which keys an
/// independent stream by placing the worker index in the nonce words, so
/// distinct indices never collide.
class Rng {
 public:
  explicit Rng(const Seed& seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) { refill(); }

  std::uint64_t next_u64() {
    if (pos_ == kWordsPerBlock) refill();
    return block_[pos_++];
  }

  /// Uniform draw from [0, bound) by rejection; bias-free.
  std::uint64_t next_below(std::uint64_t bound) {
    // limit = 2^64 - (2^64 mod bound), the largest multiple of bound <= 2^64
    const std::uint64_t rem = (0 - bound) % bound;
    const std::uint64_t limit = 0 - rem;  // wraps to 2^64 - rem; rem > 0 for bound > 1
    for (;;) {
      std::uint64_t w = next_u64();
      if (rem == 0 || w < limit) return w % bound;
    }
  }

  /// Uniform double in [0, 1) with 53 bits of precision.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  Rng fork(std::uint64_t worker_index) const { return Rng(seed_, worker_index + 1); }

  const Seed& seed() const { return seed_; }

 private:
  static constexpr std::size_t kWordsPerBlock = 8;  // 64 bytes per ChaCha block

  static std::uint32_t rotl32(std::uint32_t x, int n) { return (x << n) | (x >> (32 - n)); }

  static void quarter_round(std::uint32_t s[16], int a, int b, int c, int d) {
    s[a] += s[b]; s[d] ^= s[a]; s[d] = rotl32(s[d], 16);
    s[c] += s[d]; s[b] ^= s[c]; s[b] = rotl32(s[b], 12);
    s[a] += s[b]; s[d] ^= s[a]; s[d] = rotl32(s[d], 8);
    s[c] += s[d]; s[b] ^= s[c]; s[b] = rotl32(s[b], 7);
  }

  // RFC 8439 block function. The 64-bit block index is split across the
  // counter word and nonce[0]; nonce[1..2] carry the fork stream id.
  void refill() {
    std::uint32_t st[16];
    st[0] = 0x61707865u; st[1] = 0x3320646eu; st[2] = 0x79622d32u; st[3] = 0x6b206574u;
    for (int i = 0; i < 8; ++i) {
      std::uint32_t w;
      std::memcpy(&w, seed_.bytes.data() + 4 * i, 4);
      st[4 + i] = w;
    }
    st[12] = static_cast<std::uint32_t>(counter_);
    st[13] = static_cast<std::uint32_t>(counter_ >> 32);
    st[14] = static_cast<std::uint32_t>(stream_);
    st[15] = static_cast<std::uint32_t>(stream_ >> 32);

    std::uint32_t w[16];
    std::memcpy(w, st, sizeof(st));
    for (int round = 0; round < 10; ++round) {
      quarter_round(w, 0, 4, 8, 12);
      quarter_round(w, 1, 5, 9, 13);
      quarter_round(w, 2, 6, 10, 14);
      quarter_round(w, 3, 7, 11, 15);
      quarter_round(w, 0, 5, 10, 15);
      quarter_round(w, 1, 6, 11, 12);
      quarter_round(w, 2, 7, 8, 13);
      quarter_round(w, 3, 4, 9, 14);
    }
    for (int i = 0; i < 16; ++i) w[i] += st[i];
    for (int i = 0; i < 8; ++i)
      block_[i] = static_cast<std::uint64_t>(w[2 * i]) | (static_cast<std::uint64_t>(w[2 * i + 1]) << 32);
    ++counter_;
    pos_ = 0;
  }

  Seed seed_;
  std::uint64_t stream_ = 0;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, kWordsPerBlock> block_{};
  std::size_t pos_ = 0;
};

}  // namespace mkmr
