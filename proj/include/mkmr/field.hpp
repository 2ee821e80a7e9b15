#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace mkmr {

/// Canonical residue in [0, q). Produced by FieldParams; raw construction is
/// reserved for values already known to be canonical.
struct FieldElement {
  std::uint64_t value = 0;

  friend bool operator==(FieldElement, FieldElement) = default;
};

namespace detail {

inline std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t n) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % n);
}

inline std::uint64_t powmod_u64(std::uint64_t base, std::uint64_t exp, std::uint64_t n) {
  std::uint64_t acc = 1 % n;
  base %= n;
  while (exp != 0) {
    if (exp & 1) acc = mulmod_u64(acc, base, n);
    base = mulmod_u64(base, base, n);
    exp >>= 1;
  }
  return acc;
}

// Deterministic Miller-Rabin, valid for all n < 2^64 with this base set.
inline bool is_prime_u64(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n == p) return true;
    if (n % p == 0) return false;
  }
  std::uint64_t d = n - 1;
  int r = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++r;
  }
  for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    std::uint64_t x = powmod_u64(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool witness = true;
    for (int i = 0; i < r - 1; ++i) {
      x = mulmod_u64(x, x, n);
      if (x == n - 1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

}  // namespace detail

/// Prime modulus and its reduction strategy. When q = 2^e - 1 the reducer
/// folds with shifts and adds instead of dividing.
struct FieldParams {
  std::uint64_t q = 0;
  bool is_mersenne = false;
  unsigned e = 0;  // exponent when q = 2^e - 1

  // Hard arithmetic bounds. The upper one keeps m*(q-1)^2 inside a 128-bit
  // accumulator for any practical dimension; the lower one keeps one
  // byte-window below q (see codec) and makes rejection sampling cheap.
  static constexpr std::uint64_t kMinModulus = 1ull << 16;
  static constexpr std::uint64_t kMaxModulus = 1ull << 41;

  static FieldParams make(std::uint64_t q) {
    if (q < kMinModulus || q >= kMaxModulus)
      throw std::invalid_argument("FieldParams: modulus out of supported range [2^16, 2^41): " +
                                  std::to_string(q));
    if (!detail::is_prime_u64(q)) throw std::invalid_argument("FieldParams: modulus is not prime: " + std::to_string(q));
    FieldParams p;
    p.q = q;
    p.is_mersenne = (q & (q + 1)) == 0;
    p.e = p.is_mersenne ? static_cast<unsigned>(std::bit_width(q)) : 0;
    return p;
  }

  static FieldParams default_params() { return make((1ull << 31) - 1); }

  std::uint64_t half() const { return q / 2; }  // floor(q/2)

  FieldElement reduce(std::uint64_t x) const {
    if (is_mersenne) {
      while ((x >> e) != 0) x = (x & q) + (x >> e);
      if (x >= q) x -= q;
      return {x};
    }
    return {x % q};
  }

  FieldElement reduce128(unsigned __int128 x) const {
    if (is_mersenne) {
      while ((x >> e) != 0) x = (x & q) + (x >> e);
      auto r = static_cast<std::uint64_t>(x);
      if (r >= q) r -= q;
      return {r};
    }
    return {static_cast<std::uint64_t>(x % q)};
  }

  FieldElement add(FieldElement a, FieldElement b) const {
    std::uint64_t s = a.value + b.value;
    if (s >= q) s -= q;
    return {s};
  }

  FieldElement sub(FieldElement a, FieldElement b) const {
    return {a.value >= b.value ? a.value - b.value : a.value + q - b.value};
  }

  FieldElement neg(FieldElement a) const { return {a.value == 0 ? 0 : q - a.value}; }

  FieldElement mul(FieldElement a, FieldElement b) const {
    return reduce128(static_cast<unsigned __int128>(a.value) * b.value);
  }

  /// Representative in (-floor(q/2), floor(q/2)]: a.value itself when it is
  /// at most floor(q/2), else a.value - q.
  std::int64_t centered(FieldElement a) const {
    return a.value <= half() ? static_cast<std::int64_t>(a.value)
                             : static_cast<std::int64_t>(a.value) - static_cast<std::int64_t>(q);
  }

  FieldElement from_centered(std::int64_t x) const {
    if (x <= -static_cast<std::int64_t>(q) || x >= static_cast<std::int64_t>(q))
      throw std::invalid_argument("from_centered: |x| must be < q");
    return {x >= 0 ? static_cast<std::uint64_t>(x) : static_cast<std::uint64_t>(x + static_cast<std::int64_t>(q))};
  }

  FieldElement pow(FieldElement a, std::uint64_t exp) const { return {detail::powmod_u64(a.value, exp, q)}; }

  // Test convenience; the scheme itself never divides.
  FieldElement inv(FieldElement a) const {
    if (a.value == 0) throw std::invalid_argument("inv: zero is not invertible");
    return pow(a, q - 2);
  }

  friend bool operator==(const FieldParams&, const FieldParams&) = default;
};

}  // namespace mkmr
