#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mkmr/field.hpp"
#include "mkmr/gaussian.hpp"
#include "mkmr/prm.hpp"
#include "mkmr/rng.hpp"

namespace mkmr {

/// Parameter overrides for setup(); any unset field keeps the default the
/// security level implies.
struct SetupOverrides {
  std::optional<std::size_t> m;
  std::optional<std::uint64_t> q;
  std::optional<double> sigma;     // 0 selects the degenerate (noiseless) table
  std::optional<int> tail_cut;
};

struct SchemeParams {
  unsigned lambda = 0;
  std::size_t m = 0;
  FieldParams field;
  GaussianSpec gauss;

  SchemeParams() : field(FieldParams::default_params()) {}
};

/// setup(lambda): lambda = 128 selects m = 1024 and q = 2^31 - 1. Other
/// levels require explicit (m, q) overrides. Checks the scheme-level
/// constraints: 2^20 <= q < 2^41, m >= 2, noise support below q/4.
SchemeParams setup(unsigned lambda, const SetupOverrides& overrides = {});

/// m message streams of length l stacked into an m x l matrix. Stored
/// column-major (encryption walks columns). lengths[j] is row j's true
/// payload length; entries past it are padding.
struct MessageMatrix {
  FieldParams field;
  std::size_t m = 0;
  std::size_t l = 0;
  std::vector<FieldElement> entries;      // column-major: entry(j, i) = entries[i*m + j]
  std::vector<std::uint32_t> lengths;     // per-row true payload length

  MessageMatrix() : field(FieldParams::default_params()) {}
  MessageMatrix(FieldParams f, std::size_t rows, std::size_t cols)
      : field(f), m(rows), l(cols), entries(rows * cols, FieldElement{0}),
        lengths(rows, static_cast<std::uint32_t>(cols)) {}

  FieldElement& at(std::size_t row, std::size_t col) { return entries[col * m + row]; }
  FieldElement at(std::size_t row, std::size_t col) const { return entries[col * m + row]; }
  std::span<const FieldElement> column(std::size_t i) const { return {entries.data() + i * m, m}; }
  std::vector<FieldElement> row_copy(std::size_t j) const {
    std::vector<FieldElement> r(l);
    for (std::size_t i = 0; i < l; ++i) r[i] = at(j, i);
    return r;
  }

  friend bool operator==(const MessageMatrix&, const MessageMatrix&) = default;
};

/// Ciphertext C = [v0 v1 ... vl], column-major; v0 is the IV.
struct Ciphertext {
  FieldParams field;
  std::size_t m = 0;
  std::size_t l = 0;
  std::vector<FieldElement> entries;  // (l+1) columns of height m

  Ciphertext() : field(FieldParams::default_params()) {}
  Ciphertext(FieldParams f, std::size_t rows, std::size_t cols)
      : field(f), m(rows), l(cols), entries(rows * (cols + 1), FieldElement{0}) {}

  std::span<const FieldElement> column(std::size_t i) const { return {entries.data() + i * m, m}; }
  std::span<FieldElement> column(std::size_t i) { return {entries.data() + i * m, m}; }
  FieldElement at(std::size_t row, std::size_t col) const { return entries[col * m + row]; }

  friend bool operator==(const Ciphertext&, const Ciphertext&) = default;
};

/// Row j of the key matrix, as held by recipient j. Indices are 1-based in
/// the public surface and on disk.
struct RecipientKey {
  FieldParams field;
  std::uint32_t index = 0;  // in [1, m]
  std::vector<FieldElement> s;

  RecipientKey() : field(FieldParams::default_params()) {}
};

SecretKeyMatrix keygen(const SchemeParams& params, Rng& rng);

RecipientKey extract_key(const SecretKeyMatrix& S, std::uint32_t index);

/// Algorithm: draw v0 uniform, then v_i = m_i + S*v_{i-1} + E_i (mod q) for
/// i = 1..l. Output is m x (l+1).
Ciphertext encrypt(const SchemeParams& params, const SecretKeyMatrix& S, const MessageMatrix& M, Rng& rng);

/// Recipient j recovers m_ji = v_ji - <s_j, v_{i-1}> (mod q) for i = 1..l.
/// Safe to call concurrently on a shared ciphertext.
std::vector<FieldElement> decrypt_recipient(const RecipientKey& key, const Ciphertext& C);

/// All rows at once; the lengths ledger is not recoverable from a
/// ciphertext, so every returned row has length l.
MessageMatrix decrypt_all(const SecretKeyMatrix& S, const Ciphertext& C);

}  // namespace mkmr
