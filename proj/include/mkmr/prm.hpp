#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "mkmr/field.hpp"
#include "mkmr/gaussian.hpp"
#include "mkmr/rng.hpp"
#include "mkmr/sampler.hpp"

namespace mkmr {

/// m secret row vectors stacked into an m x m matrix; row k is recipient
/// k's key.
struct SecretKeyMatrix {
  FieldParams field;
  std::size_t m = 0;
  std::vector<FieldElement> entries;  // row-major m x m

  SecretKeyMatrix() : field(FieldParams::default_params()) {}
  SecretKeyMatrix(FieldParams f, std::size_t dim)
      : field(f), m(dim), entries(dim * dim, FieldElement{0}) {}

  std::span<const FieldElement> row(std::size_t j) const { return {entries.data() + j * m, m}; }
  std::span<FieldElement> row(std::size_t j) { return {entries.data() + j * m, m}; }
};

/// Inner product over F_q. Terms accumulate in 128 bits and reduce once:
/// m * (q-1)^2 stays below 2^128 for every supported modulus and dimension.
inline FieldElement dot_mod(const FieldParams& p, std::span<const FieldElement> a,
                            std::span<const FieldElement> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot_mod: length mismatch");
  unsigned __int128 acc = 0;
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i)
    acc += static_cast<unsigned __int128>(a[i].value) * b[i].value;
  return p.reduce128(acc);
}

/// One LWE map evaluation, written into out: out = S*v + E (mod q) with E
/// drawn coordinate-wise from chi. Consumes exactly S.m Gaussian draws, row
/// order fixed.
inline void lwe_prm_step_into(std::span<FieldElement> out, const SecretKeyMatrix& S,
                              std::span<const FieldElement> v, const GaussianSpec& chi, Rng& rng) {
  if (v.size() != S.m || out.size() != S.m) throw std::invalid_argument("lwe_prm_step: dimension mismatch");
  const FieldParams& p = S.field;
  for (std::size_t k = 0; k < S.m; ++k) {
    FieldElement sv = dot_mod(p, S.row(k), v);
    FieldElement noise = p.from_centered(sample_gaussian(chi, rng));
    out[k] = p.add(sv, noise);
  }
}

inline std::vector<FieldElement> lwe_prm_step(const SecretKeyMatrix& S, std::span<const FieldElement> v,
                                              const GaussianSpec& chi, Rng& rng) {
  std::vector<FieldElement> out(S.m);
  lwe_prm_step_into(out, S, v, chi, rng);
  return out;
}

/// Message-absorbing recursion: g_i = lwe_prm_step(S, g_{i-1}) + m_i for
/// i = 1..l, g_0 = v0. message_columns holds l columns of height m,
/// column-major. Returns g_1..g_l.
inline std::vector<std::vector<FieldElement>> recursive_prm(const SecretKeyMatrix& S,
                                                            std::span<const FieldElement> message_columns,
                                                            std::size_t l,
                                                            std::span<const FieldElement> v0,
                                                            const GaussianSpec& chi, Rng& rng) {
  const std::size_t m = S.m;
  if (l == 0) throw std::invalid_argument("recursive_prm: need at least one column");
  if (message_columns.size() != m * l || v0.size() != m)
    throw std::invalid_argument("recursive_prm: dimension mismatch");
  const FieldParams& p = S.field;
  std::vector<std::vector<FieldElement>> out;
  out.reserve(l);
  std::vector<FieldElement> state(v0.begin(), v0.end());
  std::vector<FieldElement> next(m);
  for (std::size_t i = 0; i < l; ++i) {
    lwe_prm_step_into(next, S, state, chi, rng);
    for (std::size_t j = 0; j < m; ++j) next[j] = p.add(next[j], message_columns[i * m + j]);
    out.push_back(next);
    state = next;
  }
  return out;
}

}  // namespace mkmr
