#include "mkmr/scheme.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mkmr {

namespace {

// Scheme-level modulus guidance, tighter than the raw field bounds.
constexpr std::uint64_t kSchemeMinQ = 1ull << 20;
constexpr std::uint64_t kSchemeMaxQ = 1ull << 41;

}  // namespace

SchemeParams setup(unsigned lambda, const SetupOverrides& overrides) {
  SchemeParams p;
  p.lambda = lambda;

  if (lambda == 128) {
    p.m = overrides.m.value_or(1024);
    p.field = FieldParams::make(overrides.q.value_or((1ull << 31) - 1));
  } else {
    if (!overrides.m || !overrides.q) {
      throw std::invalid_argument(
          "setup: no default parameters for lambda=" + std::to_string(lambda) +
          "; pass m and q explicitly");
    }
    p.m = *overrides.m;
    p.field = FieldParams::make(*overrides.q);
  }

  if (p.m < 2) throw std::invalid_argument("setup: m must be at least 2");
  if (p.field.q < kSchemeMinQ || p.field.q >= kSchemeMaxQ) {
    throw std::invalid_argument("setup: q outside [2^20, 2^41)");
  }

  const double sigma = overrides.sigma.value_or(3.2);
  if (sigma == 0.0) {
    p.gauss = GaussianSpec::degenerate();
  } else {
    p.gauss = GaussianSpec::build(sigma, overrides.tail_cut.value_or(6));
  }

  // Decryption subtracts the key row's inner product exactly, so any noise
  // magnitude below q/2 round-trips; q/4 leaves headroom for the codec's
  // tolerance analysis.
  if (static_cast<std::uint64_t>(p.gauss.support_bound) * 4 >= p.field.q) {
    throw std::invalid_argument("setup: noise support too wide for q");
  }
  return p;
}

SecretKeyMatrix keygen(const SchemeParams& params, Rng& rng) {
  SecretKeyMatrix S;
  S.field = params.field;
  S.m = params.m;
  S.entries.resize(params.m * params.m);
  for (auto& e : S.entries) e = FieldElement{rng.next_below(params.field.q)};
  return S;
}

RecipientKey extract_key(const SecretKeyMatrix& S, std::uint32_t index) {
  if (index < 1 || index > S.m) {
    throw std::out_of_range("extract_key: index must be in [1, m]");
  }
  RecipientKey key;
  key.field = S.field;
  key.index = index;
  auto row = S.row(index - 1);
  key.s.assign(row.begin(), row.end());
  return key;
}

Ciphertext encrypt(const SchemeParams& params, const SecretKeyMatrix& S, const MessageMatrix& M, Rng& rng) {
  if (S.m != params.m) throw std::invalid_argument("encrypt: key size does not match params");
  if (M.m != params.m) throw std::invalid_argument("encrypt: message rows do not match params");
  if (M.l == 0) throw std::invalid_argument("encrypt: message must have at least one column");
  if (S.field.q != params.field.q || M.field.q != params.field.q) {
    throw std::invalid_argument("encrypt: modulus mismatch");
  }

  const std::size_t m = params.m;
  const std::size_t l = M.l;
  Ciphertext C(params.field, m, l);

  // v0 first, so a fixed seed pins the IV independent of message length.
  auto v0 = C.column(0);
  for (std::size_t j = 0; j < m; ++j) v0[j] = FieldElement{rng.next_below(params.field.q)};

  for (std::size_t i = 1; i <= l; ++i) {
    auto prev = C.column(i - 1);
    auto cur = C.column(i);
    lwe_prm_step_into(cur, S, prev, params.gauss, rng);
    auto msg = M.column(i - 1);
    for (std::size_t j = 0; j < m; ++j) cur[j] = params.field.add(msg[j], cur[j]);
  }
  return C;
}

std::vector<FieldElement> decrypt_recipient(const RecipientKey& key, const Ciphertext& C) {
  if (key.s.size() != C.m) throw std::invalid_argument("decrypt: key length does not match ciphertext");
  if (key.field.q != C.field.q) throw std::invalid_argument("decrypt: modulus mismatch");
  if (key.index < 1 || key.index > C.m) throw std::out_of_range("decrypt: key index out of range");

  const std::size_t j = key.index - 1;
  std::vector<FieldElement> out(C.l);
  for (std::size_t i = 1; i <= C.l; ++i) {
    const FieldElement proj = dot_mod(C.field, key.s, C.column(i - 1));
    out[i - 1] = C.field.sub(C.at(j, i), proj);
  }
  return out;
}

MessageMatrix decrypt_all(const SecretKeyMatrix& S, const Ciphertext& C) {
  if (S.m != C.m) throw std::invalid_argument("decrypt_all: key size does not match ciphertext");
  if (S.field.q != C.field.q) throw std::invalid_argument("decrypt_all: modulus mismatch");

  MessageMatrix M(C.field, C.m, C.l);
  for (std::size_t i = 1; i <= C.l; ++i) {
    auto prev = C.column(i - 1);
    for (std::size_t j = 0; j < C.m; ++j) {
      const FieldElement proj = dot_mod(C.field, S.row(j), prev);
      M.at(j, i - 1) = C.field.sub(C.at(j, i), proj);
    }
  }
  return M;
}

}  // namespace mkmr
