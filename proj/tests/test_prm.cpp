#include "mkmr/prm.hpp"

#include <gtest/gtest.h>

#include <vector>

#include "mkmr/sampler.hpp"

namespace mkmr {
namespace {

const FieldParams kField = FieldParams::default_params();

SecretKeyMatrix random_matrix(std::size_t m, Rng& rng) {
  SecretKeyMatrix S(kField, m);
  for (auto& e : S.entries) e = FieldElement{rng.next_below(kField.q)};
  return S;
}

SecretKeyMatrix identity_matrix(std::size_t m) {
  SecretKeyMatrix S(kField, m);
  for (std::size_t j = 0; j < m; ++j) S.row(j)[j] = FieldElement{1};
  return S;
}

// Schoolbook mat-vec over plain 128-bit remainders, no Mersenne folding.
std::vector<FieldElement> schoolbook_mat_vec(const SecretKeyMatrix& S,
                                             std::span<const FieldElement> v) {
  std::vector<FieldElement> out(S.m);
  for (std::size_t k = 0; k < S.m; ++k) {
    unsigned __int128 acc = 0;
    for (std::size_t j = 0; j < S.m; ++j) {
      acc += (static_cast<unsigned __int128>(S.row(k)[j].value) * v[j].value) % S.field.q;
    }
    out[k] = FieldElement{static_cast<std::uint64_t>(acc % S.field.q)};
  }
  return out;
}

TEST(DotMod, MatchesSchoolbookAndChecksLengths) {
  Rng rng(Seed::from_u64(1));
  for (int rep = 0; rep < 200; ++rep) {
    const auto a = sample_uniform_vector(kField, 33, rng);
    const auto b = sample_uniform_vector(kField, 33, rng);
    unsigned __int128 acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      acc += (static_cast<unsigned __int128>(a[i].value) * b[i].value) % kField.q;
    }
    EXPECT_EQ(dot_mod(kField, a, b).value, static_cast<std::uint64_t>(acc % kField.q));
  }
  const std::vector<FieldElement> empty;
  EXPECT_EQ(dot_mod(kField, empty, empty).value, 0u);
  const std::vector<FieldElement> one(1, FieldElement{1});
  EXPECT_THROW(dot_mod(kField, one, empty), std::invalid_argument);
}

TEST(LwePrmStep, ZeroKeyDegenerateNoiseGivesZero) {
  SecretKeyMatrix S(kField, 6);
  Rng rng(Seed::from_u64(2));
  const auto v = sample_uniform_vector(kField, 6, rng);
  const auto out = lwe_prm_step(S, v, GaussianSpec::degenerate(), rng);
  for (const auto& e : out) EXPECT_EQ(e.value, 0u);
}

TEST(LwePrmStep, IdentityKeyNoNoiseIsIdentityMap) {
  const SecretKeyMatrix S = identity_matrix(5);
  Rng rng(Seed::from_u64(3));
  const auto v = sample_uniform_vector(kField, 5, rng);
  const auto out = lwe_prm_step(S, v, GaussianSpec::degenerate(), rng);
  EXPECT_EQ(out, v);
}

TEST(LwePrmStep, MatchesSchoolbookOracleWithReplayedNoise) {
  const GaussianSpec chi = GaussianSpec::defaults();
  const Seed seed = Seed::from_u64(404);
  Rng setup_rng(Seed::from_u64(5));
  const SecretKeyMatrix S = random_matrix(4, setup_rng);
  const auto v = sample_uniform_vector(kField, 4, setup_rng);

  Rng rng(seed);
  const auto out = lwe_prm_step(S, v, chi, rng);

  // replay the same noise stream and recompute by schoolbook
  Rng replay(seed);
  const auto sv = schoolbook_mat_vec(S, v);
  for (std::size_t k = 0; k < 4; ++k) {
    const std::int64_t e = sample_gaussian(chi, replay);
    const std::uint64_t want = static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(sv[k].value) + kField.from_centered(e).value) % kField.q);
    EXPECT_EQ(out[k].value, want) << "row " << k;
  }
}

TEST(LwePrmStep, ConsumesExactlyMDrawsInRowOrder) {
  const GaussianSpec chi = GaussianSpec::defaults();
  const Seed seed = Seed::from_u64(17);
  Rng setup_rng(Seed::from_u64(18));
  const SecretKeyMatrix S = random_matrix(7, setup_rng);
  const auto v = sample_uniform_vector(kField, 7, setup_rng);

  Rng a(seed), b(seed);
  lwe_prm_step(S, v, chi, a);
  for (std::size_t i = 0; i < 7; ++i) sample_gaussian(chi, b);
  EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(LwePrmStep, RejectsDimensionMismatch) {
  Rng rng(Seed::from_u64(6));
  const SecretKeyMatrix S = random_matrix(4, rng);
  const auto v3 = sample_uniform_vector(kField, 3, rng);
  EXPECT_THROW(lwe_prm_step(S, v3, GaussianSpec::defaults(), rng), std::invalid_argument);
}

TEST(RecursivePrm, AllZeroCollapse) {
  SecretKeyMatrix S(kField, 3);
  const std::vector<FieldElement> msg(3, FieldElement{0});  // l = 1
  const std::vector<FieldElement> v0(3, FieldElement{0});
  Rng rng(Seed::from_u64(7));
  const auto out = recursive_prm(S, msg, 1, v0, GaussianSpec::degenerate(), rng);
  ASSERT_EQ(out.size(), 1u);
  for (const auto& e : out[0]) EXPECT_EQ(e.value, 0u);
}

TEST(RecursivePrm, ZeroMessageIsIteratedStep) {
  Rng setup_rng(Seed::from_u64(8));
  const SecretKeyMatrix S = random_matrix(5, setup_rng);
  const auto v0 = sample_uniform_vector(kField, 5, setup_rng);
  const std::vector<FieldElement> zeros(5 * 4, FieldElement{0});
  const GaussianSpec chi = GaussianSpec::defaults();
  const Seed seed = Seed::from_u64(9);

  Rng a(seed);
  const auto rec = recursive_prm(S, zeros, 4, v0, chi, a);

  Rng b(seed);
  std::vector<FieldElement> state = v0;
  for (std::size_t i = 0; i < 4; ++i) {
    state = lwe_prm_step(S, state, chi, b);
    EXPECT_EQ(rec[i], state) << "column " << i;
  }
}

TEST(RecursivePrm, MatchesUnrolledOracleColumnByColumn) {
  const GaussianSpec chi = GaussianSpec::defaults();
  Rng setup_rng(Seed::from_u64(10));
  const std::size_t m = 4, l = 3;
  const SecretKeyMatrix S = random_matrix(m, setup_rng);
  const auto v0 = sample_uniform_vector(kField, m, setup_rng);
  const auto msg = sample_uniform_vector(kField, m * l, setup_rng);

  const Seed seed = Seed::from_u64(11);
  Rng a(seed);
  const auto rec = recursive_prm(S, msg, l, v0, chi, a);

  // unrolled re-evaluation: schoolbook step, explicit message add
  Rng replay(seed);
  std::vector<FieldElement> state = v0;
  for (std::size_t i = 0; i < l; ++i) {
    auto sv = schoolbook_mat_vec(S, state);
    for (std::size_t k = 0; k < m; ++k) {
      const FieldElement noise = kField.from_centered(sample_gaussian(chi, replay));
      const std::uint64_t stepped =
          static_cast<std::uint64_t>((static_cast<unsigned __int128>(sv[k].value) + noise.value) % kField.q);
      sv[k] = FieldElement{static_cast<std::uint64_t>(
          (static_cast<unsigned __int128>(stepped) + msg[i * m + k].value) % kField.q)};
    }
    EXPECT_EQ(rec[i], sv) << "column " << i;
    state = sv;
  }
}

TEST(RecursivePrm, PrefixPropertyUnderSharedSeed) {
  const GaussianSpec chi = GaussianSpec::defaults();
  Rng setup_rng(Seed::from_u64(12));
  const std::size_t m = 6, l = 5, prefix = 3;
  const SecretKeyMatrix S = random_matrix(m, setup_rng);
  const auto v0 = sample_uniform_vector(kField, m, setup_rng);
  const auto msg = sample_uniform_vector(kField, m * l, setup_rng);

  Rng a(Seed::from_u64(13)), b(Seed::from_u64(13));
  const auto full = recursive_prm(S, msg, l, v0, chi, a);
  const auto part = recursive_prm(S, std::span(msg).first(m * prefix), prefix, v0, chi, b);
  for (std::size_t i = 0; i < prefix; ++i) EXPECT_EQ(full[i], part[i]) << "column " << i;
}

TEST(RecursivePrm, ValidatesArguments) {
  Rng rng(Seed::from_u64(14));
  const SecretKeyMatrix S = random_matrix(3, rng);
  const auto v0 = sample_uniform_vector(kField, 3, rng);
  const auto msg = sample_uniform_vector(kField, 6, rng);
  EXPECT_THROW(recursive_prm(S, msg, 0, v0, GaussianSpec::defaults(), rng), std::invalid_argument);
  EXPECT_THROW(recursive_prm(S, msg, 3, v0, GaussianSpec::defaults(), rng), std::invalid_argument);
  const auto bad_v0 = sample_uniform_vector(kField, 2, rng);
  EXPECT_THROW(recursive_prm(S, msg, 2, bad_v0, GaussianSpec::defaults(), rng), std::invalid_argument);
}

TEST(RecursivePrm, DeterministicUnderFixedInputs) {
  Rng setup_rng(Seed::from_u64(15));
  const SecretKeyMatrix S = random_matrix(4, setup_rng);
  const auto v0 = sample_uniform_vector(kField, 4, setup_rng);
  const auto msg = sample_uniform_vector(kField, 4 * 6, setup_rng);
  Rng a(Seed::from_u64(16)), b(Seed::from_u64(16));
  EXPECT_EQ(recursive_prm(S, msg, 6, v0, GaussianSpec::defaults(), a),
            recursive_prm(S, msg, 6, v0, GaussianSpec::defaults(), b));
}

}  // namespace
}  // namespace mkmr
