#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mkmr/field.hpp"
#include "mkmr/gaussian.hpp"
#include "mkmr/rng.hpp"
#include "mkmr/scheme.hpp"

namespace mkmr {

/// Pearson chi-square verdict over equal-width buckets of [0, q); the last
/// bucket absorbs the remainder, expected counts are exact.
struct UniformityReport {
  std::size_t n_samples = 0;
  std::size_t n_buckets = 0;
  double statistic = 0.0;
  std::size_t dof = 0;
  double critical = 0.0;
  double alpha = 0.0;
  bool pass = false;
};

/// Requires n_samples >= 5 * n_buckets so every expected count is healthy.
UniformityReport chi_square_uniform(std::span<const FieldElement> samples,
                                    const FieldParams& field, std::size_t n_buckets, double alpha);

// Noisy inner-product sample fixtures: pairs (a, b) with b = <s, a> + e, or
// fully uniform decoys with no secret behind them.

struct LwePair {
  std::vector<FieldElement> a;
  FieldElement b;
};

struct LweSampleSet {
  FieldParams field;
  std::size_t dim = 0;
  std::vector<LwePair> pairs;
  std::optional<std::vector<FieldElement>> secret_used;

  LweSampleSet() : field(FieldParams::default_params()) {}
};

LweSampleSet gen_lwe_samples(const FieldParams& field, std::span<const FieldElement> s,
                             std::size_t n, const GaussianSpec& spec, Rng& rng);
LweSampleSet gen_uniform_decoys(const FieldParams& field, std::size_t n, std::size_t dim, Rng& rng);

/// Gaussian elimination mod q treating the pairs as exact equations
/// <s, a_i> = b_i. Returns the solution when the system has full rank,
/// nullopt otherwise. With noiseless samples this recovers the secret; with
/// noisy ones it returns a wrong vector, which is the point of the fixture.
std::optional<std::vector<FieldElement>> solve_exact(const LweSampleSet& set);

// Four-stage guessing game: fresh keys, oracle queries, a two-message
// challenge, one bit back.

class IndCpaAdversary {
 public:
  virtual ~IndCpaAdversary() = default;

  /// Stage 2: tuples for the encryption oracle (may be empty).
  virtual std::vector<MessageMatrix> make_queries(const SchemeParams& params, Rng& rng) = 0;

  /// Stage 3: the challenge pair. Must be distinct from each other and from
  /// every queried tuple; the game enforces this.
  virtual std::pair<MessageMatrix, MessageMatrix> make_challenge(const SchemeParams& params,
                                                                 Rng& rng) = 0;

  /// Stage 4: guess which of the pair was encrypted.
  virtual int guess(const Ciphertext& challenge, std::span<const Ciphertext> query_responses,
                    const SchemeParams& params, Rng& rng) = 0;

  /// Harness sanity hook: a cheating adversary may ask for the key matrix.
  virtual bool wants_key() const { return false; }
  virtual void receive_key(const SecretKeyMatrix&) {}
};

struct AdvantageReport {
  std::size_t trials = 0;
  std::size_t correct = 0;
  double advantage = 0.0;       // |correct/trials - 1/2|
  double sigma_binomial = 0.0;  // sqrt(0.25 / trials) for the null coin flip
};

/// Runs `trials` independent games, each with a fresh key matrix. Throws if
/// the adversary's challenge pair violates the distinctness rule.
AdvantageReport ind_cpa_game(const SchemeParams& params, IndCpaAdversary& adversary,
                             std::size_t trials, Rng& rng);

/// Guesses by coin flip; the null baseline.
class RandomGuesser : public IndCpaAdversary {
 public:
  RandomGuesser(std::size_t m, std::size_t l) : m_(m), l_(l) {}
  std::vector<MessageMatrix> make_queries(const SchemeParams&, Rng&) override;
  std::pair<MessageMatrix, MessageMatrix> make_challenge(const SchemeParams&, Rng& rng) override;
  int guess(const Ciphertext&, std::span<const Ciphertext>, const SchemeParams&, Rng& rng) override;

 private:
  std::size_t m_, l_;
};

/// Queries near-copies of its challenge pair, then picks whichever oracle
/// response has the nearer first ciphertext column. The fresh IV makes the
/// columns incomparable, so this should do no better than the coin.
class FirstColumnComparator : public IndCpaAdversary {
 public:
  FirstColumnComparator(std::size_t m, std::size_t l) : m_(m), l_(l) {}
  std::vector<MessageMatrix> make_queries(const SchemeParams& params, Rng& rng) override;
  std::pair<MessageMatrix, MessageMatrix> make_challenge(const SchemeParams& params,
                                                         Rng& rng) override;
  int guess(const Ciphertext& challenge, std::span<const Ciphertext> query_responses,
            const SchemeParams& params, Rng& rng) override;

 private:
  std::size_t m_, l_;
  std::pair<MessageMatrix, MessageMatrix> challenge_;
};

/// Decrypts the challenge with the stolen key matrix and compares; verifies
/// the harness can detect a broken game.
class KeyHoldingCheater : public IndCpaAdversary {
 public:
  KeyHoldingCheater(std::size_t m, std::size_t l) : m_(m), l_(l) {}
  std::vector<MessageMatrix> make_queries(const SchemeParams&, Rng&) override;
  std::pair<MessageMatrix, MessageMatrix> make_challenge(const SchemeParams& params,
                                                         Rng& rng) override;
  int guess(const Ciphertext& challenge, std::span<const Ciphertext>, const SchemeParams&,
            Rng&) override;
  bool wants_key() const override { return true; }
  void receive_key(const SecretKeyMatrix& S) override { key_ = S; }

 private:
  std::size_t m_, l_;
  std::pair<MessageMatrix, MessageMatrix> challenge_;
  SecretKeyMatrix key_;
};

// Collusion experiment: the last k recipients pool their full key rows, and
// additionally the last k entries of every other row have leaked.

struct CollusionView {
  std::size_t m = 0;
  std::size_t k = 0;
  std::vector<std::vector<FieldElement>> leaked_rows;      // rows m-k .. m-1, full
  std::vector<std::vector<FieldElement>> leaked_suffixes;  // rows 0 .. m-k-1, last k entries
};

CollusionView make_collusion_view(const SecretKeyMatrix& S, std::size_t k);

/// For each target row j < m-k, subtract the part of the decryption sum the
/// colluders can compute; pool the residuals and test them for uniformity.
/// If the colluders learned nothing useful, the pool looks uniform.
UniformityReport collusion_residuals(const Ciphertext& C, const CollusionView& view,
                                     std::span<const std::size_t> target_rows,
                                     std::size_t n_buckets, double alpha);

/// Sanity contrast: with the full key row the "residual" is the plaintext
/// plus noise, so structured plaintext must fail the same uniformity test.
UniformityReport full_key_residuals(const Ciphertext& C, const RecipientKey& key,
                                    std::size_t n_buckets, double alpha);

// Report plumbing shared by the CLI stats suites and the tests.

struct TestRecord {
  std::string name;
  std::size_t n = 0;
  double statistic = 0.0;
  std::size_t dof = 0;
  double alpha = 0.0;
  bool pass = false;
  std::string detail;
};

TestRecord to_record(const std::string& name, const UniformityReport& report);
void print_records_text(std::ostream& out, std::span<const TestRecord> records);
void print_records_json(std::ostream& out, std::span<const TestRecord> records);

}  // namespace mkmr
