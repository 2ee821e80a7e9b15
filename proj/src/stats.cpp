#include "mkmr/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "mkmr/prm.hpp"
#include "mkmr/sampler.hpp"

#include <json.hpp>

namespace mkmr {

UniformityReport chi_square_uniform(std::span<const FieldElement> samples,
                                    const FieldParams& field, std::size_t n_buckets, double alpha) {
  if (n_buckets < 2 || n_buckets > field.q) {
    throw std::invalid_argument("chi_square_uniform: bucket count out of range");
  }
  if (alpha <= 0.0 || alpha >= 1.0) throw std::invalid_argument("chi_square_uniform: bad alpha");
  if (samples.size() < 5 * n_buckets) {
    throw std::invalid_argument("chi_square_uniform: need at least 5 samples per bucket");
  }

  const std::uint64_t width = field.q / n_buckets;
  std::vector<std::size_t> observed(n_buckets, 0);
  for (const auto& s : samples) {
    const std::size_t b = std::min<std::uint64_t>(s.value / width, n_buckets - 1);
    ++observed[b];
  }

  // Equal-width buckets; the last one also covers the division remainder, so
  // use each bucket's exact probability mass.
  const double n = static_cast<double>(samples.size());
  double statistic = 0.0;
  for (std::size_t b = 0; b < n_buckets; ++b) {
    const std::uint64_t bucket_width =
        (b + 1 < n_buckets) ? width : field.q - width * (n_buckets - 1);
    const double expected = n * static_cast<double>(bucket_width) / static_cast<double>(field.q);
    const double diff = static_cast<double>(observed[b]) - expected;
    statistic += diff * diff / expected;
  }

  UniformityReport report;
  report.n_samples = samples.size();
  report.n_buckets = n_buckets;
  report.statistic = statistic;
  report.dof = n_buckets - 1;
  report.alpha = alpha;
  report.critical =
      boost::math::quantile(boost::math::chi_squared(static_cast<double>(report.dof)), 1.0 - alpha);
  report.pass = statistic < report.critical;
  return report;
}

LweSampleSet gen_lwe_samples(const FieldParams& field, std::span<const FieldElement> s,
                             std::size_t n, const GaussianSpec& spec, Rng& rng) {
  if (s.empty()) throw std::invalid_argument("gen_lwe_samples: empty secret");
  LweSampleSet set;
  set.field = field;
  set.dim = s.size();
  set.secret_used = std::vector<FieldElement>(s.begin(), s.end());
  set.pairs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    LwePair p;
    p.a = sample_uniform_vector(field, s.size(), rng);
    const FieldElement noise = field.from_centered(sample_gaussian(spec, rng));
    p.b = field.add(dot_mod(field, s, p.a), noise);
    set.pairs.push_back(std::move(p));
  }
  return set;
}

LweSampleSet gen_uniform_decoys(const FieldParams& field, std::size_t n, std::size_t dim,
                                Rng& rng) {
  if (dim == 0) throw std::invalid_argument("gen_uniform_decoys: empty dimension");
  LweSampleSet set;
  set.field = field;
  set.dim = dim;
  set.pairs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    LwePair p;
    p.a = sample_uniform_vector(field, dim, rng);
    p.b = sample_uniform_element(field, rng);
    set.pairs.push_back(std::move(p));
  }
  return set;
}

std::optional<std::vector<FieldElement>> solve_exact(const LweSampleSet& set) {
  const std::size_t dim = set.dim;
  if (set.pairs.size() < dim) throw std::invalid_argument("solve_exact: fewer pairs than unknowns");
  const FieldParams& f = set.field;

  // Square system from the first dim pairs; with uniform coefficients a
  // singular draw is a ~1/q event, reported as nullopt.
  std::vector<std::vector<FieldElement>> rows(dim, std::vector<FieldElement>(dim + 1));
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) rows[i][j] = set.pairs[i].a[j];
    rows[i][dim] = set.pairs[i].b;
  }

  for (std::size_t col = 0; col < dim; ++col) {
    std::size_t pivot = col;
    while (pivot < dim && rows[pivot][col].value == 0) ++pivot;
    if (pivot == dim) return std::nullopt;
    std::swap(rows[col], rows[pivot]);

    const FieldElement inv = f.inv(rows[col][col]);
    for (std::size_t j = col; j <= dim; ++j) rows[col][j] = f.mul(rows[col][j], inv);
    for (std::size_t i = 0; i < dim; ++i) {
      if (i == col || rows[i][col].value == 0) continue;
      const FieldElement factor = rows[i][col];
      for (std::size_t j = col; j <= dim; ++j) {
        rows[i][j] = f.sub(rows[i][j], f.mul(factor, rows[col][j]));
      }
    }
  }

  std::vector<FieldElement> s(dim);
  for (std::size_t i = 0; i < dim; ++i) s[i] = rows[i][dim];
  return s;
}

namespace {

bool same_tuple(const MessageMatrix& a, const MessageMatrix& b) {
  return a.m == b.m && a.l == b.l && a.entries == b.entries;
}

MessageMatrix random_tuple(const SchemeParams& params, std::size_t l, Rng& rng) {
  MessageMatrix M(params.field, params.m, l);
  for (auto& e : M.entries) e = FieldElement{rng.next_below(params.field.q)};
  return M;
}

MessageMatrix bump_entry(const SchemeParams& params, MessageMatrix M, std::size_t row,
                         std::size_t col) {
  M.at(row, col) = params.field.add(M.at(row, col), FieldElement{1});
  return M;
}

// Sum of centered absolute differences; the comparator and the cheater both
// rank hypotheses by this.
double centered_distance(const FieldParams& f, std::span<const FieldElement> a,
                         std::span<const FieldElement> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += std::abs(static_cast<double>(f.centered(f.sub(a[i], b[i]))));
  }
  return d;
}

}  // namespace

AdvantageReport ind_cpa_game(const SchemeParams& params, IndCpaAdversary& adversary,
                             std::size_t trials, Rng& rng) {
  if (trials == 0) throw std::invalid_argument("ind_cpa_game: zero trials");

  std::size_t correct = 0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const SecretKeyMatrix S = keygen(params, rng);
    if (adversary.wants_key()) adversary.receive_key(S);

    const std::vector<MessageMatrix> queries = adversary.make_queries(params, rng);
    std::vector<Ciphertext> responses;
    responses.reserve(queries.size());
    for (const auto& Q : queries) responses.push_back(encrypt(params, S, Q, rng));

    auto [m0, m1] = adversary.make_challenge(params, rng);
    if (same_tuple(m0, m1)) {
      throw std::invalid_argument("ind_cpa_game: challenge pair must be distinct");
    }
    for (const auto& Q : queries) {
      if (same_tuple(m0, Q) || same_tuple(m1, Q)) {
        throw std::invalid_argument("ind_cpa_game: challenge repeats a queried tuple");
      }
    }

    const std::uint64_t bit = rng.next_below(2);
    const Ciphertext challenge = encrypt(params, S, bit == 0 ? m0 : m1, rng);
    const int guess = adversary.guess(challenge, responses, params, rng);
    if (guess != 0 && guess != 1) throw std::invalid_argument("ind_cpa_game: guess must be 0 or 1");
    if (static_cast<std::uint64_t>(guess) == bit) ++correct;
  }

  AdvantageReport report;
  report.trials = trials;
  report.correct = correct;
  report.advantage =
      std::abs(static_cast<double>(correct) / static_cast<double>(trials) - 0.5);
  report.sigma_binomial = std::sqrt(0.25 / static_cast<double>(trials));
  return report;
}

std::vector<MessageMatrix> RandomGuesser::make_queries(const SchemeParams&, Rng&) { return {}; }

std::pair<MessageMatrix, MessageMatrix> RandomGuesser::make_challenge(const SchemeParams& params,
                                                                      Rng&) {
  MessageMatrix m0(params.field, m_, l_);
  MessageMatrix m1 = m0;
  m1.at(0, 0) = FieldElement{1};
  return {m0, m1};
}

int RandomGuesser::guess(const Ciphertext&, std::span<const Ciphertext>, const SchemeParams&,
                         Rng& rng) {
  return static_cast<int>(rng.next_below(2));
}

std::vector<MessageMatrix> FirstColumnComparator::make_queries(const SchemeParams& params,
                                                               Rng& rng) {
  // Pick the challenge pair now, then query near-copies of it: same tuples
  // except one far-corner entry, which keeps the game's distinctness rule.
  MessageMatrix m0 = random_tuple(params, l_, rng);
  MessageMatrix m1 = bump_entry(params, m0, 0, 0);
  challenge_ = {m0, m1};
  return {bump_entry(params, m0, m_ - 1, l_ - 1), bump_entry(params, m1, m_ - 1, l_ - 1)};
}

std::pair<MessageMatrix, MessageMatrix> FirstColumnComparator::make_challenge(const SchemeParams&,
                                                                              Rng&) {
  return challenge_;
}

int FirstColumnComparator::guess(const Ciphertext& challenge,
                                 std::span<const Ciphertext> query_responses,
                                 const SchemeParams& params, Rng& rng) {
  if (query_responses.size() != 2) throw std::logic_error("comparator: expected two responses");
  const double d0 =
      centered_distance(params.field, challenge.column(1), query_responses[0].column(1));
  const double d1 =
      centered_distance(params.field, challenge.column(1), query_responses[1].column(1));
  if (d0 == d1) return static_cast<int>(rng.next_below(2));
  return d0 < d1 ? 0 : 1;
}

std::vector<MessageMatrix> KeyHoldingCheater::make_queries(const SchemeParams&, Rng&) { return {}; }

std::pair<MessageMatrix, MessageMatrix> KeyHoldingCheater::make_challenge(
    const SchemeParams& params, Rng& rng) {
  // Two unrelated tuples: decryption noise stays far below the gap between
  // them, so a key holder distinguishes essentially every time.
  MessageMatrix m0 = random_tuple(params, l_, rng);
  MessageMatrix m1 = random_tuple(params, l_, rng);
  challenge_ = {m0, m1};
  return challenge_;
}

int KeyHoldingCheater::guess(const Ciphertext& challenge, std::span<const Ciphertext>,
                             const SchemeParams& params, Rng&) {
  const MessageMatrix dec = decrypt_all(key_, challenge);
  const double d0 = centered_distance(params.field, dec.entries, challenge_.first.entries);
  const double d1 = centered_distance(params.field, dec.entries, challenge_.second.entries);
  return d0 <= d1 ? 0 : 1;
}

CollusionView make_collusion_view(const SecretKeyMatrix& S, std::size_t k) {
  if (k >= S.m) throw std::out_of_range("make_collusion_view: k must be below m");
  CollusionView view;
  view.m = S.m;
  view.k = k;
  view.leaked_rows.reserve(k);
  for (std::size_t j = S.m - k; j < S.m; ++j) {
    auto row = S.row(j);
    view.leaked_rows.emplace_back(row.begin(), row.end());
  }
  view.leaked_suffixes.reserve(S.m - k);
  for (std::size_t j = 0; j < S.m - k; ++j) {
    auto row = S.row(j);
    view.leaked_suffixes.emplace_back(row.end() - static_cast<std::ptrdiff_t>(k), row.end());
  }
  return view;
}

UniformityReport collusion_residuals(const Ciphertext& C, const CollusionView& view,
                                     std::span<const std::size_t> target_rows,
                                     std::size_t n_buckets, double alpha) {
  if (view.m != C.m) throw std::invalid_argument("collusion_residuals: view does not match ciphertext");
  const std::size_t unleaked = view.m - view.k;
  for (const auto j : target_rows) {
    if (j >= unleaked) throw std::out_of_range("collusion_residuals: target row is leaked");
  }

  std::vector<FieldElement> pool;
  pool.reserve(target_rows.size() * C.l);
  for (const auto j : target_rows) {
    const auto& suffix = view.leaked_suffixes[j];
    for (std::size_t i = 1; i <= C.l; ++i) {
      const auto prev = C.column(i - 1);
      const FieldElement known =
          dot_mod(C.field, suffix, prev.subspan(unleaked, view.k));
      pool.push_back(C.field.sub(C.at(j, i), known));
    }
  }
  return chi_square_uniform(pool, C.field, n_buckets, alpha);
}

UniformityReport full_key_residuals(const Ciphertext& C, const RecipientKey& key,
                                    std::size_t n_buckets, double alpha) {
  const std::vector<FieldElement> row = decrypt_recipient(key, C);
  return chi_square_uniform(row, C.field, n_buckets, alpha);
}

TestRecord to_record(const std::string& name, const UniformityReport& report) {
  TestRecord rec;
  rec.name = name;
  rec.n = report.n_samples;
  rec.statistic = report.statistic;
  rec.dof = report.dof;
  rec.alpha = report.alpha;
  rec.pass = report.pass;
  rec.detail = "critical=" + std::to_string(report.critical) +
               " buckets=" + std::to_string(report.n_buckets);
  return rec;
}

void print_records_text(std::ostream& out, std::span<const TestRecord> records) {
  for (const auto& rec : records) {
    out << (rec.pass ? "PASS" : "FAIL") << "  " << rec.name << "  n=" << rec.n
        << "  stat=" << rec.statistic << "  dof=" << rec.dof << "  alpha=" << rec.alpha;
    if (!rec.detail.empty()) out << "  " << rec.detail;
    out << "\n";
  }
}

void print_records_json(std::ostream& out, std::span<const TestRecord> records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& rec : records) {
    arr.push_back({{"name", rec.name},
                   {"n", rec.n},
                   {"statistic", rec.statistic},
                   {"dof", rec.dof},
                   {"alpha", rec.alpha},
                   {"pass", rec.pass},
                   {"detail", rec.detail}});
  }
  out << arr.dump(2) << "\n";
}

}  // namespace mkmr
