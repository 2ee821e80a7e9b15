#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "mkmr/field.hpp"
#include "mkmr/gaussian.hpp"
#include "mkmr/rng.hpp"

namespace mkmr {

/// Inverse-CDF draw from the truncated Gaussian table. One generator word
/// per sample.
inline std::int64_t sample_gaussian(const GaussianSpec& spec, Rng& rng) {
  if (spec.is_degenerate()) {
    rng.next_u64();  // keep draw accounting uniform across specs
    return 0;
  }
  const double u = rng.next_unit();
  auto it = std::upper_bound(spec.cdf.begin(), spec.cdf.end(), u);
  if (it == spec.cdf.end()) --it;
  return static_cast<std::int64_t>(it - spec.cdf.begin()) - spec.support_bound;
}

inline FieldElement sample_uniform_element(const FieldParams& p, Rng& rng) {
  return {rng.next_below(p.q)};
}

inline std::vector<FieldElement> sample_uniform_vector(const FieldParams& p, std::size_t m, Rng& rng) {
  std::vector<FieldElement> v(m);
  for (auto& x : v) x = sample_uniform_element(p, rng);
  return v;
}

}  // namespace mkmr
