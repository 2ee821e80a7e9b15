#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mkmr {

/// Error distribution chi: a discrete Gaussian over the integers, truncated
/// at B = ceil(tail_cut * sigma). Weights are w(x) = exp(-x^2 / (2 sigma^2)),
/// normalized into pmf/cdf tables over support [-B, B].
struct GaussianSpec {
  double sigma = 0.0;
  int tail_cut = 0;
  std::int64_t support_bound = 0;   // B
  std::vector<double> pmf;          // index i is x = i - B
  std::vector<double> cdf;          // inclusive running sum of pmf

  static GaussianSpec build(double sigma, int tail_cut) {
    if (!(sigma > 0.0)) throw std::invalid_argument("GaussianSpec: sigma must be positive");
    if (tail_cut < 4) throw std::invalid_argument("GaussianSpec: tail_cut must be at least 4");
    GaussianSpec spec;
    spec.sigma = sigma;
    spec.tail_cut = tail_cut;
    spec.support_bound = static_cast<std::int64_t>(std::ceil(tail_cut * sigma));
    const std::int64_t b = spec.support_bound;
    spec.pmf.resize(static_cast<std::size_t>(2 * b + 1));
    double total = 0.0;
    for (std::int64_t x = -b; x <= b; ++x) {
      double w = std::exp(-static_cast<double>(x * x) / (2.0 * sigma * sigma));
      spec.pmf[static_cast<std::size_t>(x + b)] = w;
      total += w;
    }
    spec.cdf.resize(spec.pmf.size());
    double run = 0.0;
    for (std::size_t i = 0; i < spec.pmf.size(); ++i) {
      spec.pmf[i] /= total;
      run += spec.pmf[i];
      spec.cdf[i] = run;
    }
    spec.cdf.back() = 1.0;
    return spec;
  }

  /// Noiseless limit: all mass on zero. Used for exact-roundtrip tests and
  /// the --sigma 0 mode.
  static GaussianSpec degenerate() {
    GaussianSpec spec;
    spec.sigma = 0.0;
    spec.tail_cut = 0;
    spec.support_bound = 0;
    spec.pmf = {1.0};
    spec.cdf = {1.0};
    return spec;
  }

  static GaussianSpec defaults() { return build(3.2, 6); }

  bool is_degenerate() const { return support_bound == 0; }

  double weight(std::int64_t x) const {
    if (x < -support_bound || x > support_bound) return 0.0;
    return pmf[static_cast<std::size_t>(x + support_bound)];
  }

  /// Exact moments of the table, for use as test oracles.
  double table_mean() const {
    double m = 0.0;
    for (std::int64_t x = -support_bound; x <= support_bound; ++x) m += static_cast<double>(x) * weight(x);
    return m;
  }
  double table_variance() const {
    double v = 0.0;
    for (std::int64_t x = -support_bound; x <= support_bound; ++x)
      v += static_cast<double>(x * x) * weight(x);
    return v;
  }
};

}  // namespace mkmr
