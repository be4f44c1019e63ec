#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace contlim {

// Reproducible random stream keyed by (seed, stream id). Identical keys and call order give
// identical draws.
class RngStream {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(stream),
                      std::uint32_t(stream >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

  // Poisson draw by inversion; `zero_probability` is exp(-mean).
  std::int64_t poisson(double mean, double zero_probability) {
    if (mean > 30.0) return std::poisson_distribution<std::int64_t>(mean)(*this);
    double u = uniform();
    double p = zero_probability;
    std::int64_t k = 0;
    while (u >= p) {
      u -= p;
      ++k;
      p *= mean / double(k);
      if (p <= 0.0) break;
    }
    return k;
  }

  std::int64_t binomial(std::int64_t trials, double p) {
    if (trials <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return trials;
    return std::binomial_distribution<std::int64_t>(trials, p)(*this);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

}  // namespace contlim
