#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace vmcast {

enum class StreamLabel { Mobility, Traffic, Sessions, Protocol, Radio };

std::string_view to_string(StreamLabel label);

/// Seeded random stream. The draw sequence depends only on (seed, label):
/// mt19937_64 is fully specified by the standard and the conversions below
/// avoid the implementation-defined std distributions.
class RngStream {
 public:
  RngStream(std::uint64_t seed, StreamLabel label);

  std::uint64_t next() { return gen_(); }
  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);
  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t between(std::int64_t lo, std::int64_t hi);
  bool bernoulli(double p) { return p > 0.0 && uniform() < p; }

 private:
  std::mt19937_64 gen_;
};

std::uint64_t derive_stream_seed(std::uint64_t seed, StreamLabel label);

}  // namespace vmcast
