#include "vmcast/rng.hpp"

#include "vmcast/error.hpp"

namespace vmcast {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string_view to_string(StreamLabel label) {
  switch (label) {
    case StreamLabel::Mobility: return "mobility";
    case StreamLabel::Traffic: return "traffic";
    case StreamLabel::Sessions: return "sessions";
    case StreamLabel::Protocol: return "protocol";
    case StreamLabel::Radio: return "radio";
  }
  return "unknown";
}

std::uint64_t derive_stream_seed(std::uint64_t seed, StreamLabel label) {
  return splitmix64(splitmix64(seed) ^ fnv1a(to_string(label)));
}

RngStream::RngStream(std::uint64_t seed, StreamLabel label) : gen_(derive_stream_seed(seed, label)) {}

double RngStream::uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("RngStream::below: n must be positive");
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = gen_();
  } while (x >= limit);
  return x % n;
}

std::int64_t RngStream::between(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw std::invalid_argument("RngStream::between: empty range");
  return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
}

}  // namespace vmcast
