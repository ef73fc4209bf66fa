#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace effstat {

/// Philox4x32-10 block function (Salmon et al., SC 2011).
///
/// Maps a 128-bit counter and a 64-bit key to 128 pseudorandom bits. Stateless.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer, used to derive child stream ids.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Counter-based random stream.
///
/// The seed is the Philox key, the stream id occupies the upper half of the
/// counter and the draw index the lower half. The n-th output of a stream is
/// therefore a pure function of (seed, stream_id, n): streams can be created
/// anywhere, moved between threads, and replayed exactly. Distinct stream ids
/// never share a counter value.
///
/// Satisfies UniformRandomBitGenerator.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : seed_(seed), stream_id_(stream_id) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  /// Number of 64-bit words consumed so far.
  std::uint64_t position() const noexcept { return 2 * block_ - buffered_; }

  /// Child stream for a work unit (grid cell, replica chunk, ...).
  /// Depends only on this stream's identity, not on how much was drawn.
  RngStream derive(std::uint64_t index) const {
    return RngStream(seed_, mix64(stream_id_ ^ mix64(index + 0x9e3779b97f4a7c15ull)));
  }

  std::uint64_t operator()() {
    if (buffered_ == 0) refill();
    return buffer_[2 - buffered_--];
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound). Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t bound);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
};

}  // namespace effstat
