#pragma once

// Counter-based random numbers: Philox4x32-10 (Salmon et al., "Parallel
// random numbers: as easy as 1, 2, 3", SC'11). Every draw is a pure
// function of (key, counter), so any sample can be regenerated from its
// index without replaying the ones before it.

#include <array>
#include <cstdint>

namespace freqlog {

class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Uniform [0, 1) stream addressed by (seed, stream, index).
///
/// The key is the 64-bit seed; the counter is (index lo, index hi,
/// stream lo, stream hi). Monte Carlo uses stream = sample index and
/// index = step, so shards partitioned by sample index reproduce the
/// sequential result exactly.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  double uniform(std::uint64_t index) const {
    const auto out = Philox4x32::generate(
        {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
         static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
        key_);
    const std::uint64_t bits = (std::uint64_t{out[0]} << 32) | out[1];
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }

  /// Sequential convenience: uniform(next index).
  double next() { return uniform(position_++); }

 private:
  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t position_ = 0;
};

}  // namespace freqlog
