#pragma once

#include <array>
#include <cstdint>

namespace chainlab {

__extension__ typedef unsigned __int128 Counter128;

/// Philox4x64-10 block function: 256-bit counter, 128-bit key, 4x64-bit output.
std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> counter,
                                        std::array<std::uint64_t, 2> key);

/// Counter-based random stream. The triple (seed, stream_id, counter) fully
/// determines every subsequent draw, independent of platform and threading.
/// Replica m of an ensemble always uses stream_id m.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id, Counter128 counter = 0)
      : seed_(seed), stream_id_(stream_id), next_block_(counter >> 2) {
    if (const auto offset = static_cast<unsigned>(counter & 3); offset != 0) {
      refill();
      position_ = offset;
    }
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  /// Index of the next 64-bit word to be produced.
  Counter128 counter() const { return (next_block_ << 2) - 4 + position_; }

  std::uint64_t next_u64() {
    if (position_ == 4) {
      refill();
      position_ = 0;
    }
    return block_[position_++];
  }
  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }
  /// Standard normal via Box-Muller; draws come in cached pairs.
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<Counter128>(next_u64()) * n) >> 64);
  }

  /// Derives an independent stream for a different purpose (e.g. bootstrap
  /// weights) by mixing `purpose` into the stream id.
  RngStream fork(std::uint64_t purpose) const;

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  // block_ holds block next_block_ - 1; position_ == 4 means it is used up.
  Counter128 next_block_;
  unsigned position_ = 4;
  std::array<std::uint64_t, 4> block_{};
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace chainlab
