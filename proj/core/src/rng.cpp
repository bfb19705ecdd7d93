#include "chainlab/rng.hpp"

#include <cmath>
#include <numbers>

#include "chainlab/sincos.hpp"

namespace chainlab {

namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  const Counter128 prod = static_cast<Counter128>(a) * b;
  hi = static_cast<std::uint64_t>(prod >> 64);
  lo = static_cast<std::uint64_t>(prod);
}

// splitmix64 finalizer, used only to derive forked stream ids
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> x,
                                        std::array<std::uint64_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, x[0], hi0, lo0);
    mulhilo(kMul1, x[2], hi1, lo1);
    x = {hi1 ^ x[1] ^ k[0], lo1, hi0 ^ x[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return x;
}

void RngStream::refill() {
  block_ = philox4x64({static_cast<std::uint64_t>(next_block_), static_cast<std::uint64_t>(next_block_ >> 64), 0, 0},
                      {seed_, stream_id_});
  ++next_block_;
}

double RngStream::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const auto [sin, cos] = sincos(2.0 * std::numbers::pi * u2);
  cached_normal_ = radius * sin;
  has_cached_normal_ = true;
  return radius * cos;
}

RngStream RngStream::fork(std::uint64_t purpose) const {
  return RngStream(seed_ ^ mix64(purpose + 0x632BE59BD9B4E019ULL), mix64(stream_id_ ^ mix64(purpose)));
}

}  // namespace chainlab
