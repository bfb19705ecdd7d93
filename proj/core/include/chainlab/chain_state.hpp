#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace chainlab {

/// Phase point on the ring of N sites: momenta p_i and stretches r_i = q_i - q_{i-1}.
/// Site indices are taken modulo N everywhere.
struct ChainState {
  std::vector<double> p;
  std::vector<double> r;

  ChainState() = default;
  explicit ChainState(std::size_t n) : p(n, 0.0), r(n, 0.0) {}

  std::size_t size() const { return p.size(); }
  std::size_t wrap(std::ptrdiff_t i) const {
    const auto n = static_cast<std::ptrdiff_t>(p.size());
    return static_cast<std::size_t>(((i % n) + n) % n);
  }

  friend bool operator==(const ChainState&, const ChainState&) = default;
};

/// Snapshot as text: first line N, then the p row, then the r row (comma separated,
/// round-trip precision).
void write_snapshot_csv(std::ostream& out, const ChainState& state);
ChainState read_snapshot_csv(std::istream& in);

/// Little-endian binary snapshot: uint64 N, N doubles p, N doubles r.
void write_snapshot_binary(std::ostream& out, const ChainState& state);
ChainState read_snapshot_binary(std::istream& in);

}  // namespace chainlab
