#include "chainlab/chain_state.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "chainlab/csv.hpp"
#include "chainlab/error.hpp"

namespace chainlab {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> columns)
    : out_(out), columns_(columns.size()) {
  for (std::size_t k = 0; k < columns.size(); ++k) out_ << (k ? "," : "") << columns[k];
  out_ << '\n';
}

void CsvWriter::separator() {
  if (filled_ > 0) out_ << ',';
  ++filled_;
}

CsvWriter& CsvWriter::operator<<(double value) {
  separator();
  out_ << format_double(value);
  return *this;
}

CsvWriter& CsvWriter::operator<<(long long value) {
  separator();
  out_ << value;
  return *this;
}

CsvWriter& CsvWriter::operator<<(std::string_view value) {
  separator();
  out_ << value;
  return *this;
}

void CsvWriter::end_row() {
  if (filled_ != columns_) throw Error("csv row has wrong number of fields");
  out_ << '\n';
  filled_ = 0;
}

namespace {

std::vector<double> parse_row(const std::string& line, std::size_t n) {
  std::vector<double> values;
  values.reserve(n);
  const char* first = line.data();
  const char* last = line.data() + line.size();
  while (first < last) {
    double v = 0.0;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc()) throw Error("malformed snapshot row");
    values.push_back(v);
    first = res.ptr;
    if (first < last && *first == ',') ++first;
  }
  if (values.size() != n) throw Error("snapshot row length does not match N");
  return values;
}

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char bytes[8];
  for (int k = 0; k < 8; ++k) bytes[k] = static_cast<unsigned char>(v >> (8 * k));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw Error("truncated binary snapshot");
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(bytes[k]) << (8 * k);
  return v;
}

}  // namespace

void write_snapshot_csv(std::ostream& out, const ChainState& state) {
  out << state.size() << '\n';
  for (const auto* row : {&state.p, &state.r}) {
    for (std::size_t i = 0; i < row->size(); ++i) out << (i ? "," : "") << format_double((*row)[i]);
    out << '\n';
  }
}

ChainState read_snapshot_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("empty snapshot");
  const auto n = static_cast<std::size_t>(std::stoull(line));
  ChainState state(n);
  if (!std::getline(in, line)) throw Error("snapshot missing p row");
  state.p = parse_row(line, n);
  if (!std::getline(in, line)) throw Error("snapshot missing r row");
  state.r = parse_row(line, n);
  return state;
}

void write_snapshot_binary(std::ostream& out, const ChainState& state) {
  put_u64(out, state.size());
  for (const auto* row : {&state.p, &state.r})
    for (double v : *row) put_u64(out, std::bit_cast<std::uint64_t>(v));
}

ChainState read_snapshot_binary(std::istream& in) {
  const auto n = static_cast<std::size_t>(get_u64(in));
  ChainState state(n);
  for (auto* row : {&state.p, &state.r})
    for (double& v : *row) v = std::bit_cast<double>(get_u64(in));
  return state;
}

}  // namespace chainlab
