#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "chainlab/config.hpp"

namespace chainlab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // runtime error, or a failed check under --strict
inline constexpr int kExitConfig = 2;

struct RunOptions {
  bool strict = false;
  std::size_t parallelism = 1;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> out_dir;
  std::ostream* log = nullptr;  // summary lines; nothing is printed when null
};

struct RunOutcome {
  int exit_code = kExitOk;
  std::string output_dir;
  std::vector<std::string> files;     // data files written, relative to output_dir
  std::vector<std::string> failures;  // failed checks (hard failures only under strict)
  std::vector<std::string> summary;
};

/// Runs one experiment and writes manifest.txt, CSV data and plot-*.txt scripts.
/// The manifest is first written with status = incomplete and rewritten at the end.
/// Config problems yield kExitConfig with the offending fields in `failures`.
RunOutcome run(const RunConfig& config, const RunOptions& options);

std::string library_version();

}  // namespace chainlab
