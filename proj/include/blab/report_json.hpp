#pragma once

#include <string>
#include <utility>
#include <vector>

#include "blab/config.hpp"

namespace blab {

// Scientific notation with 12 significant digits, the fixed float format of
// every emitted report. Non-finite values have no JSON number form and are
// rendered as null by the writers.
std::string format_sci(double v);

// What one CLI command produced: files as relative-name/content pairs in
// emission order, human-readable notes for stderr, and the process exit code.
struct CommandOutput {
  int exit_code = 0;
  std::vector<std::pair<std::string, std::string>> files;
  std::vector<std::string> messages;
};

// Class-membership report for the configured weight. Exit 0 when every check
// that applies to the weight's kind holds; regularity is reported, not
// enforced.
CommandOutput run_weight_info(const RunConfig& cfg);

// One classification report per (map, multiplier) pair plus an index file.
// Entries that failed the self-map certificate get an error report; the
// command still exits 0.
CommandOutput run_classify(const RunConfig& cfg);

// Runs the invariant suite against the configured weight and first map, plus
// a plot table of the ring transform. Exit 1 when any step fails or is
// rejected.
CommandOutput run_verify(const RunConfig& cfg);

}  // namespace blab
