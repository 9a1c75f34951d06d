#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rbfvmc/experiment.hpp"

namespace rbfvmc {

struct PresetRow {
  std::string label;
  double value = 0.0;
  double error = 0.0;  // statistical error, 0 when not applicable
  double lo = 0.0;     // acceptance interval, possibly widened by 3 * error
  double hi = 0.0;
  bool informational = false;  // shown but not gated
  bool pass = false;
  bool aborted = false;  // the underlying optimization gave up early
};

struct PresetReport {
  std::string name;
  std::vector<PresetRow> rows;
  bool all_pass = false;
  std::string text;  // rendered table, one line per row plus a verdict
};

// Built-in benchmark names: "truncation", "box", "matrix", "efield",
// "overlaps".
std::vector<std::string> preset_names();

// Runs every row of the named benchmark, writes per-row artifacts under
// out_dir/<row label>/, and compares against the built-in reference values.
PresetReport run_preset(const std::string& name, std::uint64_t seed,
                        const std::filesystem::path& out_dir);

inline constexpr std::uint64_t kDefaultPresetSeed = 1;

}  // namespace rbfvmc
