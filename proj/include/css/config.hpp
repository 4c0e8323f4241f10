#pragma once

#include <string>

#include "css/experiments.hpp"

namespace css {

/// A parsed experiment file.
struct RunConfig {
  ExperimentSpec spec;
  std::string output_dir = ".";
  int verbosity = 1;
  bool plot = true;
};

/// Parses a YAML experiment document. Unknown keys, wrong types and invalid
/// enum values raise ConfigError carrying the 1-based line of the offending
/// node. Numeric grids accept either a list or {start, stop, step} with an
/// inclusive stop.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

}  // namespace css
