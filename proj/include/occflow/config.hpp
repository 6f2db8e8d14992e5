#pragma once

#include <string>

#include "occflow/loss.hpp"
#include "occflow/solve.hpp"

namespace occflow {

// Flat key=value view over the loss and solver hyperparameters. Defaults are
// the published values, so an empty config reproduces them.
struct RunConfig {
  LossConfig loss;
  SolveConfig solve;
};

// Sets one key; throws BadConfig for unknown keys or unparsable values.
void set_config_key(RunConfig& cfg, const std::string& key, const std::string& value);

// Applies `#`-commented key=value lines from a file on top of `base`.
RunConfig load_config_file(const std::string& path, RunConfig base = {});

OcclusionMode parse_occlusion_mode(const std::string& s);
std::string occlusion_mode_name(OcclusionMode m);

// "4" (default 0/45/90/135), "paper" (literal 0/45/90/180), "axis" (0/90).
std::vector<Direction> parse_directions(const std::string& s);

}  // namespace occflow
