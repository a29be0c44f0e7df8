#pragma once

#include <string>

#include "misscov/sweep.hpp"

namespace misscov {

// Loads a sweep configuration from a YAML document. Validation failures carry
// the file name and the line of the offending node.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config(const std::string& text, const std::string& origin);

}  // namespace misscov
