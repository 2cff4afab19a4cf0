#pragma once

#include "exactrep/config.hpp"

#include <string>
#include <vector>

namespace exactrep {

/// Built-in benchmark configurations; every acceptance scenario runs without
/// authoring a config file.
std::vector<std::string> preset_names();
ExperimentConfig preset(const std::string& name);

} // namespace exactrep
