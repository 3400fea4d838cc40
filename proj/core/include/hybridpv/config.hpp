#pragma once

#include <filesystem>
#include <string>

#include "hybridpv/sim_engine.hpp"

namespace hpv::config {

/// Parses a sectioned key = value file. Unknown sections or keys, malformed
/// values and failed validation raise ConfigError. Relative data paths are
/// resolved against the config file's directory.
sim::RunConfig load_run_config(const std::filesystem::path& path);

/// Same, from text; relative data paths are resolved against base_dir.
sim::RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = {});

}  // namespace hpv::config
