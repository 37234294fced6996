#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "alvar/harness/config.hpp"

namespace alvar::harness {

const std::vector<std::string>& command_names();

/// Run one study and write its CSV files plus manifest.json into cfg.out_dir.
/// Returns the manifest. Throws std::invalid_argument for an unknown command.
nlohmann::json run_command(const std::string& command, const ExperimentConfig& cfg);

/// Build revision baked in at configure time ("unknown" outside a checkout).
const char* git_revision();

}  // namespace alvar::harness
