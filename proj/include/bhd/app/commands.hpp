#pragma once

#include <exception>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bhd/app/config.hpp"

namespace bhd::app {

struct CommandInfo {
  std::string name;
  std::string summary;
};

const std::vector<CommandInfo>& command_list();

/// Runs one subcommand. Writes `<name>.json` (report: config digest, mode,
/// seed, result), `<name>.timing.json` and any CSV or bit files into
/// cfg.output_dir, and returns the report.
nlohmann::json run_command(std::string_view name, const RunConfig& cfg);

/// Process exit code for an exception escaping run_command:
/// 3 validation, 4 parse, 5 domain, 6 sizing, 7 calibration, 8 measurement,
/// 9 applicability, 10 singularity, 11 other library errors, 1 anything else.
int exit_code_for(const std::exception& e);

}  // namespace bhd::app
