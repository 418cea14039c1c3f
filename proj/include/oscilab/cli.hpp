#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace oscilab {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunConfig {
  std::string command;
  nlohmann::json params = nlohmann::json::object();
  std::string output_dir = "out";
  std::uint64_t seed = 1;
};

struct CommandInfo {
  std::string name;
  std::string anchor;  // the mathematical statement the command exercises
  std::string summary;
};

const std::vector<CommandInfo>& command_table();
std::string list_commands();

// key=value with a dot path into the config document; the value is parsed as JSON when it
// parses, otherwise taken as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

struct RunOutcome {
  int exit_code = 0;
  nlohmann::json error;  // set when exit_code != 0
  std::vector<std::string> files;
};

// 0: success, outputs and manifest written; 2: validation failure; 1: compute failure.
// Outputs are held in memory until every computation succeeded.
RunOutcome run(const RunConfig& cfg);

// Full command line: `run [config] [--config p] [--set k=v]... [--out d] [--seed n] [--threads n]` or `list`.
int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace oscilab
