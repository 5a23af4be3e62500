#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "resilisim/config.hpp"

namespace resilisim {

/// Command-line values that take precedence over the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> episodes;
  std::optional<unsigned> threads;
  std::optional<std::vector<std::string>> areas;
};

void apply(RunConfig& cfg, const Overrides& o);

// Each command reads and writes under cfg.output_dir and prints a summary.
void cmd_testbed(const RunConfig& cfg, std::ostream& out);
void cmd_synth(const RunConfig& cfg, std::ostream& out);
void cmd_estimate(const RunConfig& cfg, std::ostream& out);
void cmd_enhance(const RunConfig& cfg, std::ostream& out);
void cmd_report(const RunConfig& cfg, std::ostream& out);

std::optional<Command> command_from_string(const std::string& name);

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;

/// Loads the config, applies overrides, validates and runs; returns the
/// process exit code and writes diagnostics to `err`.
int run_command(Command cmd, const std::filesystem::path& config, const Overrides& overrides,
                std::ostream& out, std::ostream& err);

}  // namespace resilisim
