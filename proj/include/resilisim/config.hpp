#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "resilisim/enhance.hpp"
#include "resilisim/network.hpp"
#include "resilisim/network_io.hpp"
#include "resilisim/simulation.hpp"

namespace resilisim {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scalar or array value from a TOML document.
struct TomlValue {
  enum class Kind { Bool, Int, Float, String, Array } kind = Kind::Int;
  bool b = false;
  std::int64_t i = 0;
  double f = 0.0;
  std::string s;
  std::vector<TomlValue> array;
};

/// Flat view of a TOML document keyed by dotted path ("ga.population").
/// Handles the subset used by run files: [tables], [dotted.tables], bare
/// keys, strings, integers, floats, booleans, single-line arrays, comments.
using TomlTable = std::map<std::string, TomlValue>;

TomlTable parse_toml(const std::string& text, const std::string& source = "<string>");

struct RunConfig {
  std::filesystem::path base_dir;  // relative paths resolve against this
  std::uint64_t master_seed = 1;
  std::filesystem::path output_dir = "out";
  unsigned threads = 0;

  TestbedSpec testbed{};
  IngestPaths inputs{};
  std::filesystem::path wind_samples;

  SynthesisConfig network{};
  SimulationConfig sim{};
  std::uint64_t episodes = 10'000;
  double lambda = 0.8;
  std::uint32_t report_stride = 10;

  GAConfig ga{};
  std::vector<std::string> areas;  // substation names; empty means all

  std::filesystem::path out(const std::string& name) const { return output_dir / name; }
};

/// Builds a config from TOML text; unknown keys and wrongly typed values
/// are rejected.
RunConfig config_from_toml(const std::string& text, const std::filesystem::path& base_dir,
                           const std::string& source = "<string>");
RunConfig load_config(const std::filesystem::path& path);

enum class Command { Testbed, Synth, Estimate, Enhance, Report };

/// Range checks plus existence of the files `cmd` reads.
void validate(const RunConfig& cfg, Command cmd);

}  // namespace resilisim
