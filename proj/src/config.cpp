#include "resilisim/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace resilisim {

namespace {

class Parser {
 public:
  Parser(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  TomlTable run() {
    TomlTable table;
    std::string prefix;
    while (pos_ < text_.size()) {
      skip_blank();
      if (pos_ >= text_.size()) break;
      if (text_[pos_] == '\n') {
        next_line();
        continue;
      }
      if (text_[pos_] == '#') {
        skip_comment();
        continue;
      }
      if (text_[pos_] == '[') {
        ++pos_;
        skip_blank();
        prefix = key();
        skip_blank();
        expect(']');
        end_of_line();
        continue;
      }
      const auto k = key();
      skip_blank();
      expect('=');
      skip_blank();
      const auto full = prefix.empty() ? k : prefix + "." + k;
      if (table.contains(full)) fail("duplicate key '" + full + "'");
      table[full] = value();
      end_of_line();
    }
    return table;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(source_ + ":" + std::to_string(line_) + ": " + msg);
  }

  void skip_blank() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r')) ++pos_;
  }
  void skip_comment() {
    while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
  }
  void next_line() {
    ++pos_;
    ++line_;
  }
  void expect(char c) {
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  void end_of_line() {
    skip_blank();
    if (pos_ < text_.size() && text_[pos_] == '#') skip_comment();
    if (pos_ < text_.size()) {
      if (text_[pos_] != '\n') fail("unexpected text after value");
      next_line();
    }
  }

  std::string key() {
    std::string out;
    for (;;) {
      skip_blank();
      std::string part;
      if (pos_ < text_.size() && text_[pos_] == '"') {
        part = quoted();
      } else {
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' || text_[pos_] == '-'))
          part += text_[pos_++];
      }
      if (part.empty()) fail("expected a key");
      out += part;
      skip_blank();
      if (pos_ < text_.size() && text_[pos_] == '.') {
        ++pos_;
        out += '.';
        continue;
      }
      return out;
    }
  }

  std::string quoted() {
    expect('"');
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      char c = text_[pos_++];
      if (c == '\n') fail("unterminated string");
      if (c == '\\') {
        if (pos_ >= text_.size()) fail("unterminated string");
        const char e = text_[pos_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      }
      out += c;
    }
    expect('"');
    return out;
  }

  TomlValue value() {
    TomlValue v;
    if (pos_ >= text_.size()) fail("missing value");
    const char c = text_[pos_];
    if (c == '"') {
      v.kind = TomlValue::Kind::String;
      v.s = quoted();
      return v;
    }
    if (c == '[') {
      ++pos_;
      v.kind = TomlValue::Kind::Array;
      for (;;) {
        skip_space_and_newlines();
        if (pos_ < text_.size() && text_[pos_] == ']') {
          ++pos_;
          return v;
        }
        v.array.push_back(value());
        skip_space_and_newlines();
        if (pos_ < text_.size() && text_[pos_] == ',') {
          ++pos_;
          continue;
        }
        skip_space_and_newlines();
        expect(']');
        return v;
      }
    }
    std::string word;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) && text_[pos_] != ',' &&
           text_[pos_] != ']' && text_[pos_] != '#')
      word += text_[pos_++];
    if (word == "true" || word == "false") {
      v.kind = TomlValue::Kind::Bool;
      v.b = word == "true";
      return v;
    }
    std::string digits;
    for (const char d : word)
      if (d != '_') digits += d;
    const bool is_float = digits.find_first_of(".eE") != std::string::npos || digits == "inf" ||
                          digits == "+inf" || digits == "-inf" || digits == "nan";
    const char* first = digits.data();
    const char* last = digits.data() + digits.size();
    if (!digits.empty() && digits[0] == '+') ++first;
    if (is_float) {
      v.kind = TomlValue::Kind::Float;
      auto [p, ec] = std::from_chars(first, last, v.f);
      if (ec != std::errc() || p != last) fail("bad number '" + word + "'");
    } else {
      v.kind = TomlValue::Kind::Int;
      auto [p, ec] = std::from_chars(first, last, v.i);
      if (ec != std::errc() || p != last || digits.empty()) fail("bad value '" + word + "'");
    }
    return v;
  }

  void skip_space_and_newlines() {
    for (;;) {
      skip_blank();
      if (pos_ < text_.size() && text_[pos_] == '#') skip_comment();
      if (pos_ < text_.size() && text_[pos_] == '\n') {
        next_line();
        continue;
      }
      return;
    }
  }

  const std::string& text_;
  std::string source_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

// Typed setters used by the key table below.
double as_double(const std::string& k, const TomlValue& v) {
  if (v.kind == TomlValue::Kind::Float) return v.f;
  if (v.kind == TomlValue::Kind::Int) return static_cast<double>(v.i);
  throw ConfigError("'" + k + "' must be a number");
}

std::int64_t as_int(const std::string& k, const TomlValue& v) {
  if (v.kind != TomlValue::Kind::Int) throw ConfigError("'" + k + "' must be an integer");
  return v.i;
}

std::uint64_t as_uint(const std::string& k, const TomlValue& v) {
  const auto i = as_int(k, v);
  if (i < 0) throw ConfigError("'" + k + "' must not be negative");
  return static_cast<std::uint64_t>(i);
}

std::uint32_t as_u32(const std::string& k, const TomlValue& v) {
  const auto i = as_uint(k, v);
  if (i > 0xffffffffULL) throw ConfigError("'" + k + "' is too large");
  return static_cast<std::uint32_t>(i);
}

std::string as_string(const std::string& k, const TomlValue& v) {
  if (v.kind != TomlValue::Kind::String) throw ConfigError("'" + k + "' must be a string");
  return v.s;
}

using Setter = std::function<void(RunConfig&, const std::string&, const TomlValue&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> m;
    auto dbl = [&](const std::string& key, std::function<double&(RunConfig&)> f) {
      m[key] = [f](RunConfig& c, const std::string& k, const TomlValue& v) { f(c) = as_double(k, v); };
    };
    auto u32 = [&](const std::string& key, std::function<std::uint32_t&(RunConfig&)> f) {
      m[key] = [f](RunConfig& c, const std::string& k, const TomlValue& v) { f(c) = as_u32(k, v); };
    };
    auto path = [&](const std::string& key, std::function<std::filesystem::path&(RunConfig&)> f) {
      m[key] = [f](RunConfig& c, const std::string& k, const TomlValue& v) { f(c) = as_string(k, v); };
    };

    m["run.master_seed"] = [](RunConfig& c, const std::string& k, const TomlValue& v) {
      c.master_seed = as_uint(k, v);
    };
    path("run.output_dir", [](RunConfig& c) -> auto& { return c.output_dir; });
    m["run.threads"] = [](RunConfig& c, const std::string& k, const TomlValue& v) {
      c.threads = as_u32(k, v);
    };

    u32("testbed.grid_rows", [](RunConfig& c) -> auto& { return c.testbed.grid_rows; });
    u32("testbed.grid_cols", [](RunConfig& c) -> auto& { return c.testbed.grid_cols; });
    dbl("testbed.block_m", [](RunConfig& c) -> auto& { return c.testbed.block_m; });
    u32("testbed.buildings", [](RunConfig& c) -> auto& { return c.testbed.buildings; });
    u32("testbed.substations", [](RunConfig& c) -> auto& { return c.testbed.substations; });
    dbl("testbed.residential_fraction", [](RunConfig& c) -> auto& { return c.testbed.residential_fraction; });
    dbl("testbed.tree_cell_m", [](RunConfig& c) -> auto& { return c.testbed.tree_cell_m; });
    dbl("testbed.origin_lat", [](RunConfig& c) -> auto& { return c.testbed.origin.lat; });
    dbl("testbed.origin_lon", [](RunConfig& c) -> auto& { return c.testbed.origin.lon; });

    path("inputs.substations", [](RunConfig& c) -> auto& { return c.inputs.substations; });
    path("inputs.roads", [](RunConfig& c) -> auto& { return c.inputs.roads; });
    path("inputs.buildings", [](RunConfig& c) -> auto& { return c.inputs.buildings; });
    path("inputs.tree_cover", [](RunConfig& c) -> auto& { return c.inputs.tree_cover; });
    path("inputs.wind_samples", [](RunConfig& c) -> auto& { return c.wind_samples; });

    dbl("network.max_span_m", [](RunConfig& c) -> auto& { return c.network.max_span; });
    dbl("network.patch_size_m", [](RunConfig& c) -> auto& { return c.network.patch_size; });
    dbl("network.residential_area_per_customer",
        [](RunConfig& c) -> auto& { return c.network.customers.residential_area_per_customer; });
    dbl("network.nonresidential_area_per_customer",
        [](RunConfig& c) -> auto& { return c.network.customers.nonresidential_area_per_customer; });
    dbl("network.max_invalid_fraction", [](RunConfig& c) -> auto& { return c.network.max_invalid_fraction; });

    dbl("weather.gust_hour_fraction", [](RunConfig& c) -> auto& { return c.sim.storm.gust_hour_fraction; });
    u32("weather.min_duration_h", [](RunConfig& c) -> auto& { return c.sim.storm.min_duration; });
    u32("weather.max_duration_h", [](RunConfig& c) -> auto& { return c.sim.storm.max_duration; });

    dbl("fragility.v_min", [](RunConfig& c) -> auto& { return c.sim.fragility.wind.v_min; });
    dbl("fragility.v_max", [](RunConfig& c) -> auto& { return c.sim.fragility.wind.v_max; });
    dbl("fragility.p_cap", [](RunConfig& c) -> auto& { return c.sim.fragility.wind.p_cap; });
    dbl("fragility.shape", [](RunConfig& c) -> auto& { return c.sim.fragility.wind.shape; });
    dbl("fragility.tree_alpha", [](RunConfig& c) -> auto& { return c.sim.fragility.tree.alpha; });
    dbl("fragility.tree_curve.v_min", [](RunConfig& c) -> auto& { return c.sim.fragility.tree.curve.v_min; });
    dbl("fragility.tree_curve.v_max", [](RunConfig& c) -> auto& { return c.sim.fragility.tree.curve.v_max; });
    dbl("fragility.tree_curve.p_cap", [](RunConfig& c) -> auto& { return c.sim.fragility.tree.curve.p_cap; });
    dbl("fragility.tree_curve.shape", [](RunConfig& c) -> auto& { return c.sim.fragility.tree.curve.shape; });

    u32("crews.count", [](RunConfig& c) -> auto& { return c.sim.crews.n_crews; });
    u32("crews.repair_time_min_h", [](RunConfig& c) -> auto& { return c.sim.crews.repair_time_min; });
    u32("crews.repair_time_max_h", [](RunConfig& c) -> auto& { return c.sim.crews.repair_time_max; });

    m["simulation.episodes"] = [](RunConfig& c, const std::string& k, const TomlValue& v) {
      const auto n = as_int(k, v);
      if (n <= 0) throw ConfigError("'" + k + "' must be positive, got " + std::to_string(n));
      c.episodes = static_cast<std::uint64_t>(n);
    };
    dbl("simulation.lambda", [](RunConfig& c) -> auto& { return c.lambda; });
    u32("simulation.horizon_h", [](RunConfig& c) -> auto& { return c.sim.horizon; });
    u32("simulation.report_stride", [](RunConfig& c) -> auto& { return c.report_stride; });

    u32("ga.population", [](RunConfig& c) -> auto& { return c.ga.population; });
    u32("ga.generations", [](RunConfig& c) -> auto& { return c.ga.generations; });
    u32("ga.tournament", [](RunConfig& c) -> auto& { return c.ga.tournament; });
    dbl("ga.p_loc", [](RunConfig& c) -> auto& { return c.ga.p_loc; });
    dbl("ga.p_cap", [](RunConfig& c) -> auto& { return c.ga.p_cap; });
    dbl("ga.p_kind", [](RunConfig& c) -> auto& { return c.ga.p_kind; });
    u32("ga.max_locations", [](RunConfig& c) -> auto& { return c.ga.fitness.limits.max_locations; });
    dbl("ga.cap_min_kw", [](RunConfig& c) -> auto& { return c.ga.fitness.limits.cap_min_kw; });
    dbl("ga.cap_max_kw", [](RunConfig& c) -> auto& { return c.ga.fitness.limits.cap_max_kw; });
    dbl("ga.solar_cost_per_kw", [](RunConfig& c) -> auto& { return c.ga.fitness.limits.solar_cost_per_kw; });
    dbl("ga.battery_cost_per_kw", [](RunConfig& c) -> auto& { return c.ga.fitness.limits.battery_cost_per_kw; });
    dbl("ga.budget", [](RunConfig& c) -> auto& { return c.ga.fitness.limits.budget; });
    dbl("ga.kw_per_customer", [](RunConfig& c) -> auto& { return c.ga.fitness.der.kw_per_customer; });
    dbl("ga.storage_hours", [](RunConfig& c) -> auto& { return c.ga.fitness.der.storage_hours; });
    m["ga.replay_subsample"] = [](RunConfig& c, const std::string& k, const TomlValue& v) {
      c.ga.fitness.replay_subsample = as_uint(k, v);
    };
    m["ga.degree_scaling"] = [](RunConfig& c, const std::string& k, const TomlValue& v) {
      const auto s = as_string(k, v);
      if (s == "multiply") {
        c.ga.scaling = DegreeScaling::Multiply;
      } else if (s == "divide") {
        c.ga.scaling = DegreeScaling::Divide;
      } else {
        throw ConfigError("'" + k + "' must be \"multiply\" or \"divide\"");
      }
    };
    m["ga.areas"] = [](RunConfig& c, const std::string& k, const TomlValue& v) {
      if (v.kind != TomlValue::Kind::Array) throw ConfigError("'" + k + "' must be an array of names");
      c.areas.clear();
      for (const auto& item : v.array) c.areas.push_back(as_string(k, item));
    };
    return m;
  }();
  return table;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::filesystem::path& p) {
  if (p.empty() || p.is_absolute()) return p;
  return base / p;
}

void require_file(const std::filesystem::path& p, const std::string& what) {
  if (p.empty()) throw ConfigError(what + " is not set");
  if (!std::filesystem::is_regular_file(p))
    throw ConfigError(what + " not found: " + p.string());
}

}  // namespace

TomlTable parse_toml(const std::string& text, const std::string& source) {
  return Parser(text, source).run();
}

RunConfig config_from_toml(const std::string& text, const std::filesystem::path& base_dir,
                           const std::string& source) {
  RunConfig cfg;
  cfg.base_dir = base_dir;
  const auto table = parse_toml(text, source);
  const auto& known = setters();
  for (const auto& [key, value] : table) {
    const auto it = known.find(key);
    if (it == known.end()) throw ConfigError(source + ": unknown key '" + key + "'");
    try {
      it->second(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ": " + e.what());
    }
  }
  cfg.output_dir = resolve(base_dir, cfg.output_dir);
  auto input = [&](std::filesystem::path& p, const char* name) {
    p = p.empty() ? cfg.output_dir / "inputs" / name : resolve(base_dir, p);
  };
  input(cfg.inputs.substations, "substations.csv");
  input(cfg.inputs.roads, "roads.jsonl");
  input(cfg.inputs.buildings, "buildings.csv");
  input(cfg.inputs.tree_cover, "tree_cover.grid");
  cfg.wind_samples = resolve(base_dir, cfg.wind_samples);
  cfg.ga.fitness.lambda = cfg.lambda;
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  return config_from_toml(ss.str(), base, path.string());
}

void validate(const RunConfig& cfg, Command cmd) {
  if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0))
    throw ConfigError("simulation.lambda must lie in [0, 1], got " + std::to_string(cfg.lambda));
  if (cfg.episodes == 0) throw ConfigError("simulation.episodes must be positive");
  if (cfg.report_stride == 0) throw ConfigError("simulation.report_stride must be positive");
  if (cfg.sim.horizon == 0) throw ConfigError("simulation.horizon_h must be positive");
  const auto& storm = cfg.sim.storm;
  if (!(storm.gust_hour_fraction >= 0.0 && storm.gust_hour_fraction <= 1.0))
    throw ConfigError("weather.gust_hour_fraction must lie in [0, 1]");
  if (storm.min_duration < 1 || storm.min_duration > storm.max_duration)
    throw ConfigError("weather durations need 1 <= min_duration_h <= max_duration_h");
  if (!(cfg.network.max_span > 0.0)) throw ConfigError("network.max_span_m must be positive");
  if (!(cfg.network.patch_size > 0.0)) throw ConfigError("network.patch_size_m must be positive");
  try {
    cfg.sim.fragility.validate();
    cfg.sim.crews.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  const auto& ga = cfg.ga;
  if (ga.population < 1 || ga.generations < 1 || ga.tournament < 1)
    throw ConfigError("ga.population, ga.generations and ga.tournament must be at least 1");
  for (const double p : {ga.p_loc, ga.p_cap, ga.p_kind})
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("ga mutation probabilities must lie in [0, 1]");
  const auto& lim = ga.fitness.limits;
  if (lim.max_locations < 1) throw ConfigError("ga.max_locations must be at least 1");
  if (!(lim.cap_min_kw > 0.0 && lim.cap_min_kw <= lim.cap_max_kw))
    throw ConfigError("ga capacities need 0 < cap_min_kw <= cap_max_kw");
  if (!(ga.fitness.der.kw_per_customer > 0.0)) throw ConfigError("ga.kw_per_customer must be positive");
  if (!(ga.fitness.der.storage_hours >= 0.0)) throw ConfigError("ga.storage_hours must not be negative");

  switch (cmd) {
    case Command::Testbed:
      if (cfg.testbed.grid_rows < 2 || cfg.testbed.grid_cols < 2)
        throw ConfigError("testbed grid needs at least 2 x 2 intersections");
      if (cfg.testbed.substations < 1) throw ConfigError("testbed.substations must be at least 1");
      break;
    case Command::Synth:
      require_file(cfg.inputs.substations, "inputs.substations");
      require_file(cfg.inputs.roads, "inputs.roads");
      require_file(cfg.inputs.buildings, "inputs.buildings");
      require_file(cfg.inputs.tree_cover, "inputs.tree_cover");
      break;
    case Command::Estimate:
      require_file(cfg.wind_samples, "inputs.wind_samples");
      require_file(cfg.out("network.bin"), "network file (run `synth` first)");
      break;
    case Command::Enhance:
      require_file(cfg.out("network.bin"), "network file (run `synth` first)");
      require_file(cfg.out("episodes.bin"), "episode store (run `estimate` first)");
      break;
    case Command::Report:
      break;
  }
}

}  // namespace resilisim
