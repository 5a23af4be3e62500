#include "resilisim/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "resilisim/enhance.hpp"
#include "resilisim/episode_store.hpp"
#include "resilisim/network_io.hpp"
#include "resilisim/rng.hpp"
#include "resilisim/simulation.hpp"
#include "resilisim/weather.hpp"

namespace resilisim {

namespace {

using json = nlohmann::json;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

std::vector<PlanarPoint> convex_hull(std::vector<PlanarPoint> pts) {
  std::sort(pts.begin(), pts.end(), [](PlanarPoint a, PlanarPoint b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  auto cross = [](PlanarPoint o, PlanarPoint a, PlanarPoint b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
  };
  std::vector<PlanarPoint> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

// Red (low) to green (high) over [0.9, 1].
std::string resilience_color(double r) {
  const double t = std::clamp((r - 0.9) / 0.1, 0.0, 1.0);
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x40", static_cast<int>(255 * (1 - t)), static_cast<int>(200 * t));
  return buf;
}

void write_resilience_geojson(const NetworkGraph& g, const ResilienceReport& rep,
                              const std::filesystem::path& path) {
  std::vector<std::vector<PlanarPoint>> members(g.area_count());
  for (const auto& n : g.nodes)
    if (n.area != kNoArea) members[n.area].push_back(n.pos);
  json features = json::array();
  for (std::size_t a = 0; a < g.area_count(); ++a) {
    auto hull = convex_hull(members[a]);
    json ring = json::array();
    for (const auto& p : hull) {
      const auto geo = unproject(p, g.origin);
      ring.push_back({geo.lon, geo.lat});
    }
    json geometry;
    if (hull.size() >= 3) {
      ring.push_back(ring.front());
      geometry = {{"type", "Polygon"}, {"coordinates", json::array({ring})}};
    } else {
      const auto geo = unproject(g.nodes[g.substations[a]].pos, g.origin);
      geometry = {{"type", "Point"}, {"coordinates", {geo.lon, geo.lat}}};
    }
    features.push_back({{"type", "Feature"},
                        {"geometry", geometry},
                        {"properties",
                         {{"area_id", g.area_names[a]},
                          {"R_i", rep.resilience[a]},
                          {"N_gust", rep.n_gust[a]},
                          {"color", resilience_color(rep.resilience[a])}}}});
  }
  open_out(path) << json{{"type", "FeatureCollection"}, {"features", std::move(features)}}.dump() << '\n';
}

std::vector<std::uint32_t> resolve_areas(const NetworkGraph& g, const std::vector<std::string>& names) {
  std::vector<std::uint32_t> ids;
  for (const auto& name : names) {
    const auto id = g.area_by_name(name);
    if (id < 0) {
      std::string known;
      for (const auto& n : g.area_names) known += (known.empty() ? "" : ", ") + n;
      throw ConfigError("unknown area '" + name + "' (network has: " + known + ")");
    }
    ids.push_back(static_cast<std::uint32_t>(id));
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

struct AreaRow {
  std::string name;
  double r = 0.0;
  std::uint64_t n_gust = 0;
  std::uint64_t episodes = 0;
};

std::vector<AreaRow> read_resilience_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<AreaRow> rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    AreaRow row;
    std::string f;
    std::getline(ss, row.name, ',');
    std::getline(ss, f, ',');
    row.r = std::stod(f);
    std::getline(ss, f, ',');
    row.n_gust = std::stoull(f);
    std::getline(ss, f, ',');
    row.episodes = std::stoull(f);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

void apply(RunConfig& cfg, const Overrides& o) {
  if (o.seed) cfg.master_seed = *o.seed;
  if (o.episodes) {
    if (*o.episodes <= 0) throw ConfigError("--episodes must be positive, got " + std::to_string(*o.episodes));
    cfg.episodes = static_cast<std::uint64_t>(*o.episodes);
  }
  if (o.threads) cfg.threads = *o.threads;
  if (o.areas) cfg.areas = *o.areas;
}

void cmd_testbed(const RunConfig& cfg, std::ostream& out) {
  const auto data = generate_testbed(cfg.testbed, cfg.master_seed);
  write_ingest(data, cfg.inputs);
  out << "testbed: " << cfg.testbed.grid_rows << "x" << cfg.testbed.grid_cols << " grid, "
      << num(cfg.testbed.block_m) << " m blocks, seed " << cfg.master_seed << "\n"
      << "  substations " << data.substations.size() << "\n"
      << "  roads       " << data.roads.size() << "\n"
      << "  buildings   " << data.buildings.size() << "\n"
      << "  tree raster " << data.trees.rows << "x" << data.trees.cols << " @ " << num(data.trees.cell_size)
      << " m\n"
      << "  written to  " << cfg.inputs.substations.parent_path().string() << "\n";
}

void cmd_synth(const RunConfig& cfg, std::ostream& out) {
  const auto data = read_ingest(cfg.inputs);
  const auto result = synthesize(data, cfg.network);
  write_network(result.graph, cfg.out("network.bin"));
  write_network_geojson(result.graph, cfg.out("network.geojson"));
  const auto& s = result.stats;
  out << "network: " << result.graph.node_count() << " nodes, " << result.graph.edge_count() << " edges\n"
      << "  substations " << s.substations << "\n"
      << "  poles       " << s.poles << "\n"
      << "  loads       " << s.loads << "\n"
      << "  areas       " << s.areas << "\n"
      << "  customers   " << s.customers << "\n"
      << "  buildings   " << s.buildings_in << " (" << s.buildings_merged_away << " merged away)\n"
      << "  unreachable " << s.unreachable_loads << "\n"
      << "  rejected    " << s.invalid_records << "\n";
  for (const auto& w : result.warnings) out << "warning: " << w << "\n";
}

void cmd_estimate(const RunConfig& cfg, std::ostream& out) {
  const auto g = read_network(cfg.out("network.bin"));
  const auto wind = fit_wind_model(cfg.wind_samples);
  const EpisodeContext ctx(g, wind, cfg.sim);

  EpisodeStoreWriter store(cfg.out("episodes.bin"), static_cast<std::uint32_t>(g.area_count()), cfg.sim.horizon);
  EstimateOptions opt;
  opt.episodes = cfg.episodes;
  opt.master_seed = cfg.master_seed;
  opt.lambda = cfg.lambda;
  opt.stride = cfg.report_stride;
  opt.threads = cfg.threads;
  const auto rep = estimate(ctx, opt, [&](const EpisodeRecord& rec) { store.append(rec); });
  store.close();

  {
    auto csv = open_out(cfg.out("resilience.csv"));
    csv << "area_id,R_i,N_gust,episodes\n";
    for (std::size_t a = 0; a < g.area_count(); ++a)
      csv << g.area_names[a] << ',' << num(rep.resilience[a]) << ',' << rep.n_gust[a] << ',' << rep.episodes << '\n';
  }
  {
    auto csv = open_out(cfg.out("convergence.csv"));
    csv << "area_id,episode,running_R\n";
    for (std::size_t a = 0; a < g.area_count(); ++a)
      for (std::size_t c = 0; c < rep.checkpoints.size(); ++c)
        csv << g.area_names[a] << ',' << rep.checkpoints[c] << ',' << num(rep.convergence[a][c]) << '\n';
  }
  write_resilience_geojson(g, rep, cfg.out("resilience.geojson"));
  auto storm_rng = make_engine(cfg.master_seed, StreamPurpose::Storm, 0);
  const auto storm0 = sample_storm(ctx.sites, g.patches, wind, cfg.sim.storm, storm_rng);
  write_storm_geojson(storm0, g, cfg.out("storm_0.geojson"));

  out << "episodes: " << rep.episodes << "  lambda: " << num(rep.lambda) << "  horizon: " << cfg.sim.horizon
      << " h\n";
  out << "area        R_i           N_gust\n";
  for (std::size_t a = 0; a < g.area_count(); ++a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-10s  %.10f  %llu\n", g.area_names[a].c_str(), rep.resilience[a],
                  static_cast<unsigned long long>(rep.n_gust[a]));
    out << buf;
  }
}

void cmd_enhance(const RunConfig& cfg, std::ostream& out) {
  const auto g = read_network(cfg.out("network.bin"));
  const auto store = EpisodeStore::open(cfg.out("episodes.bin"));
  if (store.empty()) throw std::runtime_error("episode store is empty: " + cfg.out("episodes.bin").string());
  GAConfig ga = cfg.ga;
  ga.threads = cfg.threads;
  ga.fitness.lambda = cfg.lambda;
  ga.fitness.areas = resolve_areas(g, cfg.areas);
  const ReplayIndex index(g, store.read_all(), cfg.threads);

  auto rng = make_engine(cfg.master_seed, StreamPurpose::Genetic, 0);
  const auto result = evolve(g, index, ga, rng, [&](const GenerationStats& s) {
    if (s.generation % 10 == 0 || s.generation + 1 == ga.generations)
      out << "generation " << s.generation << "  best " << fixed(s.best_fitness, 8) << "  mean "
          << fixed(s.mean_fitness, 8) << "\n";
  });

  write_plan_json(result.best.plan, cfg.out("plan.json"));
  write_ga_history(result.history, cfg.out("ga_history.csv"));
  write_plan_geojson(result.best.plan, g, cfg.out("plan.geojson"));

  json areas = json::array();
  for (const auto a : ga.fitness.areas) areas.push_back(g.area_names[a]);
  if (areas.empty())
    for (const auto& n : g.area_names) areas.push_back(n);
  const json summary{{"areas", areas},
                     {"episodes", index.episode_count()},
                     {"baseline_fitness", result.baseline_fitness},
                     {"best_fitness", result.best.fitness},
                     {"placements", result.best.plan.placements.size()},
                     {"plan_cost", plan_cost(result.best.plan, ga.fitness.limits)},
                     {"evaluations", result.evaluations},
                     {"constraint_violations", result.constraint_violations}};
  open_out(cfg.out("enhance_summary.json")) << summary.dump(2) << '\n';

  out << "baseline min R " << fixed(result.baseline_fitness, 8) << "\n"
      << "enhanced min R " << fixed(result.best.fitness, 8) << "\n"
      << "placements     " << result.best.plan.placements.size() << "\n";
}

void cmd_report(const RunConfig& cfg, std::ostream& out) {
  const auto resilience = cfg.out("resilience.csv");
  if (!std::filesystem::exists(resilience))
    throw std::runtime_error("missing artifacts: " + resilience.string() + " (run `estimate` first)");
  const auto rows = read_resilience_csv(resilience);
  if (rows.empty()) throw std::runtime_error(resilience.string() + " has no areas");
  out << "Resilience by service area (" << rows.front().episodes << " episodes)\n";
  std::size_t worst = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << "  " << rows[i].name << "  R=" << fixed(rows[i].r, 6) << "  gust episodes=" << rows[i].n_gust << "\n";
    if (rows[i].r < rows[worst].r) worst = i;
  }
  out << "Worst area: " << rows[worst].name << " (R=" << fixed(rows[worst].r, 6) << ")\n";

  const auto summary_path = cfg.out("enhance_summary.json");
  if (!std::filesystem::exists(summary_path)) return;
  std::ifstream in(summary_path);
  const auto s = json::parse(in);
  std::string names;
  for (const auto& a : s.at("areas")) names += (names.empty() ? "" : ", ") + a.get<std::string>();
  const double base = s.at("baseline_fitness").get<double>();
  const double best = s.at("best_fitness").get<double>();
  out << "DER plan (areas: " << names << ")\n"
      << "  placements      " << s.at("placements").get<std::uint64_t>() << "\n"
      << "  baseline min R  " << fixed(base, 6) << "\n"
      << "  enhanced min R  " << fixed(best, 6) << "\n"
      << "  improvement     " << fixed(best - base, 6) << "\n";
}

std::optional<Command> command_from_string(const std::string& name) {
  if (name == "testbed") return Command::Testbed;
  if (name == "synth") return Command::Synth;
  if (name == "estimate") return Command::Estimate;
  if (name == "enhance") return Command::Enhance;
  if (name == "report") return Command::Report;
  return std::nullopt;
}

int run_command(Command cmd, const std::filesystem::path& config, const Overrides& overrides,
                std::ostream& out, std::ostream& err) {
  try {
    auto cfg = load_config(config);
    apply(cfg, overrides);
    validate(cfg, cmd);
    switch (cmd) {
      case Command::Testbed: cmd_testbed(cfg, out); break;
      case Command::Synth: cmd_synth(cfg, out); break;
      case Command::Estimate: cmd_estimate(cfg, out); break;
      case Command::Enhance: cmd_enhance(cfg, out); break;
      case Command::Report: cmd_report(cfg, out); break;
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace resilisim
