#include "resilisim/weather.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace resilisim {

double WindDistribution::sample(Engine& rng) const {
  std::normal_distribution<double> normal(mu, sigma);
  return std::exp(normal(rng));
}

double WindDistribution::median() const { return std::exp(mu); }

WindDistribution fit_lognormal(std::span<const double> speeds) {
  if (speeds.size() < 2) throw WeatherError("log-normal fit needs at least two samples");
  double sum = 0.0;
  for (const double s : speeds) {
    if (!(s > 0.0) || !std::isfinite(s)) throw WeatherError("wind speed samples must be positive");
    sum += std::log(s);
  }
  const double mu = sum / static_cast<double>(speeds.size());
  double ss = 0.0;
  for (const double s : speeds) {
    const double d = std::log(s) - mu;
    ss += d * d;
  }
  const double sigma = std::sqrt(ss / static_cast<double>(speeds.size()));
  if (!(sigma > 1e-12)) throw WeatherError("degenerate log-normal fit: zero spread");
  return {mu, sigma};
}

WindModel fit_wind_model(const std::filesystem::path& csv) {
  std::ifstream in(csv);
  if (!in) throw WeatherError("cannot open " + csv.string());
  std::vector<double> gust, sustained;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line.find_first_not_of(" \r") == std::string::npos) continue;
    std::istringstream ss(line);
    std::string speed_s, flag_s;
    std::getline(ss, speed_s, ',');
    std::getline(ss, flag_s);
    while (!flag_s.empty() && (flag_s.back() == '\r' || flag_s.back() == ' ')) flag_s.pop_back();
    char* end = nullptr;
    const double speed = std::strtod(speed_s.c_str(), &end);
    if (end == speed_s.c_str()) {
      if (line_no == 1) continue;  // header
      throw WeatherError(csv.string() + ":" + std::to_string(line_no) + ": bad speed");
    }
    if (flag_s == "1") {
      gust.push_back(speed);
    } else if (flag_s == "0") {
      sustained.push_back(speed);
    } else {
      throw WeatherError(csv.string() + ":" + std::to_string(line_no) + ": is_gust must be 0 or 1");
    }
  }
  return {fit_lognormal(gust), fit_lognormal(sustained)};
}

std::vector<double> interpolate(std::span<const SpeedSample> sparse, const PatchGrid& grid) {
  if (sparse.empty()) throw WeatherError("interpolation needs at least one sample point");
  const auto n = grid.size();
  std::vector<double> out(n, 0.0);
  std::vector<double> exact_sum(n, 0.0);
  std::vector<std::uint32_t> exact_count(n, 0);
  for (const auto& s : sparse) {
    try {
      const auto p = patch_of(grid, s.pos);
      exact_sum[p] += s.speed;
      ++exact_count[p];
    } catch (const GeoError&) {
      // Outside the grid: contributes only through the weighted average.
    }
  }
  for (std::uint32_t p = 0; p < n; ++p) {
    if (exact_count[p] > 0) {
      out[p] = exact_sum[p] / exact_count[p];
      continue;
    }
    const auto c = grid.center(p);
    double num = 0.0, den = 0.0;
    bool hit = false;
    for (const auto& s : sparse) {
      const double d2 = distance_sq(c, s.pos);
      if (d2 == 0.0) {
        out[p] = s.speed;
        hit = true;
        break;
      }
      const double w = 1.0 / d2;
      num += w * s.speed;
      den += w;
    }
    if (!hit) out[p] = num / den;
  }
  return out;
}

AreaSites AreaSites::from_graph(const NetworkGraph& g) {
  AreaSites out;
  out.sites.resize(g.area_count());
  for (const auto& n : g.nodes) {
    if (n.kind == NodeKind::Load && n.area != kNoArea) out.sites[n.area].push_back(n.pos);
  }
  for (std::size_t a = 0; a < out.sites.size(); ++a) {
    if (out.sites[a].empty()) out.sites[a].push_back(g.nodes[g.substations[a]].pos);
  }
  return out;
}

StormScenario::StormScenario(std::uint32_t duration, std::uint32_t n_patches, std::size_t n_areas)
    : duration_(duration),
      n_patches_(n_patches),
      fields_(static_cast<std::size_t>(duration) * n_patches, 0.0),
      samples_(duration),
      area_gust_(n_areas, 0) {}

double StormScenario::wind_at(std::uint32_t patch, std::uint32_t hour) const {
  if (hour >= duration_) throw WeatherError("hour beyond storm duration");
  if (patch >= n_patches_) throw WeatherError("patch index out of range");
  return fields_[static_cast<std::size_t>(hour) * n_patches_ + patch];
}

std::span<const double> StormScenario::field(std::uint32_t hour) const {
  if (hour >= duration_) throw WeatherError("hour beyond storm duration");
  return {fields_.data() + static_cast<std::size_t>(hour) * n_patches_, n_patches_};
}

StormScenario sample_storm(const AreaSites& areas, const PatchGrid& grid, const WindModel& wind,
                           const StormConfig& cfg, Engine& rng) {
  if (!(wind.gust.sigma > 0.0) || !(wind.sustained.sigma > 0.0))
    throw WeatherError("wind distributions need positive sigma");
  if (cfg.min_duration == 0 || cfg.min_duration > cfg.max_duration)
    throw WeatherError("bad storm duration range");
  if (areas.size() == 0) throw WeatherError("storm needs at least one service area");
  const auto duration =
      static_cast<std::uint32_t>(uniform_int(rng, cfg.min_duration, cfg.max_duration));
  StormScenario s(duration, grid.size(), areas.size());
  for (std::uint32_t h = 0; h < duration; ++h) {
    auto& hour_samples = s.samples_[h];
    hour_samples.reserve(areas.size());
    for (std::uint32_t a = 0; a < areas.size(); ++a) {
      const bool gust = bernoulli(rng, cfg.gust_hour_fraction);
      const auto& sites = areas.sites[a];
      const auto site = sites[static_cast<std::size_t>(
          uniform_int(rng, 0, static_cast<std::int64_t>(sites.size()) - 1))];
      const double speed = gust ? wind.gust.sample(rng) : wind.sustained.sample(rng);
      hour_samples.push_back({site, speed, gust});
      if (gust) {
        s.gust_events_.push_back({patch_of(grid, site), h, a});
        s.area_gust_[a] = 1;
      }
    }
    const auto field = interpolate(hour_samples, grid);
    std::copy(field.begin(), field.end(), s.fields_.begin() + static_cast<std::ptrdiff_t>(h) * grid.size());
  }
  return s;
}

void write_storm_geojson(const StormScenario& s, const NetworkGraph& g,
                         const std::filesystem::path& path) {
  using json = nlohmann::json;
  json features = json::array();
  for (std::uint32_t h = 0; h < s.duration(); ++h) {
    for (const auto& p : s.samples(h)) {
      const auto geo = unproject(p.pos, g.origin);
      features.push_back({{"type", "Feature"},
                          {"geometry", {{"type", "Point"}, {"coordinates", {geo.lon, geo.lat}}}},
                          {"properties",
                           {{"hour", h},
                            {"speed_mps", p.speed},
                            {"regime", p.gust ? "gust" : "sustained"},
                            {"color", p.gust ? "#d62728" : "#2ca02c"}}}});
    }
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw WeatherError("cannot write " + path.string());
  out << json{{"type", "FeatureCollection"}, {"features", std::move(features)}}.dump() << '\n';
}

}  // namespace resilisim
