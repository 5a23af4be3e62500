#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "resilisim/geo.hpp"
#include "resilisim/network.hpp"
#include "resilisim/rng.hpp"

namespace resilisim {

class WeatherError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Log-normal wind speed distribution (m/s); mu and sigma are in log space.
struct WindDistribution {
  double mu = 0.0;
  double sigma = 1.0;

  double sample(Engine& rng) const;
  double median() const;
};

/// Maximum-likelihood fit: mu = mean(ln s), sigma = population std(ln s).
/// Needs at least two strictly positive samples with non-zero spread.
WindDistribution fit_lognormal(std::span<const double> speeds);

struct WindModel {
  WindDistribution gust{};
  WindDistribution sustained{};
};

/// Reads `speed_mps,is_gust(0|1)` rows and fits both regimes.
WindModel fit_wind_model(const std::filesystem::path& csv);

struct SpeedSample {
  PlanarPoint pos{};
  double speed = 0.0;  // m/s
  bool gust = false;
};

/// Inverse-distance (power 2) interpolation onto patch centres. A patch
/// that contains sample points takes their mean exactly.
std::vector<double> interpolate(std::span<const SpeedSample> sparse, const PatchGrid& grid);

struct StormConfig {
  double gust_hour_fraction = 0.25;
  std::uint32_t min_duration = 4;
  std::uint32_t max_duration = 12;
};

/// Candidate sample locations per service area (its load positions, or the
/// substation when the area has no loads).
struct AreaSites {
  std::vector<std::vector<PlanarPoint>> sites;

  static AreaSites from_graph(const NetworkGraph& g);
  std::size_t size() const { return sites.size(); }
};

struct GustEvent {
  std::uint32_t patch = 0;
  std::uint32_t hour = 0;
  std::uint32_t area = 0;
};

/// Hourly dense wind field for one thunderstorm.
class StormScenario {
 public:
  StormScenario() = default;
  StormScenario(std::uint32_t duration, std::uint32_t n_patches, std::size_t n_areas);

  std::uint32_t duration() const { return duration_; }
  std::uint32_t patch_count() const { return n_patches_; }

  /// Speed in `patch` during `hour`; hour must be below duration().
  double wind_at(std::uint32_t patch, std::uint32_t hour) const;
  std::span<const double> field(std::uint32_t hour) const;

  const std::vector<SpeedSample>& samples(std::uint32_t hour) const { return samples_.at(hour); }
  const std::vector<GustEvent>& gust_events() const { return gust_events_; }
  /// One flag per area: did any hour of this storm gust there.
  const std::vector<std::uint8_t>& area_gust() const { return area_gust_; }

 private:
  friend StormScenario sample_storm(const AreaSites&, const PatchGrid&, const WindModel&,
                                    const StormConfig&, Engine&);
  std::uint32_t duration_ = 0;
  std::uint32_t n_patches_ = 0;
  std::vector<double> fields_;  // duration x patches
  std::vector<std::vector<SpeedSample>> samples_;
  std::vector<GustEvent> gust_events_;
  std::vector<std::uint8_t> area_gust_;
};

/// Draws a duration uniformly in [min_duration, max_duration], flags each
/// (area, hour) cell as a gust with probability gust_hour_fraction, places
/// one sample point per area per hour at a uniformly chosen site, draws its
/// speed from the matching regime, and interpolates every hour.
StormScenario sample_storm(const AreaSites& areas, const PatchGrid& grid, const WindModel& wind,
                           const StormConfig& cfg, Engine& rng);

/// Sample points of every hour as GeoJSON points tagged gust/sustained.
void write_storm_geojson(const StormScenario& s, const NetworkGraph& g,
                         const std::filesystem::path& path);

}  // namespace resilisim
