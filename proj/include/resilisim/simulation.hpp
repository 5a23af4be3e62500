#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "resilisim/fragility.hpp"
#include "resilisim/network.hpp"
#include "resilisim/weather.hpp"

namespace resilisim {

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CrewPool {
  std::uint32_t n_crews = 5;
  std::uint32_t repair_time_min = 1;  // hours
  std::uint32_t repair_time_max = 4;  // hours

  void validate() const;
};

struct SimulationConfig {
  StormConfig storm{};
  FragilityModel fragility{};
  CrewPool crews{};
  std::uint32_t horizon = 168;  // hours covered by the resilience metric
};

struct EdgeEvent {
  std::uint32_t edge = 0;
  std::uint32_t hour = 0;

  friend bool operator==(const EdgeEvent&, const EdgeEvent&) = default;
};

/// Everything needed to replay one Monte Carlo episode. Failure hour h takes
/// effect at time point h + 1; a repair at hour r takes effect at r.
struct EpisodeRecord {
  std::uint64_t episode_index = 0;
  std::uint64_t scenario_seed = 0;
  std::uint32_t duration = 0;
  std::uint32_t horizon = 0;
  std::vector<EdgeEvent> failures;
  std::vector<EdgeEvent> repairs;
  std::vector<std::uint8_t> area_gust;
  std::vector<double> area_resilience;
  std::vector<double> curves;  // area-major, horizon + 1 points per area

  std::size_t area_count() const { return area_gust.size(); }
  std::span<const double> curve(std::size_t area) const {
    return {curves.data() + area * (horizon + 1), horizon + 1};
  }

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

/// Shared read-only state for running episodes on one network.
struct EpisodeContext {
  EpisodeContext(const NetworkGraph& graph, WindModel wind_model, SimulationConfig config);

  const NetworkGraph& g;
  WindModel wind;
  SimulationConfig cfg;
  AreaSites sites;
  std::vector<std::uint64_t> area_totals;
};

/// Fraction of the area's customers still connected to the area's own
/// substation when `failed` edges are out. Plain BFS; 1 for an empty area.
double served_fraction(const NetworkGraph& g, const std::unordered_set<std::uint32_t>& failed,
                       std::uint32_t area);

/// Customers (all areas) reconnected if failed edge e alone came back.
std::uint64_t criticality(const NetworkGraph& g, const std::unordered_set<std::uint32_t>& failed,
                          std::uint32_t e);

/// One storm followed by greedy criticality-ordered restoration. Each crew
/// takes the most critical unclaimed failure and holds it for a uniform
/// integer number of hours. Deterministic in (master_seed, episode_index).
EpisodeRecord run_episode(const EpisodeContext& ctx, std::uint64_t master_seed,
                          std::uint64_t episode_index);

/// Same as above with a caller-supplied storm (used by tests).
EpisodeRecord run_episode(const EpisodeContext& ctx, const StormScenario& storm,
                          std::uint64_t master_seed, std::uint64_t episode_index);

/// Mean trapezoid area of P over [0, horizon], unit steps.
double trapezoid_resilience(std::span<const double> curve, std::uint32_t horizon);

/// Gust-weighted mean: lambda on the gust-episode mean plus (1 - lambda) on
/// the rest. When every episode (or none) gusted, the plain mean of the
/// non-empty group is returned.
double aggregate(std::span<const double> resilience, std::span<const std::uint8_t> gust,
                 double lambda);

double aggregate(std::span<const EpisodeRecord> records, std::uint32_t area, double lambda);

struct ResilienceReport {
  std::vector<double> resilience;       // R_i per area
  std::vector<std::uint64_t> n_gust;    // N_{g,i} per area
  std::uint64_t episodes = 0;
  double lambda = 0.8;
  std::uint32_t stride = 10;
  std::vector<std::uint64_t> checkpoints;       // episode counts
  std::vector<std::vector<double>> convergence;  // [area][checkpoint]
};

/// Folds per-episode area values (in episode order) into the report.
class ReportBuilder {
 public:
  ReportBuilder(std::size_t n_areas, double lambda, std::uint32_t stride);
  void add(const EpisodeRecord& rec);
  ResilienceReport finish() const;

 private:
  std::size_t n_areas_;
  double lambda_;
  std::uint32_t stride_;
  std::uint64_t count_ = 0;
  std::vector<double> gust_sum_, calm_sum_;
  std::vector<std::uint64_t> gust_n_;
  ResilienceReport partial_;
};

struct EstimateOptions {
  std::uint64_t episodes = 10'000;
  std::uint64_t master_seed = 1;
  double lambda = 0.8;
  std::uint32_t stride = 10;
  unsigned threads = 0;
};

/// Runs episodes 0..N-1 in parallel and hands each record to `sink` in
/// episode order. The report does not depend on the thread count.
ResilienceReport estimate(const EpisodeContext& ctx, const EstimateOptions& opt,
                          const std::function<void(const EpisodeRecord&)>& sink = {});

}  // namespace resilisim
