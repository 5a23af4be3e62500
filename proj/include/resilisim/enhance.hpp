#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "resilisim/connectivity.hpp"
#include "resilisim/network.hpp"
#include "resilisim/rng.hpp"
#include "resilisim/simulation.hpp"

namespace resilisim {

class EnhanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DerKind : std::uint8_t { Solar = 0, Battery = 1 };

const char* to_string(DerKind kind);
DerKind der_kind_from_string(const std::string& s);

struct DERPlacement {
  std::uint32_t node = 0;
  DerKind kind = DerKind::Battery;
  double capacity_kw = 0.0;

  friend bool operator==(const DERPlacement&, const DERPlacement&) = default;
};

struct DERPlan {
  std::vector<DERPlacement> placements;

  friend bool operator==(const DERPlan&, const DERPlan&) = default;
};

/// Island supply model. A component with no substation in it runs as an
/// island fed by the DERs inside it. Batteries discharge while energy
/// remains; solar only produces after the storm has passed.
struct DerModel {
  double kw_per_customer = 1.2;
  double storage_hours = 4.0;  // battery energy = capacity * storage_hours
};

struct PlanLimits {
  std::uint32_t max_locations = 20;
  double cap_min_kw = 50.0;
  double cap_max_kw = 2000.0;
  double solar_cost_per_kw = 1.0;
  double battery_cost_per_kw = 1.0;
  double budget = 0.0;  // 0 disables the cost cap
};

double plan_cost(const DERPlan& plan, const PlanLimits& limits);
bool satisfies(const DERPlan& plan, const PlanLimits& limits, const NetworkGraph& g);

/// Plan-independent view of stored episodes, rebuilt from the failure and
/// repair logs. For every node cut off from its substation at some point it
/// records which stranded component it sat in at each time point, so a plan
/// can be replayed without touching the whole graph.
class ReplayIndex {
 public:
  ReplayIndex(const NetworkGraph& g, std::vector<EpisodeRecord> episodes, unsigned threads = 0);

  std::size_t episode_count() const { return timelines_.size(); }
  std::size_t area_count() const { return area_totals_.size(); }
  std::uint32_t horizon() const { return horizon_; }
  const EpisodeRecord& episode(std::size_t i) const { return episodes_[i]; }

  /// Episodes in which each node lost power.
  std::vector<std::uint32_t> outage_counts() const;

  struct ReplayStats {
    double battery_energy_kwh = 0.0;
    double battery_discharged_kwh = 0.0;
  };

  /// Per-area resilience of episode i with `plan` installed. The empty plan
  /// reproduces the stored values.
  std::vector<double> replay(std::size_t i, const DERPlan& plan, const DerModel& model,
                             ReplayStats* stats = nullptr) const;

  /// Served-fraction curves of the replay, area-major.
  std::vector<double> replay_curves(std::size_t i, const DERPlan& plan, const DerModel& model,
                                    ReplayStats* stats = nullptr) const;

 private:
  struct MergeNode {
    std::uint32_t time = 0;
    std::int32_t parent = -1;
    AreaCounts stranded;
  };
  struct Timeline {
    std::uint32_t duration = 0;
    std::uint32_t quiet_after = 0;           // no stranded customers after this point
    std::vector<std::uint32_t> dead;         // sorted node ids stranded at storm end
    std::vector<std::int32_t> storm_labels;  // [t-1][k] -> storm_comps index, -1 if served
    std::vector<AreaCounts> storm_comps;
    std::vector<std::int32_t> leaf;          // [k] -> merge forest node
    std::vector<MergeNode> forest;
    std::vector<double> base;                // area-major curves without DERs
  };

  Timeline build(const EpisodeRecord& rec) const;

  const NetworkGraph& g_;
  std::uint32_t horizon_ = 0;
  std::vector<std::uint64_t> area_totals_;
  std::vector<EpisodeRecord> episodes_;
  std::vector<Timeline> timelines_;
};

enum class DegreeScaling { Multiply, Divide };

/// Location sampling distribution over candidate nodes (every non-substation
/// node with an area).
class SamplingWeights {
 public:
  SamplingWeights() = default;
  explicit SamplingWeights(std::vector<double> weights);

  std::uint32_t draw(Engine& rng) const;
  double weight(std::uint32_t node) const { return weights_[node]; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<double> weights_;
  std::vector<double> cdf_;
};

inline constexpr double kSamplingFloor = 1e-6;

/// Raw weights before the floor: outage count scaled by node degree.
std::vector<double> raw_sampling_weights(std::span<const std::uint32_t> outage_counts,
                                         const NetworkGraph& g, DegreeScaling scaling);

/// Normalised raw weights plus a uniform kSamplingFloor over candidates.
/// Falls back to uniform when no candidate ever lost power.
SamplingWeights sampling_weights(const ReplayIndex& index, const NetworkGraph& g,
                                 DegreeScaling scaling = DegreeScaling::Multiply);
SamplingWeights sampling_weights(std::span<const std::uint32_t> outage_counts,
                                 const NetworkGraph& g, DegreeScaling scaling);

inline constexpr std::uint32_t kUnreachableHops = std::numeric_limits<std::uint32_t>::max();

/// Hops from `node` to the nearest member of `selected`; 0 if it is a member,
/// kUnreachableHops if none is connected.
std::uint32_t hop_distance(const NetworkGraph& g, std::uint32_t node,
                           std::span<const std::uint32_t> selected);

/// Proximity rule: a candidate K hops from the nearest selected location is
/// rejected with probability 1/K.
bool proximity_accept(const NetworkGraph& g, std::uint32_t node,
                      std::span<const std::uint32_t> selected, Engine& rng);

/// Weighted draw with proximity rejection; after 100 rejected draws the last
/// unselected draw is taken.
std::uint32_t propose_location(const SamplingWeights& w, std::span<const std::uint32_t> selected,
                               const NetworkGraph& g, Engine& rng);

struct FitnessSpec {
  double lambda = 0.8;
  std::vector<std::uint32_t> areas;  // empty: all areas
  std::size_t replay_subsample = 0;  // 0: every stored episode
  DerModel der{};
  PlanLimits limits{};
};

/// Minimum over the selected areas of the gust-weighted replayed
/// resilience; -infinity for plans that break a constraint.
double fitness(const DERPlan& plan, const ReplayIndex& index, const NetworkGraph& g,
               const FitnessSpec& spec);

struct GAConfig {
  std::uint32_t population = 50;
  std::uint32_t generations = 100;
  std::uint32_t tournament = 4;
  double p_loc = 0.2;
  double p_cap = 0.3;
  double p_kind = 0.05;
  DegreeScaling scaling = DegreeScaling::Multiply;
  FitnessSpec fitness{};
  unsigned threads = 0;
};

struct Individual {
  DERPlan plan;
  double fitness = -std::numeric_limits<double>::infinity();
};

struct GenerationStats {
  std::uint32_t generation = 0;
  double best_fitness = 0.0;  // best ever, archive included
  double mean_fitness = 0.0;  // over the generation's feasible individuals
};

struct GAResult {
  Individual best;
  double baseline_fitness = 0.0;  // empty plan
  std::vector<GenerationStats> history;
  std::vector<Individual> archive;  // best individual of each generation
  std::uint64_t evaluations = 0;
  std::uint64_t constraint_violations = 0;
};

/// Genetic search over DER plans: weighted initial sampling with proximity
/// rejection, tournaments drawn from the population plus the archive of
/// every earlier generation's best, uniform placement crossover, and
/// relocate / resize / kind-flip mutation, with the best-ever plan carried
/// forward each generation.
GAResult evolve(const NetworkGraph& g, const ReplayIndex& index, const GAConfig& cfg, Engine& rng,
                const std::function<void(const GenerationStats&)>& on_generation = {});

void write_plan_json(const DERPlan& plan, const std::filesystem::path& path);
DERPlan read_plan_json(const std::filesystem::path& path);
void write_plan_geojson(const DERPlan& plan, const NetworkGraph& g, const std::filesystem::path& path);
void write_ga_history(std::span<const GenerationStats> history, const std::filesystem::path& path);

}  // namespace resilisim
