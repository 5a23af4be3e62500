#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "resilisim/geo.hpp"

namespace resilisim {

enum class NodeKind : std::uint8_t { Substation = 0, Pole = 1, Load = 2 };

const char* to_string(NodeKind kind);

/// Area id of a node that no substation can reach.
inline constexpr std::int32_t kNoArea = -1;

struct Node {
  NodeKind kind = NodeKind::Pole;
  PlanarPoint pos{};
  std::uint32_t customers = 0;  // non-zero only for Load nodes
  std::int32_t area = kNoArea;  // index into NetworkGraph::substations
};

/// A distribution line segment. Only edges fail; nodes are assumed robust.
struct Edge {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  double length = 0.0;      // meters
  double tree_cover = 0.0;  // fraction in [0, 1]
  std::uint32_t patch = 0;  // wind patch of the edge midpoint
};

/// Node and edge ids are their positions in `nodes` / `edges`. Call
/// finalize() after mutating the edge list to rebuild adjacency.
class NetworkGraph {
 public:
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::vector<std::uint32_t> substations;  // node id per area id
  std::vector<std::string> area_names;     // one per substation
  GeoPoint origin{};                       // projection origin
  PatchGrid patches{};

  void finalize();

  std::span<const std::uint32_t> incident(std::uint32_t node) const {
    return {adjacency_.data() + offsets_[node], adjacency_.data() + offsets_[node + 1]};
  }
  std::uint32_t degree(std::uint32_t node) const { return offsets_[node + 1] - offsets_[node]; }
  std::uint32_t other_end(std::uint32_t edge, std::uint32_t node) const {
    const auto& e = edges[edge];
    return e.a == node ? e.b : e.a;
  }

  std::size_t area_count() const { return substations.size(); }
  std::size_t node_count() const { return nodes.size(); }
  std::size_t edge_count() const { return edges.size(); }

  /// Customers per area over reachable Load nodes.
  std::vector<std::uint64_t> area_customers() const;
  std::int32_t area_by_name(const std::string& name) const;

 private:
  std::vector<std::uint32_t> offsets_{0};
  std::vector<std::uint32_t> adjacency_;
};

class NetworkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Ingest records

struct SubstationRecord {
  std::string id;
  std::string name;
  GeoPoint pos{};
};

struct Building {
  GeoPoint centroid{};
  double floor_area = 0.0;  // m^2
  bool residential = true;
};

/// Canopy fraction raster. Cells live in a local equirectangular frame
/// anchored at `origin` (south-west corner); row 0 is the southern row.
struct TreeRaster {
  GeoPoint origin{};
  double cell_size = 100.0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<double> values;  // row-major, rows*cols

  /// Cover at p, 0 outside the raster.
  double sample(GeoPoint p) const;
};

struct IngestData {
  std::vector<SubstationRecord> substations;
  std::vector<std::vector<GeoPoint>> roads;
  std::vector<Building> buildings;
  TreeRaster trees;
  std::size_t rejected_records = 0;  // malformed lines dropped at parse time
  std::vector<std::string> errors;
};

// ---------------------------------------------------------------------------
// Synthesis steps

struct DensifiedRoad {
  std::vector<PlanarPoint> points;
  std::vector<bool> original;  // true for input polyline vertices
  std::vector<std::pair<std::uint32_t, std::uint32_t>> segments;
  std::size_t skipped_degenerate = 0;
};

/// Splits every polyline segment into ceil(len / max_span) equal spans.
/// Zero-length segments are dropped and counted.
DensifiedRoad densify_road(std::span<const PlanarPoint> polyline, double max_span = 40.0);

struct CustomerModel {
  double residential_area_per_customer = 150.0;
  double nonresidential_area_per_customer = 500.0;
};

std::uint32_t estimate_customers(const Building& b, const CustomerModel& model = {});

struct AreaAssignment {
  std::vector<std::int32_t> area;          // per node, kNoArea if unreachable
  std::vector<double> distance;            // length-weighted path to its substation
  std::vector<std::int64_t> parent_edge;   // shortest-path forest, -1 at roots
  std::size_t unreachable_loads = 0;
};

/// Multi-source Dijkstra from every substation over line length. Equal
/// distances resolve to the lowest area id.
AreaAssignment assign_substations(const NetworkGraph& g);

/// Collapses Load leaves that hang off the same pole on the same side of
/// its road line into one node. Customer totals are preserved. The merged
/// node keeps one service drop of the mean drop length.
NetworkGraph merge_buildings(const NetworkGraph& g);

struct SynthesisConfig {
  double max_span = 40.0;
  double patch_size = 500.0;
  CustomerModel customers{};
  double max_invalid_fraction = 0.01;
};

struct SynthesisStats {
  std::size_t substations = 0;
  std::size_t poles = 0;
  std::size_t loads = 0;
  std::size_t edges = 0;
  std::size_t areas = 0;
  std::uint64_t customers = 0;
  std::size_t buildings_in = 0;
  std::size_t buildings_merged_away = 0;
  std::size_t unreachable_loads = 0;
  std::size_t invalid_records = 0;
  std::size_t degenerate_segments = 0;
};

struct SynthesisResult {
  NetworkGraph graph;
  SynthesisStats stats;
  std::vector<std::string> warnings;
};

/// Runs the full pipeline: substations, densified roads, buildings with
/// customer estimates, nearest-pole hookup, shortest-path area assignment
/// (keeping the shortest-path forest as the radial network), building
/// merging, then wind patch and canopy attribution per edge.
SynthesisResult synthesize(const IngestData& in, const SynthesisConfig& cfg = {});

/// Candidate graph before area assignment: every densified road segment
/// plus nearest-pole hookups. Exposed for inspection and testing.
NetworkGraph build_candidate_graph(const IngestData& in, const SynthesisConfig& cfg,
                                   SynthesisStats* stats = nullptr,
                                   std::vector<std::string>* warnings = nullptr);

struct TestbedSpec {
  std::uint32_t grid_rows = 24;
  std::uint32_t grid_cols = 24;
  double block_m = 200.0;
  std::uint32_t buildings = 3000;
  std::uint32_t substations = 3;
  double residential_fraction = 0.8;
  double tree_cell_m = 100.0;
  GeoPoint origin{42.33, -83.10};  // south-west corner
};

/// Manhattan road grid with buildings scattered along the blocks and
/// substations spread across intersections. Deterministic in `seed`.
IngestData generate_testbed(const TestbedSpec& spec, std::uint64_t seed);

}  // namespace resilisim
