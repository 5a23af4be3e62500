#include "resilisim/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <queue>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "resilisim/rng.hpp"

namespace resilisim {

const char* to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Substation: return "substation";
    case NodeKind::Pole: return "pole";
    case NodeKind::Load: return "load";
  }
  return "unknown";
}

void NetworkGraph::finalize() {
  const auto n = nodes.size();
  offsets_.assign(n + 1, 0);
  for (const auto& e : edges) {
    if (e.a >= n || e.b >= n) throw NetworkError("edge references a missing node");
    ++offsets_[e.a + 1];
    ++offsets_[e.b + 1];
  }
  for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
  adjacency_.assign(offsets_[n], 0);
  std::vector<std::uint32_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::uint32_t id = 0; id < edges.size(); ++id) {
    adjacency_[fill[edges[id].a]++] = id;
    adjacency_[fill[edges[id].b]++] = id;
  }
}

std::vector<std::uint64_t> NetworkGraph::area_customers() const {
  std::vector<std::uint64_t> total(substations.size(), 0);
  for (const auto& n : nodes) {
    if (n.kind == NodeKind::Load && n.area != kNoArea) total[n.area] += n.customers;
  }
  return total;
}

std::int32_t NetworkGraph::area_by_name(const std::string& name) const {
  for (std::size_t i = 0; i < area_names.size(); ++i) {
    if (area_names[i] == name) return static_cast<std::int32_t>(i);
  }
  return kNoArea;
}

double TreeRaster::sample(GeoPoint p) const {
  if (rows == 0 || cols == 0) return 0.0;
  const auto local = project(p, origin);
  const double fc = std::floor(local.x / cell_size);
  const double fr = std::floor(local.y / cell_size);
  if (fc < 0 || fr < 0 || fc >= cols || fr >= rows) return 0.0;
  return values[static_cast<std::size_t>(fr) * cols + static_cast<std::size_t>(fc)];
}

DensifiedRoad densify_road(std::span<const PlanarPoint> polyline, double max_span) {
  if (!(max_span > 0.0)) throw NetworkError("max_span must be positive");
  if (polyline.size() < 2) throw NetworkError("road polyline needs at least two points");
  DensifiedRoad out;
  out.points.push_back(polyline[0]);
  out.original.push_back(true);
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    const auto from = polyline[i - 1];
    const auto to = polyline[i];
    const double len = distance(from, to);
    if (len <= 0.0) {
      ++out.skipped_degenerate;
      continue;
    }
    const auto pieces = static_cast<std::uint32_t>(std::ceil(len / max_span - 1e-12));
    auto prev = static_cast<std::uint32_t>(out.points.size() - 1);
    for (std::uint32_t k = 1; k <= pieces; ++k) {
      if (k == pieces) {
        out.points.push_back(to);
        out.original.push_back(true);
      } else {
        const double t = static_cast<double>(k) / pieces;
        out.points.push_back({from.x + (to.x - from.x) * t, from.y + (to.y - from.y) * t});
        out.original.push_back(false);
      }
      const auto cur = static_cast<std::uint32_t>(out.points.size() - 1);
      out.segments.emplace_back(prev, cur);
      prev = cur;
    }
  }
  return out;
}

std::uint32_t estimate_customers(const Building& b, const CustomerModel& model) {
  const double per = b.residential ? model.residential_area_per_customer
                                   : model.nonresidential_area_per_customer;
  const double n = std::ceil(b.floor_area / per);
  return std::max<std::uint32_t>(1, static_cast<std::uint32_t>(n));
}

AreaAssignment assign_substations(const NetworkGraph& g) {
  const auto n = g.nodes.size();
  AreaAssignment out;
  out.area.assign(n, kNoArea);
  out.distance.assign(n, std::numeric_limits<double>::infinity());
  out.parent_edge.assign(n, -1);

  using Label = std::tuple<double, std::int32_t, std::uint32_t>;  // dist, area, node
  std::priority_queue<Label, std::vector<Label>, std::greater<>> heap;
  for (std::size_t a = 0; a < g.substations.size(); ++a) {
    const auto s = g.substations[a];
    const auto area = static_cast<std::int32_t>(a);
    if (out.distance[s] > 0.0 || area < out.area[s]) {
      out.distance[s] = 0.0;
      out.area[s] = area;
      heap.emplace(0.0, area, s);
    }
  }
  std::vector<bool> settled(n, false);
  while (!heap.empty()) {
    const auto [d, area, u] = heap.top();
    heap.pop();
    if (settled[u] || d != out.distance[u] || area != out.area[u]) continue;
    settled[u] = true;
    for (const auto e : g.incident(u)) {
      const auto v = g.other_end(e, u);
      if (settled[v]) continue;
      const double nd = d + g.edges[e].length;
      if (nd < out.distance[v] || (nd == out.distance[v] && area < out.area[v])) {
        out.distance[v] = nd;
        out.area[v] = area;
        out.parent_edge[v] = e;
        heap.emplace(nd, area, v);
      }
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (g.nodes[v].kind == NodeKind::Load && out.area[v] == kNoArea) ++out.unreachable_loads;
  }
  return out;
}

namespace {

// Direction of the road line a pole sits on: its lowest-id edge to another
// pole, falling back to east.
PlanarPoint road_direction(const NetworkGraph& g, std::uint32_t pole) {
  for (const auto e : g.incident(pole)) {
    const auto other = g.other_end(e, pole);
    if (g.nodes[other].kind == NodeKind::Pole) {
      const auto& p = g.nodes[pole].pos;
      const auto& q = g.nodes[other].pos;
      return {q.x - p.x, q.y - p.y};
    }
  }
  return {1.0, 0.0};
}

}  // namespace

NetworkGraph merge_buildings(const NetworkGraph& g) {
  const auto n = static_cast<std::uint32_t>(g.nodes.size());
  // (pole, side, area) -> member loads in ascending id order
  std::map<std::tuple<std::uint32_t, int, std::int32_t>, std::vector<std::uint32_t>> groups;
  for (std::uint32_t v = 0; v < n; ++v) {
    const auto& node = g.nodes[v];
    if (node.kind != NodeKind::Load || g.degree(v) != 1) continue;
    const auto drop = g.incident(v)[0];
    const auto pole = g.other_end(drop, v);
    if (g.nodes[pole].kind != NodeKind::Pole) continue;
    const auto dir = road_direction(g, pole);
    const auto& pp = g.nodes[pole].pos;
    const double cross = dir.x * (node.pos.y - pp.y) - dir.y * (node.pos.x - pp.x);
    const int side = cross >= 0.0 ? 1 : -1;
    groups[{pole, side, node.area}].push_back(v);
  }

  std::vector<std::int64_t> remap(n, -1);
  std::vector<std::uint32_t> representative(n);
  for (std::uint32_t v = 0; v < n; ++v) representative[v] = v;
  std::vector<bool> drop_edge_removed(g.edges.size(), false);
  std::vector<double> merged_drop(n, -1.0);
  NetworkGraph out;
  out.substations = g.substations;
  out.area_names = g.area_names;
  out.origin = g.origin;
  out.patches = g.patches;
  std::vector<Node> merged_nodes = g.nodes;

  for (const auto& [key, members] : groups) {
    if (members.size() < 2) continue;
    const auto rep = members.front();
    Node combined = g.nodes[rep];
    combined.customers = 0;
    PlanarPoint centroid{0.0, 0.0};
    double drop_total = 0.0;
    for (const auto m : members) {
      combined.customers += g.nodes[m].customers;
      centroid.x += g.nodes[m].pos.x;
      centroid.y += g.nodes[m].pos.y;
      const auto drop = g.incident(m)[0];
      drop_total += g.edges[drop].length;
      representative[m] = rep;
      if (m != rep) drop_edge_removed[drop] = true;
    }
    const auto count = static_cast<double>(members.size());
    combined.pos = {centroid.x / count, centroid.y / count};
    merged_nodes[rep] = combined;
    merged_drop[rep] = drop_total / count;
  }

  for (std::uint32_t v = 0; v < n; ++v) {
    if (representative[v] != v) continue;
    remap[v] = static_cast<std::int64_t>(out.nodes.size());
    out.nodes.push_back(merged_nodes[v]);
  }
  for (auto& s : out.substations) s = static_cast<std::uint32_t>(remap[s]);
  for (std::uint32_t e = 0; e < g.edges.size(); ++e) {
    if (drop_edge_removed[e]) continue;
    Edge edge = g.edges[e];
    const auto load = g.nodes[edge.a].kind == NodeKind::Load ? edge.a : edge.b;
    if (merged_drop[load] >= 0.0) edge.length = merged_drop[load];
    edge.a = static_cast<std::uint32_t>(remap[representative[edge.a]]);
    edge.b = static_cast<std::uint32_t>(remap[representative[edge.b]]);
    out.edges.push_back(edge);
  }
  out.finalize();
  return out;
}

NetworkGraph build_candidate_graph(const IngestData& in, const SynthesisConfig& cfg,
                                   SynthesisStats* stats, std::vector<std::string>* warnings) {
  SynthesisStats local_stats;
  auto& st = stats ? *stats : local_stats;
  auto warn = [&](std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
  };

  std::size_t total_records = in.rejected_records + in.substations.size() + in.roads.size() +
                              in.buildings.size();
  std::size_t invalid = in.rejected_records;

  // Projection origin: centre of the road (or substation) extent.
  double min_lat = 90, max_lat = -90, min_lon = 180, max_lon = -180;
  bool any = false;
  auto extend = [&](GeoPoint p) {
    if (!p.valid()) return;
    any = true;
    min_lat = std::min(min_lat, p.lat);
    max_lat = std::max(max_lat, p.lat);
    min_lon = std::min(min_lon, p.lon);
    max_lon = std::max(max_lon, p.lon);
  };
  for (const auto& road : in.roads)
    for (const auto& p : road) extend(p);
  if (!any)
    for (const auto& s : in.substations) extend(s.pos);

  NetworkGraph g;
  g.origin = any ? GeoPoint{(min_lat + max_lat) / 2, (min_lon + max_lon) / 2} : GeoPoint{};

  for (const auto& s : in.substations) {
    if (!s.pos.valid()) {
      ++invalid;
      warn("substation " + s.id + ": invalid coordinates");
      continue;
    }
    g.substations.push_back(static_cast<std::uint32_t>(g.nodes.size()));
    g.area_names.push_back(s.name.empty() ? s.id : s.name);
    g.nodes.push_back({NodeKind::Substation, project(s.pos, g.origin), 0, kNoArea});
  }

  // Road vertices shared between polylines are snapped to 1 cm.
  std::unordered_map<std::uint64_t, std::uint32_t> vertex_ids;
  auto snap_key = [](PlanarPoint p) {
    const auto kx = static_cast<std::uint64_t>(std::llround(p.x * 100.0)) & 0xffffffffULL;
    const auto ky = static_cast<std::uint64_t>(std::llround(p.y * 100.0)) & 0xffffffffULL;
    return (kx << 32) | ky;
  };
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen_segments;
  std::vector<std::uint32_t> poles;
  for (const auto& road : in.roads) {
    std::vector<PlanarPoint> line;
    line.reserve(road.size());
    bool ok = road.size() >= 2;
    for (const auto& p : road) {
      if (!p.valid()) ok = false;
      line.push_back(project(p, g.origin));
    }
    if (!ok) {
      ++invalid;
      continue;
    }
    const auto dense = densify_road(line, cfg.max_span);
    st.degenerate_segments += dense.skipped_degenerate;
    if (dense.segments.empty()) continue;
    std::vector<std::uint32_t> ids(dense.points.size());
    for (std::size_t i = 0; i < dense.points.size(); ++i) {
      if (dense.original[i]) {
        const auto [it, inserted] = vertex_ids.try_emplace(
            snap_key(dense.points[i]), static_cast<std::uint32_t>(g.nodes.size()));
        if (inserted) {
          poles.push_back(it->second);
          g.nodes.push_back({NodeKind::Pole, dense.points[i], 0, kNoArea});
        }
        ids[i] = it->second;
      } else {
        ids[i] = static_cast<std::uint32_t>(g.nodes.size());
        poles.push_back(ids[i]);
        g.nodes.push_back({NodeKind::Pole, dense.points[i], 0, kNoArea});
      }
    }
    for (const auto& [i, j] : dense.segments) {
      const auto a = ids[i];
      const auto b = ids[j];
      if (a == b) continue;
      if (!seen_segments.insert({std::min(a, b), std::max(a, b)}).second) continue;
      g.edges.push_back({a, b, distance(g.nodes[a].pos, g.nodes[b].pos), 0.0, 0});
    }
  }
  if (st.degenerate_segments > 0) {
    warn("skipped " + std::to_string(st.degenerate_segments) + " zero-length road segments");
  }

  std::vector<PlanarPoint> pole_pos;
  pole_pos.reserve(poles.size());
  for (const auto p : poles) pole_pos.push_back(g.nodes[p].pos);
  const GridIndex pole_index(std::move(pole_pos));
  auto hook_up = [&](std::uint32_t node) {
    if (pole_index.size() == 0) return;
    const auto pole = poles[pole_index.nearest(g.nodes[node].pos)];
    const double len = std::max(distance(g.nodes[node].pos, g.nodes[pole].pos), 0.01);
    g.edges.push_back({pole, node, len, 0.0, 0});
  };
  for (const auto s : g.substations) hook_up(s);

  for (const auto& b : in.buildings) {
    if (!b.centroid.valid() || !(b.floor_area > 0.0) || !std::isfinite(b.floor_area)) {
      ++invalid;
      continue;
    }
    ++st.buildings_in;
    const auto id = static_cast<std::uint32_t>(g.nodes.size());
    g.nodes.push_back(
        {NodeKind::Load, project(b.centroid, g.origin), estimate_customers(b, cfg.customers), kNoArea});
    hook_up(id);
  }

  st.invalid_records = invalid;
  if (total_records > 0 &&
      static_cast<double>(invalid) > cfg.max_invalid_fraction * static_cast<double>(total_records)) {
    std::ostringstream msg;
    msg << "ingest rejected: " << invalid << " of " << total_records
        << " records invalid (limit " << cfg.max_invalid_fraction * 100 << "%)";
    throw NetworkError(msg.str());
  }
  g.finalize();
  return g;
}

namespace {

// Inserts intermediate poles into any edge longer than max_span.
void split_long_edges(NetworkGraph& g, double max_span) {
  const auto original_edges = g.edges.size();
  for (std::size_t e = 0; e < original_edges; ++e) {
    const Edge edge = g.edges[e];
    const auto pieces = static_cast<std::uint32_t>(std::ceil(edge.length / max_span - 1e-12));
    if (pieces <= 1) continue;
    const auto pa = g.nodes[edge.a].pos;
    const auto pb = g.nodes[edge.b].pos;
    const auto area =
        g.nodes[edge.a].area != kNoArea ? g.nodes[edge.a].area : g.nodes[edge.b].area;
    const double span = edge.length / pieces;
    auto prev = edge.a;
    for (std::uint32_t k = 1; k < pieces; ++k) {
      const double t = static_cast<double>(k) / pieces;
      const auto id = static_cast<std::uint32_t>(g.nodes.size());
      g.nodes.push_back({NodeKind::Pole, {pa.x + (pb.x - pa.x) * t, pa.y + (pb.y - pa.y) * t}, 0, area});
      if (k == 1) {
        g.edges[e].b = id;
        g.edges[e].length = span;
      } else {
        g.edges.push_back({prev, id, span, 0.0, 0});
      }
      prev = id;
    }
    g.edges.push_back({prev, edge.b, span, 0.0, 0});
  }
}

}  // namespace

SynthesisResult synthesize(const IngestData& in, const SynthesisConfig& cfg) {
  SynthesisResult result;
  auto& st = result.stats;
  for (const auto& e : in.errors) result.warnings.push_back(e);
  NetworkGraph candidate = build_candidate_graph(in, cfg, &st, &result.warnings);

  const auto assignment = assign_substations(candidate);
  st.unreachable_loads = assignment.unreachable_loads;
  if (assignment.unreachable_loads > 0) {
    result.warnings.push_back(std::to_string(assignment.unreachable_loads) +
                              " loads cannot reach any substation and are excluded");
  }

  // The radial network is the shortest-path forest rooted at substations.
  NetworkGraph forest;
  forest.nodes = candidate.nodes;
  forest.substations = candidate.substations;
  forest.area_names = candidate.area_names;
  forest.origin = candidate.origin;
  for (std::size_t v = 0; v < forest.nodes.size(); ++v) forest.nodes[v].area = assignment.area[v];
  std::vector<std::int64_t> parents(assignment.parent_edge);
  std::sort(parents.begin(), parents.end());
  parents.erase(std::unique(parents.begin(), parents.end()), parents.end());
  for (const auto e : parents) {
    if (e >= 0) forest.edges.push_back(candidate.edges[static_cast<std::size_t>(e)]);
  }
  forest.finalize();

  const auto loads_before = std::count_if(forest.nodes.begin(), forest.nodes.end(),
                                          [](const Node& n) { return n.kind == NodeKind::Load; });
  NetworkGraph g = merge_buildings(forest);
  split_long_edges(g, cfg.max_span);

  std::vector<PlanarPoint> all_pos;
  all_pos.reserve(g.nodes.size());
  for (const auto& n : g.nodes) all_pos.push_back(n.pos);
  g.patches = PatchGrid::covering(BoundingBox::of(all_pos), cfg.patch_size);
  for (auto& e : g.edges) {
    const auto mid = midpoint(g.nodes[e.a].pos, g.nodes[e.b].pos);
    e.patch = patch_of(g.patches, mid);
    e.tree_cover = std::clamp(in.trees.sample(unproject(mid, g.origin)), 0.0, 1.0);
  }
  g.finalize();

  st.substations = g.substations.size();
  st.areas = g.substations.size();
  st.edges = g.edges.size();
  st.poles = st.loads = 0;
  st.customers = 0;
  for (const auto& n : g.nodes) {
    if (n.kind == NodeKind::Pole) ++st.poles;
    if (n.kind == NodeKind::Load) {
      ++st.loads;
      if (n.area != kNoArea) st.customers += n.customers;
    }
  }
  st.buildings_merged_away = static_cast<std::size_t>(loads_before) - st.loads;
  result.graph = std::move(g);
  return result;
}

IngestData generate_testbed(const TestbedSpec& spec, std::uint64_t seed) {
  if (spec.grid_rows < 2 || spec.grid_cols < 2) throw NetworkError("testbed grid must be at least 2x2");
  if (!(spec.block_m > 0.0)) throw NetworkError("testbed block size must be positive");
  if (spec.substations < 1) throw NetworkError("testbed needs at least one substation");
  if (spec.substations > spec.grid_rows * spec.grid_cols)
    throw NetworkError("more substations than intersections");

  auto rng = make_engine(seed, StreamPurpose::Testbed, 0);
  IngestData out;
  // Coordinates are rounded to the 8 decimals the ingest files carry, so a
  // testbed read back from disk is bit-identical to the one generated here.
  const auto geo = [&](double x, double y) {
    const auto p = unproject({x, y}, spec.origin);
    return GeoPoint{std::round(p.lat * 1e8) / 1e8, std::round(p.lon * 1e8) / 1e8};
  };

  for (std::uint32_t r = 0; r < spec.grid_rows; ++r) {
    std::vector<GeoPoint> line;
    for (std::uint32_t c = 0; c < spec.grid_cols; ++c) line.push_back(geo(c * spec.block_m, r * spec.block_m));
    out.roads.push_back(std::move(line));
  }
  for (std::uint32_t c = 0; c < spec.grid_cols; ++c) {
    std::vector<GeoPoint> line;
    for (std::uint32_t r = 0; r < spec.grid_rows; ++r) line.push_back(geo(c * spec.block_m, r * spec.block_m));
    out.roads.push_back(std::move(line));
  }

  // Buildings sit 8-25 m off a random block face.
  const std::uint32_t horizontal = spec.grid_rows * (spec.grid_cols - 1);
  const std::uint32_t vertical = spec.grid_cols * (spec.grid_rows - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::uint32_t i = 0; i < spec.buildings; ++i) {
    const auto seg = static_cast<std::uint32_t>(uniform_int(rng, 0, horizontal + vertical - 1));
    const double t = 0.05 + 0.9 * uniform01(rng);
    const double offset = (8.0 + 17.0 * uniform01(rng)) * (bernoulli(rng, 0.5) ? 1.0 : -1.0);
    double x, y;
    if (seg < horizontal) {
      const auto r = seg / (spec.grid_cols - 1);
      const auto c = seg % (spec.grid_cols - 1);
      x = (c + t) * spec.block_m;
      y = r * spec.block_m + offset;
    } else {
      const auto s = seg - horizontal;
      const auto c = s / (spec.grid_rows - 1);
      const auto r = s % (spec.grid_rows - 1);
      x = c * spec.block_m + offset;
      y = (r + t) * spec.block_m;
    }
    Building b;
    b.centroid = geo(x, y);
    b.residential = bernoulli(rng, spec.residential_fraction);
    const double z = normal(rng);
    const double area = b.residential ? std::exp(std::log(140.0) + 0.4 * z)
                                      : std::exp(std::log(600.0) + 0.6 * z);
    b.floor_area = std::round(std::max(area, 20.0) * 10.0) / 10.0;
    out.buildings.push_back(b);
  }

  // Farthest-point spread over intersections from a random start.
  const std::uint32_t n_int = spec.grid_rows * spec.grid_cols;
  std::vector<std::uint32_t> chosen{static_cast<std::uint32_t>(uniform_int(rng, 0, n_int - 1))};
  std::vector<double> min_d(n_int, std::numeric_limits<double>::infinity());
  auto pos_of = [&](std::uint32_t k) {
    return PlanarPoint{(k % spec.grid_cols) * spec.block_m, (k / spec.grid_cols) * spec.block_m};
  };
  while (chosen.size() < spec.substations) {
    const auto last = pos_of(chosen.back());
    std::uint32_t best = 0;
    double best_d = -1.0;
    for (std::uint32_t k = 0; k < n_int; ++k) {
      min_d[k] = std::min(min_d[k], distance(pos_of(k), last));
      if (min_d[k] > best_d) {
        best_d = min_d[k];
        best = k;
      }
    }
    chosen.push_back(best);
  }
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    const auto p = pos_of(chosen[i]);
    out.substations.push_back({std::to_string(i + 1), "SUB" + std::to_string(i + 1), geo(p.x + 15.0, p.y + 15.0)});
  }

  // Canopy: low background plus a few smooth clumps.
  const double margin = 200.0;
  const double width = (spec.grid_cols - 1) * spec.block_m + 2 * margin;
  const double height = (spec.grid_rows - 1) * spec.block_m + 2 * margin;
  auto& tr = out.trees;
  tr.origin = geo(-margin, -margin);
  tr.cell_size = spec.tree_cell_m;
  tr.cols = static_cast<std::uint32_t>(std::ceil(width / spec.tree_cell_m));
  tr.rows = static_cast<std::uint32_t>(std::ceil(height / spec.tree_cell_m));
  struct Clump {
    double x, y, radius, amplitude;
  };
  std::vector<Clump> clumps;
  const auto n_clumps = std::max<std::uint32_t>(3, (spec.grid_rows * spec.grid_cols) / 40);
  for (std::uint32_t k = 0; k < n_clumps; ++k) {
    clumps.push_back({uniform01(rng) * width, uniform01(rng) * height, 150.0 + 450.0 * uniform01(rng),
                      0.3 + 0.5 * uniform01(rng)});
  }
  const double background = 0.05 + 0.1 * uniform01(rng);
  tr.values.resize(static_cast<std::size_t>(tr.rows) * tr.cols);
  for (std::uint32_t r = 0; r < tr.rows; ++r) {
    for (std::uint32_t c = 0; c < tr.cols; ++c) {
      const double x = (c + 0.5) * tr.cell_size;
      const double y = (r + 0.5) * tr.cell_size;
      double v = background;
      for (const auto& k : clumps) {
        const double d2 = (x - k.x) * (x - k.x) + (y - k.y) * (y - k.y);
        v += k.amplitude * std::exp(-d2 / (2 * k.radius * k.radius));
      }
      tr.values[static_cast<std::size_t>(r) * tr.cols + c] = std::round(std::min(v, 1.0) * 1000.0) / 1000.0;
    }
  }
  return out;
}

}  // namespace resilisim
