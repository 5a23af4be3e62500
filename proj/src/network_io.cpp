#include "resilisim/network_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "resilisim/binary_io.hpp"

namespace resilisim {

namespace {

using json = nlohmann::json;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    while (!field.empty() && field.front() == ' ') field.erase(field.begin());
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#';
}

std::string fmt(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  return in;
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

void reject(IngestData& out, const std::string& file, std::size_t line_no, const std::string& why) {
  ++out.rejected_records;
  out.errors.push_back(file + ":" + std::to_string(line_no) + ": " + why);
}

}  // namespace

void read_substations_csv(std::istream& in, IngestData& out) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto f = split_csv(line);
    double lat = 0, lon = 0;
    if (f.size() == 4 && line_no == 1 && !parse_double(f[2], lat)) continue;  // header
    if (f.size() != 4 || !parse_double(f[2], lat) || !parse_double(f[3], lon)) {
      reject(out, "substations.csv", line_no, "expected id,name,lat,lon");
      continue;
    }
    out.substations.push_back({f[0], f[1], {lat, lon}});
  }
}

void read_roads_jsonl(std::istream& in, IngestData& out) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    try {
      const auto j = json::parse(line);
      std::vector<GeoPoint> road;
      for (const auto& p : j) road.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      out.roads.push_back(std::move(road));
    } catch (const std::exception& e) {
      reject(out, "roads.jsonl", line_no, std::string("bad polyline: ") + e.what());
    }
  }
}

void read_buildings_csv(std::istream& in, IngestData& out) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto f = split_csv(line);
    double lat = 0, lon = 0, area = 0;
    if (line_no == 1 && !f.empty() && !parse_double(f[0], lat)) continue;  // header
    if (f.size() != 4 || !parse_double(f[0], lat) || !parse_double(f[1], lon) ||
        !parse_double(f[2], area) || (f[3] != "0" && f[3] != "1")) {
      reject(out, "buildings.csv", line_no, "expected lat,lon,floor_area_m2,residential(0|1)");
      continue;
    }
    out.buildings.push_back({{lat, lon}, area, f[3] == "1"});
  }
}

TreeRaster read_tree_raster(std::istream& in) {
  TreeRaster r;
  std::string key;
  bool have_origin = false, have_cell = false, have_rows = false, have_cols = false;
  while (!(have_origin && have_cell && have_rows && have_cols)) {
    if (!(in >> key)) throw FormatError("tree raster: truncated header");
    if (key[0] == '#') {
      std::string rest;
      std::getline(in, rest);
    } else if (key == "origin") {
      in >> r.origin.lat >> r.origin.lon;
      have_origin = true;
    } else if (key == "cell_size") {
      in >> r.cell_size;
      have_cell = true;
    } else if (key == "rows") {
      in >> r.rows;
      have_rows = true;
    } else if (key == "cols") {
      in >> r.cols;
      have_cols = true;
    } else {
      throw FormatError("tree raster: unknown header key '" + key + "'");
    }
    if (!in) throw FormatError("tree raster: bad value for '" + key + "'");
  }
  if (!(r.cell_size > 0)) throw FormatError("tree raster: cell_size must be positive");
  r.values.resize(static_cast<std::size_t>(r.rows) * r.cols);
  for (auto& v : r.values) {
    if (!(in >> v)) throw FormatError("tree raster: expected rows*cols values");
    if (v < 0.0 || v > 1.0) throw FormatError("tree raster: cover fraction outside [0,1]");
  }
  return r;
}

void write_tree_raster(std::ostream& out, const TreeRaster& r) {
  out << "# tree canopy cover fraction\n";
  out << "origin " << fmt(r.origin.lat, 8) << ' ' << fmt(r.origin.lon, 8) << '\n';
  out << "cell_size " << fmt(r.cell_size, 3) << '\n';
  out << "rows " << r.rows << '\n' << "cols " << r.cols << '\n';
  for (std::uint32_t i = 0; i < r.rows; ++i) {
    for (std::uint32_t j = 0; j < r.cols; ++j) {
      if (j) out << ' ';
      out << fmt(r.values[static_cast<std::size_t>(i) * r.cols + j], 3);
    }
    out << '\n';
  }
}

IngestData read_ingest(const IngestPaths& paths) {
  IngestData data;
  {
    auto in = open_in(paths.substations);
    read_substations_csv(in, data);
  }
  {
    auto in = open_in(paths.roads);
    read_roads_jsonl(in, data);
  }
  {
    auto in = open_in(paths.buildings);
    read_buildings_csv(in, data);
  }
  {
    auto in = open_in(paths.tree_cover);
    data.trees = read_tree_raster(in);
  }
  return data;
}

void write_ingest(const IngestData& data, const IngestPaths& paths) {
  {
    auto out = open_out(paths.substations);
    out << "id,name,lat,lon\n";
    for (const auto& s : data.substations)
      out << s.id << ',' << s.name << ',' << fmt(s.pos.lat, 8) << ',' << fmt(s.pos.lon, 8) << '\n';
  }
  {
    auto out = open_out(paths.roads);
    for (const auto& road : data.roads) {
      out << '[';
      for (std::size_t i = 0; i < road.size(); ++i) {
        if (i) out << ',';
        out << '[' << fmt(road[i].lat, 8) << ',' << fmt(road[i].lon, 8) << ']';
      }
      out << "]\n";
    }
  }
  {
    auto out = open_out(paths.buildings);
    out << "lat,lon,floor_area_m2,residential\n";
    for (const auto& b : data.buildings)
      out << fmt(b.centroid.lat, 8) << ',' << fmt(b.centroid.lon, 8) << ',' << fmt(b.floor_area, 1)
          << ',' << (b.residential ? 1 : 0) << '\n';
  }
  {
    auto out = open_out(paths.tree_cover);
    write_tree_raster(out, data.trees);
  }
}

void write_network(const NetworkGraph& g, const fs::path& path) {
  auto out = open_out(path);
  BinaryWriter w(out);
  w.put_magic("RSNG");
  w.put<std::uint32_t>(1);
  w.put(g.origin.lat);
  w.put(g.origin.lon);
  w.put(g.patches.origin.x);
  w.put(g.patches.origin.y);
  w.put(g.patches.cell_size);
  w.put(g.patches.n_rows);
  w.put(g.patches.n_cols);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(g.substations.size()));
  for (std::size_t a = 0; a < g.substations.size(); ++a) {
    w.put(g.substations[a]);
    w.put_string(g.area_names[a]);
  }
  w.put<std::uint64_t>(g.nodes.size());
  for (const auto& n : g.nodes) {
    w.put(static_cast<std::uint8_t>(n.kind));
    w.put(n.pos.x);
    w.put(n.pos.y);
    w.put(n.customers);
    w.put(n.area);
  }
  w.put<std::uint64_t>(g.edges.size());
  for (const auto& e : g.edges) {
    w.put(e.a);
    w.put(e.b);
    w.put(e.length);
    w.put(e.tree_cover);
    w.put(e.patch);
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

NetworkGraph read_network(const fs::path& path) {
  auto in = open_in(path);
  BinaryReader r(in);
  r.expect_magic("RSNG");
  const auto version = r.get<std::uint32_t>();
  if (version != 1) throw FormatError("unsupported network file version " + std::to_string(version));
  NetworkGraph g;
  g.origin.lat = r.get<double>();
  g.origin.lon = r.get<double>();
  g.patches.origin.x = r.get<double>();
  g.patches.origin.y = r.get<double>();
  g.patches.cell_size = r.get<double>();
  g.patches.n_rows = r.get<std::uint32_t>();
  g.patches.n_cols = r.get<std::uint32_t>();
  const auto n_areas = r.get<std::uint32_t>();
  for (std::uint32_t a = 0; a < n_areas; ++a) {
    g.substations.push_back(r.get<std::uint32_t>());
    g.area_names.push_back(r.get_string());
  }
  const auto n_nodes = r.get<std::uint64_t>();
  g.nodes.resize(n_nodes);
  for (auto& n : g.nodes) {
    const auto kind = r.get<std::uint8_t>();
    if (kind > 2) throw FormatError("bad node kind");
    n.kind = static_cast<NodeKind>(kind);
    n.pos.x = r.get<double>();
    n.pos.y = r.get<double>();
    n.customers = r.get<std::uint32_t>();
    n.area = r.get<std::int32_t>();
    if (n.area < kNoArea || n.area >= static_cast<std::int32_t>(n_areas)) throw FormatError("bad area id");
  }
  const auto n_edges = r.get<std::uint64_t>();
  g.edges.resize(n_edges);
  for (auto& e : g.edges) {
    e.a = r.get<std::uint32_t>();
    e.b = r.get<std::uint32_t>();
    e.length = r.get<double>();
    e.tree_cover = r.get<double>();
    e.patch = r.get<std::uint32_t>();
    if (e.patch >= g.patches.size()) throw FormatError("bad patch index");
  }
  for (const auto s : g.substations)
    if (s >= n_nodes) throw FormatError("bad substation node id");
  g.finalize();
  return g;
}

void write_network_geojson(const NetworkGraph& g, const fs::path& path) {
  auto coords = [&](PlanarPoint p) {
    const auto geo = unproject(p, g.origin);
    return json::array({geo.lon, geo.lat});
  };
  auto area_name = [&](std::int32_t a) -> json {
    return a == kNoArea ? json(nullptr) : json(g.area_names[a]);
  };
  json features = json::array();
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "Point"}, {"coordinates", coords(n.pos)}}},
                        {"properties",
                         {{"id", i},
                          {"kind", to_string(n.kind)},
                          {"customers", n.customers},
                          {"area_id", area_name(n.area)},
                          {"area_index", n.area}}}});
  }
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const auto& e = g.edges[i];
    features.push_back(
        {{"type", "Feature"},
         {"geometry",
          {{"type", "LineString"},
           {"coordinates", json::array({coords(g.nodes[e.a].pos), coords(g.nodes[e.b].pos)})}}},
         {"properties",
          {{"id", i},
           {"kind", "line"},
           {"length_m", e.length},
           {"tree_cover", e.tree_cover},
           {"area_id", area_name(g.nodes[e.a].area)},
           {"area_index", g.nodes[e.a].area}}}});
  }
  auto out = open_out(path);
  out << json{{"type", "FeatureCollection"}, {"features", std::move(features)}}.dump() << '\n';
}

}  // namespace resilisim
