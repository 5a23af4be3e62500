#pragma once

#include <filesystem>
#include <iosfwd>

#include "resilisim/network.hpp"

namespace resilisim {

namespace fs = std::filesystem;

struct IngestPaths {
  fs::path substations;  // id,name,lat,lon
  fs::path roads;        // one [[lat,lon],...] polyline per line
  fs::path buildings;    // lat,lon,floor_area_m2,residential(0|1)
  fs::path tree_cover;   // text raster
};

/// Reads the four ingest files. Malformed lines are counted in
/// `rejected_records` with a message in `errors`; I/O failures throw.
IngestData read_ingest(const IngestPaths& paths);
void write_ingest(const IngestData& data, const IngestPaths& paths);

void read_substations_csv(std::istream& in, IngestData& out);
void read_roads_jsonl(std::istream& in, IngestData& out);
void read_buildings_csv(std::istream& in, IngestData& out);
TreeRaster read_tree_raster(std::istream& in);
void write_tree_raster(std::ostream& out, const TreeRaster& raster);

/// Little-endian binary graph file, magic "RSNG", format version 1.
void write_network(const NetworkGraph& g, const fs::path& path);
NetworkGraph read_network(const fs::path& path);

/// FeatureCollection with one Point per node and one LineString per edge.
void write_network_geojson(const NetworkGraph& g, const fs::path& path);

}  // namespace resilisim
