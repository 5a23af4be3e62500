#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "resilisim/network.hpp"

namespace testing_support {

namespace fs = std::filesystem;
using namespace resilisim;

inline fs::path source_file(const std::string& rel) { return fs::path(RESILISIM_SOURCE_DIR) / rel; }

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("resilisim_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Small hand-built graphs. Nodes are laid out on a line unless positions
/// are given; every edge sits in patch 0.
struct GraphBuilder {
  NetworkGraph g;

  std::uint32_t node(NodeKind kind, std::uint32_t customers = 0, std::int32_t area = kNoArea,
                     PlanarPoint pos = {0, 0}) {
    g.nodes.push_back({kind, pos, customers, area});
    return static_cast<std::uint32_t>(g.nodes.size() - 1);
  }
  std::uint32_t substation(std::int32_t area, PlanarPoint pos = {0, 0}) {
    const auto id = node(NodeKind::Substation, 0, area, pos);
    if (g.substations.size() <= static_cast<std::size_t>(area)) {
      g.substations.resize(area + 1);
      g.area_names.resize(area + 1);
    }
    g.substations[area] = id;
    g.area_names[area] = "SUB" + std::to_string(area + 1);
    return id;
  }
  std::uint32_t edge(std::uint32_t a, std::uint32_t b, double length = 10.0, double tree = 0.0) {
    g.edges.push_back({a, b, length, tree, 0});
    return static_cast<std::uint32_t>(g.edges.size() - 1);
  }
  NetworkGraph build() {
    g.finalize();
    return g;
  }
};

/// Random connected graph with `n_subs` substations, poles and loads, plus
/// a few extra edges that create loops.
inline NetworkGraph random_graph(std::uint32_t n, std::uint32_t n_subs, std::uint32_t extra_edges,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GraphBuilder b;
  for (std::uint32_t s = 0; s < n_subs; ++s) b.substation(static_cast<std::int32_t>(s));
  std::uniform_real_distribution<double> len(1.0, 40.0);
  for (std::uint32_t v = n_subs; v < n; ++v) {
    const bool load = rng() % 3 == 0;
    b.node(load ? NodeKind::Load : NodeKind::Pole, load ? 1 + rng() % 6 : 0);
    auto parent = static_cast<std::uint32_t>(rng() % v);
    if (v >= n_subs && parent < n_subs && v > n_subs && rng() % 2) parent = n_subs + rng() % (v - n_subs);
    if (b.g.nodes[parent].kind == NodeKind::Load) parent = static_cast<std::uint32_t>(rng() % n_subs);
    b.edge(parent, v, std::round(len(rng)));
  }
  for (std::uint32_t k = 0; k < extra_edges; ++k) {
    const auto a = static_cast<std::uint32_t>(n_subs + rng() % (n - n_subs));
    const auto c = static_cast<std::uint32_t>(n_subs + rng() % (n - n_subs));
    if (a == c || b.g.nodes[a].kind == NodeKind::Load || b.g.nodes[c].kind == NodeKind::Load) continue;
    b.edge(a, c, std::round(len(rng)));
  }
  return b.build();
}

/// Copies the shortest-path area assignment onto the nodes.
inline NetworkGraph with_areas(NetworkGraph g) {
  const auto asg = assign_substations(g);
  for (std::size_t v = 0; v < g.nodes.size(); ++v) g.nodes[v].area = asg.area[v];
  return g;
}

}  // namespace testing_support
