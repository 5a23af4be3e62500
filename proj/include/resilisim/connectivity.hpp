#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include "resilisim/network.hpp"

namespace resilisim {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n = 0) { reset(n); }

  void reset(std::size_t n);
  std::uint32_t find(std::uint32_t x);
  /// Links the two roots; returns the surviving root.
  std::uint32_t unite(std::uint32_t a, std::uint32_t b);
  /// Links root `child` under root `root`.
  void attach(std::uint32_t child, std::uint32_t root);

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
};

/// Customers per area whose load is connected to that area's own
/// substation through intact edges.
std::vector<std::uint64_t> served_customers(const NetworkGraph& g,
                                            std::span<const std::uint8_t> intact, UnionFind& uf);

/// Per-area customer deficit of one connected component.
using AreaCounts = std::vector<std::pair<std::uint32_t, std::uint64_t>>;  // sorted by area

/// Connectivity during restoration, when edges only come back. Tracks per
/// component which substations it holds and which customers it strands, so
/// both the served totals and the criticality of every failed edge are
/// maintained incrementally. Failed edges are handed to crews in order of
/// criticality (most customers reconnected first, lowest edge id on ties).
class RestorationState {
 public:
  RestorationState(const NetworkGraph& g, std::span<const std::uint8_t> intact);

  /// Customers reconnected if failed edge e alone were repaired now.
  std::uint64_t criticality(std::uint32_t e);

  /// Most critical failed edge not yet claimed, marked as claimed.
  std::optional<std::uint32_t> claim_most_critical();

  /// Returns e to service.
  void repair(std::uint32_t e);

  const std::vector<std::uint64_t>& served() const { return served_; }
  bool is_intact(std::uint32_t e) const { return state_[e] == EdgeState::Intact; }

  /// Component root of node v in the current topology.
  std::uint32_t component(std::uint32_t v) { return uf_.find(v); }
  /// Stranded customers per area of the component rooted at `root`.
  const AreaCounts& stranded(std::uint32_t root) const;
  /// True when the component rooted at `root` holds any substation.
  bool energized(std::uint32_t root) const;

 private:
  enum class EdgeState : std::uint8_t { Intact, Failed, Claimed };

  struct Component {
    std::vector<std::uint32_t> subs;  // areas whose substation is inside, sorted
    AreaCounts stranded;              // loads cut off from their own substation
    std::vector<std::uint32_t> incident_failed;
  };

  struct Candidate {
    std::uint64_t crit;
    std::uint32_t edge;
    std::uint32_t version;
    bool operator<(const Candidate& o) const {
      if (crit != o.crit) return crit < o.crit;
      return edge > o.edge;
    }
  };

  Component& comp(std::uint32_t root);
  const Component* comp_if(std::uint32_t root) const;
  void rekey(std::uint32_t e);

  const NetworkGraph& g_;
  UnionFind uf_;
  std::vector<EdgeState> state_;
  std::vector<std::uint32_t> version_;
  std::vector<std::int32_t> comp_of_root_;
  std::vector<Component> comps_;
  std::vector<std::uint64_t> served_;
  std::priority_queue<Candidate> queue_;
};

}  // namespace resilisim
