#include "resilisim/connectivity.hpp"

#include <algorithm>
#include <numeric>

namespace resilisim {

void UnionFind::reset(std::size_t n) {
  parent_.resize(n);
  std::iota(parent_.begin(), parent_.end(), 0u);
  size_.assign(n, 1);
}

std::uint32_t UnionFind::find(std::uint32_t x) {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

std::uint32_t UnionFind::unite(std::uint32_t a, std::uint32_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return a;
  if (size_[a] < size_[b]) std::swap(a, b);
  parent_[b] = a;
  size_[a] += size_[b];
  return a;
}

void UnionFind::attach(std::uint32_t child, std::uint32_t root) {
  parent_[child] = root;
  size_[root] += size_[child];
}

std::vector<std::uint64_t> served_customers(const NetworkGraph& g,
                                            std::span<const std::uint8_t> intact, UnionFind& uf) {
  uf.reset(g.nodes.size());
  for (std::uint32_t e = 0; e < g.edges.size(); ++e) {
    if (intact[e]) uf.unite(g.edges[e].a, g.edges[e].b);
  }
  std::vector<std::uint32_t> sub_root(g.substations.size());
  for (std::size_t a = 0; a < g.substations.size(); ++a) sub_root[a] = uf.find(g.substations[a]);
  std::vector<std::uint64_t> served(g.substations.size(), 0);
  for (std::uint32_t v = 0; v < g.nodes.size(); ++v) {
    const auto& n = g.nodes[v];
    if (n.kind != NodeKind::Load || n.area == kNoArea || n.customers == 0) continue;
    if (uf.find(v) == sub_root[n.area]) served[n.area] += n.customers;
  }
  return served;
}

namespace {

std::uint64_t lookup(const AreaCounts& counts, std::uint32_t area) {
  const auto it = std::lower_bound(counts.begin(), counts.end(), area,
                                   [](const auto& p, std::uint32_t a) { return p.first < a; });
  return (it != counts.end() && it->first == area) ? it->second : 0;
}

void add_count(AreaCounts& counts, std::uint32_t area, std::uint64_t n) {
  const auto it = std::lower_bound(counts.begin(), counts.end(), area,
                                   [](const auto& p, std::uint32_t a) { return p.first < a; });
  if (it != counts.end() && it->first == area) {
    it->second += n;
  } else {
    counts.insert(it, {area, n});
  }
}

bool contains(const std::vector<std::uint32_t>& sorted, std::uint32_t v) {
  return std::binary_search(sorted.begin(), sorted.end(), v);
}

const AreaCounts kEmptyCounts;

}  // namespace

RestorationState::RestorationState(const NetworkGraph& g, std::span<const std::uint8_t> intact)
    : g_(g),
      uf_(g.nodes.size()),
      state_(g.edges.size(), EdgeState::Intact),
      version_(g.edges.size(), 0),
      comp_of_root_(g.nodes.size(), -1),
      served_(g.substations.size(), 0) {
  for (std::uint32_t e = 0; e < g.edges.size(); ++e) {
    if (intact[e]) {
      uf_.unite(g.edges[e].a, g.edges[e].b);
    } else {
      state_[e] = EdgeState::Failed;
    }
  }
  for (std::uint32_t a = 0; a < g.substations.size(); ++a) {
    comp(uf_.find(g.substations[a])).subs.push_back(a);  // ascending a keeps subs sorted
  }
  for (std::uint32_t v = 0; v < g.nodes.size(); ++v) {
    const auto& n = g.nodes[v];
    if (n.kind != NodeKind::Load || n.area == kNoArea || n.customers == 0) continue;
    const auto r = uf_.find(v);
    const auto* c = comp_if(r);
    if (c && contains(c->subs, static_cast<std::uint32_t>(n.area))) {
      served_[n.area] += n.customers;
    } else {
      add_count(comp(r).stranded, static_cast<std::uint32_t>(n.area), n.customers);
    }
  }
  for (std::uint32_t e = 0; e < g.edges.size(); ++e) {
    if (state_[e] != EdgeState::Failed) continue;
    const auto ra = uf_.find(g.edges[e].a);
    const auto rb = uf_.find(g.edges[e].b);
    comp(ra).incident_failed.push_back(e);
    if (rb != ra) comp(rb).incident_failed.push_back(e);
  }
  for (std::uint32_t e = 0; e < g.edges.size(); ++e) {
    if (state_[e] == EdgeState::Failed) queue_.push({criticality(e), e, version_[e]});
  }
}

RestorationState::Component& RestorationState::comp(std::uint32_t root) {
  if (comp_of_root_[root] < 0) {
    comp_of_root_[root] = static_cast<std::int32_t>(comps_.size());
    comps_.emplace_back();
  }
  return comps_[static_cast<std::size_t>(comp_of_root_[root])];
}

const RestorationState::Component* RestorationState::comp_if(std::uint32_t root) const {
  const auto idx = comp_of_root_[root];
  return idx < 0 ? nullptr : &comps_[static_cast<std::size_t>(idx)];
}

const AreaCounts& RestorationState::stranded(std::uint32_t root) const {
  const auto* c = comp_if(root);
  return c ? c->stranded : kEmptyCounts;
}

bool RestorationState::energized(std::uint32_t root) const {
  const auto* c = comp_if(root);
  return c && !c->subs.empty();
}

std::uint64_t RestorationState::criticality(std::uint32_t e) {
  const auto ra = uf_.find(g_.edges[e].a);
  const auto rb = uf_.find(g_.edges[e].b);
  if (ra == rb) return 0;
  const auto* ca = comp_if(ra);
  const auto* cb = comp_if(rb);
  if (!ca || !cb) return 0;
  std::uint64_t total = 0;
  for (const auto s : ca->subs) total += lookup(cb->stranded, s);
  for (const auto s : cb->subs) total += lookup(ca->stranded, s);
  return total;
}

void RestorationState::rekey(std::uint32_t e) {
  if (state_[e] != EdgeState::Failed) return;
  ++version_[e];
  queue_.push({criticality(e), e, version_[e]});
}

std::optional<std::uint32_t> RestorationState::claim_most_critical() {
  while (!queue_.empty()) {
    const auto top = queue_.top();
    queue_.pop();
    if (state_[top.edge] != EdgeState::Failed || top.version != version_[top.edge]) continue;
    state_[top.edge] = EdgeState::Claimed;
    return top.edge;
  }
  return std::nullopt;
}

void RestorationState::repair(std::uint32_t e) {
  state_[e] = EdgeState::Intact;
  auto ra = uf_.find(g_.edges[e].a);
  auto rb = uf_.find(g_.edges[e].b);
  if (ra == rb) return;
  comp(ra);
  comp(rb);
  auto size_of = [&](std::uint32_t r) { return comps_[comp_of_root_[r]].incident_failed.size(); };
  if (size_of(ra) < size_of(rb) || (size_of(ra) == size_of(rb) && ra > rb)) std::swap(ra, rb);
  const auto big_idx = static_cast<std::size_t>(comp_of_root_[ra]);
  const auto small_idx = static_cast<std::size_t>(comp_of_root_[rb]);
  Component small = std::move(comps_[small_idx]);
  comps_[small_idx] = Component{};
  comp_of_root_[rb] = -1;
  Component& big = comps_[big_idx];

  // Loads stranded on one side whose substation sits on the other.
  for (const auto s : small.subs) {
    auto it = std::lower_bound(big.stranded.begin(), big.stranded.end(), s,
                               [](const auto& p, std::uint32_t a) { return p.first < a; });
    if (it != big.stranded.end() && it->first == s) {
      served_[s] += it->second;
      big.stranded.erase(it);
    }
  }
  bool big_changed = !small.subs.empty();
  for (const auto& [area, count] : small.stranded) {
    if (contains(big.subs, area)) {
      served_[area] += count;
    } else {
      add_count(big.stranded, area, count);
      big_changed = true;
    }
  }
  if (!small.subs.empty()) {
    std::vector<std::uint32_t> merged;
    std::merge(big.subs.begin(), big.subs.end(), small.subs.begin(), small.subs.end(),
               std::back_inserter(merged));
    big.subs = std::move(merged);
  }
  uf_.attach(rb, ra);

  if (big_changed) {
    std::erase_if(big.incident_failed, [&](std::uint32_t f) { return state_[f] == EdgeState::Intact; });
    for (const auto f : big.incident_failed) rekey(f);
  }
  for (const auto f : small.incident_failed) {
    if (state_[f] == EdgeState::Intact) continue;
    rekey(f);
    big.incident_failed.push_back(f);
  }
}

}  // namespace resilisim
