#include "resilisim/enhance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <queue>
#include <unordered_map>

#include <json.hpp>

#include "resilisim/parallel.hpp"

namespace resilisim {

const char* to_string(DerKind kind) { return kind == DerKind::Solar ? "solar" : "battery"; }

DerKind der_kind_from_string(const std::string& s) {
  if (s == "solar") return DerKind::Solar;
  if (s == "battery") return DerKind::Battery;
  throw EnhanceError("unknown DER kind '" + s + "'");
}

double plan_cost(const DERPlan& plan, const PlanLimits& limits) {
  double cost = 0.0;
  for (const auto& p : plan.placements) {
    cost += p.capacity_kw *
            (p.kind == DerKind::Solar ? limits.solar_cost_per_kw : limits.battery_cost_per_kw);
  }
  return cost;
}

bool satisfies(const DERPlan& plan, const PlanLimits& limits, const NetworkGraph& g) {
  if (plan.placements.size() > limits.max_locations) return false;
  std::vector<std::uint32_t> nodes;
  for (const auto& p : plan.placements) {
    if (p.node >= g.nodes.size()) return false;
    if (g.nodes[p.node].kind == NodeKind::Substation) return false;
    if (!(p.capacity_kw >= limits.cap_min_kw && p.capacity_kw <= limits.cap_max_kw)) return false;
    nodes.push_back(p.node);
  }
  std::sort(nodes.begin(), nodes.end());
  if (std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end()) return false;
  if (limits.budget > 0.0 && plan_cost(plan, limits) > limits.budget) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Replay

ReplayIndex::ReplayIndex(const NetworkGraph& g, std::vector<EpisodeRecord> episodes, unsigned threads)
    : g_(g), area_totals_(g.area_customers()), episodes_(std::move(episodes)) {
  if (episodes_.empty()) throw EnhanceError("episode store is empty");
  horizon_ = episodes_.front().horizon;
  for (const auto& rec : episodes_) {
    if (rec.horizon != horizon_ || rec.area_count() != g.area_count())
      throw EnhanceError("episode does not match the network");
    for (const auto& f : rec.failures)
      if (f.edge >= g.edges.size()) throw EnhanceError("episode references a missing edge");
  }
  timelines_.resize(episodes_.size());
  parallel_for(episodes_.size(), threads, [&](std::size_t i) { timelines_[i] = build(episodes_[i]); });
}

ReplayIndex::Timeline ReplayIndex::build(const EpisodeRecord& rec) const {
  const auto& g = g_;
  const auto n_areas = g.area_count();
  const auto H = horizon_;
  Timeline tl;
  tl.duration = rec.duration;
  tl.base.assign(n_areas * (H + 1), 1.0);
  auto record = [&](std::uint32_t t, const std::vector<std::uint64_t>& served) {
    if (t > H) return;
    for (std::size_t a = 0; a < n_areas; ++a) {
      tl.base[a * (H + 1) + t] = area_totals_[a] == 0
                                     ? 1.0
                                     : static_cast<double>(served[a]) / static_cast<double>(area_totals_[a]);
    }
  };
  auto hold = [&](std::uint32_t from, std::uint32_t to) {
    for (std::size_t a = 0; a < n_areas; ++a) {
      const double v = tl.base[a * (H + 1) + std::min(from, H)];
      for (std::uint32_t t = from + 1; t <= std::min(to, H); ++t) tl.base[a * (H + 1) + t] = v;
    }
  };
  auto stranded_at = [&](UnionFind& uf, std::uint32_t v) {
    const auto area = g.nodes[v].area;
    return area != kNoArea && uf.find(v) != uf.find(g.substations[area]);
  };

  std::vector<std::uint8_t> intact(g.edges.size(), 1);
  for (const auto& f : rec.failures) intact[f.edge] = 0;
  UnionFind uf;
  served_customers(g, intact, uf);
  for (std::uint32_t v = 0; v < g.nodes.size(); ++v)
    if (stranded_at(uf, v)) tl.dead.push_back(v);
  const auto n_dead = tl.dead.size();

  // Storm phase: rebuild connectivity for every hour with new damage.
  std::fill(intact.begin(), intact.end(), 1);
  auto served = served_customers(g, intact, uf);
  record(0, served);
  tl.storm_labels.assign(static_cast<std::size_t>(rec.duration) * n_dead, -1);
  std::size_t next_failure = 0;
  for (std::uint32_t t = 1; t <= rec.duration; ++t) {
    bool changed = false;
    while (next_failure < rec.failures.size() && rec.failures[next_failure].hour == t - 1) {
      intact[rec.failures[next_failure++].edge] = 0;
      changed = true;
    }
    auto* labels = tl.storm_labels.data() + static_cast<std::size_t>(t - 1) * n_dead;
    if (!changed) {
      if (t > 1) std::copy_n(labels - n_dead, n_dead, labels);
      record(t, served);
      continue;
    }
    served = served_customers(g, intact, uf);
    record(t, served);
    std::vector<std::uint32_t> energized;
    for (const auto s : g.substations) energized.push_back(uf.find(s));
    std::unordered_map<std::uint32_t, std::int32_t> comp_of_root;
    for (std::size_t k = 0; k < n_dead; ++k) {
      const auto v = tl.dead[k];
      if (!stranded_at(uf, v)) continue;
      const auto root = uf.find(v);
      if (std::find(energized.begin(), energized.end(), root) != energized.end()) continue;
      auto [it, inserted] = comp_of_root.try_emplace(root, static_cast<std::int32_t>(tl.storm_comps.size()));
      if (inserted) tl.storm_comps.emplace_back();
      labels[k] = it->second;
      const auto& node = g.nodes[v];
      if (node.kind == NodeKind::Load && node.customers > 0) {
        auto& counts = tl.storm_comps[static_cast<std::size_t>(it->second)];
        const auto area = static_cast<std::uint32_t>(node.area);
        auto pos = std::lower_bound(counts.begin(), counts.end(), area,
                                    [](const auto& p, std::uint32_t a) { return p.first < a; });
        if (pos != counts.end() && pos->first == area) {
          pos->second += node.customers;
        } else {
          counts.insert(pos, {area, node.customers});
        }
      }
    }
  }

  // Restoration: repairs only merge components, tracked as a merge forest.
  RestorationState rs(g, intact);
  // Only components without any substation run as islands.
  auto island = [&](std::uint32_t root) { return rs.energized(root) ? AreaCounts{} : rs.stranded(root); };
  std::vector<std::int32_t> forest_of_root(g.nodes.size(), -1);
  tl.leaf.resize(n_dead);
  for (std::size_t k = 0; k < n_dead; ++k) {
    const auto root = rs.component(tl.dead[k]);
    if (forest_of_root[root] < 0) {
      forest_of_root[root] = static_cast<std::int32_t>(tl.forest.size());
      tl.forest.push_back({rec.duration, -1, island(root)});
    }
    tl.leaf[k] = forest_of_root[root];
  }
  std::uint32_t last = rec.duration;
  for (std::size_t i = 0; i < rec.repairs.size();) {
    const auto now = rec.repairs[i].hour;
    if (now > H) break;
    for (; i < rec.repairs.size() && rec.repairs[i].hour == now; ++i) {
      const auto& e = g.edges[rec.repairs[i].edge];
      const auto ra = rs.component(e.a);
      const auto rb = rs.component(e.b);
      rs.repair(rec.repairs[i].edge);
      if (ra == rb || (forest_of_root[ra] < 0 && forest_of_root[rb] < 0)) continue;
      const auto root = rs.component(e.a);
      const auto id = static_cast<std::int32_t>(tl.forest.size());
      tl.forest.push_back({now, -1, island(root)});
      if (forest_of_root[ra] >= 0) tl.forest[forest_of_root[ra]].parent = id;
      if (forest_of_root[rb] >= 0) tl.forest[forest_of_root[rb]].parent = id;
      forest_of_root[root] = id;
    }
    hold(last, now - 1);
    record(now, rs.served());
    last = now;
  }
  hold(last, H);

  for (std::uint32_t t = 0; t <= H; ++t) {
    for (std::size_t a = 0; a < n_areas; ++a) {
      if (tl.base[a * (H + 1) + t] < 1.0) {
        tl.quiet_after = t;
        break;
      }
    }
  }
  return tl;
}

std::vector<std::uint32_t> ReplayIndex::outage_counts() const {
  std::vector<std::uint32_t> counts(g_.nodes.size(), 0);
  for (const auto& tl : timelines_)
    for (const auto v : tl.dead) ++counts[v];
  return counts;
}

std::vector<double> ReplayIndex::replay_curves(std::size_t i, const DERPlan& plan, const DerModel& model,
                                               ReplayStats* stats) const {
  const auto& tl = timelines_.at(i);
  const auto H = horizon_;
  std::vector<double> curves = tl.base;

  struct Active {
    std::size_t placement;
    std::size_t dead_index;
    std::int32_t cursor;
    double energy;
  };
  std::vector<Active> active;
  double total_energy = 0.0;
  for (std::size_t p = 0; p < plan.placements.size(); ++p) {
    const auto& pl = plan.placements[p];
    if (pl.node >= g_.nodes.size()) throw EnhanceError("plan references a missing node");
    const double energy = pl.kind == DerKind::Battery ? pl.capacity_kw * model.storage_hours : 0.0;
    total_energy += energy;
    const auto it = std::lower_bound(tl.dead.begin(), tl.dead.end(), pl.node);
    if (it == tl.dead.end() || *it != pl.node) continue;
    const auto k = static_cast<std::size_t>(it - tl.dead.begin());
    active.push_back({p, k, tl.leaf[k], energy});
  }
  double discharged = 0.0;

  std::vector<std::pair<std::int64_t, std::size_t>> keyed;  // component key, active index
  const auto last_t = std::min(H, tl.quiet_after);
  for (std::uint32_t t = 1; t <= last_t && !active.empty(); ++t) {
    keyed.clear();
    for (std::size_t j = 0; j < active.size(); ++j) {
      auto& a = active[j];
      if (t <= tl.duration) {
        const auto label = tl.storm_labels[static_cast<std::size_t>(t - 1) * tl.dead.size() + a.dead_index];
        if (label < 0 || tl.storm_comps[static_cast<std::size_t>(label)].empty()) continue;
        keyed.emplace_back(label, j);
      } else {
        while (tl.forest[a.cursor].parent >= 0 && tl.forest[tl.forest[a.cursor].parent].time <= t)
          a.cursor = tl.forest[a.cursor].parent;
        if (tl.forest[a.cursor].stranded.empty()) continue;
        keyed.emplace_back((std::int64_t{1} << 40) + a.cursor, j);
      }
    }
    std::sort(keyed.begin(), keyed.end());
    for (std::size_t lo = 0; lo < keyed.size();) {
      std::size_t hi = lo;
      while (hi < keyed.size() && keyed[hi].first == keyed[lo].first) ++hi;
      const auto& first = active[keyed[lo].second];
      const AreaCounts& stranded =
          t <= tl.duration ? tl.storm_comps[static_cast<std::size_t>(keyed[lo].first)]
                           : tl.forest[first.cursor].stranded;
      std::uint64_t customers = 0;
      for (const auto& [area, count] : stranded) customers += count;
      const double demand = static_cast<double>(customers) * model.kw_per_customer;
      double solar = 0.0, battery = 0.0;
      for (std::size_t q = lo; q < hi; ++q) {
        const auto& a = active[keyed[q].second];
        const auto& pl = plan.placements[a.placement];
        if (pl.kind == DerKind::Solar) {
          if (t > tl.duration) solar += pl.capacity_kw;
        } else {
          battery += std::min(pl.capacity_kw, a.energy);
        }
      }
      const double supply = solar + battery;
      if (demand > 0.0 && supply > 0.0) {
        const double frac = std::min(1.0, supply / demand);
        const double from_battery = std::max(0.0, frac * demand - solar);
        if (battery > 0.0 && from_battery > 0.0) {
          const double share = std::min(1.0, from_battery / battery);
          for (std::size_t q = lo; q < hi; ++q) {
            auto& a = active[keyed[q].second];
            if (plan.placements[a.placement].kind != DerKind::Battery) continue;
            const double use = std::min(plan.placements[a.placement].capacity_kw, a.energy) * share;
            a.energy = std::max(0.0, a.energy - use);
            discharged += use;
          }
        }
        for (const auto& [area, count] : stranded) {
          auto& p = curves[area * (H + 1) + t];
          p = std::min(1.0, p + frac * static_cast<double>(count) / static_cast<double>(area_totals_[area]));
        }
      }
      lo = hi;
    }
  }
  if (stats) {
    stats->battery_energy_kwh = total_energy;
    stats->battery_discharged_kwh = discharged;
  }
  return curves;
}

std::vector<double> ReplayIndex::replay(std::size_t i, const DERPlan& plan, const DerModel& model,
                                        ReplayStats* stats) const {
  const auto curves = replay_curves(i, plan, model, stats);
  std::vector<double> r(area_count());
  for (std::size_t a = 0; a < r.size(); ++a)
    r[a] = trapezoid_resilience(std::span(curves).subspan(a * (horizon_ + 1), horizon_ + 1), horizon_);
  return r;
}

// ---------------------------------------------------------------------------
// Location sampling

SamplingWeights::SamplingWeights(std::vector<double> weights) : weights_(std::move(weights)) {
  cdf_.resize(weights_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (!(weights_[i] >= 0.0)) throw EnhanceError("sampling weights must be non-negative");
    acc += weights_[i];
    cdf_[i] = acc;
  }
  if (!(acc > 0.0)) throw EnhanceError("sampling weights sum to zero");
}

std::uint32_t SamplingWeights::draw(Engine& rng) const {
  const double u = uniform01(rng) * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  auto idx = static_cast<std::size_t>(it - cdf_.begin());
  while (weights_[idx] == 0.0 && idx + 1 < weights_.size()) ++idx;
  return static_cast<std::uint32_t>(idx);
}

namespace {

bool is_candidate(const NetworkGraph& g, std::uint32_t v) {
  return g.nodes[v].kind != NodeKind::Substation && g.nodes[v].area != kNoArea;
}

}  // namespace

std::vector<double> raw_sampling_weights(std::span<const std::uint32_t> outage_counts,
                                         const NetworkGraph& g, DegreeScaling scaling) {
  std::vector<double> w(g.nodes.size(), 0.0);
  for (std::uint32_t v = 0; v < g.nodes.size(); ++v) {
    if (!is_candidate(g, v) || outage_counts[v] == 0) continue;
    const double degree = g.degree(v);
    if (scaling == DegreeScaling::Multiply) {
      w[v] = outage_counts[v] * degree;
    } else if (degree > 0) {
      w[v] = outage_counts[v] / degree;
    }
  }
  return w;
}

SamplingWeights sampling_weights(std::span<const std::uint32_t> outage_counts, const NetworkGraph& g,
                                 DegreeScaling scaling) {
  auto w = raw_sampling_weights(outage_counts, g, scaling);
  std::size_t candidates = 0;
  double total = 0.0;
  for (std::uint32_t v = 0; v < g.nodes.size(); ++v) {
    if (is_candidate(g, v)) ++candidates;
    total += w[v];
  }
  if (candidates == 0) throw EnhanceError("network has no candidate DER locations");
  const double floor = kSamplingFloor;
  for (std::uint32_t v = 0; v < g.nodes.size(); ++v) {
    if (!is_candidate(g, v)) continue;
    const double normalised = total > 0.0 ? w[v] / total : 1.0 / static_cast<double>(candidates);
    w[v] = (normalised + floor) / (1.0 + floor * static_cast<double>(candidates));
  }
  return SamplingWeights(std::move(w));
}

SamplingWeights sampling_weights(const ReplayIndex& index, const NetworkGraph& g, DegreeScaling scaling) {
  const auto counts = index.outage_counts();
  return sampling_weights(counts, g, scaling);
}

std::uint32_t hop_distance(const NetworkGraph& g, std::uint32_t node,
                           std::span<const std::uint32_t> selected) {
  if (selected.empty()) return kUnreachableHops;
  std::vector<std::uint8_t> target(g.nodes.size(), 0);
  for (const auto s : selected) target[s] = 1;
  if (target[node]) return 0;
  std::vector<std::uint32_t> dist(g.nodes.size(), kUnreachableHops);
  std::queue<std::uint32_t> frontier;
  dist[node] = 0;
  frontier.push(node);
  while (!frontier.empty()) {
    const auto u = frontier.front();
    frontier.pop();
    for (const auto e : g.incident(u)) {
      const auto v = g.other_end(e, u);
      if (dist[v] != kUnreachableHops) continue;
      dist[v] = dist[u] + 1;
      if (target[v]) return dist[v];
      frontier.push(v);
    }
  }
  return kUnreachableHops;
}

bool proximity_accept(const NetworkGraph& g, std::uint32_t node,
                      std::span<const std::uint32_t> selected, Engine& rng) {
  const auto k = hop_distance(g, node, selected);
  if (k == 0) return false;
  if (k == kUnreachableHops) return true;
  return !bernoulli(rng, 1.0 / static_cast<double>(k));
}

std::uint32_t propose_location(const SamplingWeights& w, std::span<const std::uint32_t> selected,
                               const NetworkGraph& g, Engine& rng) {
  auto taken = [&](std::uint32_t v) { return std::find(selected.begin(), selected.end(), v) != selected.end(); };
  std::int64_t last = -1;
  for (int attempt = 0; attempt < 100; ++attempt) {
    const auto c = w.draw(rng);
    if (taken(c)) continue;
    last = c;
    if (proximity_accept(g, c, selected, rng)) return c;
  }
  if (last >= 0) return static_cast<std::uint32_t>(last);
  for (int attempt = 0; attempt < 100'000; ++attempt) {
    const auto c = w.draw(rng);
    if (!taken(c)) return c;
  }
  throw EnhanceError("no unselected candidate location left");
}

// ---------------------------------------------------------------------------
// Fitness and evolution

double fitness(const DERPlan& plan, const ReplayIndex& index, const NetworkGraph& g,
               const FitnessSpec& spec) {
  if (!satisfies(plan, spec.limits, g)) return -std::numeric_limits<double>::infinity();
  const auto n_areas = index.area_count();
  std::size_t episodes = index.episode_count();
  if (spec.replay_subsample > 0) episodes = std::min(episodes, spec.replay_subsample);
  std::vector<std::vector<double>> per_area(n_areas, std::vector<double>(episodes));
  std::vector<std::vector<std::uint8_t>> gust(n_areas, std::vector<std::uint8_t>(episodes));
  for (std::size_t i = 0; i < episodes; ++i) {
    const auto r = index.replay(i, plan, spec.der);
    const auto& rec = index.episode(i);
    for (std::size_t a = 0; a < n_areas; ++a) {
      per_area[a][i] = r[a];
      gust[a][i] = rec.area_gust[a];
    }
  }
  double worst = std::numeric_limits<double>::infinity();
  auto consider = [&](std::size_t a) {
    if (a >= n_areas) throw EnhanceError("area filter references a missing area");
    worst = std::min(worst, aggregate(per_area[a], gust[a], spec.lambda));
  };
  if (spec.areas.empty()) {
    for (std::size_t a = 0; a < n_areas; ++a) consider(a);
  } else {
    for (const auto a : spec.areas) consider(a);
  }
  return worst;
}

namespace {

double clamp_capacity(double c, const PlanLimits& limits) {
  return std::clamp(c, limits.cap_min_kw, limits.cap_max_kw);
}

void enforce_budget(DERPlan& plan, const PlanLimits& limits) {
  if (limits.budget <= 0.0) return;
  while (!plan.placements.empty() && plan_cost(plan, limits) > limits.budget) plan.placements.pop_back();
}

template <typename T>
void shuffle(std::vector<T>& v, Engine& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(i) - 1));
    std::swap(v[i - 1], v[j]);
  }
}

std::vector<std::uint32_t> nodes_of(const DERPlan& plan) {
  std::vector<std::uint32_t> nodes;
  for (const auto& p : plan.placements) nodes.push_back(p.node);
  return nodes;
}

DERPlan random_plan(const SamplingWeights& w, const NetworkGraph& g, const PlanLimits& limits, Engine& rng) {
  DERPlan plan;
  const auto n = static_cast<std::uint32_t>(uniform_int(rng, 1, limits.max_locations));
  std::vector<std::uint32_t> selected;
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto node = propose_location(w, selected, g, rng);
    selected.push_back(node);
    const auto kind = bernoulli(rng, 0.5) ? DerKind::Solar : DerKind::Battery;
    const double cap = limits.cap_min_kw + uniform01(rng) * (limits.cap_max_kw - limits.cap_min_kw);
    plan.placements.push_back({node, kind, cap});
  }
  enforce_budget(plan, limits);
  return plan;
}

DERPlan crossover(const DERPlan& a, const DERPlan& b, const NetworkGraph& g, const PlanLimits& limits,
                  Engine& rng) {
  std::vector<DERPlacement> pool;
  for (const auto& p : a.placements) {
    const auto in_b = std::find_if(b.placements.begin(), b.placements.end(),
                                   [&](const DERPlacement& q) { return q.node == p.node; });
    if (in_b != b.placements.end() && bernoulli(rng, 0.5)) {
      pool.push_back(*in_b);
    } else {
      pool.push_back(p);
    }
  }
  for (const auto& q : b.placements) {
    const bool in_a = std::any_of(a.placements.begin(), a.placements.end(),
                                  [&](const DERPlacement& p) { return p.node == q.node; });
    if (!in_a) pool.push_back(q);
  }
  shuffle(pool, rng);
  DERPlan child;
  std::vector<std::uint32_t> selected;
  for (const auto& p : pool) {
    if (child.placements.size() >= limits.max_locations) break;
    if (!bernoulli(rng, 0.5)) continue;
    if (!selected.empty() && !proximity_accept(g, p.node, selected, rng)) continue;
    child.placements.push_back(p);
    selected.push_back(p.node);
  }
  if (child.placements.empty() && !pool.empty()) child.placements.push_back(pool.front());
  return child;
}

void mutate(DERPlan& plan, const SamplingWeights& w, const NetworkGraph& g, const GAConfig& cfg, Engine& rng) {
  const auto& limits = cfg.fitness.limits;
  for (std::size_t i = 0; i < plan.placements.size(); ++i) {
    auto& p = plan.placements[i];
    if (bernoulli(rng, cfg.p_loc)) {
      auto others = nodes_of(plan);
      others.erase(others.begin() + static_cast<std::ptrdiff_t>(i));
      p.node = propose_location(w, others, g, rng);
    }
    if (bernoulli(rng, cfg.p_cap)) {
      const double factor = 0.8 + 0.4 * uniform01(rng);
      p.capacity_kw = clamp_capacity(p.capacity_kw * factor, limits);
    }
    if (bernoulli(rng, cfg.p_kind)) {
      p.kind = p.kind == DerKind::Solar ? DerKind::Battery : DerKind::Solar;
    }
  }
  enforce_budget(plan, limits);
}

}  // namespace

GAResult evolve(const NetworkGraph& g, const ReplayIndex& index, const GAConfig& cfg, Engine& rng,
                const std::function<void(const GenerationStats&)>& on_generation) {
  if (cfg.population < 1 || cfg.generations < 1 || cfg.tournament < 1)
    throw EnhanceError("GA needs population, generations and tournament size of at least 1");
  const auto& limits = cfg.fitness.limits;
  if (limits.max_locations < 1 || !(limits.cap_min_kw > 0.0) || limits.cap_min_kw > limits.cap_max_kw)
    throw EnhanceError("bad plan limits");

  const auto weights = sampling_weights(index, g, cfg.scaling);
  GAResult result;
  result.baseline_fitness = fitness(DERPlan{}, index, g, cfg.fitness);

  auto evaluate = [&](std::vector<Individual>& individuals, std::size_t from) {
    for (std::size_t i = from; i < individuals.size(); ++i) {
      ++result.evaluations;
      if (!satisfies(individuals[i].plan, limits, g)) ++result.constraint_violations;
    }
    parallel_for(individuals.size() - from, cfg.threads, [&](std::size_t i) {
      auto& ind = individuals[from + i];
      ind.fitness = fitness(ind.plan, index, g, cfg.fitness);
    });
  };
  auto best_of = [](const std::vector<Individual>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i].fitness > v[best].fitness) best = i;
    return best;
  };
  auto record = [&](std::uint32_t gen, const std::vector<Individual>& pop) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& ind : pop) {
      if (std::isfinite(ind.fitness)) {
        sum += ind.fitness;
        ++n;
      }
    }
    const GenerationStats stats{gen, result.best.fitness, n ? sum / static_cast<double>(n) : result.best.fitness};
    result.history.push_back(stats);
    if (on_generation) on_generation(stats);
  };

  std::vector<Individual> population;
  population.reserve(cfg.population);
  for (std::uint32_t i = 0; i < cfg.population; ++i) population.push_back({random_plan(weights, g, limits, rng)});
  evaluate(population, 0);
  result.archive.push_back(population[best_of(population)]);
  result.best = result.archive.back();
  record(0, population);

  std::vector<const Individual*> pool;
  for (std::uint32_t gen = 1; gen < cfg.generations; ++gen) {
    pool.clear();
    for (const auto& ind : population) pool.push_back(&ind);
    for (const auto& ind : result.archive) pool.push_back(&ind);
    auto tournament = [&]() -> const Individual& {
      std::size_t winner = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(pool.size()) - 1));
      for (std::uint32_t k = 1; k < cfg.tournament; ++k) {
        const auto c = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(pool.size()) - 1));
        if (pool[c]->fitness > pool[winner]->fitness || (pool[c]->fitness == pool[winner]->fitness && c < winner))
          winner = c;
      }
      return *pool[winner];
    };

    std::vector<Individual> next;
    next.reserve(cfg.population);
    next.push_back(result.best);  // elitism
    while (next.size() < cfg.population) {
      const auto& a = tournament();
      const auto& b = tournament();
      auto child = crossover(a.plan, b.plan, g, limits, rng);
      mutate(child, weights, g, cfg, rng);
      next.push_back({std::move(child)});
    }
    evaluate(next, 1);
    population = std::move(next);
    const auto& gen_best = population[best_of(population)];
    result.archive.push_back(gen_best);
    if (gen_best.fitness > result.best.fitness) result.best = gen_best;
    record(gen, population);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Files

void write_plan_json(const DERPlan& plan, const std::filesystem::path& path) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& p : plan.placements)
    j.push_back({{"node_id", p.node}, {"kind", to_string(p.kind)}, {"capacity_kw", p.capacity_kw}});
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw EnhanceError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

DERPlan read_plan_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw EnhanceError("cannot open " + path.string());
  DERPlan plan;
  try {
    const auto j = nlohmann::json::parse(in);
    for (const auto& p : j) {
      plan.placements.push_back({p.at("node_id").get<std::uint32_t>(),
                                 der_kind_from_string(p.at("kind").get<std::string>()),
                                 p.at("capacity_kw").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw EnhanceError(path.string() + ": " + e.what());
  }
  return plan;
}

void write_plan_geojson(const DERPlan& plan, const NetworkGraph& g, const std::filesystem::path& path) {
  using json = nlohmann::json;
  json features = json::array();
  for (const auto& p : plan.placements) {
    if (p.node >= g.nodes.size()) throw EnhanceError("plan references a missing node");
    const auto& n = g.nodes[p.node];
    const auto geo = unproject(n.pos, g.origin);
    features.push_back(
        {{"type", "Feature"},
         {"geometry", {{"type", "Point"}, {"coordinates", {geo.lon, geo.lat}}}},
         {"properties",
          {{"node_id", p.node},
           {"kind", to_string(p.kind)},
           {"capacity_kw", p.capacity_kw},
           {"area_id", n.area == kNoArea ? json(nullptr) : json(g.area_names[n.area])},
           {"color", p.kind == DerKind::Solar ? "#f2c200" : "#7b3fb5"}}}});
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw EnhanceError("cannot write " + path.string());
  out << json{{"type", "FeatureCollection"}, {"features", std::move(features)}}.dump() << '\n';
}

void write_ga_history(std::span<const GenerationStats> history, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw EnhanceError("cannot write " + path.string());
  out << "generation,best_fitness,mean_fitness\n";
  char buf[128];
  for (const auto& h : history) {
    std::snprintf(buf, sizeof buf, "%u,%.12g,%.12g\n", h.generation, h.best_fitness, h.mean_fitness);
    out << buf;
  }
}

}  // namespace resilisim
