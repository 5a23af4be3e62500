#include "resilisim/simulation.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <queue>
#include <tuple>

#include "resilisim/connectivity.hpp"
#include "resilisim/parallel.hpp"
#include "resilisim/rng.hpp"

namespace resilisim {

void CrewPool::validate() const {
  if (n_crews < 1) throw SimulationError("need at least one repair crew");
  if (repair_time_min < 1 || repair_time_min > repair_time_max)
    throw SimulationError("repair times need 1 <= min <= max");
}

EpisodeContext::EpisodeContext(const NetworkGraph& graph, WindModel wind_model,
                               SimulationConfig config)
    : g(graph),
      wind(wind_model),
      cfg(config),
      sites(AreaSites::from_graph(graph)),
      area_totals(graph.area_customers()) {
  cfg.crews.validate();
  cfg.fragility.validate();
  if (cfg.horizon == 0) throw SimulationError("horizon must be positive");
  if (g.area_count() == 0) throw SimulationError("network has no substations");
}

double served_fraction(const NetworkGraph& g, const std::unordered_set<std::uint32_t>& failed,
                       std::uint32_t area) {
  std::uint64_t total = 0;
  for (const auto& n : g.nodes)
    if (n.kind == NodeKind::Load && n.area == static_cast<std::int32_t>(area)) total += n.customers;
  if (total == 0) return 1.0;
  std::vector<bool> seen(g.nodes.size(), false);
  std::queue<std::uint32_t> frontier;
  frontier.push(g.substations[area]);
  seen[g.substations[area]] = true;
  std::uint64_t served = 0;
  while (!frontier.empty()) {
    const auto u = frontier.front();
    frontier.pop();
    const auto& n = g.nodes[u];
    if (n.kind == NodeKind::Load && n.area == static_cast<std::int32_t>(area)) served += n.customers;
    for (const auto e : g.incident(u)) {
      if (failed.contains(e)) continue;
      const auto v = g.other_end(e, u);
      if (!seen[v]) {
        seen[v] = true;
        frontier.push(v);
      }
    }
  }
  return static_cast<double>(served) / static_cast<double>(total);
}

namespace {

std::uint64_t total_served(const NetworkGraph& g, const std::unordered_set<std::uint32_t>& failed) {
  std::vector<std::uint8_t> intact(g.edges.size(), 1);
  for (const auto e : failed) intact[e] = 0;
  UnionFind uf;
  const auto served = served_customers(g, intact, uf);
  std::uint64_t sum = 0;
  for (const auto s : served) sum += s;
  return sum;
}

}  // namespace

std::uint64_t criticality(const NetworkGraph& g, const std::unordered_set<std::uint32_t>& failed,
                          std::uint32_t e) {
  auto repaired = failed;
  repaired.erase(e);
  return total_served(g, repaired) - total_served(g, failed);
}

EpisodeRecord run_episode(const EpisodeContext& ctx, std::uint64_t master_seed,
                          std::uint64_t episode_index) {
  auto storm_rng = make_engine(master_seed, StreamPurpose::Storm, episode_index);
  const auto storm = sample_storm(ctx.sites, ctx.g.patches, ctx.wind, ctx.cfg.storm, storm_rng);
  return run_episode(ctx, storm, master_seed, episode_index);
}

EpisodeRecord run_episode(const EpisodeContext& ctx, const StormScenario& storm,
                          std::uint64_t master_seed, std::uint64_t episode_index) {
  const auto& g = ctx.g;
  const auto n_areas = g.area_count();
  const auto horizon = ctx.cfg.horizon;
  EpisodeRecord rec;
  rec.episode_index = episode_index;
  rec.scenario_seed = derive_seed(master_seed, StreamPurpose::Storm, episode_index);
  rec.duration = storm.duration();
  rec.horizon = horizon;
  rec.area_gust = storm.area_gust();
  rec.curves.assign(n_areas * (horizon + 1), 1.0);

  auto record_point = [&](std::uint32_t t, const std::vector<std::uint64_t>& served) {
    if (t > horizon) return;
    for (std::size_t a = 0; a < n_areas; ++a) {
      rec.curves[a * (horizon + 1) + t] =
          ctx.area_totals[a] == 0 ? 1.0
                                  : static_cast<double>(served[a]) / static_cast<double>(ctx.area_totals[a]);
    }
  };
  // Holds the last recorded value forward over (from, to].
  auto hold = [&](std::uint32_t from, std::uint32_t to) {
    for (std::size_t a = 0; a < n_areas; ++a) {
      const double v = rec.curves[a * (horizon + 1) + std::min(from, horizon)];
      for (std::uint32_t t = from + 1; t <= std::min(to, horizon); ++t) rec.curves[a * (horizon + 1) + t] = v;
    }
  };

  std::vector<std::uint8_t> intact(g.edges.size(), 1);
  UnionFind uf;
  auto served = served_customers(g, intact, uf);
  record_point(0, served);

  auto fail_rng = make_engine(master_seed, StreamPurpose::Failures, episode_index);
  for (std::uint32_t h = 0; h < storm.duration(); ++h) {
    const auto failed = sample_failures(g, ctx.cfg.fragility, storm.field(h), intact, fail_rng);
    for (const auto e : failed) rec.failures.push_back({e, h});
    if (!failed.empty()) served = served_customers(g, intact, uf);
    record_point(h + 1, served);
  }

  // Restoration starts once the storm has passed.
  RestorationState restore(g, intact);
  auto repair_rng = make_engine(master_seed, StreamPurpose::Repairs, episode_index);
  using Job = std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>;  // done_at, crew, edge
  std::priority_queue<Job, std::vector<Job>, std::greater<>> jobs;
  auto dispatch = [&](std::uint32_t crew, std::uint32_t now) {
    if (const auto e = restore.claim_most_critical()) {
      const auto hours = static_cast<std::uint32_t>(uniform_int(
          repair_rng, ctx.cfg.crews.repair_time_min, ctx.cfg.crews.repair_time_max));
      jobs.emplace(now + hours, crew, *e);
    }
  };
  for (std::uint32_t c = 0; c < ctx.cfg.crews.n_crews; ++c) dispatch(c, storm.duration());

  std::uint32_t last = storm.duration();
  std::vector<std::uint32_t> idle;
  while (!jobs.empty()) {
    const auto now = std::get<0>(jobs.top());
    idle.clear();
    while (!jobs.empty() && std::get<0>(jobs.top()) == now) {
      const auto [t, crew, e] = jobs.top();
      jobs.pop();
      restore.repair(e);
      rec.repairs.push_back({e, now});
      idle.push_back(crew);
    }
    hold(last, now - 1);
    record_point(now, restore.served());
    last = now;
    for (const auto crew : idle) dispatch(crew, now);
  }
  hold(last, horizon);

  rec.area_resilience.resize(n_areas);
  for (std::size_t a = 0; a < n_areas; ++a) rec.area_resilience[a] = trapezoid_resilience(rec.curve(a), horizon);
  return rec;
}

double trapezoid_resilience(std::span<const double> curve, std::uint32_t horizon) {
  if (horizon == 0) throw SimulationError("trapezoid horizon must be positive");
  if (curve.size() < static_cast<std::size_t>(horizon) + 1)
    throw SimulationError("curve shorter than the horizon");
  double area = 0.0;
  for (std::uint32_t t = 0; t < horizon; ++t) area += 0.5 * (curve[t] + curve[t + 1]);
  return area / static_cast<double>(horizon);
}

double aggregate(std::span<const double> resilience, std::span<const std::uint8_t> gust,
                 double lambda) {
  if (resilience.empty()) throw SimulationError("aggregate over zero episodes");
  if (resilience.size() != gust.size()) throw SimulationError("gust flags do not match episodes");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw SimulationError("lambda must lie in [0,1]");
  double gust_sum = 0.0, calm_sum = 0.0;
  std::size_t n_gust = 0;
  for (std::size_t j = 0; j < resilience.size(); ++j) {
    if (gust[j]) {
      gust_sum += resilience[j];
      ++n_gust;
    } else {
      calm_sum += resilience[j];
    }
  }
  const std::size_t n_calm = resilience.size() - n_gust;
  if (n_gust == 0) return calm_sum / static_cast<double>(n_calm);
  if (n_calm == 0) return gust_sum / static_cast<double>(n_gust);
  return lambda / static_cast<double>(n_gust) * gust_sum +
         (1.0 - lambda) / static_cast<double>(n_calm) * calm_sum;
}

double aggregate(std::span<const EpisodeRecord> records, std::uint32_t area, double lambda) {
  std::vector<double> r;
  std::vector<std::uint8_t> gust;
  r.reserve(records.size());
  gust.reserve(records.size());
  for (const auto& rec : records) {
    if (area >= rec.area_count()) throw SimulationError("area out of range");
    r.push_back(rec.area_resilience[area]);
    gust.push_back(rec.area_gust[area]);
  }
  return aggregate(r, gust, lambda);
}

ReportBuilder::ReportBuilder(std::size_t n_areas, double lambda, std::uint32_t stride)
    : n_areas_(n_areas),
      lambda_(lambda),
      stride_(stride),
      gust_sum_(n_areas, 0.0),
      calm_sum_(n_areas, 0.0),
      gust_n_(n_areas, 0) {
  if (stride_ == 0) throw SimulationError("report stride must be positive");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw SimulationError("lambda must lie in [0,1]");
  partial_.convergence.resize(n_areas);
}

namespace {

double weighted(double lambda, double gust_sum, std::uint64_t n_gust, double calm_sum,
                std::uint64_t n) {
  const auto n_calm = n - n_gust;
  if (n_gust == 0) return calm_sum / static_cast<double>(n_calm);
  if (n_calm == 0) return gust_sum / static_cast<double>(n_gust);
  return lambda / static_cast<double>(n_gust) * gust_sum +
         (1.0 - lambda) / static_cast<double>(n_calm) * calm_sum;
}

}  // namespace

void ReportBuilder::add(const EpisodeRecord& rec) {
  if (rec.area_count() != n_areas_) throw SimulationError("episode area count mismatch");
  ++count_;
  for (std::size_t a = 0; a < n_areas_; ++a) {
    if (rec.area_gust[a]) {
      gust_sum_[a] += rec.area_resilience[a];
      ++gust_n_[a];
    } else {
      calm_sum_[a] += rec.area_resilience[a];
    }
  }
  if (count_ % stride_ == 0) {
    partial_.checkpoints.push_back(count_);
    for (std::size_t a = 0; a < n_areas_; ++a) {
      partial_.convergence[a].push_back(weighted(lambda_, gust_sum_[a], gust_n_[a], calm_sum_[a], count_));
    }
  }
}

ResilienceReport ReportBuilder::finish() const {
  if (count_ == 0) throw SimulationError("no episodes were run");
  ResilienceReport r = partial_;
  r.episodes = count_;
  r.lambda = lambda_;
  r.stride = stride_;
  r.n_gust = gust_n_;
  r.resilience.resize(n_areas_);
  for (std::size_t a = 0; a < n_areas_; ++a)
    r.resilience[a] = weighted(lambda_, gust_sum_[a], gust_n_[a], calm_sum_[a], count_);
  return r;
}

ResilienceReport estimate(const EpisodeContext& ctx, const EstimateOptions& opt,
                          const std::function<void(const EpisodeRecord&)>& sink) {
  if (opt.episodes == 0) throw SimulationError("need at least one episode");
  ReportBuilder builder(ctx.g.area_count(), opt.lambda, opt.stride);
  std::mutex mutex;
  std::map<std::uint64_t, EpisodeRecord> pending;
  std::uint64_t next = 0;
  parallel_for(opt.episodes, opt.threads, [&](std::size_t i) {
    auto rec = run_episode(ctx, opt.master_seed, i);
    std::lock_guard lock(mutex);
    pending.emplace(i, std::move(rec));
    // Drain in episode order so the fold and the store are thread-count invariant.
    for (auto it = pending.find(next); it != pending.end(); it = pending.find(next)) {
      builder.add(it->second);
      if (sink) sink(it->second);
      pending.erase(it);
      ++next;
    }
  });
  return builder.finish();
}

}  // namespace resilisim
