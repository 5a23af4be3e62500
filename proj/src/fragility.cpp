#include "resilisim/fragility.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace resilisim {

void FragilityCurve::validate() const {
  if (!(v_min >= 0.0) || !(v_max >= v_min)) throw std::invalid_argument("fragility: need 0 <= v_min <= v_max");
  if (!(p_cap >= 0.0 && p_cap <= 1.0)) throw std::invalid_argument("fragility: p_cap must lie in [0,1]");
  if (!(shape > 0.0)) throw std::invalid_argument("fragility: shape must be positive");
}

void FragilityModel::validate() const {
  wind.validate();
  tree.curve.validate();
  if (!(tree.alpha >= 0.0)) throw std::invalid_argument("fragility: tree_alpha must be non-negative");
}

double p_wind(const FragilityCurve& c, double v) {
  if (v < c.v_min) return 0.0;
  if (v > c.v_max) return c.p_cap;
  const double mid = 0.5 * (c.v_min + c.v_max);
  return c.p_cap / (1.0 + std::exp(-c.shape * (v - mid)));
}

double p_joint(const TreeFragilityModel& m, const FragilityCurve& c, double v, double tree_cover) {
  const double wind = p_wind(c, v);
  const double tree = std::clamp(tree_cover * m.alpha * p_wind(m.curve, v), 0.0, 1.0);
  return 1.0 - (1.0 - wind) * (1.0 - tree);
}

PatchHazard::PatchHazard(const FragilityModel& m, std::span<const double> field)
    : wind(field.size()), tree(field.size()) {
  for (std::size_t p = 0; p < field.size(); ++p) {
    wind[p] = p_wind(m.wind, field[p]);
    tree[p] = p_wind(m.tree.curve, field[p]);
  }
}

double PatchHazard::edge_probability(const Edge& e, double alpha) const {
  const double t = std::clamp(e.tree_cover * alpha * tree[e.patch], 0.0, 1.0);
  return 1.0 - (1.0 - wind[e.patch]) * (1.0 - t);
}

std::vector<std::uint32_t> sample_failures(const NetworkGraph& g, const FragilityModel& m,
                                           std::span<const double> field,
                                           std::vector<std::uint8_t>& intact, Engine& rng) {
  const PatchHazard hazard(m, field);
  std::vector<std::uint32_t> failed;
  for (std::uint32_t e = 0; e < g.edges.size(); ++e) {
    if (!intact[e]) continue;
    const double p = hazard.edge_probability(g.edges[e], m.tree.alpha);
    if (p > 0.0 && uniform01(rng) < p) {
      intact[e] = 0;
      failed.push_back(e);
    }
  }
  return failed;
}

}  // namespace resilisim
