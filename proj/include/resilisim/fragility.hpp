#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "resilisim/network.hpp"
#include "resilisim/rng.hpp"

namespace resilisim {

/// Hourly line failure probability as a clamped logistic in wind speed:
/// zero below v_min, p_cap above v_max, p_cap * logistic(shape * (v - v_mid))
/// in between with v_mid the centre of [v_min, v_max].
struct FragilityCurve {
  double v_min = 10.0;  // m/s
  double v_max = 40.0;  // m/s
  double p_cap = 0.15;  // per hour
  double shape = 0.35;  // 1/(m/s)

  void validate() const;
};

/// Falling-tree failure mode, scaled by the canopy fraction over the line.
struct TreeFragilityModel {
  double alpha = 1.0;
  FragilityCurve curve{8.0, 35.0, 0.15, 0.3};
};

struct FragilityModel {
  FragilityCurve wind{};
  TreeFragilityModel tree{};

  void validate() const;
};

double p_wind(const FragilityCurve& c, double v);

/// Wind and tree modes combined as independent competing causes.
double p_joint(const TreeFragilityModel& m, const FragilityCurve& c, double v, double tree_cover);

/// Per-patch wind and tree-mode probabilities for one hourly field, so the
/// per-edge loop only does the canopy blend.
struct PatchHazard {
  std::vector<double> wind;
  std::vector<double> tree;

  PatchHazard(const FragilityModel& m, std::span<const double> field);

  double edge_probability(const Edge& e, double alpha) const;
};

/// Every intact edge fails independently with its joint probability. Failed
/// edges are cleared in `intact` and returned in ascending id order.
std::vector<std::uint32_t> sample_failures(const NetworkGraph& g, const FragilityModel& m,
                                           std::span<const double> field,
                                           std::vector<std::uint8_t>& intact, Engine& rng);

}  // namespace resilisim
