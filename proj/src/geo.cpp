#include "resilisim/geo.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

namespace resilisim {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
}

PlanarPoint project(GeoPoint p, GeoPoint origin) {
  const double dlat = (p.lat - origin.lat) * kDegToRad;
  const double dlon = (p.lon - origin.lon) * kDegToRad;
  return {kEarthRadiusM * dlon * std::cos(origin.lat * kDegToRad), kEarthRadiusM * dlat};
}

GeoPoint unproject(PlanarPoint p, GeoPoint origin) {
  const double lat = origin.lat + (p.y / kEarthRadiusM) / kDegToRad;
  const double lon =
      origin.lon + (p.x / (kEarthRadiusM * std::cos(origin.lat * kDegToRad))) / kDegToRad;
  return {lat, lon};
}

BoundingBox BoundingBox::of(std::span<const PlanarPoint> points) {
  if (points.empty()) return {};
  BoundingBox box{points.front(), points.front()};
  for (const auto& p : points) {
    box.min.x = std::min(box.min.x, p.x);
    box.min.y = std::min(box.min.y, p.y);
    box.max.x = std::max(box.max.x, p.x);
    box.max.y = std::max(box.max.y, p.y);
  }
  return box;
}

GridIndex::GridIndex(std::vector<PlanarPoint> points, double cell_size)
    : points_(std::move(points)), cell_(cell_size) {
  if (!(cell_ > 0.0)) throw GeoError("grid index cell size must be positive");
  if (points_.empty()) return;
  const auto box = BoundingBox::of(points_);
  origin_ = box.min;
  cols_ = static_cast<std::int64_t>(std::floor((box.max.x - box.min.x) / cell_)) + 1;
  rows_ = static_cast<std::int64_t>(std::floor((box.max.y - box.min.y) / cell_)) + 1;
  const auto n_cells = static_cast<std::size_t>(cols_ * rows_);
  std::vector<std::uint32_t> counts(n_cells + 1, 0);
  std::vector<std::uint32_t> cell_of(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto c = static_cast<std::uint32_t>(cell_y(points_[i].y) * cols_ + cell_x(points_[i].x));
    cell_of[i] = c;
    ++counts[c + 1];
  }
  for (std::size_t c = 0; c < n_cells; ++c) counts[c + 1] += counts[c];
  cell_start_ = counts;
  cell_items_.resize(points_.size());
  // Stable fill keeps ids ascending within a cell.
  for (std::size_t i = 0; i < points_.size(); ++i) {
    cell_items_[counts[cell_of[i]]++] = static_cast<std::uint32_t>(i);
  }
}

std::int64_t GridIndex::cell_x(double x) const {
  const auto c = static_cast<std::int64_t>(std::floor((x - origin_.x) / cell_));
  return std::clamp<std::int64_t>(c, 0, cols_ - 1);
}

std::int64_t GridIndex::cell_y(double y) const {
  const auto c = static_cast<std::int64_t>(std::floor((y - origin_.y) / cell_));
  return std::clamp<std::int64_t>(c, 0, rows_ - 1);
}

std::uint32_t GridIndex::nearest(PlanarPoint q) const {
  if (points_.empty()) throw GeoError("nearest() on an empty spatial index");
  const std::int64_t cx = cell_x(q.x);
  const std::int64_t cy = cell_y(q.y);
  double best = std::numeric_limits<double>::infinity();
  std::uint32_t best_id = std::numeric_limits<std::uint32_t>::max();

  auto scan_cell = [&](std::int64_t x, std::int64_t y) {
    if (x < 0 || y < 0 || x >= cols_ || y >= rows_) return;
    const auto c = static_cast<std::size_t>(y * cols_ + x);
    for (auto k = cell_start_[c]; k < cell_start_[c + 1]; ++k) {
      const auto id = cell_items_[k];
      const double d = distance_sq(points_[id], q);
      if (d < best || (d == best && id < best_id)) {
        best = d;
        best_id = id;
      }
    }
  };

  const std::int64_t max_ring = std::max({cx, cols_ - 1 - cx, cy, rows_ - 1 - cy});
  for (std::int64_t r = 0; r <= max_ring; ++r) {
    if (r == 0) {
      scan_cell(cx, cy);
    } else {
      for (std::int64_t x = cx - r; x <= cx + r; ++x) {
        scan_cell(x, cy - r);
        scan_cell(x, cy + r);
      }
      for (std::int64_t y = cy - r + 1; y <= cy + r - 1; ++y) {
        scan_cell(cx - r, y);
        scan_cell(cx + r, y);
      }
    }
    // Anything outside rings 0..r is at least r cells away.
    const double bound = static_cast<double>(r) * cell_;
    if (best < bound * bound) break;
  }
  return best_id;
}

PlanarPoint PatchGrid::center(std::uint32_t patch) const {
  const auto row = patch / n_cols;
  const auto col = patch % n_cols;
  return {origin.x + (col + 0.5) * cell_size, origin.y + (row + 0.5) * cell_size};
}

PatchGrid PatchGrid::covering(const BoundingBox& box, double cell_size) {
  if (!(cell_size > 0.0)) throw GeoError("patch size must be positive");
  PatchGrid g;
  g.origin = box.min;
  g.cell_size = cell_size;
  g.n_cols = static_cast<std::uint32_t>(std::floor((box.max.x - box.min.x) / cell_size)) + 1;
  g.n_rows = static_cast<std::uint32_t>(std::floor((box.max.y - box.min.y) / cell_size)) + 1;
  return g;
}

std::uint32_t patch_of(const PatchGrid& grid, PlanarPoint p) {
  const double fx = (p.x - grid.origin.x) / grid.cell_size;
  const double fy = (p.y - grid.origin.y) / grid.cell_size;
  if (!std::isfinite(fx) || !std::isfinite(fy) || fx < -0.5 || fy < -0.5 ||
      fx > grid.n_cols + 0.5 || fy > grid.n_rows + 0.5) {
    throw GeoError("point lies outside the patch grid");
  }
  const auto col = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(fx)), 0,
                                            static_cast<std::int64_t>(grid.n_cols) - 1);
  const auto row = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(fy)), 0,
                                            static_cast<std::int64_t>(grid.n_rows) - 1);
  return static_cast<std::uint32_t>(row * grid.n_cols + col);
}

}  // namespace resilisim
