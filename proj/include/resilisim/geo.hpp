#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace resilisim {

inline constexpr double kEarthRadiusM = 6'371'000.0;

struct GeoPoint {
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees

  bool valid() const {
    return std::isfinite(lat) && std::isfinite(lon) && lat >= -90.0 && lat <= 90.0 &&
           lon >= -180.0 && lon <= 180.0;
  }
};

/// Local planar coordinates in meters (x east, y north) relative to a
/// projection origin.
struct PlanarPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const PlanarPoint&, const PlanarPoint&) = default;
};

inline double distance(PlanarPoint a, PlanarPoint b) { return std::hypot(a.x - b.x, a.y - b.y); }

inline double distance_sq(PlanarPoint a, PlanarPoint b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

inline PlanarPoint midpoint(PlanarPoint a, PlanarPoint b) {
  return {(a.x + b.x) * 0.5, (a.y + b.y) * 0.5};
}

class GeoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Equirectangular projection about `origin`.
PlanarPoint project(GeoPoint p, GeoPoint origin);

/// Inverse of project() for the same origin.
GeoPoint unproject(PlanarPoint p, GeoPoint origin);

struct BoundingBox {
  PlanarPoint min{0.0, 0.0};
  PlanarPoint max{0.0, 0.0};

  static BoundingBox of(std::span<const PlanarPoint> points);
};

/// Uniform grid hash for nearest-neighbour queries. Bulk loaded once.
class GridIndex {
 public:
  explicit GridIndex(std::vector<PlanarPoint> points, double cell_size = 100.0);

  /// Id (position in the constructor input) of the closest point; ties go
  /// to the lowest id. Throws GeoError on an empty index.
  std::uint32_t nearest(PlanarPoint q) const;

  std::size_t size() const { return points_.size(); }
  const PlanarPoint& point(std::uint32_t id) const { return points_[id]; }

 private:
  std::int64_t cell_x(double x) const;
  std::int64_t cell_y(double y) const;

  std::vector<PlanarPoint> points_;
  double cell_ = 100.0;
  PlanarPoint origin_{};
  std::int64_t cols_ = 0;
  std::int64_t rows_ = 0;
  std::vector<std::uint32_t> cell_start_;  // CSR over cells, rows_*cols_+1
  std::vector<std::uint32_t> cell_items_;
};

/// Square patch discretisation of the study area. Wind speed is uniform
/// inside a patch.
struct PatchGrid {
  PlanarPoint origin{};  // lower-left corner
  double cell_size = 500.0;
  std::uint32_t n_rows = 1;
  std::uint32_t n_cols = 1;

  std::uint32_t size() const { return n_rows * n_cols; }
  PlanarPoint center(std::uint32_t patch) const;

  /// Smallest grid anchored at the bounding box's lower-left corner that
  /// covers every point in the box.
  static PatchGrid covering(const BoundingBox& box, double cell_size);
};

/// Row-major patch index of p. Points up to half a cell outside the grid
/// clamp to the boundary cell; further out is a GeoError.
std::uint32_t patch_of(const PatchGrid& grid, PlanarPoint p);

}  // namespace resilisim
