#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vpcircle {

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

struct Cell {
  std::size_t row = 0;
  std::size_t col = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

// Wraps a longitude into [-180, 180).
double normalize_lon(double lon);

/**
 * Regular latitude/longitude raster geometry.
 *
 * All coordinates refer to cell centres. Row 0 is the northernmost row and
 * column 0 the westernmost; both axes share one cell size in degrees.
 */
class GridSpec {
 public:
  static constexpr double kWrapTolDeg = 1e-9;

  GridSpec() = default;
  // Throws Error(invalid_input) when the invariants do not hold.
  GridSpec(std::size_t n_rows, std::size_t n_cols, double lat0, double lon0,
           double cell_deg);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }
  std::size_t n_cells() const { return n_rows_ * n_cols_; }
  double lat0() const { return lat0_; }
  double lon0() const { return lon0_; }
  double cell_deg() const { return cell_deg_; }

  // True when the columns span exactly 360 degrees of longitude.
  bool global_wrap() const { return wrap_; }

  double lat(std::size_t row) const {
    return lat0_ - static_cast<double>(row) * cell_deg_;
  }
  double lon(std::size_t col) const {
    return normalize_lon(lon0_ + static_cast<double>(col) * cell_deg_);
  }
  LatLon center(Cell c) const { return {lat(c.row), lon(c.col)}; }

  std::size_t index(Cell c) const { return c.row * n_cols_ + c.col; }

  // Tolerant comparison (1e-9 degrees on the floating fields).
  bool same_as(const GridSpec& other) const;

 private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  double lat0_ = 0.0;
  double lon0_ = 0.0;
  double cell_deg_ = 0.0;
  bool wrap_ = false;
};

/// Immutable raster of nonnegative population counts.
class PopulationGrid {
 public:
  PopulationGrid() = default;
  // Counts are row-major. Negative or non-finite values are rejected; use
  // the loaders for no-data handling.
  PopulationGrid(GridSpec spec, std::vector<double> counts);

  static PopulationGrid zeros(GridSpec spec);

  const GridSpec& spec() const { return spec_; }
  std::span<const double> counts() const { return counts_; }
  double at(std::size_t row, std::size_t col) const {
    return counts_[row * spec_.n_cols() + col];
  }
  double at(Cell c) const { return at(c.row, c.col); }

  // Correctly rounded exact sum of all counts.
  double total() const { return total_; }

 private:
  GridSpec spec_;
  std::vector<double> counts_;
  double total_ = 0.0;
};

/// Per-cell region membership on a given grid.
class RegionMask {
 public:
  RegionMask() = default;
  RegionMask(GridSpec spec, std::vector<bool> inside);

  static RegionMask full(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  bool inside(std::size_t row, std::size_t col) const {
    return inside_[row * spec_.n_cols() + col];
  }
  bool inside(Cell c) const { return inside(c.row, c.col); }
  std::size_t count() const;
  bool empty() const { return count() == 0; }

  // Cellwise union of two masks on the same grid.
  RegionMask united(const RegionMask& other) const;

 private:
  GridSpec spec_;
  std::vector<bool> inside_;
};

// Sums factor x factor blocks. The coarse total equals the fine total exactly.
PopulationGrid coarsen(const PopulationGrid& grid, std::size_t factor);

// Zeroes counts outside the mask. Throws on spec mismatch or an empty mask.
PopulationGrid apply_mask(const PopulationGrid& grid, const RegionMask& mask);

// One ring of (lon, lat) vertices; closed (first == last).
using Ring = std::vector<LatLon>;
// First ring is the outer boundary, later rings are holes.
using Polygon = std::vector<Ring>;

// A cell is inside when its centre is inside by even-odd ray casting over
// all rings; centres exactly on an edge count as inside. Rings crossing the
// antimeridian are rejected.
RegionMask rasterize_polygon(const Polygon& polygon, const GridSpec& spec);
RegionMask rasterize_polygons(std::span<const Polygon> polygons,
                              const GridSpec& spec);

// Cells whose centres lie in [south, north] x [west, east]. west > east
// denotes a box crossing the antimeridian.
RegionMask bbox_mask(const GridSpec& spec, double south, double west,
                     double north, double east);

}  // namespace vpcircle
