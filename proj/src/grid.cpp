#include "vpcircle/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vpcircle/error.hpp"
#include "vpcircle/exact_sum.hpp"

namespace vpcircle {

namespace {

constexpr double kEdgeTolDeg = 1e-9;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::invalid_input, what);
}

}  // namespace

double normalize_lon(double lon) {
  double x = std::fmod(lon + 180.0, 360.0);
  if (x < 0.0) x += 360.0;
  x -= 180.0;
  // fmod can round up to exactly +180 for inputs just below -180.
  if (x >= 180.0) x -= 360.0;
  return x;
}

GridSpec::GridSpec(std::size_t n_rows, std::size_t n_cols, double lat0,
                   double lon0, double cell_deg)
    : n_rows_(n_rows), n_cols_(n_cols), lat0_(lat0), cell_deg_(cell_deg) {
  require(n_rows > 0 && n_cols > 0, "grid must have at least one row and column");
  require(std::isfinite(lat0) && std::isfinite(lon0) && std::isfinite(cell_deg),
          "grid coordinates must be finite");
  require(cell_deg > 0.0, "cell size must be positive");
  const double half = cell_deg / 2.0;
  const double south = lat0 - static_cast<double>(n_rows - 1) * cell_deg;
  require(lat0 <= 90.0 - half + kWrapTolDeg,
          "northernmost cell centre must lie half a cell inside the pole");
  require(south >= -90.0 + half - kWrapTolDeg,
          "southernmost cell centre must lie half a cell inside the pole");
  const double width = static_cast<double>(n_cols) * cell_deg;
  require(width <= 360.0 + kWrapTolDeg, "grid spans more than 360 degrees of longitude");
  lon0_ = normalize_lon(lon0);
  wrap_ = std::abs(width - 360.0) <= kWrapTolDeg;
}

bool GridSpec::same_as(const GridSpec& other) const {
  return n_rows_ == other.n_rows_ && n_cols_ == other.n_cols_ &&
         std::abs(lat0_ - other.lat0_) <= kWrapTolDeg &&
         std::abs(normalize_lon(lon0_ - other.lon0_)) <= kWrapTolDeg &&
         std::abs(cell_deg_ - other.cell_deg_) <= kWrapTolDeg;
}

PopulationGrid::PopulationGrid(GridSpec spec, std::vector<double> counts)
    : spec_(spec), counts_(std::move(counts)) {
  require(counts_.size() == spec_.n_cells(), "count array does not match grid size");
  for (double v : counts_) {
    require(std::isfinite(v) && v >= 0.0, "population counts must be finite and nonnegative");
  }
  total_ = exact_sum(counts_);
}

PopulationGrid PopulationGrid::zeros(GridSpec spec) {
  return PopulationGrid(spec, std::vector<double>(spec.n_cells(), 0.0));
}

RegionMask::RegionMask(GridSpec spec, std::vector<bool> inside)
    : spec_(spec), inside_(std::move(inside)) {
  require(inside_.size() == spec_.n_cells(), "mask does not match grid size");
}

RegionMask RegionMask::full(const GridSpec& spec) {
  return RegionMask(spec, std::vector<bool>(spec.n_cells(), true));
}

std::size_t RegionMask::count() const {
  return static_cast<std::size_t>(std::count(inside_.begin(), inside_.end(), true));
}

RegionMask RegionMask::united(const RegionMask& other) const {
  require(spec_.same_as(other.spec_), "mask grids differ");
  std::vector<bool> out(inside_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = inside_[i] || other.inside_[i];
  return RegionMask(spec_, std::move(out));
}

PopulationGrid coarsen(const PopulationGrid& grid, std::size_t factor) {
  const GridSpec& fs = grid.spec();
  require(factor > 0, "coarsening factor must be positive");
  require(fs.n_rows() % factor == 0 && fs.n_cols() % factor == 0,
          "coarsening factor " + std::to_string(factor) +
              " does not divide the grid dimensions");
  if (factor == 1) return grid;

  const double offset = static_cast<double>(factor - 1) / 2.0 * fs.cell_deg();
  GridSpec cs(fs.n_rows() / factor, fs.n_cols() / factor, fs.lat0() - offset,
              fs.lon0() + offset, fs.cell_deg() * static_cast<double>(factor));

  std::vector<double> blocks(cs.n_cells());
  std::vector<double> scratch;
  scratch.reserve(factor * factor);
  for (std::size_t r = 0; r < cs.n_rows(); ++r) {
    for (std::size_t c = 0; c < cs.n_cols(); ++c) {
      scratch.clear();
      for (std::size_t i = 0; i < factor; ++i)
        for (std::size_t j = 0; j < factor; ++j)
          scratch.push_back(grid.at(r * factor + i, c * factor + j));
      blocks[r * cs.n_cols() + c] = exact_sum(scratch);
    }
  }

  // Each block is correctly rounded on its own; nudge the largest block until
  // the rounded coarse total matches the fine total bit for bit.
  const double target = grid.total();
  const auto largest = static_cast<std::size_t>(
      std::max_element(blocks.begin(), blocks.end()) - blocks.begin());
  for (int iter = 0; iter < 128 && exact_sum(blocks) != target; ++iter) {
    ExactSum residual;
    residual.add(grid.counts());
    for (double b : blocks) residual.add(-b);
    const double r = residual.value();
    double& b = blocks[largest];
    const double moved = b + r;
    b = (moved != b) ? moved
                     : std::nextafter(b, r > 0.0 ? std::numeric_limits<double>::infinity()
                                                 : 0.0);
    b = std::max(b, 0.0);
  }
  return PopulationGrid(cs, std::move(blocks));
}

PopulationGrid apply_mask(const PopulationGrid& grid, const RegionMask& mask) {
  require(grid.spec().same_as(mask.spec()), "mask grid does not match population grid");
  require(!mask.empty(), "mask selects no cells");
  std::vector<double> out(grid.counts().begin(), grid.counts().end());
  const std::size_t nc = grid.spec().n_cols();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!mask.inside(i / nc, i % nc)) out[i] = 0.0;
  }
  return PopulationGrid(grid.spec(), std::move(out));
}

namespace {

struct Edge {
  double x0, y0, x1, y1;
};

void validate_ring(const Ring& ring) {
  require(ring.size() >= 4, "polygon ring needs at least 4 vertices");
  require(ring.front().lat == ring.back().lat && ring.front().lon == ring.back().lon,
          "polygon ring is not closed");
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    require(std::abs(ring[i + 1].lon - ring[i].lon) <= 180.0,
            "polygon ring crosses the antimeridian; split it first");
  }
}

// Even-odd scanline fill over all rings of all polygons. Each polygon is
// evaluated independently and the results are united.
void fill_polygon(const Polygon& polygon, const GridSpec& spec, std::vector<bool>& inside) {
  std::vector<Edge> edges;
  double min_y = std::numeric_limits<double>::infinity();
  double max_y = -min_y;
  for (const Ring& ring : polygon) {
    validate_ring(ring);
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
      edges.push_back({ring[i].lon, ring[i].lat, ring[i + 1].lon, ring[i + 1].lat});
      min_y = std::min(min_y, ring[i].lat);
      max_y = std::max(max_y, ring[i].lat);
    }
  }

  std::vector<double> crossings;
  std::vector<std::pair<double, double>> flats;
  for (std::size_t r = 0; r < spec.n_rows(); ++r) {
    const double y = spec.lat(r);
    if (y < min_y - kEdgeTolDeg || y > max_y + kEdgeTolDeg) continue;
    crossings.clear();
    flats.clear();
    for (const Edge& e : edges) {
      if ((e.y0 > y) != (e.y1 > y)) {
        crossings.push_back(e.x0 + (y - e.y0) * (e.x1 - e.x0) / (e.y1 - e.y0));
      } else if (std::abs(e.y0 - y) <= kEdgeTolDeg && std::abs(e.y1 - y) <= kEdgeTolDeg) {
        flats.emplace_back(std::min(e.x0, e.x1), std::max(e.x0, e.x1));
      } else if (std::abs(e.y0 - y) <= kEdgeTolDeg) {
        flats.emplace_back(e.x0, e.x0);
      } else if (std::abs(e.y1 - y) <= kEdgeTolDeg) {
        flats.emplace_back(e.x1, e.x1);
      }
    }
    std::sort(crossings.begin(), crossings.end());
    for (std::size_t c = 0; c < spec.n_cols(); ++c) {
      const double x = spec.lon(c);
      auto above = std::upper_bound(crossings.begin(), crossings.end(), x);
      bool in = ((crossings.end() - above) % 2) == 1;
      if (!in) {
        auto near = std::lower_bound(crossings.begin(), crossings.end(), x - kEdgeTolDeg);
        in = near != crossings.end() && *near <= x + kEdgeTolDeg;
      }
      if (!in) {
        for (const auto& [lo, hi] : flats) {
          if (x >= lo - kEdgeTolDeg && x <= hi + kEdgeTolDeg) {
            in = true;
            break;
          }
        }
      }
      if (in) inside[r * spec.n_cols() + c] = true;
    }
  }
}

}  // namespace

RegionMask rasterize_polygon(const Polygon& polygon, const GridSpec& spec) {
  return rasterize_polygons(std::span<const Polygon>(&polygon, 1), spec);
}

RegionMask rasterize_polygons(std::span<const Polygon> polygons, const GridSpec& spec) {
  std::vector<bool> inside(spec.n_cells(), false);
  for (const Polygon& p : polygons) {
    require(!p.empty(), "polygon has no rings");
    fill_polygon(p, spec, inside);
  }
  return RegionMask(spec, std::move(inside));
}

RegionMask bbox_mask(const GridSpec& spec, double south, double west, double north,
                     double east) {
  require(south <= north, "bounding box south edge is north of its north edge");
  std::vector<bool> inside(spec.n_cells(), false);
  const bool crosses = west > east;
  for (std::size_t r = 0; r < spec.n_rows(); ++r) {
    const double lat = spec.lat(r);
    if (lat < south - kEdgeTolDeg || lat > north + kEdgeTolDeg) continue;
    for (std::size_t c = 0; c < spec.n_cols(); ++c) {
      const double lon = spec.lon(c);
      const bool in_lon = crosses ? (lon >= west - kEdgeTolDeg || lon <= east + kEdgeTolDeg)
                                  : (lon >= west - kEdgeTolDeg && lon <= east + kEdgeTolDeg);
      if (in_lon) inside[r * spec.n_cols() + c] = true;
    }
  }
  return RegionMask(spec, std::move(inside));
}

}  // namespace vpcircle
