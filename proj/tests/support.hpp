#pragma once

// Independent reference computations used as test oracles. Nothing here
// reuses the library's distance template or search code.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "vpcircle/grid.hpp"

namespace testsupport {

inline constexpr double kEarthKm = 6371.0088;

inline double rad(double deg) { return deg * std::numbers::pi / 180.0; }

// Great-circle distance through the chord/cross-product form (not haversine).
inline double arc_km(vpcircle::LatLon a, vpcircle::LatLon b) {
  const double ax = std::cos(rad(a.lat)) * std::cos(rad(a.lon));
  const double ay = std::cos(rad(a.lat)) * std::sin(rad(a.lon));
  const double az = std::sin(rad(a.lat));
  const double bx = std::cos(rad(b.lat)) * std::cos(rad(b.lon));
  const double by = std::cos(rad(b.lat)) * std::sin(rad(b.lon));
  const double bz = std::sin(rad(b.lat));
  const double cx = ay * bz - az * by;
  const double cy = az * bx - ax * bz;
  const double cz = ax * by - ay * bx;
  return kEarthKm * std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), ax * bx + ay * by + az * bz);
}

// Sum over every cell within radius of the centre cell.
inline double scan_population(const vpcircle::PopulationGrid& g, vpcircle::Cell center, double radius) {
  const auto& s = g.spec();
  const auto c = s.center(center);
  double sum = 0.0;
  for (std::size_t r = 0; r < s.n_rows(); ++r) {
    for (std::size_t k = 0; k < s.n_cols(); ++k) {
      if (arc_km(c, s.center({r, k})) <= radius) sum += g.at(r, k);
    }
  }
  return sum;
}

// Smallest cell distance whose cumulative population reaches the target.
inline double sorted_distance_radius(const vpcircle::PopulationGrid& g, vpcircle::Cell center,
                                     double target) {
  const auto& s = g.spec();
  const auto c = s.center(center);
  std::vector<std::pair<double, double>> d;
  for (std::size_t r = 0; r < s.n_rows(); ++r) {
    for (std::size_t k = 0; k < s.n_cols(); ++k) d.push_back({arc_km(c, s.center({r, k})), g.at(r, k)});
  }
  std::sort(d.begin(), d.end());
  double acc = 0.0;
  for (const auto& [dist, w] : d) {
    acc += w;
    if (acc >= target * (1.0 - 1e-12)) return dist;
  }
  return d.back().first;
}

struct RandomGridOptions {
  std::size_t max_rows = 40;
  std::size_t max_cols = 80;
  double zero_fraction = 0.5;
  bool integer_counts = true;
};

// Random spec (wrap or regional) with sparse, heavy-tailed counts.
inline vpcircle::PopulationGrid random_grid(std::mt19937_64& rng, bool wrap,
                                            const RandomGridOptions& opt = {}) {
  std::uniform_int_distribution<std::size_t> rows_d(1, opt.max_rows);
  std::size_t n_rows = rows_d(rng);
  std::size_t n_cols;
  double cell;
  if (wrap) {
    static constexpr double kCells[] = {3.0, 4.5, 5.0, 6.0, 7.5, 9.0, 10.0, 12.0, 15.0, 18.0};
    std::uniform_int_distribution<std::size_t> pick(0, std::size(kCells) - 1);
    cell = kCells[pick(rng)];
    n_cols = static_cast<std::size_t>(std::lround(360.0 / cell));
  } else {
    std::uniform_int_distribution<std::size_t> cols_d(1, opt.max_cols);
    n_cols = cols_d(rng);
    std::uniform_real_distribution<double> cell_d(0.05, 4.0);
    cell = cell_d(rng);
    while (static_cast<double>(n_cols) * cell >= 360.0) cell /= 2.0;
  }
  if (wrap) {
    n_rows = std::min(n_rows, static_cast<std::size_t>(170.0 / cell));
  } else {
    while (static_cast<double>(n_rows) * cell > 170.0) cell /= 2.0;
  }
  const double span = static_cast<double>(n_rows - 1) * cell;
  std::uniform_real_distribution<double> lat_d(-89.0 + cell / 2.0 + span, 89.0 - cell / 2.0);
  const double lat0 = lat_d(rng);
  std::uniform_real_distribution<double> lon_d(-180.0, 180.0);
  const vpcircle::GridSpec spec(n_rows, n_cols, lat0, lon_d(rng), cell);

  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> counts(spec.n_cells());
  for (auto& c : counts) {
    if (u(rng) < opt.zero_fraction) continue;
    const double v = std::exp(6.0 * u(rng));
    c = opt.integer_counts ? std::floor(v) : v;
  }
  if (std::all_of(counts.begin(), counts.end(), [](double v) { return v == 0.0; })) counts[0] = 1.0;
  return vpcircle::PopulationGrid(spec, std::move(counts));
}

}  // namespace testsupport
