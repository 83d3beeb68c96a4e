#pragma once

#include <array>
#include <cstddef>
#include <numbers>
#include <vector>

#include "vpcircle/grid.hpp"

namespace vpcircle {

// Spherical Earth, IUGG mean radius.
struct SphereModel {
  static constexpr double radius_km = 6371.0088;
  // Largest possible great-circle distance.
  static constexpr double half_circumference_km = std::numbers::pi * radius_km;
};

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

// Great-circle distance in km (haversine formula).
double haversine(LatLon a, LatLon b);

// The haversine term hav(d/R) in [0, 1] and its conversion to kilometres.
double haversine_term(LatLon a, LatLon b);
double haversine_term_to_km(double hav);

// Threshold in haversine-term space for "distance <= radius_km". Radii at or
// beyond half the circumference map to +infinity (every point qualifies).
double radius_to_haversine_term(double radius_km);

using Vec3 = std::array<double, 3>;
Vec3 to_unit_vector(LatLon p);
// Inverse of to_unit_vector for any nonzero vector; longitude in [-180, 180).
LatLon from_vector(const Vec3& v);

// Point reached from `start` after travelling `distance_km` along `bearing_deg`
// (clockwise from north).
LatLon destination(LatLon start, double bearing_deg, double distance_km);

/**
 * Distances from one centre latitude to every grid row at every longitude
 * offset, reused for all centres on that latitude.
 *
 * Entry (row, k) is the distance between a cell in `row` and a centre k
 * columns away. It is stored in factored haversine form
 * hav = A[row] + B[row] * S[k], which needs O(rows + offsets) memory and
 * makes every row exactly monotone in k on each branch:
 *   - offsets 0..near_limit() (up to 180 degrees) are nondecreasing,
 *   - offsets past near_limit() (only on non-wrap grids wider than 180
 *     degrees) are nonincreasing.
 * On global-wrap grids offsets are ring distances and max_offset() is
 * floor(n_cols / 2).
 */
class DistanceTemplate {
 public:
  DistanceTemplate(double center_lat, const GridSpec& spec);

  double center_lat() const { return center_lat_; }
  std::size_t n_rows() const { return row_a_.size(); }
  std::size_t max_offset() const { return offset_s_.size() - 1; }
  std::size_t near_limit() const { return near_limit_; }
  bool wrap() const { return wrap_; }

  double haversine_term(std::size_t row, std::size_t k) const {
    return row_a_[row] + row_b_[row] * offset_s_[k];
  }
  double distance_km(std::size_t row, std::size_t k) const {
    return haversine_term_to_km(haversine_term(row, k));
  }

  // Largest k on the near branch with hav(row, k) <= threshold, or -1.
  long near_halfwidth(std::size_t row, double threshold) const;
  // Smallest k on the far branch with hav(row, k) <= threshold, or
  // max_offset() + 1 when there is none.
  std::size_t far_start(std::size_t row, double threshold) const;

 private:
  double center_lat_;
  bool wrap_;
  std::size_t near_limit_;
  std::vector<double> row_a_;
  std::vector<double> row_b_;
  std::vector<double> offset_s_;
};

DistanceTemplate build_template(double center_lat, const GridSpec& spec);

// Largest offset k with distance(row, k) <= radius_km on the near branch, or
// -1 when no cell of the row is that close.
long row_halfwidth(const DistanceTemplate& tmpl, std::size_t row, double radius_km);

}  // namespace vpcircle
