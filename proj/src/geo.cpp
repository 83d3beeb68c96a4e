#include "vpcircle/geo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vpcircle {

namespace {

double sin_sq_half(double rad) {
  const double s = std::sin(rad / 2.0);
  return s * s;
}

}  // namespace

double haversine_term(LatLon a, LatLon b) {
  const double phi1 = deg_to_rad(a.lat);
  const double phi2 = deg_to_rad(b.lat);
  const double h = sin_sq_half(phi2 - phi1) +
                   std::cos(phi1) * std::cos(phi2) * sin_sq_half(deg_to_rad(b.lon - a.lon));
  return std::clamp(h, 0.0, 1.0);
}

double haversine_term_to_km(double hav) {
  return 2.0 * SphereModel::radius_km * std::asin(std::sqrt(std::clamp(hav, 0.0, 1.0)));
}

double haversine(LatLon a, LatLon b) { return haversine_term_to_km(haversine_term(a, b)); }

double radius_to_haversine_term(double radius_km) {
  if (radius_km >= SphereModel::half_circumference_km) {
    return std::numeric_limits<double>::infinity();
  }
  if (radius_km <= 0.0) return 0.0;
  return sin_sq_half(radius_km / SphereModel::radius_km);
}

Vec3 to_unit_vector(LatLon p) {
  const double phi = deg_to_rad(p.lat);
  const double lam = deg_to_rad(p.lon);
  return {std::cos(phi) * std::cos(lam), std::cos(phi) * std::sin(lam), std::sin(phi)};
}

LatLon from_vector(const Vec3& v) {
  const double h = std::hypot(v[0], v[1]);
  return {rad_to_deg(std::atan2(v[2], h)), normalize_lon(rad_to_deg(std::atan2(v[1], v[0])))};
}

LatLon destination(LatLon start, double bearing_deg, double distance_km) {
  const double delta = distance_km / SphereModel::radius_km;
  const double theta = deg_to_rad(bearing_deg);
  const double phi1 = deg_to_rad(start.lat);
  const double lam1 = deg_to_rad(start.lon);
  const double sin_phi2 =
      std::sin(phi1) * std::cos(delta) + std::cos(phi1) * std::sin(delta) * std::cos(theta);
  const double phi2 = std::asin(std::clamp(sin_phi2, -1.0, 1.0));
  const double lam2 = lam1 + std::atan2(std::sin(theta) * std::sin(delta) * std::cos(phi1),
                                        std::cos(delta) - std::sin(phi1) * sin_phi2);
  return {rad_to_deg(phi2), normalize_lon(rad_to_deg(lam2))};
}

DistanceTemplate::DistanceTemplate(double center_lat, const GridSpec& spec)
    : center_lat_(center_lat), wrap_(spec.global_wrap()) {
  const std::size_t n_cols = spec.n_cols();
  const std::size_t max_k = wrap_ ? n_cols / 2 : n_cols - 1;
  const double cell = spec.cell_deg();
  near_limit_ = wrap_ ? max_k
                      : std::min(max_k, static_cast<std::size_t>(std::floor(180.0 / cell + 1e-9)));

  offset_s_.resize(max_k + 1);
  for (std::size_t k = 0; k <= max_k; ++k) {
    offset_s_[k] = sin_sq_half(deg_to_rad(static_cast<double>(k) * cell));
  }
  // Round-off must not break the branch monotonicity the binary searches use.
  for (std::size_t k = 1; k <= near_limit_; ++k) {
    offset_s_[k] = std::max(offset_s_[k], offset_s_[k - 1]);
  }
  // The far branch starts past 180 degrees and may sit above the last near entry.
  for (std::size_t k = near_limit_ + 2; k <= max_k; ++k) {
    offset_s_[k] = std::min(offset_s_[k], offset_s_[k - 1]);
  }

  const double phi0 = deg_to_rad(center_lat);
  const double cos0 = std::cos(phi0);
  row_a_.resize(spec.n_rows());
  row_b_.resize(spec.n_rows());
  for (std::size_t r = 0; r < spec.n_rows(); ++r) {
    const double phi = deg_to_rad(spec.lat(r));
    row_a_[r] = sin_sq_half(phi - phi0);
    row_b_[r] = std::cos(phi) * cos0;
  }
  // Same for rows: moving away from the centre latitude never gets closer.
  const double lat_offset = (spec.lat0() - center_lat) / spec.cell_deg();
  const std::size_t r0 = static_cast<std::size_t>(
      std::clamp(std::round(lat_offset), 0.0, static_cast<double>(spec.n_rows() - 1)));
  for (std::size_t r = r0 + 1; r < spec.n_rows(); ++r) {
    row_a_[r] = std::max(row_a_[r], row_a_[r - 1]);
  }
  for (std::size_t r = r0; r-- > 0;) {
    row_a_[r] = std::max(row_a_[r], row_a_[r + 1]);
  }
}

long DistanceTemplate::near_halfwidth(std::size_t row, double threshold) const {
  if (haversine_term(row, 0) > threshold) return -1;
  std::size_t lo = 0;  // known inside
  std::size_t hi = near_limit_ + 1;  // first known outside (or past the branch)
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (haversine_term(row, mid) <= threshold) lo = mid;
    else hi = mid;
  }
  return static_cast<long>(lo);
}

std::size_t DistanceTemplate::far_start(std::size_t row, double threshold) const {
  const std::size_t max_k = max_offset();
  if (near_limit_ == max_k || haversine_term(row, max_k) > threshold) return max_k + 1;
  std::size_t lo = near_limit_;  // not on the far branch
  std::size_t hi = max_k;        // known inside
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (haversine_term(row, mid) <= threshold) hi = mid;
    else lo = mid;
  }
  return hi;
}

DistanceTemplate build_template(double center_lat, const GridSpec& spec) {
  return DistanceTemplate(center_lat, spec);
}

long row_halfwidth(const DistanceTemplate& tmpl, std::size_t row, double radius_km) {
  return tmpl.near_halfwidth(row, radius_to_haversine_term(radius_km));
}

}  // namespace vpcircle
