#include "vpcircle/discmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "vpcircle/error.hpp"
#include "vpcircle/geo.hpp"

namespace vpcircle {

void DiscModelParams::validate() const {
  if (!(rho0 > 0.0) || !std::isfinite(rho0)) throw Error(ErrorCode::invalid_input, "rho0 must be positive");
  if (!(r0_km > 0.0) || !std::isfinite(r0_km)) throw Error(ErrorCode::invalid_input, "r0_km must be positive");
  if (!(ri_km > 0.0) || !std::isfinite(ri_km)) throw Error(ErrorCode::invalid_input, "ri_km must be positive");
  if (!std::isfinite(a)) throw Error(ErrorCode::invalid_input, "a must be finite");
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// (e^(b x) - 1) / b, continuous through b = 0.
double expm1_over(double x, double b) {
  if (b == 0.0) return x;
  return std::expm1(b * x) / b;
}

}  // namespace

double density(double r_km, const DiscModelParams& p) {
  if (r_km > p.ri_km) return 0.0;
  return p.rho0 * std::pow(p.r0_km / (r_km + p.r0_km), 2.0 - p.a);
}

double cumulative_population(double r_km, const DiscModelParams& p) {
  const double r = std::clamp(r_km, 0.0, p.ri_km);
  if (r == 0.0) return 0.0;
  const double r0 = p.r0_km;
  // L = ln((r + R0) / R0); the antiderivative of r (r + R0)^(a-2) is
  // u^a / a - R0 u^(a-1) / (a-1) with u = r + R0.
  const double l = std::log1p(r / r0);
  if (p.a == 0.0) {
    return kTwoPi * p.rho0 * r0 * r0 * (l + r0 / (r + r0) - 1.0);
  }
  if (p.a == 1.0) {
    return kTwoPi * p.rho0 * r0 * (r - r0 * l);
  }
  // Written relative to u = R0 so that a near 0 or 1 loses no precision.
  return kTwoPi * p.rho0 * r0 * r0 * (expm1_over(l, p.a) - expm1_over(l, p.a - 1.0));
}

double island_population(const DiscModelParams& p) { return cumulative_population(p.ri_km, p); }

double analytic_vp_radius(double f, const DiscModelParams& p) {
  p.validate();
  if (!(f > 0.0 && f <= 1.0)) throw Error(ErrorCode::invalid_input, "fraction must lie in (0, 1]");
  if (f == 1.0) return p.ri_km;
  const double target = f * island_population(p);
  double lo = 0.0;
  double hi = p.ri_km;
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (cumulative_population(mid, p) >= target) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

double asymptotic_vp_radius(double f, const DiscModelParams& p, AsymptoticForm form) {
  p.validate();
  if (!(p.a > 0.0)) throw Error(ErrorCode::invalid_input, "asymptotic radius needs a > 0");
  if (!(f > 0.0 && f <= 1.0)) throw Error(ErrorCode::invalid_input, "fraction must lie in (0, 1]");
  const double k = form == AsymptoticForm::consistent ? 2.0 : 1.0;
  const double rhs =
      p.a * f * island_population(p) / (k * std::numbers::pi * p.rho0 * std::pow(p.r0_km, 2.0 - p.a));
  return std::max(0.0, std::pow(rhs, 1.0 / p.a) - p.r0_km);
}

namespace {

struct Rect {
  double x0, x1, y0, y1;
  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

// Length of the origin-centred circle of radius r that lies inside the rectangle.
double arc_inside(double r, const Rect& rc) {
  if (r <= 0.0) return 0.0;
  std::vector<double> angles;
  auto push = [&](double th) {
    th = std::fmod(th, kTwoPi);
    if (th < 0.0) th += kTwoPi;
    angles.push_back(th);
  };
  for (const double x : {rc.x0, rc.x1}) {
    if (std::abs(x) <= r) {
      const double th = std::acos(x / r);
      const double y = r * std::sin(th);
      if (y >= rc.y0 && y <= rc.y1) push(th);
      if (-y >= rc.y0 && -y <= rc.y1) push(-th);
    }
  }
  for (const double y : {rc.y0, rc.y1}) {
    if (std::abs(y) <= r) {
      const double th = std::asin(y / r);
      const double x = r * std::cos(th);
      if (x >= rc.x0 && x <= rc.x1) push(th);
      if (-x >= rc.x0 && -x <= rc.x1) push(std::numbers::pi - th);
    }
  }
  if (angles.empty()) return rc.contains(r, 0.0) ? kTwoPi * r : 0.0;
  std::sort(angles.begin(), angles.end());
  double len = 0.0;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    const double a0 = angles[i];
    const double a1 = i + 1 < angles.size() ? angles[i + 1] : angles.front() + kTwoPi;
    if (a1 - a0 <= 0.0) continue;
    const double mid = 0.5 * (a0 + a1);
    if (rc.contains(r * std::cos(mid), r * std::sin(mid))) len += r * (a1 - a0);
  }
  return len;
}

// Population of the island inside a planar rectangle (origin at the island
// centre), integrating density times in-rectangle arc length over r.
double integrate_rect(const Rect& rc, const DiscModelParams& p) {
  const double cx = std::clamp(0.0, rc.x0, rc.x1);
  const double cy = std::clamp(0.0, rc.y0, rc.y1);
  const double r_min = std::hypot(cx, cy);
  const double r_max = std::hypot(std::max(std::abs(rc.x0), std::abs(rc.x1)),
                                  std::max(std::abs(rc.y0), std::abs(rc.y1)));
  const double hi = std::min(r_max, p.ri_km);
  if (r_min >= hi) return 0.0;

  double lo = r_min;
  double total = 0.0;
  if (rc.contains(0.0, 0.0)) {
    // Whole circles up to the nearest edge.
    const double r_in = std::min({-rc.x0, rc.x1, -rc.y0, rc.y1});
    lo = std::min(r_in, hi);
    total += cumulative_population(lo, p);
  }

  std::vector<double> cuts{lo, hi};
  auto cut = [&](double r) {
    if (r > lo && r < hi) cuts.push_back(r);
  };
  for (const double x : {rc.x0, rc.x1}) {
    for (const double y : {rc.y0, rc.y1}) cut(std::hypot(x, y));
    if (rc.y0 <= 0.0 && rc.y1 >= 0.0) cut(std::abs(x));
  }
  for (const double y : {rc.y0, rc.y1}) {
    if (rc.x0 <= 0.0 && rc.x1 >= 0.0) cut(std::abs(y));
  }
  std::sort(cuts.begin(), cuts.end());

  boost::math::quadrature::tanh_sinh<double> integrator;
  auto integrand = [&](double r) { return density(r, p) * arc_inside(r, rc); };
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] - cuts[i] <= 0.0) continue;
    total += integrator.integrate(integrand, cuts[i], cuts[i + 1], 1e-10);
  }
  return total;
}

void check_not_clipped(const DiscModelParams& p, const GridSpec& spec, LatLon center) {
  const double half = spec.cell_deg() / 2.0;
  const double north = spec.lat0() + half;
  const double south = spec.lat(spec.n_rows() - 1) - half;
  const double ang = p.ri_km / SphereModel::radius_km;
  const double dlat = rad_to_deg(ang);
  if (center.lat + dlat > north || center.lat - dlat < south) {
    throw Error(ErrorCode::invalid_input, "island is clipped by the grid edge");
  }
  if (spec.global_wrap()) return;
  const double s = std::sin(ang) / std::cos(deg_to_rad(center.lat));
  if (s >= 1.0) throw Error(ErrorCode::invalid_input, "island is clipped by the grid edge");
  const double dlon = rad_to_deg(std::asin(s));
  double dx = std::fmod(center.lon - (spec.lon0() - half), 360.0);
  if (dx < 0.0) dx += 360.0;
  const double width = static_cast<double>(spec.n_cols()) * spec.cell_deg();
  if (dx - dlon < 0.0 || dx + dlon > width) {
    throw Error(ErrorCode::invalid_input, "island is clipped by the grid edge");
  }
}

}  // namespace

PopulationGrid synth_grid(const DiscModelParams& p, const GridSpec& spec, LatLon center,
                          CellRule rule) {
  p.validate();
  check_not_clipped(p, spec, center);
  const double re = SphereModel::radius_km;
  const double cell_rad = deg_to_rad(spec.cell_deg());
  const double half_deg = spec.cell_deg() / 2.0;
  const double phi_c = deg_to_rad(center.lat);
  std::vector<double> counts(spec.n_cells(), 0.0);

  for (std::size_t r = 0; r < spec.n_rows(); ++r) {
    const double lat = spec.lat(r);
    const double area = re * re * cell_rad *
                        (std::sin(deg_to_rad(lat + half_deg)) - std::sin(deg_to_rad(lat - half_deg)));
    // Half extents of a planar rectangle with the cell's spherical area.
    const double hy = re * cell_rad / 2.0;
    const double hx = area / (4.0 * hy);
    const double reach = p.ri_km + 2.0 * (hx + hy);
    for (std::size_t c = 0; c < spec.n_cols(); ++c) {
      const LatLon pos = spec.center({r, c});
      const double d = haversine(center, pos);
      double value = 0.0;
      if (rule == CellRule::centre_point) {
        if (d <= p.ri_km) value = density(d, p) * area;
      } else if (d <= reach) {
        const double phi = deg_to_rad(pos.lat);
        const double dlam = deg_to_rad(pos.lon - center.lon);
        const double bearing =
            std::atan2(std::sin(dlam) * std::cos(phi),
                       std::cos(phi_c) * std::sin(phi) - std::sin(phi_c) * std::cos(phi) * std::cos(dlam));
        const double x = d * std::sin(bearing);
        const double y = d * std::cos(bearing);
        value = integrate_rect({x - hx, x + hx, y - hy, y + hy}, p);
      }
      counts[r * spec.n_cols() + c] = value;
    }
  }
  return PopulationGrid(spec, std::move(counts));
}

}  // namespace vpcircle
