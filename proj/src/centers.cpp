#include "vpcircle/centers.hpp"

#include <cmath>

#include "vpcircle/error.hpp"
#include "vpcircle/exact_sum.hpp"
#include "vpcircle/geo.hpp"

namespace vpcircle {

std::string_view centre_method_name(CentreMethod m) {
  switch (m) {
    case CentreMethod::centre_of_population: return "centre_of_population";
    case CentreMethod::centre_3d: return "centre_3d";
    case CentreMethod::geometric_median: return "geometric_median";
  }
  return "unknown";
}

namespace {

constexpr double kDegenerateNorm = 1e-12;
constexpr double kCoincideKm = 1e-9;
constexpr int kMaxHalvings = 60;

struct Site {
  Vec3 x;
  double w;
};

void require_population(const PopulationGrid& grid) {
  if (!(grid.total() > 0.0)) throw Error(ErrorCode::invalid_input, "grid has zero total population");
}

std::vector<Site> populated_sites(const PopulationGrid& grid) {
  std::vector<Site> out;
  const GridSpec& spec = grid.spec();
  for (std::size_t r = 0; r < spec.n_rows(); ++r) {
    for (std::size_t c = 0; c < spec.n_cols(); ++c) {
      const double w = grid.at(r, c);
      if (w > 0.0) out.push_back({to_unit_vector(spec.center({r, c})), w});
    }
  }
  return out;
}

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

Vec3 scaled(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }

Vec3 normalized(const Vec3& a) { return scaled(a, 1.0 / norm(a)); }

Vec3 lerp(const Vec3& a, const Vec3& b, double t) {
  return {a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2])};
}

// Great-circle distance between unit vectors, accurate at all separations.
double arc_km(const Vec3& a, const Vec3& b) {
  const Vec3 c{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
  return SphereModel::radius_km * std::atan2(norm(c), dot(a, b));
}

double mean_distance(const std::vector<Site>& sites, const Vec3& y, double wsum) {
  double s = 0.0;
  for (const Site& site : sites) s += site.w * arc_km(y, site.x);
  return s / wsum;
}

Vec3 weighted_mean_vector(const PopulationGrid& grid) {
  ExactSum sx, sy, sz;
  const GridSpec& spec = grid.spec();
  for (std::size_t r = 0; r < spec.n_rows(); ++r) {
    for (std::size_t c = 0; c < spec.n_cols(); ++c) {
      const double w = grid.at(r, c);
      if (w == 0.0) continue;
      const Vec3 x = to_unit_vector(spec.center({r, c}));
      sx.add(w * x[0]);
      sy.add(w * x[1]);
      sz.add(w * x[2]);
    }
  }
  const double t = grid.total();
  return {sx.value() / t, sy.value() / t, sz.value() / t};
}

}  // namespace

CentreResult centre_of_population(const PopulationGrid& grid) {
  require_population(grid);
  const GridSpec& spec = grid.spec();
  ExactSum lat_num, lon_num, lon_den;
  for (std::size_t r = 0; r < spec.n_rows(); ++r) {
    const double lat = spec.lat(r);
    const double cos_lat = std::cos(deg_to_rad(lat));
    for (std::size_t c = 0; c < spec.n_cols(); ++c) {
      const double w = grid.at(r, c);
      if (w == 0.0) continue;
      lat_num.add(w * lat);
      lon_num.add(w * spec.lon(c) * cos_lat);
      lon_den.add(w * cos_lat);
    }
  }
  const double den = lon_den.value();
  if (!(den > 0.0)) throw Error(ErrorCode::degenerate, "population has no longitude weight");
  CentreResult out;
  out.method = CentreMethod::centre_of_population;
  out.lat = lat_num.value() / grid.total();
  out.lon = normalize_lon(lon_num.value() / den);
  return out;
}

CentreResult centre_3d(const PopulationGrid& grid) {
  require_population(grid);
  const Vec3 m = weighted_mean_vector(grid);
  if (norm(m) < kDegenerateNorm) {
    throw Error(ErrorCode::degenerate, "weighted mean vector vanishes; direction undefined");
  }
  const LatLon p = from_vector(m);
  CentreResult out;
  out.method = CentreMethod::centre_3d;
  out.lat = p.lat;
  out.lon = p.lon;
  return out;
}

CentreResult geometric_median(const PopulationGrid& grid, double tol_km, std::size_t max_iter,
                              std::vector<double>* trace) {
  require_population(grid);
  if (!(tol_km > 0.0)) throw Error(ErrorCode::invalid_input, "tol_km must be positive");
  const std::vector<Site> sites = populated_sites(grid);
  double wsum = 0.0;
  for (const Site& s : sites) wsum += s.w;

  Vec3 y;
  const Vec3 m = weighted_mean_vector(grid);
  if (norm(m) >= kDegenerateNorm) {
    y = normalized(m);
  } else {
    const Site* heaviest = &sites.front();
    for (const Site& s : sites) {
      if (s.w > heaviest->w) heaviest = &s;
    }
    y = heaviest->x;
  }

  double obj = mean_distance(sites, y, wsum);
  if (trace) trace->assign(1, obj);

  CentreResult out;
  out.method = CentreMethod::geometric_median;
  out.converged = false;
  std::size_t it = 0;
  while (it < max_iter) {
    ++it;
    Vec3 num{0.0, 0.0, 0.0};
    Vec3 pull{0.0, 0.0, 0.0};
    double den = 0.0;
    double anchored = 0.0;
    for (const Site& s : sites) {
      const double d = arc_km(y, s.x);
      if (d < kCoincideKm) {
        anchored += s.w;
        continue;
      }
      const double q = s.w / d;
      for (int j = 0; j < 3; ++j) num[j] += q * s.x[j];
      den += q;
      // Unit tangent at y pointing along the great circle towards the site.
      const double cos_d = dot(s.x, y);
      Vec3 t;
      for (int j = 0; j < 3; ++j) t[j] = s.x[j] - cos_d * y[j];
      const double tn = norm(t);
      if (tn > 1e-15) {
        for (int j = 0; j < 3; ++j) pull[j] += s.w * t[j] / tn;
      }
    }
    if (den == 0.0) {
      out.converged = true;
      break;
    }
    Vec3 cand;
    if (anchored > 0.0) {
      // Vardi-Zhang: stay put when the pull of the other sites cannot
      // overcome the weight sitting on the iterate.
      const double r = norm(pull);
      if (r <= anchored) {
        out.converged = true;
        break;
      }
      const Vec3 tw = scaled(num, 1.0 / den);
      const double g = anchored / r;
      cand = {(1.0 - g) * tw[0] + g * y[0], (1.0 - g) * tw[1] + g * y[1],
              (1.0 - g) * tw[2] + g * y[2]};
    } else {
      cand = num;
    }
    if (norm(cand) < kDegenerateNorm) {
      out.converged = true;
      break;
    }
    const Vec3 full = normalized(cand);
    Vec3 next = full;
    double next_obj = mean_distance(sites, next, wsum);
    double step = 1.0;
    for (int h = 0; h < kMaxHalvings && next_obj > obj; ++h) {
      step *= 0.5;
      next = normalized(lerp(y, full, step));
      next_obj = mean_distance(sites, next, wsum);
    }
    if (next_obj > obj) {
      out.converged = true;
      break;
    }
    const double moved = arc_km(y, next);
    y = next;
    obj = next_obj;
    if (trace) trace->push_back(obj);
    if (moved < tol_km) {
      out.converged = true;
      break;
    }
  }
  const LatLon p = from_vector(y);
  out.lat = p.lat;
  out.lon = p.lon;
  out.iterations = it;
  out.objective_km = obj;
  return out;
}

double bachi_standard_distance(const PopulationGrid& grid, LatLon center) {
  require_population(grid);
  const GridSpec& spec = grid.spec();
  ExactSum s;
  for (std::size_t r = 0; r < spec.n_rows(); ++r) {
    for (std::size_t c = 0; c < spec.n_cols(); ++c) {
      const double w = grid.at(r, c);
      if (w == 0.0) continue;
      const double d = haversine(center, spec.center({r, c}));
      s.add(w * d * d);
    }
  }
  return std::sqrt(s.value() / grid.total());
}

}  // namespace vpcircle
