// Acceptance run: one PASS/FAIL/SKIP line per criterion. Exit status is
// nonzero when any criterion fails.

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "render.hpp"
#include "support.hpp"
#include "vpcircle/centers.hpp"
#include "vpcircle/discmodel.hpp"
#include "vpcircle/error.hpp"
#include "vpcircle/geo.hpp"
#include "vpcircle/grid_io.hpp"
#include "vpcircle/profile.hpp"
#include "vpcircle/vpsearch.hpp"

using namespace vpcircle;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(const char* status, const std::string& name, const std::string& detail) {
  std::printf("%s %s: %s\n", status, name.c_str(), detail.c_str());
  std::fflush(stdout);
}

void verdict(bool ok, const std::string& name, const std::string& detail) {
  if (!ok) ++failures;
  report(ok ? "PASS" : "FAIL", name, detail);
}

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

std::vector<Cell> sorted_cells(std::vector<Cell> v) {
  std::sort(v.begin(), v.end());
  return v;
}

testsupport::RandomGridOptions mixed_options(std::size_t i) {
  testsupport::RandomGridOptions opt;
  static constexpr double kZero[] = {0.0, 0.5, 0.9, 0.98};
  opt.zero_fraction = kZero[i % 4];
  opt.integer_counts = (i / 4) % 2 == 0;
  return opt;
}

// ---------------------------------------------------------------------------

void oracle_equivalence() {
  const std::string name = "oracle equivalence";
  const std::vector<double> fs{0.05, 0.25, 0.5, 0.75, 1.0};
  std::mt19937_64 rng(20240601);
  const auto t0 = Clock::now();
  std::size_t grids = 0, wraps = 0, bad_radius = 0, bad_cocentres = 0, bad_oracle = 0;
  double worst = 0.0;
  SearchConfig cfg;
  cfg.coarsen_factor = 1;
  for (std::size_t i = 0; i < 240; ++i) {
    const bool wrap = i % 3 == 0;
    const auto g = testsupport::random_grid(rng, wrap, mixed_options(i));
    wraps += g.spec().global_wrap();
    const auto fast = vp_fast(g, fs, cfg);
    for (std::size_t j = 0; j < fs.size(); ++j) {
      const auto slow = vp_bruteforce(g, fs[j], cfg);
      const double diff = std::abs(fast[j].radius_km - slow.radius_km);
      worst = std::max(worst, diff);
      if (diff > cfg.eps_km) ++bad_radius;
      if (sorted_cells(fast[j].co_centers) != sorted_cells(slow.co_centers)) ++bad_cocentres;
      // Independent check of the radius itself, by sorting exact distances.
      const double truth = testsupport::sorted_distance_radius(g, slow.center, fs[j] * g.total());
      if (slow.radius_km < truth - 1e-6 || slow.radius_km > truth + cfg.eps_km + 1e-6) ++bad_oracle;
    }
    ++grids;
  }
  const double wall = since(t0);
  const bool ok = bad_radius == 0 && bad_cocentres == 0 && bad_oracle == 0 && grids >= 200 && wall < 120.0;
  verdict(ok, name,
          std::to_string(grids) + " grids (" + std::to_string(wraps) + " wrap), " + std::to_string(fs.size()) +
              " fractions each; radius mismatches " + std::to_string(bad_radius) + " (max diff " + num(worst) +
              " km), co-centre mismatches " + std::to_string(bad_cocentres) + ", distance-sort oracle misses " +
              std::to_string(bad_oracle) + "; " + num(wall, 3) + " s (limit 120 s)");
}

// ---------------------------------------------------------------------------

GridSpec island_spec(double ri_km, double cell, LatLon c, std::size_t margin = 2) {
  const double half = ri_km / SphereModel::radius_km * 180.0 / std::numbers::pi / std::cos(deg_to_rad(c.lat));
  const auto n = static_cast<std::size_t>(std::ceil(half / cell)) + margin;
  return GridSpec(2 * n + 1, 2 * n + 1, c.lat + static_cast<double>(n) * cell,
                  c.lon - static_cast<double>(n) * cell, cell);
}

void uniform_disc() {
  const std::string name = "uniform-disc law";
  const auto t0 = Clock::now();
  const DiscModelParams p{100.0, 1.0, 2.0, 400.0};
  const LatLon c{0.0, 0.0};
  const auto g = synth_grid(p, island_spec(p.ri_km, 0.05, c), c);
  const auto prof = compute_profile(g, default_fractions());
  double tau50 = 0.0;
  for (const auto& s : prof.samples) {
    if (std::abs(s.f - 0.5) < 1e-12) tau50 = s.tau;
  }
  const auto c50 = centralisation(prof, 0.5);
  const double wall = since(t0);
  const bool ok = std::abs(tau50 - std::sqrt(0.5)) <= 0.03 && std::abs(c50.value) <= 0.05 && wall < 60.0;
  verdict(ok, name,
          "tau(0.5) = " + num(tau50, 5) + " (0.7071 +- 0.03), C50 = " + num(c50.value, 3) + " (|C50| <= 0.05), " +
              num(wall, 3) + " s (limit 60 s)");
}

// ---------------------------------------------------------------------------

double quadrature_population(double radius, const DiscModelParams& p) {
  auto integrand = [&](double r) {
    return 2.0 * std::numbers::pi * r * p.rho0 * std::pow(p.r0_km / (r + p.r0_km), 2.0 - p.a);
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, std::min(radius, p.ri_km),
                                                                        25, 1e-14);
}

void quadrature_agreement() {
  const std::string name = "analytic/quadrature agreement";
  double worst = 0.0;
  std::size_t n = 0;
  for (double a : {-0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 3.0}) {
    const DiscModelParams p{250.0, 12.5, a, 500.0};
    for (int i = 1; i <= 50; ++i) {
      const double r = p.ri_km * i / 50.0;
      const double q = quadrature_population(r, p);
      worst = std::max(worst, std::abs(cumulative_population(r, p) - q) / q);
      ++n;
    }
  }
  verdict(worst <= 1e-8, name,
          std::to_string(n) + " (a, R) pairs, max relative error " + num(worst, 3) + " (limit 1e-8)");
}

// ---------------------------------------------------------------------------

void disc_end_to_end() {
  const std::string name = "end-to-end disc oracle";
  const double cell = 0.05;
  const LatLon c{0.0, 0.0};
  const double diag = std::sqrt(2.0) * SphereModel::radius_km * deg_to_rad(cell);
  SearchConfig cfg;
  bool ok = true;
  std::string detail;
  for (double a : {0.5, 1.0, 2.0}) {
    // A small softening scale keeps tau(f) close to f^(1/a) over the island.
    const DiscModelParams p{1e4, 0.05, a, 400.0};
    const auto g = synth_grid(p, island_spec(p.ri_km, cell, c), c, CellRule::integrated);
    const std::vector<double> fs{0.25, 0.5, 0.75};
    const auto circles = vp_fast(g, fs, cfg);
    double worst = 0.0;
    for (std::size_t i = 0; i < fs.size(); ++i) {
      worst = std::max(worst, std::abs(circles[i].radius_km - analytic_vp_radius(fs[i], p)));
    }
    const auto prof = compute_profile(g, default_fractions(), cfg);
    const auto fit = fit_power_law(prof, 0.25, 1.0);
    const double rel = std::abs(fit.a - a) / a;
    const bool this_ok = worst <= 2.0 * diag + cfg.eps_km && rel <= 0.10;
    ok = ok && this_ok;
    detail += "a=" + num(a) + ": max |R - R_analytic| " + num(worst, 3) + " km, fitted a " + num(fit.a, 4) +
              " (" + num(100 * rel, 2) + "%); ";
  }
  detail += "limits " + num(2.0 * diag + cfg.eps_km, 4) + " km and 10%, fit over f in [0.25, 1]";
  verdict(ok, name, detail);
}

// ---------------------------------------------------------------------------

std::string render(const std::vector<VpCircle>& circles) {
  std::ostringstream out;
  cli::write_vp_csv(circles, out);
  for (const auto& c : circles) {
    for (const Cell& k : c.co_centers) out << k.row << ',' << k.col << ';';
    out << '\n';
  }
  return out.str();
}

void monotone_and_deterministic() {
  const std::string name = "monotonicity and determinism";
  const auto fs = default_fractions();
  std::mt19937_64 rng(77);
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::vector<unsigned> thread_counts{1, 2, hw, 4};
  std::size_t grids = 0, non_monotone = 0, mismatched = 0;
  for (std::size_t i = 0; i < 200; ++i) {
    const auto g = testsupport::random_grid(rng, i % 3 == 0, mixed_options(i));
    std::string first;
    for (std::size_t t = 0; t < thread_counts.size(); ++t) {
      for (std::size_t coarse : {std::size_t{1}, std::size_t{4}}) {
        SearchConfig cfg;
        cfg.threads = thread_counts[t];
        cfg.coarsen_factor = coarse;
        cfg.window_deg = 10.0;
        const auto circles = vp_fast(g, fs, cfg);
        if (coarse == 1 && t == 0) {
          for (std::size_t j = 1; j < circles.size(); ++j) {
            if (circles[j].radius_km < circles[j - 1].radius_km - cfg.eps_km) ++non_monotone;
          }
        }
        const std::string text = std::to_string(coarse) + "\n" + render(circles);
        if (t == 0) {
          first += text;
        } else if (first.find(text) == std::string::npos) {
          ++mismatched;
        }
      }
    }
    ++grids;
  }
  verdict(non_monotone == 0 && mismatched == 0, name,
          std::to_string(grids) + " grids x 40 fractions; decreasing steps beyond eps " + std::to_string(non_monotone) +
              ", outputs differing across thread counts {1, 2, " + std::to_string(hw) + ", 4} " +
              std::to_string(mismatched));
}

// ---------------------------------------------------------------------------

// Global 15-minute grid: clustered "cities" on "continents", empty oceans.
PopulationGrid synthetic_global() {
  const GridSpec spec(720, 1440, 89.875, -179.875, 0.25);
  std::mt19937_64 rng(15);
  struct Blob {
    double lat, lon, sigma, weight;
  };
  std::vector<Blob> continents, cities;
  std::uniform_real_distribution<double> lat_d(-40.0, 60.0), lon_d(-180.0, 180.0), u(0.0, 1.0);
  for (int i = 0; i < 12; ++i) continents.push_back({lat_d(rng), lon_d(rng), 8.0 + 12.0 * u(rng), 1.0});
  for (int i = 0; i < 300; ++i) {
    const Blob& home = continents[static_cast<std::size_t>(i) % continents.size()];
    std::normal_distribution<double> jitter(0.0, home.sigma * 0.6);
    cities.push_back({std::clamp(home.lat + jitter(rng), -60.0, 75.0), home.lon + jitter(rng),
                      0.1 + 1.5 * u(rng), std::exp(4.0 * u(rng))});
  }
  auto sq_deg = [](double lat1, double lon1, double lat2, double lon2) {
    const double dlon = normalize_lon(lon1 - lon2) * std::cos(deg_to_rad(0.5 * (lat1 + lat2)));
    return (lat1 - lat2) * (lat1 - lat2) + dlon * dlon;
  };
  std::vector<double> counts(spec.n_cells(), 0.0);
  std::lognormal_distribution<double> noise(0.0, 1.0);
  for (std::size_t r = 0; r < spec.n_rows(); ++r) {
    const double lat = spec.lat(r);
    for (std::size_t k = 0; k < spec.n_cols(); ++k) {
      const double lon = spec.lon(k);
      double land = 0.0;
      for (const auto& b : continents) land = std::max(land, std::exp(-sq_deg(lat, lon, b.lat, b.lon) / (2 * b.sigma * b.sigma)));
      if (land < 0.3) continue;
      double v = 20.0 * land;
      for (const auto& b : cities) {
        const double d2 = sq_deg(lat, lon, b.lat, b.lon);
        if (d2 < 25.0 * b.sigma * b.sigma) v += 5000.0 * b.weight * std::exp(-d2 / (2 * b.sigma * b.sigma));
      }
      counts[spec.index({r, k})] = std::floor(v * noise(rng));
    }
  }
  return PopulationGrid(spec, std::move(counts));
}

void performance() {
  const std::string name = "performance";
  const auto g = synthetic_global();
  const auto& spec = g.spec();
  SearchConfig cfg;
  cfg.threads = 1;

  // Brute force on every 30th row, scaled up to the whole grid.
  const std::size_t stride = 30;
  std::vector<bool> rows(spec.n_cells(), false);
  std::size_t sampled = 0;
  for (std::size_t r = 0; r < spec.n_rows(); r += stride) {
    for (std::size_t k = 0; k < spec.n_cols(); ++k) rows[spec.index({r, k})] = true;
    sampled += spec.n_cols();
  }
  SearchConfig exact_cfg = cfg;
  exact_cfg.candidates = CandidatePolicy::masked_cells;
  exact_cfg.candidate_mask = RegionMask(spec, std::move(rows));
  auto t0 = Clock::now();
  vp_bruteforce(g, 0.5, exact_cfg);
  const double exact_s =
      since(t0) * static_cast<double>(spec.n_cells()) / static_cast<double>(sampled);

  SearchConfig fast_cfg = cfg;
  fast_cfg.coarsen_factor = 1;
  t0 = Clock::now();
  const auto fast = vp_fast(g, 0.5, fast_cfg);
  const double fast_s = since(t0);

  SearchStats st;
  t0 = Clock::now();
  const auto coarse = vp_fast(g, 0.5, cfg, &st);
  const double coarse_s = since(t0);

  const double speedup = exact_s / fast_s;
  const bool ok = speedup >= 20.0 && coarse_s <= 5.0;
  verdict(ok, name,
          "720x1440 synthetic, f=0.5, 1 thread: brute force " + num(exact_s, 4) + " s (extrapolated from " +
              std::to_string(sampled) + " candidates), fast " + num(fast_s, 4) + " s, speedup " + num(speedup, 4) +
              "x (need >= 20x); coarse-to-fine " + num(coarse_s, 4) + " s (limit 5 s), radius " +
              num(coarse.radius_km, 6) + " km vs fast " + num(fast.radius_km, 6) + " km");
}

// ---------------------------------------------------------------------------

void weiszfeld() {
  const std::string name = "Weiszfeld convergence";
  std::mt19937_64 rng(4242);
  std::size_t grids = 0, increases = 0, iterations = 0;
  for (std::size_t i = 0; i < 100; ++i) {
    const auto g = testsupport::random_grid(rng, i % 2 == 0, mixed_options(i));
    std::vector<double> trace;
    try {
      geometric_median(g, 0.1, 1000, &trace);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::degenerate) throw;
      continue;  // antipodal symmetry; no start direction
    }
    for (std::size_t j = 1; j < trace.size(); ++j) {
      if (trace[j] > trace[j - 1]) ++increases;
    }
    iterations += trace.size() - 1;
    ++grids;
  }
  const GridSpec spec(9, 9, 4.0, -4.0, 1.0);
  std::vector<double> counts(spec.n_cells(), 0.0);
  for (Cell k : {Cell{0, 4}, Cell{8, 4}, Cell{4, 0}, Cell{4, 8}}) counts[spec.index(k)] = 250.0;
  const PopulationGrid cross(spec, std::move(counts));
  const double tol = 0.1;
  const auto m = geometric_median(cross, tol);
  const double miss = haversine(m.position(), {0.0, 0.0});
  verdict(increases == 0 && grids >= 95 && miss <= tol, name,
          std::to_string(grids) + " random grids, " + std::to_string(iterations) + " steps, objective increases " +
              std::to_string(increases) + "; 4-mass cross median " + num(miss, 3) + " km from origin (tol " +
              num(tol) + " km)");
}

// ---------------------------------------------------------------------------

bool within_cells(LatLon got, LatLon want, double cell, double n = 1.0) {
  return std::abs(got.lat - want.lat) <= n * cell + 1e-9 &&
         std::abs(normalize_lon(got.lon - want.lon)) <= n * cell + 1e-9;
}

std::string pos(LatLon p) { return "(" + num(p.lat, 7) + ", " + num(p.lon, 7) + ")"; }

void dataset_checks() {
  const char* dir_env = std::getenv("VPCIRCLE_DATA_DIR");
  const fs::path dir = dir_env ? dir_env : "";
  auto file = [&](const std::string& n) { return dir / n; };
  auto present = [&](const std::string& n) { return dir_env && fs::exists(file(n)); };

  SearchConfig cfg;
  cfg.threads = 0;

  {
    const std::string name = "dataset: global 2020 15-minute";
    const std::string f = "global_2020_15min.asc";
    if (!present(f)) {
      report("SKIP", name, "VPCIRCLE_DATA_DIR/" + f + " not found");
    } else {
      const auto g = load_esri_ascii(file(f));
      const double cell = g.spec().cell_deg();
      const auto vp = vp_fast(g, 0.5, cfg);
      const auto cop = centre_of_population(g);
      const double bachi = bachi_standard_distance(g, cop.position());
      const auto c3 = centre_3d(g);
      const auto med = geometric_median(g);
      const bool ok = within_cells(vp.center_pos, {28.375, 100.625}, cell) && std::abs(vp.radius_km - 3386) <= 10 &&
                      within_cells(cop.position(), {22.125, 51.375}, cell) && std::abs(bachi - 6583) <= 20 &&
                      within_cells(c3.position(), {36.625, 66.875}, cell) &&
                      within_cells(med.position(), {24.625, 72.125}, cell);
      verdict(ok, name,
              "VP " + pos(vp.center_pos) + " R " + num(vp.radius_km, 6) + " km; centre " + pos(cop.position()) +
                  " bachi " + num(bachi, 6) + " km; 3d " + pos(c3.position()) + "; median " + pos(med.position()));
    }
  }
  {
    struct Country {
      const char* label;
      const char* file;
      double c50, tol;
    };
    for (const Country& c : {Country{"Mongolia", "mongolia_2020.asc", 0.96, 0.02},
                             Country{"Germany", "germany_2020.asc", 0.35, 0.03},
                             Country{"Sierra Leone", "sierra_leone_2020.asc", 0.27, 0.03}}) {
      const std::string name = std::string("dataset: C50 ") + c.label;
      if (!present(c.file)) {
        report("SKIP", name, std::string("VPCIRCLE_DATA_DIR/") + c.file + " not found");
        continue;
      }
      const auto g = load_esri_ascii(file(c.file));
      const auto prof = compute_profile(g, default_fractions(), cfg);
      const double v = centralisation(prof, 0.5).value;
      verdict(std::abs(v - c.c50) <= c.tol, name,
              "C50 = " + num(v, 3) + " (expected " + num(c.c50) + " +- " + num(c.tol) + ")");
    }
  }
  {
    const std::string name = "dataset: Great Britain epochs";
    const int years[] = {2000, 2005, 2010, 2015, 2020};
    const double radii[] = {138, 136, 135, 134, 132};
    bool all = true;
    for (int y : years) all = all && present("gb_" + std::to_string(y) + ".asc");
    if (!all) {
      report("SKIP", name, "VPCIRCLE_DATA_DIR/gb_<year>.asc for 2000..2020 not found");
    } else {
      bool ok = true;
      std::string detail;
      for (std::size_t i = 0; i < 5; ++i) {
        const auto g = load_esri_ascii(file("gb_" + std::to_string(years[i]) + ".asc"));
        const auto vp = vp_fast(g, 0.5, cfg);
        ok = ok && within_cells(vp.center_pos, {51.8124, -1.1458}, g.spec().cell_deg()) &&
             std::abs(vp.radius_km - radii[i]) <= 3.0;
        detail += std::to_string(years[i]) + " " + pos(vp.center_pos) + " " + num(vp.radius_km, 5) + " km; ";
      }
      verdict(ok, name, detail);
    }
  }
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  auto guarded = [](const char* name, void (*fn)()) {
    try {
      fn();
    } catch (const std::exception& e) {
      verdict(false, name, std::string("threw: ") + e.what());
    }
  };
  guarded("oracle equivalence", oracle_equivalence);
  guarded("uniform-disc law", uniform_disc);
  guarded("analytic/quadrature agreement", quadrature_agreement);
  guarded("end-to-end disc oracle", disc_end_to_end);
  guarded("monotonicity and determinism", monotone_and_deterministic);
  guarded("performance", performance);
  guarded("Weiszfeld convergence", weiszfeld);
  guarded("datasets", dataset_checks);
  std::printf("%d criteria failed; total %.1f s\n", failures, since(t0));
  return failures == 0 ? 0 : 1;
}
