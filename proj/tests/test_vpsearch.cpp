#include <doctest.h>

#include <numbers>
#include <random>

#include "support.hpp"
#include "vpcircle/error.hpp"
#include "vpcircle/geo.hpp"
#include "vpcircle/vpsearch.hpp"

using namespace vpcircle;

namespace {

SearchConfig exact_config(unsigned threads = 1) {
  SearchConfig cfg;
  cfg.coarsen_factor = 1;
  cfg.threads = threads;
  return cfg;
}

bool near_boundary(const PopulationGrid& g, Cell c, double radius) {
  const auto& s = g.spec();
  for (std::size_t r = 0; r < s.n_rows(); ++r)
    for (std::size_t k = 0; k < s.n_cols(); ++k)
      if (std::abs(testsupport::arc_km(s.center(c), s.center({r, k})) - radius) < 1e-6) return true;
  return false;
}

}  // namespace

TEST_CASE("population within a radius") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 80; ++trial) {
    const auto g = testsupport::random_grid(rng, trial % 2 == 0, {.max_rows = 20, .max_cols = 40});
    const auto& s = g.spec();
    const Cell c{static_cast<std::size_t>(u(rng) * s.n_rows()), static_cast<std::size_t>(u(rng) * s.n_cols())};
    CHECK(population_within(g, c, 0.0) == g.at(c));
    CHECK(population_within(g, c, SphereModel::half_circumference_km) == g.total());
    const double radius = 6000.0 * u(rng);
    if (near_boundary(g, c, radius)) continue;
    CHECK(population_within(g, c, radius) == doctest::Approx(testsupport::scan_population(g, c, radius)));
  }
}

TEST_CASE("bisection radius against the sorted-distance oracle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 80; ++trial) {
    const auto g = testsupport::random_grid(rng, trial % 2 == 1, {.max_rows = 20, .max_cols = 40});
    const auto& s = g.spec();
    const Cell c{static_cast<std::size_t>(u(rng) * s.n_rows()), static_cast<std::size_t>(u(rng) * s.n_cols())};
    const double target = g.total() * (0.05 + 0.95 * u(rng));
    const double eps = 1.0;
    const double r = min_radius_at(g, c, target, eps);
    const double oracle = testsupport::sorted_distance_radius(g, c, target);
    CHECK(r >= oracle - 1e-6);
    CHECK(r < oracle + eps + 1e-6);
  }
}

TEST_CASE("bisection edge cases") {
  const GridSpec s(5, 5, 10.0, 10.0, 1.0);
  std::vector<double> v(25, 0.0);
  v[12] = 100.0;
  const PopulationGrid single(s, v);
  CHECK(min_radius_at(single, {2, 2}, 50.0, 1.0) < 1.0);
  CHECK_THROWS_AS(min_radius_at(single, {2, 2}, 101.0, 1.0), Error);
  try {
    min_radius_at(single, {2, 2}, 101.0, 1.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::infeasible);
  }

  // Uniform wrap grid, whole population: must reach the farthest cell.
  const GridSpec w(6, 12, 75.0, -165.0, 30.0);
  const PopulationGrid uni(w, std::vector<double>(72, 1.0));
  double far = 0.0;
  for (std::size_t r = 0; r < 6; ++r)
    for (std::size_t c = 0; c < 12; ++c) far = std::max(far, haversine(w.center({1, 4}), w.center({r, c})));
  const double r = min_radius_at(uni, {1, 4}, 72.0, 1.0);
  CHECK(r >= far - 1e-6);
  CHECK(r < far + 1.0);
}

TEST_CASE("brute force on trivial configurations") {
  const GridSpec s(7, 9, 30.0, 0.0, 0.5);
  SUBCASE("all population in one cell") {
    std::vector<double> v(63, 0.0);
    v[3 * 9 + 4] = 42.0;
    for (double f : {0.01, 0.5, 1.0}) {
      const auto c = vp_bruteforce(PopulationGrid(s, v), f);
      CHECK(c.radius_km < 1.0);
      CHECK(c.center == Cell{3, 4});
      CHECK(c.multiplicity() == 1);
    }
  }
  SUBCASE("two equal masses") {
    std::vector<double> v(63, 0.0);
    v[1 * 9 + 2] = 10.0;
    v[5 * 9 + 7] = 10.0;
    const auto c = vp_bruteforce(PopulationGrid(s, v), 0.5);
    CHECK(c.radius_km < 1.0);
    CHECK(c.multiplicity() == 2);
    CHECK(c.center == Cell{1, 2});
    CHECK(c.co_centers == std::vector<Cell>{{1, 2}, {5, 7}});
  }
  SUBCASE("input errors") {
    CHECK_THROWS_AS(vp_bruteforce(PopulationGrid::zeros(s), 0.5), Error);
    const PopulationGrid g(s, std::vector<double>(63, 1.0));
    CHECK_THROWS_AS(vp_bruteforce(g, 0.0), Error);
    CHECK_THROWS_AS(vp_bruteforce(g, 1.5), Error);
    SearchConfig bad;
    bad.eps_km = 0.0;
    CHECK_THROWS_AS(vp_bruteforce(g, 0.5, bad), Error);
  }
}

TEST_CASE("fast search reproduces the brute force exactly") {
  std::mt19937_64 rng(12);
  const std::vector<double> fs{0.1, 0.5, 0.9, 1.0};
  for (int trial = 0; trial < 60; ++trial) {
    const auto g = testsupport::random_grid(rng, trial % 2 == 0,
                                            {.max_rows = 20, .max_cols = 40, .integer_counts = trial % 3 != 0});
    const auto fast = vp_fast(g, fs, exact_config());
    for (std::size_t i = 0; i < fs.size(); ++i) {
      const auto brute = vp_bruteforce(g, fs[i], exact_config());
      CHECK(fast[i].radius_km == brute.radius_km);
      CHECK(fast[i].co_centers == brute.co_centers);
      CHECK(fast[i].contained == brute.contained);
    }
  }
}

TEST_CASE("masked candidates") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = testsupport::random_grid(rng, trial % 2 == 0, {.max_rows = 15, .max_cols = 30});
    std::vector<bool> in(g.spec().n_cells());
    for (std::size_t i = 0; i < in.size(); ++i) in[i] = u(rng) < 0.3;
    in[in.size() / 2] = true;
    SearchConfig cfg = exact_config();
    cfg.candidates = CandidatePolicy::masked_cells;
    cfg.candidate_mask = RegionMask(g.spec(), in);
    const auto fast = vp_fast(g, 0.5, cfg);
    const auto brute = vp_bruteforce(g, 0.5, cfg);
    CHECK(fast.radius_km == brute.radius_km);
    CHECK(fast.co_centers == brute.co_centers);
    for (const Cell c : fast.co_centers) CHECK(in[g.spec().index(c)]);
  }
  SearchConfig missing = exact_config();
  missing.candidates = CandidatePolicy::masked_cells;
  const PopulationGrid g(GridSpec(3, 3, 0, 0, 1), std::vector<double>(9, 1.0));
  CHECK_THROWS_AS(vp_fast(g, 0.5, missing), Error);
}

TEST_CASE("one sweep for several fractions equals separate runs") {
  std::mt19937_64 rng(14);
  const std::vector<double> fs{0.25, 0.5, 0.75, 1.0};
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = testsupport::random_grid(rng, trial % 2 == 0);
    const auto all = vp_fast(g, fs, exact_config());
    for (std::size_t i = 0; i < fs.size(); ++i) {
      const auto one = vp_fast(g, fs[i], exact_config());
      CHECK(all[i].radius_km == one.radius_km);
      CHECK(all[i].co_centers == one.co_centers);
    }
  }
}

TEST_CASE("results do not depend on the thread count") {
  std::mt19937_64 rng(15);
  const std::vector<double> fs{0.2, 0.6, 1.0};
  for (int trial = 0; trial < 15; ++trial) {
    const auto g = testsupport::random_grid(rng, trial % 2 == 0);
    const auto base = vp_fast(g, fs, exact_config(1));
    for (unsigned t : {2u, 3u, 8u}) {
      const auto other = vp_fast(g, fs, exact_config(t));
      for (std::size_t i = 0; i < fs.size(); ++i) {
        CHECK(other[i].radius_km == base[i].radius_km);
        CHECK(other[i].co_centers == base[i].co_centers);
      }
    }
  }
}

TEST_CASE("reported circles are feasible and tight") {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = testsupport::random_grid(rng, trial % 2 == 0, {.integer_counts = false});
    SearchStats st;
    const std::vector<double> fs{0.3, 0.7};
    const auto res = vp_fast(g, fs, exact_config(), &st);
    for (const auto& c : res) {
      CHECK(c.contained >= c.target);
      CHECK(c.target >= c.f * g.total() * (1 - 1e-15));
      CHECK(c.target <= c.f * g.total() * (1 + 1e-15) + 1e-300);
      CHECK(population_within(g, c.center, c.radius_km) >= c.target * (1 - 1e-12));
      if (c.radius_km > 2.0) {
        CHECK(population_within(g, c.center, c.radius_km - 2.0) < c.target);
      }
    }
    REQUIRE(st.bisections > 0);
    CHECK(st.bisection_steps <= 25 * st.bisections);
  }
}

TEST_CASE("longitude rotation of a wrap grid leaves radii unchanged") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = testsupport::random_grid(rng, true);
    const auto& s = g.spec();
    const std::size_t shift = 1 + trial % (s.n_cols() - 1 > 0 ? s.n_cols() - 1 : 1);
    std::vector<double> rolled(s.n_cells());
    for (std::size_t r = 0; r < s.n_rows(); ++r)
      for (std::size_t c = 0; c < s.n_cols(); ++c) rolled[r * s.n_cols() + (c + shift) % s.n_cols()] = g.at(r, c);
    const PopulationGrid h(s, rolled);
    for (double f : {0.3, 0.8}) {
      CHECK(vp_fast(h, f, exact_config()).radius_km == vp_fast(g, f, exact_config()).radius_km);
    }
  }
}

TEST_CASE("coarse-to-fine finds the optimum of a smooth population") {
  // Two Gaussian-like towns; the heavier one holds the half-population circle.
  const GridSpec s(64, 128, 39.875, -15.875, 0.25);
  std::vector<double> v(s.n_cells());
  for (std::size_t r = 0; r < s.n_rows(); ++r) {
    for (std::size_t c = 0; c < s.n_cols(); ++c) {
      const LatLon p = s.center({r, c});
      const double d1 = haversine(p, {35.0, -5.0});
      const double d2 = haversine(p, {30.0, 10.0});
      v[r * s.n_cols() + c] = 1000.0 * std::exp(-d1 / 150.0) + 400.0 * std::exp(-d2 / 100.0) + 1.0;
    }
  }
  const PopulationGrid g(s, v);
  SearchConfig coarse;
  coarse.coarsen_factor = 8;
  SearchStats st;
  const auto fast = vp_fast(g, 0.3, coarse, &st);
  const auto exact = vp_fast(g, 0.3, exact_config());
  CHECK(st.coarsen_factor_used == 8);
  CHECK(fast.radius_km == exact.radius_km);
  CHECK(fast.center == exact.center);
  CHECK(st.candidates < s.n_cells());
  // Each coarse optimum contributes at most (2 window / cell)^2 fine centres.
  const double per = std::pow(2.0 * coarse.window_deg / s.cell_deg(), 2);
  CHECK(st.coarse_optima >= 1);
  CHECK(static_cast<double>(st.candidates) <= per * static_cast<double>(st.coarse_optima));
}

TEST_CASE("coarsening factor falls back to a common divisor") {
  const GridSpec s(9, 15, 10.0, 10.0, 0.5);
  const PopulationGrid g(s, std::vector<double>(s.n_cells(), 1.0));
  SearchConfig cfg;
  cfg.coarsen_factor = 8;
  SearchStats st;
  vp_fast(g, 0.5, cfg, &st);
  CHECK(st.coarsen_factor_used == 3);
}
