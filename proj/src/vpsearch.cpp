#include "vpcircle/vpsearch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <thread>

#include "mass_grid.hpp"
#include "vpcircle/error.hpp"
#include "vpcircle/exact_sum.hpp"
#include "vpcircle/geo.hpp"

namespace vpcircle {

SearchStats& SearchStats::operator+=(const SearchStats& o) {
  candidates += o.candidates;
  coarse_candidates += o.coarse_candidates;
  bisections += o.bisections;
  bisection_steps += o.bisection_steps;
  population_queries += o.population_queries;
  incremental_updates += o.incremental_updates;
  template_builds += o.template_builds;
  return *this;
}

void SearchConfig::validate(const GridSpec& spec) const {
  if (!(eps_km > 0.0) || !std::isfinite(eps_km)) {
    throw Error(ErrorCode::invalid_input, "eps_km must be positive");
  }
  if (coarsen_factor < 1) throw Error(ErrorCode::invalid_input, "coarsen_factor must be >= 1");
  if (!(window_deg > 0.0)) throw Error(ErrorCode::invalid_input, "window_deg must be positive");
  if (candidates == CandidatePolicy::masked_cells) {
    if (!candidate_mask) throw Error(ErrorCode::invalid_input, "masked_cells needs a candidate mask");
    if (!candidate_mask->spec().same_as(spec)) {
      throw Error(ErrorCode::invalid_input, "candidate mask is on a different grid");
    }
    if (candidate_mask->empty()) throw Error(ErrorCode::invalid_input, "candidate mask is empty");
  }
}

namespace {

using detail::MassGrid;

constexpr double kMaxRadius = SphereModel::half_circumference_km;

struct Bisection {
  double radius;
  std::size_t steps;
};

template <class Holds>
Bisection bisect_radius(double eps_km, Holds&& holds) {
  double lo = 0.0;
  double hi = kMaxRadius;
  std::size_t steps = 0;
  while (hi - lo >= eps_km) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (holds(mid)) hi = mid;
    else lo = mid;
    ++steps;
  }
  return {hi, steps};
}

void check_fraction(double f) {
  if (!(f > 0.0 && f <= 1.0)) {
    throw Error(ErrorCode::invalid_input, "fraction must lie in (0, 1]");
  }
}

std::int64_t fraction_target(const MassGrid& mass, double f) {
  const long double t = std::ceil(static_cast<long double>(f) * static_cast<long double>(mass.total()));
  return std::clamp<std::int64_t>(static_cast<std::int64_t>(t), 1, mass.total());
}

// Candidate columns grouped by row, ascending.
struct Candidates {
  std::vector<std::vector<std::size_t>> by_row;
  std::size_t count = 0;

  explicit Candidates(std::size_t n_rows) : by_row(n_rows) {}
  void add(std::size_t row, std::size_t col) {
    by_row[row].push_back(col);
    ++count;
  }
};

Candidates make_candidates(const GridSpec& spec, const SearchConfig& cfg) {
  Candidates out(spec.n_rows());
  const bool masked = cfg.candidates == CandidatePolicy::masked_cells;
  for (std::size_t r = 0; r < spec.n_rows(); ++r) {
    for (std::size_t c = 0; c < spec.n_cols(); ++c) {
      if (!masked || cfg.candidate_mask->inside(r, c)) out.add(r, c);
    }
  }
  return out;
}

struct Best {
  double radius = kMaxRadius;
  std::vector<Cell> co_centers;
};

// Cells within the current best radius of a centre on one row, kept as
// per-row offset limits plus the running disc mass.
struct Band {
  double threshold = 0.0;
  std::size_t row_lo = 0;
  std::vector<long> near;
  std::vector<std::size_t> far;
  std::int64_t running = 0;
  bool valid = false;
};

class Sweep {
 public:
  Sweep(const MassGrid& mass, double eps_km, std::span<const std::int64_t> targets)
      : mass_(mass), spec_(mass.spec()), eps_km_(eps_km), targets_(targets) {}

  void run(const Candidates& cands, std::size_t row_begin, std::size_t row_end,
           std::vector<Best>& best, SearchStats& st) const {
    const std::size_t nf = targets_.size();
    std::vector<Band> bands(nf);
    for (std::size_t r0 = row_begin; r0 < row_end; ++r0) {
      const auto& cols = cands.by_row[r0];
      if (cols.empty()) continue;
      const DistanceTemplate tmpl(spec_.lat(r0), spec_);
      ++st.template_builds;
      for (std::size_t i = 0; i < nf; ++i) rebuild_band(tmpl, r0, best[i].radius, bands[i]);

      bool have_prev = false;
      std::size_t prev = 0;
      for (const std::size_t c : cols) {
        ++st.candidates;
        const bool step = have_prev && c == prev + 1;
        for (std::size_t i = 0; i < nf; ++i) {
          Band& band = bands[i];
          if (step && band.valid) shift(tmpl, band, prev, st);
          else recompute(tmpl, band, c, st);
          if (band.running < targets_[i]) continue;

          Best& b = best[i];
          const Cell center{r0, c};
          const std::int64_t target = targets_[i];
          const double bound = b.radius;
          const auto res = bisect_radius(eps_km_, [&](double radius) {
            if (radius >= bound) return true;
            ++st.population_queries;
            return mass_.within(tmpl, center, radius_to_haversine_term(radius)) >= target;
          });
          ++st.bisections;
          st.bisection_steps += res.steps;
          if (res.radius < b.radius) {
            b.radius = res.radius;
            b.co_centers.assign(1, center);
            rebuild_band(tmpl, r0, b.radius, band);
            recompute(tmpl, band, c, st);
          } else if (res.radius == b.radius) {
            b.co_centers.push_back(center);
          }
        }
        have_prev = true;
        prev = c;
      }
    }
  }

 private:
  void rebuild_band(const DistanceTemplate& tmpl, std::size_t r0, double radius, Band& band) const {
    band.threshold = radius_to_haversine_term(radius);
    std::size_t lo = r0;
    while (lo > 0 && tmpl.near_halfwidth(lo - 1, band.threshold) >= 0) --lo;
    std::size_t hi = r0;
    while (hi + 1 < spec_.n_rows() && tmpl.near_halfwidth(hi + 1, band.threshold) >= 0) ++hi;
    band.row_lo = lo;
    band.near.resize(hi - lo + 1);
    band.far.resize(hi - lo + 1);
    for (std::size_t r = lo; r <= hi; ++r) {
      band.near[r - lo] = tmpl.near_halfwidth(r, band.threshold);
      band.far[r - lo] = tmpl.far_start(r, band.threshold);
    }
    band.valid = false;
  }

  void recompute(const DistanceTemplate& tmpl, Band& band, std::size_t col, SearchStats& st) const {
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < band.near.size(); ++i) {
      sum += mass_.row_within(band.row_lo + i, col, band.near[i], band.far[i], tmpl.max_offset());
    }
    band.running = sum;
    band.valid = true;
    ++st.population_queries;
  }

  // Moves the disc from column `col` to `col + 1`.
  void shift(const DistanceTemplate& tmpl, Band& band, std::size_t col, SearchStats& st) const {
    const std::size_t n = spec_.n_cols();
    const std::size_t max_k = tmpl.max_offset();
    const bool wrap = spec_.global_wrap();
    std::int64_t delta = 0;
    for (std::size_t i = 0; i < band.near.size(); ++i) {
      const std::size_t r = band.row_lo + i;
      const long near = band.near[i];
      if (near >= 0) {
        const auto h = static_cast<std::size_t>(near);
        if (wrap) {
          if (2 * h + 1 < n) {
            delta -= mass_.at(r, (col + n - h) % n);
            delta += mass_.at(r, (col + 1 + h) % n);
            st.incremental_updates += 2;
          }
        } else {
          if (col >= h) {
            delta -= mass_.at(r, col - h);
            ++st.incremental_updates;
          }
          if (col + 1 + h < n) {
            delta += mass_.at(r, col + 1 + h);
            ++st.incremental_updates;
          }
        }
      }
      const std::size_t g = band.far[i];
      if (g <= max_k) {
        if (col + g < n) {
          delta -= mass_.at(r, col + g);
          ++st.incremental_updates;
        }
        if (col + 1 >= g) {
          delta += mass_.at(r, col + 1 - g);
          ++st.incremental_updates;
        }
      }
    }
    band.running += delta;
  }

  const MassGrid& mass_;
  const GridSpec& spec_;
  double eps_km_;
  std::span<const std::int64_t> targets_;
};

unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs the sweep over contiguous row ranges with balanced candidate counts
// and merges the per-range optima in row-major order.
std::vector<Best> parallel_sweep(const MassGrid& mass, const Candidates& cands, double eps_km,
                                 std::span<const std::int64_t> targets, unsigned threads,
                                 SearchStats& st) {
  const std::size_t n_rows = mass.spec().n_rows();
  const std::size_t busy_rows = static_cast<std::size_t>(
      std::count_if(cands.by_row.begin(), cands.by_row.end(), [](const auto& v) { return !v.empty(); }));
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, busy_rows));

  std::vector<std::size_t> bounds{0};
  std::size_t acc = 0;
  for (std::size_t r = 0; r < n_rows && bounds.size() < workers; ++r) {
    acc += cands.by_row[r].size();
    if (acc * workers >= bounds.size() * cands.count) bounds.push_back(r + 1);
  }
  while (bounds.size() <= workers) bounds.push_back(n_rows);
  bounds.back() = n_rows;

  const Sweep sweep(mass, eps_km, targets);
  std::vector<std::vector<Best>> partial(workers, std::vector<Best>(targets.size()));
  std::vector<SearchStats> part_stats(workers);
  if (workers == 1) {
    sweep.run(cands, 0, n_rows, partial[0], part_stats[0]);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] { sweep.run(cands, bounds[w], bounds[w + 1], partial[w], part_stats[w]); });
    }
  }

  std::vector<Best> merged(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    for (const auto& p : partial) merged[i].radius = std::min(merged[i].radius, p[i].radius);
    for (const auto& p : partial) {
      if (p[i].radius == merged[i].radius) {
        merged[i].co_centers.insert(merged[i].co_centers.end(), p[i].co_centers.begin(),
                                    p[i].co_centers.end());
      }
    }
  }
  for (const auto& s : part_stats) st += s;
  return merged;
}

VpCircle make_circle(const MassGrid& mass, double f, std::int64_t target, Best best) {
  VpCircle out;
  out.f = f;
  out.center = best.co_centers.front();
  out.center_pos = mass.spec().center(out.center);
  out.radius_km = best.radius;
  const DistanceTemplate tmpl(mass.spec().lat(out.center.row), mass.spec());
  out.contained = mass.to_people(mass.within(tmpl, out.center, radius_to_haversine_term(best.radius)));
  out.target = mass.to_people(target);
  out.co_centers = std::move(best.co_centers);
  return out;
}

std::size_t effective_factor(const GridSpec& spec, std::size_t factor) {
  for (std::size_t d = std::min({factor, spec.n_rows(), spec.n_cols()}); d > 1; --d) {
    if (spec.n_rows() % d == 0 && spec.n_cols() % d == 0) return d;
  }
  return 1;
}

}  // namespace

double population_within(const PopulationGrid& grid, Cell center, double radius_km) {
  const GridSpec& spec = grid.spec();
  if (center.row >= spec.n_rows() || center.col >= spec.n_cols()) {
    throw Error(ErrorCode::invalid_input, "centre lies outside the grid");
  }
  const DistanceTemplate tmpl(spec.lat(center.row), spec);
  const double threshold = radius_to_haversine_term(radius_km);
  const std::size_t n = spec.n_cols();
  ExactSum sum;
  for (std::size_t r = 0; r < spec.n_rows(); ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t k = c > center.col ? c - center.col : center.col - c;
      if (spec.global_wrap()) k = std::min(k, n - k);
      if (tmpl.haversine_term(r, k) <= threshold) sum.add(grid.at(r, c));
    }
  }
  return sum.value();
}

double min_radius_at(const PopulationGrid& grid, Cell center, double target, double eps_km) {
  const GridSpec& spec = grid.spec();
  if (center.row >= spec.n_rows() || center.col >= spec.n_cols()) {
    throw Error(ErrorCode::invalid_input, "centre lies outside the grid");
  }
  if (!(eps_km > 0.0)) throw Error(ErrorCode::invalid_input, "eps_km must be positive");
  if (!(target >= 0.0)) throw Error(ErrorCode::invalid_input, "target must be nonnegative");
  const MassGrid mass(grid);
  const std::int64_t t = mass.quantize_target(target);
  const DistanceTemplate tmpl(spec.lat(center.row), spec);
  return bisect_radius(eps_km, [&](double radius) {
           return mass.within(tmpl, center, radius_to_haversine_term(radius)) >= t;
         }).radius;
}

VpCircle vp_bruteforce(const PopulationGrid& grid, double f, const SearchConfig& cfg,
                       SearchStats* stats) {
  check_fraction(f);
  cfg.validate(grid.spec());
  const MassGrid mass(grid);
  const std::int64_t target = fraction_target(mass, f);
  const Candidates cands = make_candidates(grid.spec(), cfg);
  const GridSpec& spec = grid.spec();

  SearchStats st;
  Best best;
  for (std::size_t r = 0; r < spec.n_rows(); ++r) {
    for (const std::size_t c : cands.by_row[r]) {
      const DistanceTemplate tmpl(spec.lat(r), spec);
      ++st.template_builds;
      ++st.candidates;
      const Cell center{r, c};
      const auto res = bisect_radius(cfg.eps_km, [&](double radius) {
        ++st.population_queries;
        return mass.within(tmpl, center, radius_to_haversine_term(radius)) >= target;
      });
      ++st.bisections;
      st.bisection_steps += res.steps;
      if (res.radius < best.radius) {
        best.radius = res.radius;
        best.co_centers.assign(1, center);
      } else if (res.radius == best.radius) {
        best.co_centers.push_back(center);
      }
    }
  }
  if (stats) *stats = st;
  return make_circle(mass, f, target, std::move(best));
}

std::vector<VpCircle> vp_fast(const PopulationGrid& grid, std::span<const double> fs,
                              const SearchConfig& cfg, SearchStats* stats) {
  if (fs.empty()) throw Error(ErrorCode::invalid_input, "no fractions given");
  for (const double f : fs) check_fraction(f);
  const GridSpec& spec = grid.spec();
  cfg.validate(spec);
  const unsigned threads = resolve_threads(cfg.threads);
  const MassGrid mass(grid);

  std::vector<std::int64_t> targets;
  for (const double f : fs) targets.push_back(fraction_target(mass, f));

  SearchStats st;
  Candidates cands = make_candidates(spec, cfg);
  const std::size_t factor = effective_factor(spec, cfg.coarsen_factor);
  st.coarsen_factor_used = factor;
  if (factor > 1) {
    const PopulationGrid coarse = coarsen(grid, factor);
    const GridSpec& cspec = coarse.spec();
    const MassGrid cmass(coarse);
    std::vector<std::int64_t> ctargets;
    for (const double f : fs) ctargets.push_back(fraction_target(cmass, f));

    std::vector<char> coarse_hit(cspec.n_cells(), 0);
    for (std::size_t r = 0; r < spec.n_rows(); ++r) {
      for (const std::size_t c : cands.by_row[r]) {
        coarse_hit[(r / factor) * cspec.n_cols() + c / factor] = 1;
      }
    }
    Candidates ccands(cspec.n_rows());
    for (std::size_t cr = 0; cr < cspec.n_rows(); ++cr) {
      for (std::size_t cc = 0; cc < cspec.n_cols(); ++cc) {
        if (coarse_hit[cr * cspec.n_cols() + cc]) ccands.add(cr, cc);
      }
    }
    SearchStats cst;
    const auto coarse_best = parallel_sweep(cmass, ccands, cfg.eps_km, ctargets, threads, cst);
    st.coarse_candidates = cst.candidates;
    st.bisections += cst.bisections;
    st.bisection_steps += cst.bisection_steps;
    st.population_queries += cst.population_queries;
    st.incremental_updates += cst.incremental_updates;
    st.template_builds += cst.template_builds;

    std::vector<char> keep(spec.n_cells(), 0);
    for (const Best& b : coarse_best) {
      st.coarse_optima += b.co_centers.size();
      for (const Cell cc : b.co_centers) {
        const LatLon p = cspec.center(cc);
        for (std::size_t r = cc.row * factor; r < (cc.row + 1) * factor; ++r) {
          for (std::size_t c = cc.col * factor; c < (cc.col + 1) * factor; ++c) {
            keep[r * spec.n_cols() + c] = 1;
          }
        }
        for (std::size_t r = 0; r < spec.n_rows(); ++r) {
          if (!(std::abs(spec.lat(r) - p.lat) < cfg.window_deg)) continue;
          for (std::size_t c = 0; c < spec.n_cols(); ++c) {
            if (std::abs(normalize_lon(spec.lon(c) - p.lon)) < cfg.window_deg) {
              keep[r * spec.n_cols() + c] = 1;
            }
          }
        }
      }
    }
    Candidates windowed(spec.n_rows());
    for (std::size_t r = 0; r < spec.n_rows(); ++r) {
      for (const std::size_t c : cands.by_row[r]) {
        if (keep[r * spec.n_cols() + c]) windowed.add(r, c);
      }
    }
    cands = std::move(windowed);
  }

  auto best = parallel_sweep(mass, cands, cfg.eps_km, targets, threads, st);
  if (stats) *stats = st;
  std::vector<VpCircle> out;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (best[i].co_centers.empty()) {
      throw Error(ErrorCode::degenerate, "no candidate centre reached the target");
    }
    out.push_back(make_circle(mass, fs[i], targets[i], std::move(best[i])));
  }
  return out;
}

VpCircle vp_fast(const PopulationGrid& grid, double f, const SearchConfig& cfg,
                 SearchStats* stats) {
  return vp_fast(grid, std::span<const double>(&f, 1), cfg, stats).front();
}

}  // namespace vpcircle
