#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "vpcircle/grid.hpp"

namespace vpcircle {

/**
 * Smallest circle centred on a cell that holds at least a fraction f of the
 * grid population.
 *
 * `radius_km` is the upper end of the final bisection bracket, so it lies
 * within eps_km above the true minimum radius. `contained` and `target` are
 * expressed in people on the search's internal integer scale (see
 * SearchConfig), which matches the grid counts to about 2^-61 of the total.
 */
struct VpCircle {
  double f = 0.0;
  Cell center;
  LatLon center_pos;
  double radius_km = 0.0;
  double contained = 0.0;
  double target = 0.0;
  // All cells attaining the same minimal radius, in row-major order.
  std::vector<Cell> co_centers;
  std::size_t multiplicity() const { return co_centers.size(); }
};

enum class CandidatePolicy { all_cells, masked_cells };

struct SearchConfig {
  double eps_km = 1.0;
  // Coarse-to-fine pre-pass block size; 1 disables it. Reduced to the largest
  // value that divides both grid dimensions.
  std::size_t coarsen_factor = 8;
  // Fine candidates lie strictly within this many degrees (latitude and
  // wrapped longitude) of a coarse optimum.
  double window_deg = 5.0;
  CandidatePolicy candidates = CandidatePolicy::all_cells;
  // Required for masked_cells.
  std::optional<RegionMask> candidate_mask;
  // 0 uses the hardware concurrency.
  unsigned threads = 1;

  // Throws Error(invalid_input) on bad values.
  void validate(const GridSpec& spec) const;
};

struct SearchStats {
  std::size_t candidates = 0;         // fine-grid centres visited
  std::size_t coarse_candidates = 0;  // centres visited on the coarse pass
  std::size_t bisections = 0;
  std::size_t bisection_steps = 0;
  std::size_t population_queries = 0;  // full disc sums
  std::size_t incremental_updates = 0;
  std::size_t template_builds = 0;
  std::size_t coarsen_factor_used = 1;
  std::size_t coarse_optima = 0;  // coarse co-centres seeding fine windows

  SearchStats& operator+=(const SearchStats& o);
};

// Population of cells whose centres lie within radius_km of `center`.
double population_within(const PopulationGrid& grid, Cell center, double radius_km);

/**
 * Bisection for the smallest radius around `center` holding `target` people.
 *
 * Starts from [0, half circumference] and halves while the bracket is at
 * least eps_km wide, returning the upper end. Throws Error(infeasible) when
 * the target exceeds the grid total.
 */
double min_radius_at(const PopulationGrid& grid, Cell center, double target, double eps_km);

// Reference search: a fresh distance template and a full bisection for every
// candidate. Honours eps_km, candidates and candidate_mask only.
VpCircle vp_bruteforce(const PopulationGrid& grid, double f, const SearchConfig& cfg = {},
                       SearchStats* stats = nullptr);

/**
 * Optimised search for several fractions at once.
 *
 * Sweeps candidates row by row, keeps the disc sum up to date as the centre
 * moves along a row and only bisects where the current best radius is
 * beaten or tied. Gives exactly the brute-force result when
 * coarsen_factor is 1, for any thread count.
 */
std::vector<VpCircle> vp_fast(const PopulationGrid& grid, std::span<const double> fs,
                              const SearchConfig& cfg = {}, SearchStats* stats = nullptr);

VpCircle vp_fast(const PopulationGrid& grid, double f, const SearchConfig& cfg = {},
                 SearchStats* stats = nullptr);

}  // namespace vpcircle
