#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "vpcircle/grid.hpp"

namespace vpcircle {

enum class CentreMethod { centre_of_population, centre_3d, geometric_median };

std::string_view centre_method_name(CentreMethod m);

struct CentreResult {
  double lat = 0.0;
  double lon = 0.0;
  CentreMethod method = CentreMethod::centre_of_population;
  // Geometric median only.
  std::size_t iterations = 0;
  double objective_km = 0.0;  // population-weighted mean distance
  bool converged = true;

  LatLon position() const { return {lat, lon}; }
};

// Weighted mean latitude, and weighted mean longitude with cos(lat) weights.
CentreResult centre_of_population(const PopulationGrid& grid);

// Normalised weighted mean of the cells' unit vectors.
CentreResult centre_3d(const PopulationGrid& grid);

/**
 * Point minimising the population-weighted sum of great-circle distances.
 *
 * Weiszfeld iteration on unit vectors, projected back to the sphere after
 * each step. On a populated cell the Vardi-Zhang step is used instead, and a
 * step that would increase the objective is halved along the great circle
 * until it does not. Stops when a step moves less than tol_km; after
 * max_iter steps the last iterate is returned with converged = false.
 * `trace`, when given, receives the objective before the first step and after
 * each step.
 */
CentreResult geometric_median(const PopulationGrid& grid, double tol_km = 0.1,
                              std::size_t max_iter = 1000, std::vector<double>* trace = nullptr);

// Population-weighted RMS great-circle distance to `center`.
double bachi_standard_distance(const PopulationGrid& grid, LatLon center);

}  // namespace vpcircle
