#pragma once

#include "vpcircle/grid.hpp"

namespace vpcircle {

/**
 * Circular island with density rho0 * R0^(2-a) / (r + R0)^(2-a) out to
 * radius RI and zero beyond. a = 2 is a uniform disc; smaller a concentrates
 * the population towards the centre.
 */
struct DiscModelParams {
  double rho0 = 1.0;   // people per km^2 at the centre
  double r0_km = 1.0;  // softening scale
  double a = 2.0;
  double ri_km = 100.0;

  // Throws Error(invalid_input) unless rho0, r0_km, ri_km are positive and
  // a is finite.
  void validate() const;
};

double density(double r_km, const DiscModelParams& p);

// Population within R of the centre, 2*pi * integral of r * density(r).
double cumulative_population(double r_km, const DiscModelParams& p);

// Total island population, cumulative_population(ri_km).
double island_population(const DiscModelParams& p);

// Radius holding a fraction f of the island, by bisection to 1e-9 km.
double analytic_vp_radius(double f, const DiscModelParams& p);

// Large-R approximation (R + R0)^a ~ a f P / (k pi rho0 R0^(2-a)), clamped
// at 0. as_published uses k = 1; consistent uses k = 2, which reproduces the
// exact uniform-disc radius for a = 2.
enum class AsymptoticForm { as_published, consistent };
double asymptotic_vp_radius(double f, const DiscModelParams& p,
                            AsymptoticForm form = AsymptoticForm::as_published);

// How synth_grid turns density into cell counts.
enum class CellRule {
  // density at the cell centre times the spherical cell area
  centre_point,
  // density integrated over the cell, treated as a planar rectangle in
  // azimuthal-equidistant coordinates around the island centre
  integrated,
};

/**
 * Materialises the island on a grid, centred at `center`.
 *
 * Intended for islands small enough that the planar model is a good
 * approximation on the sphere (a few hundred km, low latitudes). Throws
 * Error(invalid_input) when the island would be clipped by the grid edge.
 */
PopulationGrid synth_grid(const DiscModelParams& p, const GridSpec& spec, LatLon center,
                          CellRule rule = CellRule::centre_point);

}  // namespace vpcircle
