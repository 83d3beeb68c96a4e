#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "vpcircle/grid.hpp"
#include "vpcircle/vpsearch.hpp"

namespace vpcircle {

struct ProfileSample {
  double f = 0.0;
  double radius_km = 0.0;
  Cell center;
  LatLon center_pos;
  double tau = 0.0;
};

/**
 * VP radius as a function of the population fraction, normalised by the
 * radius at f = 1: tau(f) = R(f) / R(1).
 */
struct VpProfile {
  std::vector<ProfileSample> samples;  // f strictly increasing, last f = 1
  double r1_km = 0.0;
  double eps_km = 1.0;
};

// f = k/40 for k = 1..40.
std::vector<double> default_fractions();

// One multi-f sweep. fs must lie in (0, 1] and be strictly increasing; 1 is
// appended when missing. Throws Error(degenerate) when R(1) < eps_km.
VpProfile compute_profile(const PopulationGrid& grid, std::span<const double> fs,
                          const SearchConfig& cfg = {});

// Builds a profile from externally computed (f, R) pairs.
VpProfile make_profile(std::span<const double> fs, std::span<const double> radii_km,
                       double eps_km = 1.0);

struct Centralisation {
  double value = 0.0;  // 1 - tau(f) / sqrt(f)
  bool interpolated = false;
};

// Uses the sample at f, or interpolates log tau linearly in log f between
// the neighbouring samples.
Centralisation centralisation(const VpProfile& profile, double f);

struct PowerLawFit {
  double a = 0.0;          // tau ~ f^(1/a)
  double slope = 0.0;      // d log tau / d log f
  double intercept = 0.0;  // log tau at f = 1
  double sse = 0.0;        // log-space residual sum of squares
  double f_lo = 0.0;
  double f_hi = 0.0;
  std::size_t n = 0;
};

// Ordinary least squares on (log f, log tau) over samples with
// f_lo <= f <= f_hi and radius > 0. Needs at least 3 such samples.
PowerLawFit fit_power_law(const VpProfile& profile, double f_lo = 0.0, double f_hi = 1.0);

struct SegmentedFit {
  std::vector<double> breakpoints;  // f of the first sample of each later segment
  std::vector<PowerLawFit> segments;
  double sse = 0.0;
};

// Best split into k + 1 contiguous runs of at least 3 samples each (k = 1
// or 2), each run fitted independently; exhaustive over split positions.
SegmentedFit fit_segmented(const VpProfile& profile, std::size_t k);

// CSV with columns f,radius_km,tau,center_lat,center_lon.
void write_profile_csv(const VpProfile& profile, std::ostream& out);

}  // namespace vpcircle
