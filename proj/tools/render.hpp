#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vpcircle/centers.hpp"
#include "vpcircle/profile.hpp"
#include "vpcircle/vpsearch.hpp"

namespace vpcircle::cli {

// Shortest representation that reads back to the same double.
std::string fmt(double v);

void write_vp_csv(const std::vector<VpCircle>& circles, std::ostream& out);
nlohmann::json vp_json(const std::vector<VpCircle>& circles);
// One Point feature per circle; with segments > 0 also a geodesic Polygon
// approximating the circle with that many vertices.
nlohmann::json vp_geojson(const std::vector<VpCircle>& circles, int segments);

struct CentreRow {
  CentreResult centre;
  double bachi_km;
};
void write_centres_csv(const std::vector<CentreRow>& rows, std::ostream& out);

struct FitSummary {
  std::string kind;  // "global" or "segments"
  PowerLawFit global;
  SegmentedFit segmented;
};
nlohmann::json fit_json(const FitSummary& fit);

// 800x600 log-log plot of tau against f with the fitted lines.
void write_profile_svg(const VpProfile& profile, const FitSummary& fit, std::ostream& out);

}  // namespace vpcircle::cli
