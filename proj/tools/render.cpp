#include "render.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

#include "vpcircle/geo.hpp"

namespace vpcircle::cli {

using nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_vp_csv(const std::vector<VpCircle>& circles, std::ostream& out) {
  out << "f,center_lat,center_lon,radius_km,population,target,multiplicity\n";
  for (const auto& c : circles) {
    out << fmt(c.f) << ',' << fmt(c.center_pos.lat) << ',' << fmt(c.center_pos.lon) << ','
        << fmt(c.radius_km) << ',' << fmt(c.contained) << ',' << fmt(c.target) << ','
        << c.multiplicity() << '\n';
  }
}

namespace {

json circle_properties(const VpCircle& c) {
  return {{"f", c.f},
          {"center_lat", c.center_pos.lat},
          {"center_lon", c.center_pos.lon},
          {"radius_km", c.radius_km},
          {"population", c.contained},
          {"target", c.target},
          {"multiplicity", c.multiplicity()}};
}

}  // namespace

json vp_json(const std::vector<VpCircle>& circles) {
  json results = json::array();
  for (const auto& c : circles) {
    json j = circle_properties(c);
    j["center_row"] = c.center.row;
    j["center_col"] = c.center.col;
    json co = json::array();
    for (const Cell& cell : c.co_centers) co.push_back({cell.row, cell.col});
    j["co_centers"] = co;
    results.push_back(j);
  }
  return {{"results", results}};
}

json vp_geojson(const std::vector<VpCircle>& circles, int segments) {
  json features = json::array();
  for (const auto& c : circles) {
    features.push_back({{"type", "Feature"},
                        {"properties", circle_properties(c)},
                        {"geometry",
                         {{"type", "Point"}, {"coordinates", {c.center_pos.lon, c.center_pos.lat}}}}});
    if (segments <= 0) continue;
    json ring = json::array();
    for (int i = 0; i < segments; ++i) {
      const LatLon p = destination(c.center_pos, 360.0 * i / segments, c.radius_km);
      ring.push_back({p.lon, p.lat});
    }
    ring.push_back(ring.front());
    json props = circle_properties(c);
    props["shape"] = "circle";
    features.push_back({{"type", "Feature"},
                        {"properties", props},
                        {"geometry", {{"type", "Polygon"}, {"coordinates", json::array({ring})}}}});
  }
  return {{"type", "FeatureCollection"}, {"features", features}};
}

void write_centres_csv(const std::vector<CentreRow>& rows, std::ostream& out) {
  out << "method,lat,lon,bachi_km\n";
  for (const auto& r : rows) {
    out << centre_method_name(r.centre.method) << ',' << fmt(r.centre.lat) << ','
        << fmt(r.centre.lon) << ',' << fmt(r.bachi_km) << '\n';
  }
}

namespace {

json power_law_json(const PowerLawFit& f) {
  return {{"a", f.a},       {"slope", f.slope}, {"intercept", f.intercept},
          {"sse", f.sse},   {"f_lo", f.f_lo},   {"f_hi", f.f_hi},
          {"n", f.n}};
}

}  // namespace

json fit_json(const FitSummary& fit) {
  json j{{"kind", fit.kind}, {"global", power_law_json(fit.global)}};
  if (fit.kind == "segments") {
    json segs = json::array();
    for (const auto& s : fit.segmented.segments) segs.push_back(power_law_json(s));
    j["segments"] = segs;
    j["breakpoints"] = fit.segmented.breakpoints;
    j["sse"] = fit.segmented.sse;
  } else {
    j["sse"] = fit.global.sse;
  }
  return j;
}

void write_profile_svg(const VpProfile& profile, const FitSummary& fit, std::ostream& out) {
  constexpr double kWidth = 800, kHeight = 600;
  constexpr double kLeft = 80, kRight = 30, kTop = 30, kBottom = 70;
  double min_f = 1.0, min_tau = 1.0;
  for (const auto& s : profile.samples) {
    min_f = std::min(min_f, s.f);
    if (s.tau > 0.0) min_tau = std::min(min_tau, s.tau);
  }
  const double x_lo = std::floor(std::log10(min_f) - 1e-12);
  const double y_lo = std::floor(std::log10(min_tau) - 1e-12);
  const double x_span = std::max(1.0, -x_lo);
  const double y_span = std::max(1.0, -y_lo);
  auto px = [&](double f) { return kLeft + (std::log10(f) - x_lo) / x_span * (kWidth - kLeft - kRight); };
  auto py = [&](double t) {
    return kHeight - kBottom - (std::log10(t) - y_lo) / y_span * (kHeight - kTop - kBottom);
  };

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"800\" height=\"600\" "
         "viewBox=\"0 0 800 600\">\n"
      << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n"
      << "<g stroke=\"black\" fill=\"none\">\n"
      << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight
      << "\" height=\"" << kHeight - kTop - kBottom << "\"/>\n</g>\n";

  out << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"black\">\n";
  for (double d = x_lo; d <= 0.0; d += 1.0) {
    const double x = px(std::pow(10.0, d));
    out << "<line x1=\"" << fmt(x) << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << fmt(x) << "\" y2=\""
        << kHeight - kBottom + 5 << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << fmt(x) << "\" y=\"" << kHeight - kBottom + 20
        << "\" text-anchor=\"middle\">1e" << d << "</text>\n";
  }
  for (double d = y_lo; d <= 0.0; d += 1.0) {
    const double y = py(std::pow(10.0, d));
    out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << fmt(y) << "\" x2=\"" << kLeft << "\" y2=\"" << fmt(y)
        << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt(y + 4) << "\" text-anchor=\"end\">1e" << d
        << "</text>\n";
  }
  out << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 25
      << "\" text-anchor=\"middle\">population fraction f</text>\n"
      << "<text x=\"20\" y=\"" << (kTop + kHeight - kBottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << (kTop + kHeight - kBottom) / 2 << ")\">tau(f) = R(f)/R(1)</text>\n</g>\n";

  out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  bool first = true;
  for (const auto& s : profile.samples) {
    if (s.tau <= 0.0) continue;
    out << (first ? "" : " ") << fmt(px(s.f)) << ',' << fmt(py(s.tau));
    first = false;
  }
  out << "\"/>\n";

  auto line = [&](const PowerLawFit& f, const char* colour) {
    auto tau_at = [&](double x) { return std::exp(f.intercept + f.slope * std::log(x)); };
    out << "<line x1=\"" << fmt(px(f.f_lo)) << "\" y1=\"" << fmt(py(tau_at(f.f_lo))) << "\" x2=\""
        << fmt(px(f.f_hi)) << "\" y2=\"" << fmt(py(tau_at(f.f_hi))) << "\" stroke=\"" << colour
        << "\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>\n";
  };
  if (fit.kind == "segments") {
    for (const auto& s : fit.segmented.segments) line(s, "#d62728");
  } else {
    line(fit.global, "#d62728");
  }
  out << "</svg>\n";
}

}  // namespace vpcircle::cli
