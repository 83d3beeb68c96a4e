#include "vpcircle/profile.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "vpcircle/error.hpp"

namespace vpcircle {

namespace {

constexpr double kSameF = 1e-12;

void check_fractions(std::span<const double> fs) {
  if (fs.empty()) throw Error(ErrorCode::invalid_input, "no fractions given");
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (!(fs[i] > 0.0 && fs[i] <= 1.0)) {
      throw Error(ErrorCode::invalid_input, "fractions must lie in (0, 1]");
    }
    if (i > 0 && !(fs[i] > fs[i - 1])) {
      throw Error(ErrorCode::invalid_input, "fractions must be strictly increasing");
    }
  }
}

std::vector<double> with_one(std::span<const double> fs) {
  std::vector<double> out(fs.begin(), fs.end());
  if (out.empty() || out.back() != 1.0) out.push_back(1.0);
  return out;
}

void fill_tau(VpProfile& prof) {
  prof.r1_km = prof.samples.back().radius_km;
  if (prof.r1_km < prof.eps_km) {
    throw Error(ErrorCode::degenerate, "profile is degenerate: R(1) is below eps_km");
  }
  for (auto& s : prof.samples) s.tau = s.radius_km / prof.r1_km;
}

struct Point {
  double x;
  double y;
};

std::vector<Point> log_points(const VpProfile& profile, double f_lo, double f_hi) {
  std::vector<Point> pts;
  for (const auto& s : profile.samples) {
    if (s.f >= f_lo && s.f <= f_hi && s.radius_km > 0.0) pts.push_back({std::log(s.f), std::log(s.tau)});
  }
  return pts;
}

PowerLawFit ols(std::span<const Point> pts) {
  const auto n = static_cast<double>(pts.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : pts) {
    mx += p.x;
    my += p.y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : pts) {
    sxx += (p.x - mx) * (p.x - mx);
    sxy += (p.x - mx) * (p.y - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::degenerate, "fit needs distinct fractions");
  PowerLawFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.a = fit.slope != 0.0 ? 1.0 / fit.slope : std::numeric_limits<double>::infinity();
  for (const auto& p : pts) {
    const double r = p.y - (fit.intercept + fit.slope * p.x);
    fit.sse += r * r;
  }
  fit.n = pts.size();
  fit.f_lo = std::exp(pts.front().x);
  fit.f_hi = std::exp(pts.back().x);
  return fit;
}

}  // namespace

std::vector<double> default_fractions() {
  std::vector<double> fs;
  for (int k = 1; k <= 40; ++k) fs.push_back(k / 40.0);
  return fs;
}

VpProfile compute_profile(const PopulationGrid& grid, std::span<const double> fs,
                          const SearchConfig& cfg) {
  check_fractions(fs);
  const std::vector<double> all = with_one(fs);
  const auto circles = vp_fast(grid, all, cfg);
  VpProfile prof;
  prof.eps_km = cfg.eps_km;
  for (const auto& c : circles) {
    prof.samples.push_back({c.f, c.radius_km, c.center, c.center_pos, 0.0});
  }
  fill_tau(prof);
  return prof;
}

VpProfile make_profile(std::span<const double> fs, std::span<const double> radii_km,
                       double eps_km) {
  check_fractions(fs);
  if (fs.size() != radii_km.size()) {
    throw Error(ErrorCode::invalid_input, "fractions and radii differ in length");
  }
  if (fs.back() != 1.0) throw Error(ErrorCode::invalid_input, "profile must include f = 1");
  VpProfile prof;
  prof.eps_km = eps_km;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (!(radii_km[i] >= 0.0)) throw Error(ErrorCode::invalid_input, "radii must be nonnegative");
    prof.samples.push_back({fs[i], radii_km[i], {}, {}, 0.0});
  }
  fill_tau(prof);
  return prof;
}

Centralisation centralisation(const VpProfile& profile, double f) {
  if (profile.samples.empty() || profile.r1_km < profile.eps_km) {
    throw Error(ErrorCode::degenerate, "profile is degenerate");
  }
  if (!(f > 0.0 && f <= 1.0)) throw Error(ErrorCode::invalid_input, "fraction must lie in (0, 1]");
  const auto& s = profile.samples;
  for (const auto& p : s) {
    if (std::abs(p.f - f) <= kSameF) return {1.0 - p.tau / std::sqrt(f), false};
  }
  if (f < s.front().f) {
    throw Error(ErrorCode::invalid_input, "fraction lies below the first profile sample");
  }
  std::size_t i = 1;
  while (s[i].f < f) ++i;
  const auto& lo = s[i - 1];
  const auto& hi = s[i];
  double tau;
  if (lo.tau > 0.0) {
    const double w = std::log(f / lo.f) / std::log(hi.f / lo.f);
    tau = std::exp(std::log(lo.tau) + w * (std::log(hi.tau) - std::log(lo.tau)));
  } else {
    // log tau is unbounded below; fall back to linear interpolation.
    tau = lo.tau + (f - lo.f) / (hi.f - lo.f) * (hi.tau - lo.tau);
  }
  return {1.0 - tau / std::sqrt(f), true};
}

PowerLawFit fit_power_law(const VpProfile& profile, double f_lo, double f_hi) {
  const auto pts = log_points(profile, f_lo, f_hi);
  if (pts.size() < 3) {
    throw Error(ErrorCode::invalid_input, "power-law fit needs at least 3 samples with radius > 0");
  }
  return ols(pts);
}

SegmentedFit fit_segmented(const VpProfile& profile, std::size_t k) {
  if (k < 1 || k > 2) throw Error(ErrorCode::invalid_input, "segment breakpoints must be 1 or 2");
  const auto pts = log_points(profile, 0.0, 1.0);
  constexpr std::size_t kMinRun = 3;
  const std::size_t n = pts.size();
  if (n < (k + 1) * kMinRun) {
    throw Error(ErrorCode::invalid_input, "not enough samples for " + std::to_string(k + 1) + " segments");
  }
  const std::span<const Point> all(pts);

  SegmentedFit best;
  best.sse = std::numeric_limits<double>::infinity();
  auto consider = [&](const std::vector<std::size_t>& starts) {
    SegmentedFit cand;
    for (std::size_t j = 0; j < starts.size(); ++j) {
      const std::size_t b = starts[j];
      const std::size_t e = j + 1 < starts.size() ? starts[j + 1] : n;
      cand.segments.push_back(ols(all.subspan(b, e - b)));
      cand.sse += cand.segments.back().sse;
      if (j > 0) cand.breakpoints.push_back(std::exp(pts[b].x));
    }
    if (cand.sse < best.sse) best = std::move(cand);
  };
  for (std::size_t b1 = kMinRun; b1 + kMinRun * k <= n; ++b1) {
    if (k == 1) {
      consider({0, b1});
      continue;
    }
    for (std::size_t b2 = b1 + kMinRun; b2 + kMinRun <= n; ++b2) consider({0, b1, b2});
  }
  return best;
}

void write_profile_csv(const VpProfile& profile, std::ostream& out) {
  char buf[64];
  auto fmt = [&buf](double v) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
  };
  out << "f,radius_km,tau,center_lat,center_lon\n";
  for (const auto& s : profile.samples) {
    out << fmt(s.f) << ',' << fmt(s.radius_km) << ',' << fmt(s.tau) << ',' << fmt(s.center_pos.lat)
        << ',' << fmt(s.center_pos.lon) << '\n';
  }
}

}  // namespace vpcircle
