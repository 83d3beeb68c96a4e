#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "render.hpp"
#include "vpcircle/centers.hpp"
#include "vpcircle/discmodel.hpp"
#include "vpcircle/error.hpp"
#include "vpcircle/geo.hpp"
#include "vpcircle/grid_io.hpp"
#include "vpcircle/profile.hpp"
#include "vpcircle/vpsearch.hpp"

#ifndef VPCIRCLE_VERSION
#define VPCIRCLE_VERSION "0.0.0"
#endif

namespace vpcircle::cli {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::invalid_input, "cannot write " + path);
  return out;
}

// Sits beside an output file as <out>.manifest.json.
class Manifest {
 public:
  explicit Manifest(std::string command) {
    doc_["tool"] = "vpcircle";
    doc_["version"] = VPCIRCLE_VERSION;
    doc_["command"] = std::move(command);
    doc_["timings_s"] = json::object();
  }
  json& operator[](const char* key) { return doc_[key]; }
  void stage(const char* name, Clock::time_point t0) { doc_["timings_s"][name] = seconds_since(t0); }
  void write_beside(const std::string& out_path) const {
    auto out = open_output(out_path + ".manifest.json");
    out << doc_.dump(2) << '\n';
  }

 private:
  json doc_;
};

struct InputOptions {
  std::string input;
  std::string mask_path;
  std::vector<double> bbox;
  std::string candidates = "all";
  unsigned threads = 0;
};

void add_input_options(CLI::App* sub, InputOptions& o, bool with_candidates) {
  sub->add_option("--input", o.input, "ESRI ASCII population grid")->required();
  auto* mask = sub->add_option("--mask", o.mask_path, "GeoJSON polygons restricting the population");
  auto* bbox = sub->add_option("--bbox", o.bbox, "bounding box S,W,N,E restricting the population")
                   ->delimiter(',')
                   ->expected(4);
  mask->excludes(bbox);
  if (with_candidates) {
    sub->add_option("--candidates", o.candidates, "candidate centres: all or masked")
        ->check(CLI::IsMember({"all", "masked"}));
    sub->add_option("--threads", o.threads, "worker threads (0 = all cores)");
  }
}

struct LoadedInput {
  PopulationGrid grid;
  std::optional<RegionMask> mask;
};

LoadedInput load_input(const InputOptions& o, Manifest& manifest) {
  const auto t0 = Clock::now();
  LoadedInput in{load_esri_ascii(o.input), std::nullopt};
  manifest["input"] = o.input;
  json mask_source = nullptr;
  if (!o.mask_path.empty()) {
    const auto polys = load_geojson_polygons(o.mask_path);
    in.mask = rasterize_polygons(polys, in.grid.spec());
    mask_source = o.mask_path;
  } else if (!o.bbox.empty()) {
    in.mask = bbox_mask(in.grid.spec(), o.bbox[0], o.bbox[1], o.bbox[2], o.bbox[3]);
    mask_source = {{"bbox", o.bbox}};
  }
  if (in.mask) in.grid = apply_mask(in.grid, *in.mask);
  manifest["mask"] = mask_source;
  manifest.stage("load", t0);
  return in;
}

struct SearchOptions {
  double eps_km = 1.0;
  std::size_t coarse = 8;
  double window_deg = 5.0;
};

void add_search_options(CLI::App* sub, SearchOptions& o) {
  sub->add_option("--eps-km", o.eps_km, "bisection tolerance in km");
  sub->add_option("--coarse", o.coarse, "coarse-to-fine block size (1 = exact search)");
  sub->add_option("--window-deg", o.window_deg, "fine search window around coarse optima");
}

SearchConfig make_config(const SearchOptions& s, const InputOptions& in, const LoadedInput& data) {
  SearchConfig cfg;
  cfg.eps_km = s.eps_km;
  cfg.coarsen_factor = s.coarse;
  cfg.window_deg = s.window_deg;
  cfg.threads = in.threads;
  if (in.candidates == "masked") {
    if (!data.mask) throw Error(ErrorCode::invalid_input, "--candidates masked needs --mask or --bbox");
    cfg.candidates = CandidatePolicy::masked_cells;
    cfg.candidate_mask = data.mask;
  }
  return cfg;
}

json config_json(const SearchConfig& cfg, std::span<const double> fs) {
  return {{"eps_km", cfg.eps_km},
          {"coarsen_factor", cfg.coarsen_factor},
          {"window_deg", cfg.window_deg},
          {"candidates", cfg.candidates == CandidatePolicy::all_cells ? "all" : "masked"},
          {"fs", std::vector<double>(fs.begin(), fs.end())}};
}

json stats_json(const SearchStats& s) {
  return {{"candidates", s.candidates},
          {"coarse_candidates", s.coarse_candidates},
          {"bisections", s.bisections},
          {"bisection_iterations", s.bisection_steps},
          {"population_queries", s.population_queries},
          {"incremental_updates", s.incremental_updates},
          {"template_builds", s.template_builds},
          {"coarsen_factor_used", s.coarsen_factor_used},
          {"coarse_optima", s.coarse_optima}};
}

// ---------------------------------------------------------------- vp

struct VpOptions {
  InputOptions in;
  SearchOptions search;
  std::vector<double> fs;
  bool exact = false;
  std::string format = "csv";
  std::string out;
  int circle_segments = 0;
};

void cmd_vp(const VpOptions& o) {
  Manifest manifest("vp");
  const LoadedInput data = load_input(o.in, manifest);
  const SearchConfig cfg = make_config(o.search, o.in, data);
  manifest["config"] = config_json(cfg, o.fs);
  manifest["config"]["exact"] = o.exact;

  const auto t0 = Clock::now();
  std::vector<VpCircle> circles;
  if (o.exact) {
    for (const double f : o.fs) circles.push_back(vp_bruteforce(data.grid, f, cfg));
  } else {
    circles = vp_fast(data.grid, o.fs, cfg);
  }
  manifest.stage("search", t0);

  auto out = open_output(o.out);
  if (o.format == "csv") {
    write_vp_csv(circles, out);
  } else if (o.format == "json") {
    out << vp_json(circles).dump(2) << '\n';
  } else {
    out << vp_geojson(circles, o.circle_segments).dump(2) << '\n';
  }
  manifest.write_beside(o.out);
}

// ---------------------------------------------------------------- profile

struct ProfileOptions {
  InputOptions in;
  SearchOptions search;
  std::string fs = "default";
  std::string fit = "global";
  bool c50 = false;
  std::string svg;
  std::string out;
};

std::vector<double> parse_fraction_list(const std::string& text) {
  if (text == "default") return default_fractions();
  std::vector<double> fs;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      fs.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw Error(ErrorCode::invalid_input, "bad fraction '" + tok + "'");
    }
  }
  return fs;
}

std::size_t parse_segments(const std::string& fit) {
  if (fit == "global") return 0;
  const std::string prefix = "segments:";
  if (fit.rfind(prefix, 0) == 0) {
    const std::string k = fit.substr(prefix.size());
    if (k == "1") return 1;
    if (k == "2") return 2;
  }
  throw Error(ErrorCode::invalid_input, "--fit must be global, segments:1 or segments:2");
}

void cmd_profile(const ProfileOptions& o) {
  const std::size_t k = parse_segments(o.fit);
  const std::vector<double> fs = parse_fraction_list(o.fs);
  Manifest manifest("profile");
  const LoadedInput data = load_input(o.in, manifest);
  const SearchConfig cfg = make_config(o.search, o.in, data);
  manifest["config"] = config_json(cfg, fs);
  manifest["config"]["fit"] = o.fit;

  auto t0 = Clock::now();
  const VpProfile prof = compute_profile(data.grid, fs, cfg);
  manifest.stage("search", t0);

  t0 = Clock::now();
  FitSummary fit;
  fit.kind = k == 0 ? "global" : "segments";
  fit.global = fit_power_law(prof);
  if (k > 0) fit.segmented = fit_segmented(prof, k);
  json fit_doc = fit_json(fit);
  fit_doc["r1_km"] = prof.r1_km;
  if (o.c50) {
    const Centralisation c = centralisation(prof, 0.5);
    fit_doc["c50"] = {{"value", c.value}, {"interpolated", c.interpolated}};
  }
  manifest.stage("fit", t0);

  auto out = open_output(o.out);
  write_profile_csv(prof, out);
  auto fit_out = open_output(o.out + ".fit.json");
  fit_out << fit_doc.dump(2) << '\n';
  if (!o.svg.empty()) {
    auto svg = open_output(o.svg);
    write_profile_svg(prof, fit, svg);
  }
  manifest.write_beside(o.out);
}

// ---------------------------------------------------------------- centers

struct CentersOptions {
  InputOptions in;
  double tol_km = 0.1;
  std::size_t max_iter = 1000;
  std::string out;
};

void cmd_centers(const CentersOptions& o) {
  Manifest manifest("centers");
  const LoadedInput data = load_input(o.in, manifest);
  manifest["config"] = {{"tol_km", o.tol_km}, {"max_iter", o.max_iter}};
  const auto t0 = Clock::now();
  std::vector<CentreRow> rows;
  for (const CentreResult& c : {centre_of_population(data.grid), centre_3d(data.grid),
                                geometric_median(data.grid, o.tol_km, o.max_iter)}) {
    rows.push_back({c, bachi_standard_distance(data.grid, c.position())});
  }
  manifest.stage("centres", t0);
  const CentreResult& med = rows.back().centre;
  manifest["geometric_median"] = {{"iterations", med.iterations},
                                  {"objective_km", med.objective_km},
                                  {"converged", med.converged}};
  auto out = open_output(o.out);
  write_centres_csv(rows, out);
  manifest.write_beside(o.out);
}

// ---------------------------------------------------------------- synth

struct SynthOptions {
  DiscModelParams params;
  std::vector<double> center;
  double cell_deg = 0.05;
  std::size_t margin_cells = 2;
  std::string cell_rule = "centre";
  std::string out;
};

// Smallest grid with the island centre on a cell centre and `margin` empty
// cells beyond the island on every side.
GridSpec island_grid(const DiscModelParams& p, LatLon c, double cell, std::size_t margin) {
  if (!(cell > 0.0)) throw Error(ErrorCode::invalid_input, "--cell-deg must be positive");
  const double ang = p.ri_km / SphereModel::radius_km;
  const double s = std::sin(ang) / std::cos(deg_to_rad(c.lat));
  if (!(s < 1.0)) throw Error(ErrorCode::invalid_input, "island reaches a pole");
  const double half_lat = rad_to_deg(ang);
  const double half_lon = rad_to_deg(std::asin(s));
  const auto rows = static_cast<std::size_t>(std::ceil(half_lat / cell)) + margin;
  const auto cols = static_cast<std::size_t>(std::ceil(half_lon / cell)) + margin;
  if (static_cast<double>(2 * cols + 1) * cell > 360.0) {
    throw Error(ErrorCode::invalid_input, "island is wider than the globe at this resolution");
  }
  return GridSpec(2 * rows + 1, 2 * cols + 1, c.lat + static_cast<double>(rows) * cell,
                  normalize_lon(c.lon - static_cast<double>(cols) * cell), cell);
}

void cmd_synth(const SynthOptions& o) {
  Manifest manifest("synth");
  const LatLon c{o.center[0], o.center[1]};
  const CellRule rule = o.cell_rule == "integrated" ? CellRule::integrated : CellRule::centre_point;
  const auto t0 = Clock::now();
  o.params.validate();
  const GridSpec spec = island_grid(o.params, c, o.cell_deg, o.margin_cells);
  const PopulationGrid grid = synth_grid(o.params, spec, c, rule);
  manifest.stage("synth", t0);
  manifest["params"] = {{"rho0", o.params.rho0},
                        {"r0_km", o.params.r0_km},
                        {"a", o.params.a},
                        {"ri_km", o.params.ri_km},
                        {"center", {c.lat, c.lon}},
                        {"cell_deg", o.cell_deg},
                        {"cell_rule", o.cell_rule}};
  manifest["analytic_total"] = island_population(o.params);
  manifest["grid_total"] = grid.total();
  manifest["grid"] = {{"n_rows", spec.n_rows()}, {"n_cols", spec.n_cols()},
                      {"lat0", spec.lat0()},     {"lon0", spec.lon0()}};
  save_esri_ascii(grid, o.out);
  manifest.write_beside(o.out);
}

// ---------------------------------------------------------------- bench

struct BenchOptions {
  InputOptions in;
  SearchOptions search;
  std::vector<double> fs{0.5};
  std::vector<std::string> modes{"exact", "fast", "coarse"};
  std::size_t exact_sample = 0;
  std::string out;
};

json results_json(const std::vector<VpCircle>& circles) {
  json arr = json::array();
  for (const auto& c : circles) {
    arr.push_back({{"f", c.f},
                   {"center_lat", c.center_pos.lat},
                   {"center_lon", c.center_pos.lon},
                   {"radius_km", c.radius_km},
                   {"multiplicity", c.multiplicity()}});
  }
  return arr;
}

json bench_exact(const PopulationGrid& grid, std::span<const double> fs, SearchConfig cfg,
                 std::size_t sample_rows) {
  const GridSpec& spec = grid.spec();
  const std::size_t all = spec.n_cells();
  json j{{"mode", "exact"}};
  std::size_t sampled = all;
  if (sample_rows > 0 && sample_rows < spec.n_rows()) {
    // Every stride-th row; the timing is scaled up to the full grid.
    const std::size_t stride = (spec.n_rows() + sample_rows - 1) / sample_rows;
    std::vector<bool> inside(all, false);
    sampled = 0;
    for (std::size_t r = 0; r < spec.n_rows(); r += stride) {
      for (std::size_t c = 0; c < spec.n_cols(); ++c) inside[r * spec.n_cols() + c] = true;
      sampled += spec.n_cols();
    }
    cfg.candidates = CandidatePolicy::masked_cells;
    cfg.candidate_mask = RegionMask(spec, std::move(inside));
  }
  SearchStats total;
  std::vector<VpCircle> circles;
  const auto t0 = Clock::now();
  for (const double f : fs) {
    SearchStats st;
    circles.push_back(vp_bruteforce(grid, f, cfg, &st));
    total += st;
  }
  const double wall = seconds_since(t0);
  const bool extrapolated = sampled < all;
  j["measured_wall_s"] = wall;
  j["wall_s"] = extrapolated ? wall * static_cast<double>(all) / static_cast<double>(sampled) : wall;
  j["extrapolated"] = extrapolated;
  j["sampled_candidates"] = sampled;
  j["stats"] = stats_json(total);
  j["results"] = extrapolated ? json(nullptr) : results_json(circles);
  return j;
}

json bench_fast(const PopulationGrid& grid, std::span<const double> fs, SearchConfig cfg,
                const char* name) {
  SearchStats st;
  const auto t0 = Clock::now();
  const auto circles = vp_fast(grid, fs, cfg, &st);
  const double wall = seconds_since(t0);
  return {{"mode", name},
          {"wall_s", wall},
          {"extrapolated", false},
          {"stats", stats_json(st)},
          {"results", results_json(circles)}};
}

void cmd_bench(const BenchOptions& o, std::ostream& stdout_stream) {
  Manifest manifest("bench");
  const LoadedInput data = load_input(o.in, manifest);
  const SearchConfig base = make_config(o.search, o.in, data);
  manifest["config"] = config_json(base, o.fs);

  json doc{{"input", o.in.input},
           {"grid", {{"n_rows", data.grid.spec().n_rows()}, {"n_cols", data.grid.spec().n_cols()}}},
           {"threads", o.in.threads},
           {"modes", json::array()}};
  std::optional<double> exact_s, fast_s, coarse_s;
  for (const auto& mode : o.modes) {
    SearchConfig cfg = base;
    json r;
    if (mode == "exact") {
      r = bench_exact(data.grid, o.fs, cfg, o.exact_sample);
      exact_s = r["wall_s"].get<double>();
    } else if (mode == "fast") {
      cfg.coarsen_factor = 1;
      r = bench_fast(data.grid, o.fs, cfg, "fast");
      fast_s = r["wall_s"].get<double>();
    } else {
      r = bench_fast(data.grid, o.fs, cfg, "coarse");
      coarse_s = r["wall_s"].get<double>();
    }
    doc["modes"].push_back(r);
  }
  if (exact_s && fast_s) doc["speedup_fast_vs_exact"] = *exact_s / *fast_s;
  if (exact_s && coarse_s) doc["speedup_coarse_vs_exact"] = *exact_s / *coarse_s;

  if (o.out.empty()) {
    stdout_stream << doc.dump(2) << '\n';
  } else {
    auto out = open_output(o.out);
    out << doc.dump(2) << '\n';
    manifest.write_beside(o.out);
  }
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_input:
    case ErrorCode::parse_error: return 2;
    case ErrorCode::infeasible:
    case ErrorCode::degenerate: return 3;
  }
  return 2;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Smallest circles holding a given share of a gridded population", "vpcircle"};
  app.require_subcommand(1);
  app.set_version_flag("--version", VPCIRCLE_VERSION);

  VpOptions vp;
  auto* vp_cmd = app.add_subcommand("vp", "VP circles for one or more fractions");
  add_input_options(vp_cmd, vp.in, true);
  add_search_options(vp_cmd, vp.search);
  vp_cmd->add_option("--f", vp.fs, "fractions, comma separated")->required()->delimiter(',');
  vp_cmd->add_flag("--exact", vp.exact, "reference search over every candidate");
  vp_cmd->add_option("--format", vp.format)->check(CLI::IsMember({"csv", "json", "geojson"}));
  vp_cmd->add_option("--circle-segments", vp.circle_segments, "GeoJSON circle vertices (0 = none)");
  vp_cmd->add_option("--out", vp.out)->required();

  ProfileOptions pr;
  auto* pr_cmd = app.add_subcommand("profile", "tau(f) profile, fits and centralisation");
  add_input_options(pr_cmd, pr.in, true);
  add_search_options(pr_cmd, pr.search);
  pr_cmd->add_option("--fs", pr.fs, "'default' or comma separated fractions");
  pr_cmd->add_option("--fit", pr.fit, "global, segments:1 or segments:2");
  pr_cmd->add_flag("--c50", pr.c50, "report the centralisation at f = 0.5");
  pr_cmd->add_option("--svg", pr.svg, "log-log plot output");
  pr_cmd->add_option("--out", pr.out)->required();

  CentersOptions ce;
  auto* ce_cmd = app.add_subcommand("centers", "classical population centres");
  add_input_options(ce_cmd, ce.in, false);
  ce_cmd->add_option("--tol-km", ce.tol_km, "geometric median step tolerance");
  ce_cmd->add_option("--max-iter", ce.max_iter, "geometric median iteration cap");
  ce_cmd->add_option("--out", ce.out)->required();

  SynthOptions sy;
  auto* sy_cmd = app.add_subcommand("synth", "synthetic island grid");
  sy_cmd->add_option("--rho0", sy.params.rho0)->required();
  sy_cmd->add_option("--r0-km", sy.params.r0_km)->required();
  sy_cmd->add_option("--a", sy.params.a)->required();
  sy_cmd->add_option("--ri-km", sy.params.ri_km)->required();
  sy_cmd->add_option("--center", sy.center, "LAT,LON")->required()->delimiter(',')->expected(2);
  sy_cmd->add_option("--cell-deg", sy.cell_deg)->required();
  sy_cmd->add_option("--margin-cells", sy.margin_cells);
  sy_cmd->add_option("--cell-rule", sy.cell_rule)->check(CLI::IsMember({"centre", "integrated"}));
  sy_cmd->add_option("--out", sy.out)->required();

  BenchOptions be;
  auto* be_cmd = app.add_subcommand("bench", "time the search modes");
  add_input_options(be_cmd, be.in, true);
  add_search_options(be_cmd, be.search);
  be_cmd->add_option("--f", be.fs)->delimiter(',');
  be_cmd->add_option("--modes", be.modes)
      ->delimiter(',')
      ->check(CLI::IsMember({"exact", "fast", "coarse"}));
  be_cmd->add_option("--exact-sample", be.exact_sample,
                     "time exact mode on this many evenly spaced rows and scale up (0 = all)");
  be_cmd->add_option("--out", be.out);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error code=" << error_code_name(ErrorCode::invalid_input) << ": " << e.what() << '\n';
    return 2;
  }

  try {
    if (*vp_cmd) cmd_vp(vp);
    else if (*pr_cmd) cmd_profile(pr);
    else if (*ce_cmd) cmd_centers(ce);
    else if (*sy_cmd) cmd_synth(sy);
    else if (*be_cmd) cmd_bench(be, out);
  } catch (const Error& e) {
    err << "error code=" << error_code_name(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error code=" << error_code_name(ErrorCode::invalid_input) << ": " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace vpcircle::cli
