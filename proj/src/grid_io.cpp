#include "vpcircle/grid_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string_view>

#include <nlohmann/json.hpp>

#include "vpcircle/error.hpp"

namespace vpcircle {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::invalid_input, "cannot open " + path.string());
  return in;
}

std::optional<double> parse_double(std::string_view tok) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

struct Token {
  std::string text;
  std::size_t line;
};

}  // namespace

PopulationGrid load_esri_ascii(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_esri_ascii(in);
}

PopulationGrid read_esri_ascii(std::istream& in) {
  std::optional<double> ncols, nrows, xll, yll, cellsize, nodata;
  bool x_center = false;
  bool y_center = false;

  std::string line;
  std::size_t line_no = 0;
  std::vector<Token> body;
  bool in_header = true;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (in_header && std::isalpha(static_cast<unsigned char>(first.front()))) {
      std::string value;
      if (!(ls >> value)) throw ParseError(line_no, "header key '" + first + "' has no value");
      std::string extra;
      if (ls >> extra) throw ParseError(line_no, "unexpected token '" + extra + "' in header");
      const auto v = parse_double(value);
      if (!v) throw ParseError(line_no, "non-numeric header value '" + value + "'");
      const std::string key = lower(first);
      if (key == "ncols") ncols = v;
      else if (key == "nrows") nrows = v;
      else if (key == "xllcorner") xll = v;
      else if (key == "xllcenter") { xll = v; x_center = true; }
      else if (key == "yllcorner") yll = v;
      else if (key == "yllcenter") { yll = v; y_center = true; }
      else if (key == "cellsize") cellsize = v;
      else if (key == "nodata_value") nodata = v;
      else throw ParseError(line_no, "unknown header key '" + first + "'");
      continue;
    }
    if (in_header) {
      in_header = false;
      if (!ncols || !nrows || !xll || !yll || !cellsize) {
        throw ParseError(line_no, "header is missing one of ncols, nrows, xllcorner, yllcorner, cellsize");
      }
    }
    body.push_back({first, line_no});
    std::string tok;
    while (ls >> tok) body.push_back({tok, line_no});
  }
  if (in_header) {
    throw ParseError(line_no, "file has no data rows");
  }

  auto as_count = [&](double v, const char* name) -> std::size_t {
    if (!(v >= 1.0) || v != std::floor(v)) {
      throw ParseError(1, std::string(name) + " must be a positive integer");
    }
    return static_cast<std::size_t>(v);
  };
  const std::size_t nc = as_count(*ncols, "ncols");
  const std::size_t nr = as_count(*nrows, "nrows");
  const double cell = *cellsize;
  const std::size_t expected = nr * nc;
  if (body.size() != expected) {
    const std::size_t at = body.size() > expected ? body[expected].line : line_no;
    throw ParseError(at, "expected " + std::to_string(expected) + " values, found " +
                             std::to_string(body.size()));
  }

  std::vector<double> counts(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    const auto v = parse_double(body[i].text);
    if (!v) throw ParseError(body[i].line, "non-numeric value '" + body[i].text + "'");
    double x = *v;
    if ((nodata && x == *nodata) || !std::isfinite(x) || x < 0.0) x = 0.0;
    counts[i] = x;
  }

  const double lat0 = y_center ? *yll + static_cast<double>(nr - 1) * cell
                               : *yll + (static_cast<double>(nr) - 0.5) * cell;
  const double lon0 = x_center ? *xll : *xll + cell / 2.0;
  return PopulationGrid(GridSpec(nr, nc, lat0, lon0, cell), std::move(counts));
}

void save_esri_ascii(const PopulationGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::invalid_input, "cannot write " + path.string());
  write_esri_ascii(grid, out);
}

void write_esri_ascii(const PopulationGrid& grid, std::ostream& out) {
  const GridSpec& s = grid.spec();
  char buf[64];
  auto fmt = [&buf](double v) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
  };
  out << "ncols " << s.n_cols() << '\n'
      << "nrows " << s.n_rows() << '\n'
      << "xllcorner " << fmt(s.lon0() - s.cell_deg() / 2.0) << '\n'
      << "yllcorner " << fmt(s.lat0() - (static_cast<double>(s.n_rows()) - 0.5) * s.cell_deg())
      << '\n'
      << "cellsize " << fmt(s.cell_deg()) << '\n'
      << "NODATA_value -9999\n";
  std::string row;
  for (std::size_t r = 0; r < s.n_rows(); ++r) {
    row.clear();
    for (std::size_t c = 0; c < s.n_cols(); ++c) {
      if (c) row.push_back(' ');
      row += fmt(grid.at(r, c));
    }
    row.push_back('\n');
    out << row;
  }
}

PopulationGrid load_csv(const std::filesystem::path& path, const GridSpec& spec) {
  auto in = open_input(path);
  return read_csv(in, spec);
}

PopulationGrid read_csv(std::istream& in, const GridSpec& spec) {
  std::vector<double> counts(spec.n_cells(), 0.0);
  const double cell = spec.cell_deg();
  std::string line;
  std::size_t line_no = 0;
  bool seen_first = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty()) continue;

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = view.find(',', start);
      fields.push_back(trim(view.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!seen_first) {
      seen_first = true;
      if (!parse_double(fields.front())) {
        if (fields.size() != 3 || lower(fields[0]) != "lat" || lower(fields[1]) != "lon" ||
            lower(fields[2]) != "population") {
          throw ParseError(line_no, "expected header 'lat,lon,population'");
        }
        continue;
      }
    }
    if (fields.size() != 3) throw ParseError(line_no, "expected 3 fields");
    const auto lat = parse_double(fields[0]);
    const auto lon = parse_double(fields[1]);
    const auto pop = parse_double(fields[2]);
    if (!lat || !lon || !pop) throw ParseError(line_no, "non-numeric field");

    const double y = (spec.lat0() - *lat) / cell;
    const double row_f = std::ceil(y - 0.5);
    if (!(row_f >= 0.0 && row_f < static_cast<double>(spec.n_rows()))) {
      throw ParseError(line_no, "point lies outside the grid");
    }
    double dx = std::fmod(*lon - spec.lon0() + cell / 2.0, 360.0);
    if (dx < 0.0) dx += 360.0;
    dx -= cell / 2.0;
    double col_f = std::ceil(dx / cell - 0.5);
    if (spec.global_wrap() && col_f < 0.0) col_f += static_cast<double>(spec.n_cols());
    if (!(col_f >= 0.0 && col_f < static_cast<double>(spec.n_cols()))) {
      throw ParseError(line_no, "point lies outside the grid");
    }
    const double value = (std::isfinite(*pop) && *pop > 0.0) ? *pop : 0.0;
    counts[static_cast<std::size_t>(row_f) * spec.n_cols() + static_cast<std::size_t>(col_f)] +=
        value;
  }
  return PopulationGrid(spec, std::move(counts));
}

namespace {

using nlohmann::json;

Ring parse_ring(const json& coords) {
  if (!coords.is_array()) throw Error(ErrorCode::parse_error, "GeoJSON ring is not an array");
  Ring ring;
  for (const json& pt : coords) {
    if (!pt.is_array() || pt.size() < 2 || !pt[0].is_number() || !pt[1].is_number()) {
      throw Error(ErrorCode::parse_error, "GeoJSON position must be [lon, lat]");
    }
    ring.push_back({pt[1].get<double>(), pt[0].get<double>()});
  }
  return ring;
}

Polygon parse_polygon(const json& coords) {
  if (!coords.is_array()) throw Error(ErrorCode::parse_error, "GeoJSON polygon is not an array");
  Polygon poly;
  for (const json& ring : coords) poly.push_back(parse_ring(ring));
  return poly;
}

void collect(const json& obj, std::vector<Polygon>& out) {
  if (!obj.is_object() || !obj.contains("type")) {
    throw Error(ErrorCode::parse_error, "GeoJSON object without a type");
  }
  const std::string type = obj.at("type").get<std::string>();
  if (type == "FeatureCollection") {
    for (const json& f : obj.at("features")) collect(f, out);
  } else if (type == "Feature") {
    if (!obj.at("geometry").is_null()) collect(obj.at("geometry"), out);
  } else if (type == "GeometryCollection") {
    for (const json& g : obj.at("geometries")) collect(g, out);
  } else if (type == "Polygon") {
    out.push_back(parse_polygon(obj.at("coordinates")));
  } else if (type == "MultiPolygon") {
    for (const json& p : obj.at("coordinates")) out.push_back(parse_polygon(p));
  }
}

}  // namespace

std::vector<Polygon> parse_geojson_polygons(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse_error, std::string("invalid GeoJSON: ") + e.what());
  }
  std::vector<Polygon> out;
  try {
    collect(doc, out);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("malformed GeoJSON: ") + e.what());
  }
  if (out.empty()) throw Error(ErrorCode::invalid_input, "GeoJSON contains no polygons");
  return out;
}

std::vector<Polygon> load_geojson_polygons(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_geojson_polygons(ss.str());
}

}  // namespace vpcircle
