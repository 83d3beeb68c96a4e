#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "vpcircle/grid.hpp"

namespace vpcircle {

/**
 * Reads an ESRI ASCII grid.
 *
 * Header keys (ncols, nrows, xllcorner|xllcenter, yllcorner|yllcenter,
 * cellsize, optional NODATA_value) are case-insensitive and may appear in any
 * order. Row 0 of the body is the northernmost row. NODATA and negative
 * values are stored as 0. Errors carry the offending line number.
 */
PopulationGrid load_esri_ascii(const std::filesystem::path& path);
PopulationGrid read_esri_ascii(std::istream& in);

// Writes shortest round-trip representations, so reading back is bit-exact.
void save_esri_ascii(const PopulationGrid& grid, const std::filesystem::path& path);
void write_esri_ascii(const PopulationGrid& grid, std::ostream& out);

/**
 * Reads `lat,lon,population` rows (with a header row) onto `spec`.
 *
 * Each point must lie within half a cell of a cell centre. Populations of
 * points falling in the same cell are added. A latitude exactly halfway
 * between two centres goes to the northern cell; a longitude exactly halfway
 * goes to the western cell. An empty file yields an all-zero grid.
 */
PopulationGrid load_csv(const std::filesystem::path& path, const GridSpec& spec);
PopulationGrid read_csv(std::istream& in, const GridSpec& spec);

// Polygon and MultiPolygon geometries from a GeoJSON geometry, Feature or
// FeatureCollection. Properties are ignored.
std::vector<Polygon> load_geojson_polygons(const std::filesystem::path& path);
std::vector<Polygon> parse_geojson_polygons(const std::string& text);

}  // namespace vpcircle
