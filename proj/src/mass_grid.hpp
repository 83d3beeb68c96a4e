#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "vpcircle/geo.hpp"
#include "vpcircle/grid.hpp"

namespace vpcircle::detail {

/**
 * Population counts quantized to integers on a common binary scale.
 *
 * Every count becomes llround(count * 2^scale) with the scale chosen so the
 * grid total stays below 2^62. Integer sums are exact, so any summation order
 * (incremental, prefix sums, several threads) yields the same value.
 */
class MassGrid {
 public:
  explicit MassGrid(const PopulationGrid& grid);

  const GridSpec& spec() const { return spec_; }
  int scale() const { return scale_; }
  std::int64_t total() const { return total_; }
  std::int64_t at(std::size_t row, std::size_t col) const {
    return mass_[row * n_cols_ + col];
  }

  // Smallest quantized mass that meets `people`, at least 1.
  std::int64_t quantize_target(double people) const;
  double to_people(std::int64_t q) const;

  // Sum of columns lo..hi (inclusive, lo <= hi) of one row.
  std::int64_t range_sum(std::size_t row, std::size_t lo, std::size_t hi) const {
    const std::size_t base = row * (n_cols_ + 1);
    return prefix_[base + hi + 1] - prefix_[base + lo];
  }

  // Mass of the cells of `row` within `near` offsets of `col` plus, on
  // non-wrap grids, those at offsets >= `far` (the far branch).
  std::int64_t row_within(std::size_t row, std::size_t col, long near, std::size_t far,
                          std::size_t max_offset) const;

  // Mass of cells with hav(center, cell) <= threshold, where the template was
  // built for center.row.
  std::int64_t within(const DistanceTemplate& tmpl, Cell center, double threshold) const;

 private:
  GridSpec spec_;
  std::size_t n_cols_ = 0;
  int scale_ = 0;
  std::int64_t total_ = 0;
  std::vector<std::int64_t> mass_;
  std::vector<std::int64_t> prefix_;
};

}  // namespace vpcircle::detail
