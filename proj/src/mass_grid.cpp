#include "mass_grid.hpp"

#include <cmath>

#include "vpcircle/error.hpp"

namespace vpcircle::detail {

MassGrid::MassGrid(const PopulationGrid& grid)
    : spec_(grid.spec()), n_cols_(grid.spec().n_cols()) {
  const double total = grid.total();
  if (!(total > 0.0)) throw Error(ErrorCode::invalid_input, "grid has zero total population");
  int exp = 0;
  std::frexp(total, &exp);
  // total < 2^exp, so every partial sum stays below about 2^61.
  scale_ = 61 - exp;

  const std::size_t n_rows = spec_.n_rows();
  mass_.resize(spec_.n_cells());
  prefix_.resize(n_rows * (n_cols_ + 1));
  const auto counts = grid.counts();
  for (std::size_t r = 0; r < n_rows; ++r) {
    std::int64_t run = 0;
    const std::size_t base = r * (n_cols_ + 1);
    prefix_[base] = 0;
    for (std::size_t c = 0; c < n_cols_; ++c) {
      const std::int64_t q = std::llround(std::ldexp(counts[r * n_cols_ + c], scale_));
      mass_[r * n_cols_ + c] = q;
      run += q;
      prefix_[base + c + 1] = run;
    }
    total_ += run;
  }
  if (total_ <= 0) throw Error(ErrorCode::invalid_input, "grid has zero total population");
}

std::int64_t MassGrid::quantize_target(double people) const {
  const long double q = std::ceil(std::ldexp(static_cast<long double>(people), scale_));
  if (!(q <= static_cast<long double>(total_))) {
    throw Error(ErrorCode::infeasible, "target exceeds the grid total");
  }
  return q < 1.0L ? 1 : static_cast<std::int64_t>(q);
}

double MassGrid::to_people(std::int64_t q) const {
  return std::ldexp(static_cast<double>(q), -scale_);
}

std::int64_t MassGrid::row_within(std::size_t row, std::size_t col, long near, std::size_t far,
                                  std::size_t max_offset) const {
  const std::size_t n = n_cols_;
  std::int64_t sum = 0;
  if (near >= 0) {
    const auto h = static_cast<std::size_t>(near);
    if (spec_.global_wrap()) {
      if (2 * h + 1 >= n) return range_sum(row, 0, n - 1);
      if (col >= h && col + h < n) {
        sum += range_sum(row, col - h, col + h);
      } else if (col < h) {
        sum += range_sum(row, col + n - h, n - 1) + range_sum(row, 0, col + h);
      } else {
        sum += range_sum(row, col - h, n - 1) + range_sum(row, 0, col + h - n);
      }
      return sum;
    }
    const std::size_t lo = col >= h ? col - h : 0;
    const std::size_t hi = col + h < n ? col + h : n - 1;
    sum += range_sum(row, lo, hi);
  }
  if (far <= max_offset) {
    if (col + far < n) sum += range_sum(row, col + far, n - 1);
    if (col >= far) sum += range_sum(row, 0, col - far);
  }
  return sum;
}

std::int64_t MassGrid::within(const DistanceTemplate& tmpl, Cell center, double threshold) const {
  const std::size_t n_rows = spec_.n_rows();
  const std::size_t max_k = tmpl.max_offset();
  std::int64_t sum = 0;
  // Rows closer in latitude are never farther away, so the rows in range form
  // one contiguous band around the centre row.
  for (std::size_t r = center.row;; ++r) {
    if (r >= n_rows) break;
    const long h = tmpl.near_halfwidth(r, threshold);
    if (h < 0) break;
    sum += row_within(r, center.col, h, tmpl.far_start(r, threshold), max_k);
  }
  for (std::size_t r = center.row; r-- > 0;) {
    const long h = tmpl.near_halfwidth(r, threshold);
    if (h < 0) break;
    sum += row_within(r, center.col, h, tmpl.far_start(r, threshold), max_k);
  }
  return sum;
}

}  // namespace vpcircle::detail
