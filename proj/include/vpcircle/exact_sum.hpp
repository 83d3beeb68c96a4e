#pragma once

#include <span>
#include <vector>

namespace vpcircle {

// Order-independent floating-point summation. Keeps the running sum as a list
// of non-overlapping partials (Shewchuk) and rounds once at the end, so the
// result is the correctly rounded value of the exact sum.
class ExactSum {
 public:
  void add(double x);
  void add(std::span<const double> xs) {
    for (double x : xs) add(x);
  }
  double value() const;

 private:
  std::vector<double> partials_;
};

double exact_sum(std::span<const double> xs);

}  // namespace vpcircle
