#pragma once

#include <cmath>

namespace pha {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    double t = _sum + x;
    if (std::fabs(_sum) >= std::fabs(x)) {
      _carry += (_sum - t) + x;
    } else {
      _carry += (x - t) + _sum;
    }
    _sum = t;
  }

  void reset() noexcept {
    _sum = 0.0;
    _carry = 0.0;
  }

  double value() const noexcept { return _sum + _carry; }

 private:
  double _sum {0.0};
  double _carry {0.0};
};

template <typename Range>
double compensated_sum(const Range& xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

}  // namespace pha
