#pragma once

#include <cmath>

namespace ctbpq {

// Neumaier's variant of Kahan summation. Handles addends larger than the
// running sum, which happens when accumulating a pmf from its mode outward.
template <typename T = double>
class CompensatedSum {
 public:
  CompensatedSum() = default;
  explicit CompensatedSum(T init) : sum_(init) {}

  CompensatedSum& operator+=(T x) {
    const T t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
    return *this;
  }

  CompensatedSum& operator-=(T x) { return *this += -x; }

  T value() const { return sum_ + comp_; }
  explicit operator T() const { return value(); }

 private:
  T sum_{0};
  T comp_{0};
};

}  // namespace ctbpq
