#pragma once

#include <cmath>
#include <complex>
#include <limits>

namespace blab {

using Point = std::complex<double>;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;

// A complex number carried as (log magnitude, argument). Values whose magnitude
// is far outside double range stay usable in this form.
struct LogComplex {
  double log_abs;
  double arg;

  Point value() const { return std::polar(std::exp(log_abs), arg); }
};

// Streaming sum of exp(x_i) with a running max shift, so that terms spanning
// thousands of orders of magnitude accumulate without overflow or underflow.
class LogSum {
public:
  void add(double x) {
    if (x == kNegInf) return;
    if (x <= shift_) {
      acc_ += std::exp(x - shift_);
    } else {
      acc_ = acc_ * std::exp(shift_ - x) + 1.0;
      shift_ = x;
    }
  }

  // log of the accumulated sum; -inf when nothing was added.
  double log() const {
    if (acc_ == 0.0) return kNegInf;
    return shift_ + std::log(acc_);
  }

  bool empty() const { return acc_ == 0.0; }

private:
  double shift_ = kNegInf;
  double acc_ = 0.0;
};

inline double sq(double x) { return x * x; }

}  // namespace blab
