#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace vofdm {

using cpx = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kSqrt2 = 1.414213562373095048801688724209698079;

// SNR estimates are reported on a dB scale capped at +200 dB; the cap is
// applied on the linear ratio so downstream dB math stays finite.
inline constexpr double kGammaDbCap = 200.0;
inline constexpr double kGammaLinearCap = 1e20;

namespace detail {

[[noreturn]] inline void fail(const std::string& msg) {
  throw std::invalid_argument(msg);
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) fail(msg);
}

}  // namespace detail

inline double to_db(double linear) { return 10.0 * std::log10(linear); }

inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

// Upper-tail probability of the standard normal distribution.
inline double q_function(double x) { return 0.5 * std::erfc(x / kSqrt2); }

// Compensated accumulator for long scalar reductions.  Worker partials are
// merged in block order, so totals are identical for every thread count.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }

  void merge(const KahanSum& other) {
    add(other.sum);
    add(-other.carry);
  }

  double value() const { return sum; }
};

}  // namespace vofdm
