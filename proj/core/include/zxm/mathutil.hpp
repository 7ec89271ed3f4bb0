#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace zxm {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal pdf.
double normal_pdf(double x);

/// log(normal_cdf(x)), stable for x down to about -1e7 (asymptotic tail
/// expansion below the erfc underflow point).
double log_normal_cdf(double x);

/// Wrap an angle to the principal value in (-pi, pi].
double wrap_angle(double phi);

/// log(sum(exp(v))) with the usual max shift; -inf entries are skipped.
double log_sum_exp(std::span<const double> v);

/// Running mean/variance accumulator (Welford).
class RunningStats {
 public:
  void add(double x);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // sample variance (n-1)
  double stddev() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Mean of a vector.
double mean_of(std::span<const double> v);

}  // namespace zxm
