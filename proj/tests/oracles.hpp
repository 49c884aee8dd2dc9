#pragma once

// Reference computations used only by tests. Nothing here calls into the
// library's FFT or Welch paths.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

namespace oracle {

/// J_k(x) from its power series sum_m (-1)^m / (m! (m+k)!) (x/2)^(2m+k).
inline double bessel_j(int k, double x) {
  double term = std::pow(0.5 * x, k);
  for (int i = 1; i <= k; ++i) term /= i;
  double sum = term;
  for (int m = 1; m < 60; ++m) {
    term *= -(0.25 * x * x) / (static_cast<double>(m) * static_cast<double>(m + k));
    sum += term;
  }
  return sum;
}

/// Amplitude of the sinusoid at frequency f (exact bin of a rectangular
/// window spanning an integer number of periods) by direct correlation.
inline double line_amplitude(const std::vector<double>& x, double fs, double f) {
  std::complex<double> acc{0.0, 0.0};
  const double w = 2.0 * std::numbers::pi * f / fs;
  for (std::size_t n = 0; n < x.size(); ++n) {
    acc += x[n] * std::polar(1.0, -w * static_cast<double>(n));
  }
  return 2.0 * std::abs(acc) / static_cast<double>(x.size());
}

inline double variance(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size());
}

/// Counts sign changes (strict crossings through zero).
inline std::size_t zero_crossings(const std::vector<double>& x) {
  std::size_t n = 0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    if ((x[i - 1] < 0.0 && x[i] >= 0.0) || (x[i - 1] >= 0.0 && x[i] < 0.0)) ++n;
  }
  return n;
}

}  // namespace oracle
