#pragma once

#include "boltscope/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace boltscope {

/// Uniformly sampled signal. Units are carried by the channel label only.
struct TimeSeries {
  std::vector<double> samples;
  double sample_rate = 0.0;  // Hz
  std::string channel;
  double start_time = 0.0;  // s

  TimeSeries() = default;
  TimeSeries(std::vector<double> s, double fs, std::string ch = {}, double t0 = 0.0)
      : samples(std::move(s)), sample_rate(fs), channel(std::move(ch)), start_time(t0) {
    if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
      throw ParameterError("TimeSeries: sample_rate must be positive, got " +
                           std::to_string(sample_rate));
    }
  }

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
  double nyquist() const { return 0.5 * sample_rate; }
};

inline void require_non_empty(const TimeSeries& ts, const char* who) {
  if (ts.empty()) throw ParameterError(std::string(who) + ": time series is empty");
  if (!(ts.sample_rate > 0.0)) throw ParameterError(std::string(who) + ": sample_rate must be > 0");
}

inline double mean(const TimeSeries& ts) {
  require_non_empty(ts, "mean");
  return std::accumulate(ts.samples.begin(), ts.samples.end(), 0.0) /
         static_cast<double>(ts.size());
}

/// Population variance (divides by N).
inline double variance(const TimeSeries& ts) {
  const double m = mean(ts);
  double acc = 0.0;
  for (double v : ts.samples) acc += (v - m) * (v - m);
  return acc / static_cast<double>(ts.size());
}

inline double rms(const TimeSeries& ts) {
  require_non_empty(ts, "rms");
  double acc = 0.0;
  for (double v : ts.samples) acc += v * v;
  return std::sqrt(acc / static_cast<double>(ts.size()));
}

inline double peak_abs(const TimeSeries& ts) {
  double m = 0.0;
  for (double v : ts.samples) m = std::max(m, std::abs(v));
  return m;
}

inline TimeSeries scaled(TimeSeries ts, double c) {
  for (double& v : ts.samples) v *= c;
  return ts;
}

}  // namespace boltscope
