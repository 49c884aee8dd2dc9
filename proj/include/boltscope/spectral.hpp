#pragma once

#include "boltscope/errors.hpp"
#include "boltscope/fft.hpp"
#include "boltscope/time_series.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace boltscope {

enum class Window { Hann, Rectangular };

inline const char* window_name(Window w) { return w == Window::Hann ? "hann" : "rectangular"; }

struct EstimatorInfo {
  std::string window_name;
  std::size_t segment_length = 0;
  double overlap_fraction = 0.0;
  std::size_t n_segments = 0;
};

/// One-sided power spectral density on the grid k * resolution_hz.
struct Psd {
  std::vector<double> freqs;
  std::vector<double> density;  // unit^2 / Hz
  double resolution_hz = 0.0;
  EstimatorInfo estimator;

  std::size_t size() const { return freqs.size(); }
  double max_freq() const { return freqs.empty() ? 0.0 : freqs.back(); }
  bool same_grid(const Psd& other) const {
    return freqs.size() == other.freqs.size() && resolution_hz == other.resolution_hz;
  }
};

/// Density in dB re 1 unit^2/Hz. Exact zeros map to a fixed floor.
inline constexpr double kDbFloor = -300.0;
inline double to_db(double density) {
  return density > 0.0 ? std::max(10.0 * std::log10(density), kDbFloor) : kDbFloor;
}

struct SpectralPeak {
  double freq = 0.0;
  double level_db = 0.0;
  double prominence_db = 0.0;
  std::size_t bin = 0;
};

/// Smallest segment length giving at most `resolution_hz` bin spacing.
inline std::size_t segment_for_resolution(double sample_rate, double resolution_hz) {
  return static_cast<std::size_t>(std::ceil(sample_rate / resolution_hz - 1e-9));
}

/// Welch averaged modified periodogram. Every segment is mean-removed and
/// windowed; the density is normalized by fs * sum(w^2) so that integrating
/// it over [0, Nyquist] recovers the signal variance.
inline Psd welch_psd(const TimeSeries& ts, std::size_t segment_length, double overlap = 0.5,
                     Window window = Window::Hann) {
  require_non_empty(ts, "welch_psd");
  if (segment_length < 8) throw ParameterError("welch_psd: segment_length must be >= 8");
  if (segment_length > ts.size()) {
    throw ParameterError("welch_psd: segment_length " + std::to_string(segment_length) +
                         " exceeds signal length " + std::to_string(ts.size()));
  }
  if (!(overlap >= 0.0 && overlap < 1.0)) throw ParameterError("welch_psd: overlap must be in [0,1)");

  const std::size_t n = segment_length;
  std::vector<double> w(n, 1.0);
  if (window == Window::Hann) {
    // Periodic Hann; its sum of squares is exactly 3n/8.
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(n));
    }
  }
  double wpow = 0.0;
  for (double v : w) wpow += v * v;

  const auto overlap_samples =
      static_cast<std::size_t>(std::floor(static_cast<double>(n) * overlap));
  const std::size_t hop = std::max<std::size_t>(1, n - overlap_samples);

  fft::RealForward plan(n);
  const std::size_t bins = plan.bins();
  std::vector<double> acc(bins, 0.0);
  std::size_t segments = 0;
  auto in = plan.input();
  for (std::size_t start = 0; start + n <= ts.size(); start += hop) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += ts.samples[start + i];
    m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) in[i] = (ts.samples[start + i] - m) * w[i];
    plan.execute();
    for (std::size_t k = 0; k < bins; ++k) acc[k] += plan.power(k);
    ++segments;
  }

  Psd psd;
  psd.resolution_hz = ts.sample_rate / static_cast<double>(n);
  psd.freqs.resize(bins);
  psd.density.resize(bins);
  const double scale = 1.0 / (ts.sample_rate * wpow * static_cast<double>(segments));
  for (std::size_t k = 0; k < bins; ++k) {
    psd.freqs[k] = static_cast<double>(k) * psd.resolution_hz;
    const bool edge = (k == 0) || (n % 2 == 0 && k == bins - 1);
    psd.density[k] = acc[k] * scale * (edge ? 1.0 : 2.0);
  }
  psd.estimator = {window_name(window), n, overlap, segments};
  return psd;
}

/// Welch PSD with the default estimator: Hann, 50 % overlap, <= `resolution_hz` bins.
inline Psd welch_psd_default(const TimeSeries& ts, double resolution_hz = 0.5) {
  return welch_psd(ts, segment_for_resolution(ts.sample_rate, resolution_hz), 0.5, Window::Hann);
}

/// Integral of the linearly interpolated density over [f_lo, f_hi].
/// Grid intervals cut by the band edges contribute their overlapping part.
inline double band_power(const Psd& psd, double f_lo, double f_hi) {
  if (psd.size() < 2) throw ParameterError("band_power: PSD needs at least 2 bins");
  if (!(f_lo < f_hi)) throw ParameterError("band_power: f_lo must be < f_hi");
  const double top = psd.max_freq();
  const double tol = 1e-9 * psd.resolution_hz;
  if (f_lo < -tol || f_hi > top + tol) {
    throw ParameterError("band_power: band [" + std::to_string(f_lo) + ", " + std::to_string(f_hi) +
                         "] Hz outside PSD grid [0, " + std::to_string(top) + "] Hz");
  }
  f_lo = std::max(f_lo, 0.0);
  f_hi = std::min(f_hi, top);
  const double df = psd.resolution_hz;
  auto value_at = [&](double f) {
    const double pos = f / df;
    const auto i = std::min(static_cast<std::size_t>(pos), psd.size() - 2);
    const double frac = pos - static_cast<double>(i);
    return psd.density[i] + frac * (psd.density[i + 1] - psd.density[i]);
  };
  const auto first = static_cast<std::size_t>(std::ceil(f_lo / df - 1e-9));
  const auto last = static_cast<std::size_t>(std::floor(f_hi / df + 1e-9));
  if (first > last) {
    // Band lies strictly inside one grid interval.
    return 0.5 * (value_at(f_lo) + value_at(f_hi)) * (f_hi - f_lo);
  }
  double total = 0.0;
  const double f_first = psd.freqs[first];
  const double f_last = psd.freqs[last];
  if (f_first > f_lo) total += 0.5 * (value_at(f_lo) + psd.density[first]) * (f_first - f_lo);
  for (std::size_t k = first; k < last; ++k) {
    total += 0.5 * (psd.density[k] + psd.density[k + 1]) * df;
  }
  if (f_hi > f_last) total += 0.5 * (psd.density[last] + value_at(f_hi)) * (f_hi - f_last);
  return total;
}

/// Total power over the whole grid.
inline double total_power(const Psd& psd) { return band_power(psd, 0.0, psd.max_freq()); }

namespace detail {

/// Height of peak i above the higher of its two bounding valleys. Each side
/// extends until a strictly higher sample or the edge of the grid.
inline double prominence(const std::vector<double>& db, std::size_t i) {
  const double h = db[i];
  double left_min = h;
  for (std::size_t j = i; j-- > 0;) {
    if (db[j] > h) break;
    left_min = std::min(left_min, db[j]);
  }
  double right_min = h;
  for (std::size_t j = i + 1; j < db.size(); ++j) {
    if (db[j] > h) break;
    right_min = std::min(right_min, db[j]);
  }
  return h - std::max(left_min, right_min);
}

/// Local maxima on the dB curve; a flat top reports its middle sample.
inline std::vector<std::size_t> local_maxima(const std::vector<double>& db) {
  std::vector<std::size_t> out;
  std::size_t i = 1;
  while (i + 1 < db.size()) {
    if (db[i] > db[i - 1]) {
      std::size_t ahead = i + 1;
      while (ahead + 1 < db.size() && db[ahead] == db[i]) ++ahead;
      if (db[ahead] < db[i]) {
        out.push_back((i + ahead - 1) / 2);
        i = ahead;
        continue;
      }
    }
    ++i;
  }
  return out;
}

}  // namespace detail

/// Local maxima of the dB spectrum with prominence >= min_prominence_db.
/// Among survivors closer than min_spacing_hz only the highest-level one is
/// kept (greedy from the top; equal levels prefer the lower frequency).
/// Result is sorted by frequency.
inline std::vector<SpectralPeak> find_peaks(const Psd& psd, double min_prominence_db = 3.0,
                                            double min_spacing_hz = 80.0) {
  if (psd.size() < 3) throw ParameterError("find_peaks: PSD needs at least 3 bins");
  std::vector<double> db(psd.size());
  for (std::size_t k = 0; k < psd.size(); ++k) db[k] = to_db(psd.density[k]);

  std::vector<SpectralPeak> candidates;
  for (std::size_t k : detail::local_maxima(db)) {
    const double prom = detail::prominence(db, k);
    if (prom >= min_prominence_db) candidates.push_back({psd.freqs[k], db[k], prom, k});
  }
  std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    if (a.level_db != b.level_db) return a.level_db > b.level_db;
    return a.freq < b.freq;
  });
  std::vector<SpectralPeak> kept;
  for (const auto& c : candidates) {
    const bool crowded = std::any_of(kept.begin(), kept.end(), [&](const SpectralPeak& k) {
      return std::abs(k.freq - c.freq) < min_spacing_hz;
    });
    if (!crowded) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.freq < b.freq; });
  return kept;
}

}  // namespace boltscope
