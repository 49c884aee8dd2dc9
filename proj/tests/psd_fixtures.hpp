#pragma once

#include "boltscope/spectral.hpp"

#include <cmath>
#include <utility>
#include <vector>

namespace fixture {

struct Line {
  double freq;
  double above_floor_db;
};

/// Synthetic PSD: monotone smooth floor plus Gaussian bumps (sigma = 1 bin).
inline boltscope::Psd synthetic_psd(const std::vector<Line>& lines, double fs = 25600.0,
                                    double resolution = 0.5) {
  boltscope::Psd psd;
  psd.resolution_hz = resolution;
  const auto bins = static_cast<std::size_t>(fs / 2.0 / resolution) + 1;
  psd.freqs.resize(bins);
  psd.density.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    const double f = static_cast<double>(k) * resolution;
    const double floor = 1e-6 / (1.0 + (f / 2000.0) * (f / 2000.0));
    double bump = 0.0;
    for (const auto& l : lines) {
      const double z = (f - l.freq) / resolution;
      bump = std::max(bump, (std::pow(10.0, l.above_floor_db / 10.0) - 1.0) * std::exp(-0.5 * z * z));
    }
    psd.freqs[k] = f;
    psd.density[k] = floor * (1.0 + bump);
  }
  psd.estimator = {"synthetic", 2 * (bins - 1), 0.0, 1};
  return psd;
}

inline boltscope::Psd flat_psd(double level, double fs = 25600.0, double resolution = 0.5) {
  boltscope::Psd psd;
  psd.resolution_hz = resolution;
  const auto bins = static_cast<std::size_t>(fs / 2.0 / resolution) + 1;
  for (std::size_t k = 0; k < bins; ++k) {
    psd.freqs.push_back(static_cast<double>(k) * resolution);
    psd.density.push_back(level);
  }
  psd.estimator = {"synthetic", 2 * (bins - 1), 0.0, 1};
  return psd;
}

}  // namespace fixture
