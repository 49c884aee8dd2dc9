#pragma once

#include "boltscope/errors.hpp"
#include "boltscope/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace boltscope {

struct Band {
  double lo = 0.0;
  double hi = 0.0;
  constexpr double width() const { return hi - lo; }
  constexpr bool operator==(const Band&) const = default;
};

/// Carrier band plus its multiples: harmonic l covers [l lo, l hi].
class BandRule {
public:
  constexpr BandRule() = default;
  constexpr BandRule(double carrier_lo, double carrier_hi) : lo_(carrier_lo), hi_(carrier_hi) {
    if (!(carrier_lo > 0.0 && carrier_lo < carrier_hi)) {
      throw ParameterError("BandRule: need 0 < carrier_lo < carrier_hi");
    }
  }

  constexpr double carrier_lo() const { return lo_; }
  constexpr double carrier_hi() const { return hi_; }
  constexpr Band carrier() const { return {lo_, hi_}; }
  constexpr Band harmonic_band(int l) const {
    return {static_cast<double>(l) * lo_, static_cast<double>(l) * hi_};
  }
  constexpr bool operator==(const BandRule&) const = default;

private:
  double lo_ = 125.0;
  double hi_ = 135.0;
};

inline constexpr BandRule kDefaultBandRule{125.0, 135.0};
static_assert(kDefaultBandRule.harmonic_band(2) == Band{250.0, 270.0});
static_assert(kDefaultBandRule.harmonic_band(6) == Band{750.0, 810.0});

struct HarmonicRatio {
  int l = 2;
  double value_db = 0.0;
  std::string channel;
};

enum class PreloadState { Loose, P20, P40, P80 };

inline constexpr std::array<PreloadState, 4> kAllStates{PreloadState::Loose, PreloadState::P20,
                                                        PreloadState::P40, PreloadState::P80};

inline constexpr double torque_nm(PreloadState s) {
  switch (s) {
    case PreloadState::Loose: return 0.0;
    case PreloadState::P20: return 12.5;
    case PreloadState::P40: return 25.0;
    case PreloadState::P80: return 50.0;
  }
  return 0.0;
}

inline constexpr double preload_fraction(PreloadState s) {
  switch (s) {
    case PreloadState::Loose: return 0.0;
    case PreloadState::P20: return 0.2;
    case PreloadState::P40: return 0.4;
    case PreloadState::P80: return 0.8;
  }
  return 0.0;
}

inline constexpr std::string_view state_name(PreloadState s) {
  switch (s) {
    case PreloadState::Loose: return "Loose";
    case PreloadState::P20: return "P20";
    case PreloadState::P40: return "P40";
    case PreloadState::P80: return "P80";
  }
  return "?";
}

inline std::optional<PreloadState> parse_state(std::string_view name) {
  for (auto s : kAllStates) {
    if (state_name(s) == name) return s;
  }
  return std::nullopt;
}

/// State whose nominal preload fraction is closest to p.
inline PreloadState state_for_fraction(double p) {
  PreloadState best = PreloadState::Loose;
  for (auto s : kAllStates) {
    if (std::abs(preload_fraction(s) - p) < std::abs(preload_fraction(best) - p)) best = s;
  }
  return best;
}

struct RatioEntry {
  double mean_db = 0.0;
  double halfband_db = 0.0;
};

/// Per-state harmonic ratios with error bands.
struct RatioTable {
  std::map<PreloadState, std::map<int, RatioEntry>> rows;
  int n_repeats = 0;
  BandRule band_rule = kDefaultBandRule;
  std::string channel = "accel-z";
  std::string table_id;

  const RatioEntry& at(PreloadState s, int l) const {
    auto row = rows.find(s);
    if (row == rows.end()) {
      throw ParameterError("RatioTable: no row for state " + std::string(state_name(s)));
    }
    auto e = row->second.find(l);
    if (e == row->second.end()) {
      throw ParameterError("RatioTable: state " + std::string(state_name(s)) + " has no l=" +
                           std::to_string(l));
    }
    return e->second;
  }

  bool has(PreloadState s, int l) const {
    auto row = rows.find(s);
    return row != rows.end() && row->second.count(l) != 0;
  }

  std::vector<int> orders() const {
    std::vector<int> out;
    if (!rows.empty()) {
      for (const auto& [l, e] : rows.begin()->second) out.push_back(l);
    }
    return out;
  }

  void validate() const {
    const auto ls = orders();
    for (const auto& [s, row] : rows) {
      std::vector<int> mine;
      for (const auto& [l, e] : row) {
        if (!(e.halfband_db >= 0.0)) throw ParameterError("RatioTable: negative halfband");
        mine.push_back(l);
      }
      if (mine != ls) throw ParameterError("RatioTable: states do not share the same l set");
    }
  }
};

inline double round_to(double v, double step) { return std::round(v / step) * step; }

/// 10 log10(P_harmonic / P_carrier). More negative means weaker harmonics.
inline HarmonicRatio harmonic_ratio(const Psd& psd, const BandRule& rule, int l,
                                    std::string channel = {}) {
  if (l < 2) throw ParameterError("harmonic_ratio: harmonic order must be >= 2");
  const Band hb = rule.harmonic_band(l);
  if (hb.hi > psd.max_freq() + 1e-9 * psd.resolution_hz) {
    throw ParameterError("harmonic_ratio: harmonic band l=" + std::to_string(l) + " reaches " +
                         std::to_string(hb.hi) + " Hz, beyond Nyquist; need sample rate >= " +
                         std::to_string(2.0 * hb.hi) + " Hz");
  }
  const double carrier = band_power(psd, rule.carrier_lo(), rule.carrier_hi());
  if (!(carrier > 0.0)) throw ParameterError("harmonic_ratio: carrier band power is zero");
  const double harmonic = band_power(psd, hb.lo, hb.hi);
  return {l, 10.0 * std::log10(std::max(harmonic, std::numeric_limits<double>::min()) / carrier),
          std::move(channel)};
}

/// Mean and half-range (max abs deviation from the mean) over repeated
/// measurements, both rounded to 0.1 dB.
inline RatioEntry ratio_with_errorband(const std::vector<Psd>& psds, const BandRule& rule, int l) {
  if (psds.size() < 2) throw ParameterError("ratio_with_errorband: need at least 2 repeats");
  for (const auto& p : psds) {
    if (!p.same_grid(psds.front())) throw ParameterError("ratio_with_errorband: mismatched PSD grids");
  }
  std::vector<double> values;
  for (const auto& p : psds) values.push_back(harmonic_ratio(p, rule, l).value_db);
  double m = 0.0;
  for (double v : values) m += v;
  m /= static_cast<double>(values.size());
  double half = 0.0;
  for (double v : values) half = std::max(half, std::abs(v - m));
  return {round_to(m, 0.1), round_to(half, 0.1) + 0.0};
}

/// Builds a RatioTable from repeated PSDs per state.
inline RatioTable build_ratio_table(const std::map<PreloadState, std::vector<Psd>>& repeats,
                                    const BandRule& rule, const std::vector<int>& orders,
                                    std::string channel, std::string table_id) {
  RatioTable t;
  t.band_rule = rule;
  t.channel = std::move(channel);
  t.table_id = std::move(table_id);
  for (const auto& [state, psds] : repeats) {
    if (t.n_repeats == 0) t.n_repeats = static_cast<int>(psds.size());
    if (static_cast<int>(psds.size()) != t.n_repeats) {
      throw ParameterError("build_ratio_table: unequal repeat counts across states");
    }
    for (int l : orders) t.rows[state][l] = ratio_with_errorband(psds, rule, l);
  }
  return t;
}

/// Highest-prominence peak inside [lo, hi]; argmax of density when no
/// peak passes the prominence rule.
inline double identify_resonance(const Psd& psd, double search_lo, double search_hi) {
  if (!(search_lo < search_hi)) throw ParameterError("identify_resonance: empty search band");
  if (search_lo < 0.0 || search_hi > psd.max_freq() + 1e-9) {
    throw ParameterError("identify_resonance: search band outside PSD grid");
  }
  const SpectralPeak* best = nullptr;
  const auto peaks = find_peaks(psd);
  for (const auto& p : peaks) {
    if (p.freq < search_lo || p.freq > search_hi) continue;
    if (!best || p.prominence_db > best->prominence_db) best = &p;
  }
  if (best) return best->freq;

  std::optional<std::size_t> arg;
  for (std::size_t k = 0; k < psd.size(); ++k) {
    if (psd.freqs[k] < search_lo || psd.freqs[k] > search_hi) continue;
    if (!arg || psd.density[k] > psd.density[*arg]) arg = k;
  }
  if (!arg) throw ParameterError("identify_resonance: no PSD bins inside search band");
  if (!(psd.density[*arg] > 0.0)) throw ParameterError("identify_resonance: zero power in band");
  return psd.freqs[*arg];
}

/// Peaks of `test` with no `reference` peak within match_tolerance_hz.
inline std::vector<SpectralPeak> new_peaks(const Psd& test, const Psd& reference,
                                           double match_tolerance_hz = 10.0,
                                           double min_prominence_db = 3.0,
                                           double min_spacing_hz = 80.0) {
  if (!test.same_grid(reference)) throw ParameterError("new_peaks: PSD grids differ");
  const auto ref = find_peaks(reference, min_prominence_db, min_spacing_hz);
  std::vector<SpectralPeak> out;
  for (const auto& p : find_peaks(test, min_prominence_db, min_spacing_hz)) {
    const bool matched = std::any_of(ref.begin(), ref.end(), [&](const SpectralPeak& r) {
      return std::abs(r.freq - p.freq) <= match_tolerance_hz;
    });
    if (!matched) out.push_back(p);
  }
  return out;
}

}  // namespace boltscope
