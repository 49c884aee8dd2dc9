#pragma once

#include "boltscope/errors.hpp"
#include "boltscope/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

namespace boltscope {

struct Classification {
  PreloadState state = PreloadState::P80;
  double margin_db = 0.0;
  std::map<int, double> per_l_distance;  // for the winning state
};

/// Distances closer than this count as ties.
inline constexpr double kTieToleranceDb = 1e-9;

namespace detail {
inline double tightness(PreloadState s) { return preload_fraction(s); }
}  // namespace detail

/// Nearest state by mean absolute dB distance over the supplied orders.
/// Ties go to the tighter state.
inline Classification classify(const std::vector<HarmonicRatio>& features, const RatioTable& table) {
  if (features.empty()) throw ParameterError("classify: no features");
  if (table.rows.empty()) throw ParameterError("classify: table has no rows");
  for (const auto& f : features) {
    for (const auto& [s, row] : table.rows) {
      if (!row.count(f.l)) {
        throw ParameterError("classify: l=" + std::to_string(f.l) + " missing from table");
      }
    }
  }

  struct Scored {
    PreloadState state;
    double distance;
  };
  std::vector<Scored> scored;
  for (const auto& [s, row] : table.rows) {
    double d = 0.0;
    for (const auto& f : features) d += std::abs(f.value_db - row.at(f.l).mean_db);
    scored.push_back({s, d / static_cast<double>(features.size())});
  }
  auto better = [](const Scored& a, const Scored& b) {
    if (std::abs(a.distance - b.distance) <= kTieToleranceDb) {
      return detail::tightness(a.state) > detail::tightness(b.state);
    }
    return a.distance < b.distance;
  };
  std::sort(scored.begin(), scored.end(), better);

  Classification c;
  c.state = scored.front().state;
  c.margin_db = scored.size() > 1 ? std::max(0.0, scored[1].distance - scored[0].distance) : 0.0;
  for (const auto& f : features) {
    c.per_l_distance[f.l] = std::abs(f.value_db - table.at(c.state, f.l).mean_db);
  }
  return c;
}

/// mean_db(a, l) - mean_db(b, l).
inline double separation(const RatioTable& table, PreloadState a, PreloadState b, int l) {
  return table.at(a, l).mean_db - table.at(b, l).mean_db;
}

/// True iff any feature sits above the tight (P80) mean for its order by
/// more than threshold_db plus the P80 half-band.
inline bool alarm(const std::vector<HarmonicRatio>& features, const RatioTable& table,
                  double threshold_db) {
  if (!table.rows.count(PreloadState::P80)) {
    throw ParameterError("alarm: table has no P80 (tight reference) row");
  }
  for (const auto& f : features) {
    const RatioEntry& tight = table.at(PreloadState::P80, f.l);
    if (f.value_db - tight.mean_db > threshold_db + tight.halfband_db) return true;
  }
  return false;
}

}  // namespace boltscope
