#pragma once

// Analysis configuration, reports and the JSON schemas for reports, ratio
// tables and classifications. All JSON goes out with sorted keys and floats
// rounded to 6 significant digits so equal inputs give byte-identical files.

#include "boltscope/classify.hpp"
#include "boltscope/errors.hpp"
#include "boltscope/features.hpp"
#include "boltscope/signal_io.hpp"
#include "boltscope/spectral.hpp"
#include "boltscope/time_series.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace boltscope {

using json = nlohmann::json;

/// Rounds to 6 significant digits.
inline double sig6(double v) {
  if (!std::isfinite(v)) throw NumericalError("non-finite value in JSON output");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  const double r = std::strtod(buf, nullptr);
  return r == 0.0 ? 0.0 : r;  // no "-0.0"
}

struct PsdParams {
  Window window = Window::Hann;
  double resolution_hz = 0.5;
  double overlap = 0.5;
};

struct PeakParams {
  double min_prominence_db = 3.0;
  double min_spacing_hz = 80.0;
  double match_tolerance_hz = 10.0;
};

struct AnalysisConfig {
  BandRule band_rule = kDefaultBandRule;
  std::vector<int> harmonics{2, 6};
  PsdParams psd;
  PeakParams peaks;
  Band resonance_search{100.0, 350.0};
  std::string channel = "accel-z";
  std::string reference_table_path;  // empty: no classification
  double alarm_threshold_db = 6.0;
};

inline json to_json(const AnalysisConfig& c) {
  return {
      {"band_rule", {{"carrier_lo_hz", sig6(c.band_rule.carrier_lo())},
                     {"carrier_hi_hz", sig6(c.band_rule.carrier_hi())}}},
      {"harmonics", c.harmonics},
      {"psd", {{"window", window_name(c.psd.window)},
               {"resolution_hz", sig6(c.psd.resolution_hz)},
               {"overlap", sig6(c.psd.overlap)}}},
      {"peaks", {{"min_prominence_db", sig6(c.peaks.min_prominence_db)},
                 {"min_spacing_hz", sig6(c.peaks.min_spacing_hz)},
                 {"match_tolerance_hz", sig6(c.peaks.match_tolerance_hz)}}},
      {"resonance_search", {{"lo_hz", sig6(c.resonance_search.lo)},
                            {"hi_hz", sig6(c.resonance_search.hi)}}},
      {"channel", c.channel},
      {"reference_table_path", c.reference_table_path},
      {"alarm_threshold_db", sig6(c.alarm_threshold_db)},
  };
}

/// Missing keys keep their defaults.
inline AnalysisConfig config_from_json(const json& j) {
  AnalysisConfig c;
  try {
    if (j.contains("band_rule")) {
      const auto& b = j.at("band_rule");
      c.band_rule = BandRule(b.value("carrier_lo_hz", c.band_rule.carrier_lo()),
                             b.value("carrier_hi_hz", c.band_rule.carrier_hi()));
    }
    if (j.contains("harmonics")) c.harmonics = j.at("harmonics").get<std::vector<int>>();
    if (j.contains("psd")) {
      const auto& p = j.at("psd");
      const std::string w = p.value("window", std::string(window_name(c.psd.window)));
      if (w == "hann") c.psd.window = Window::Hann;
      else if (w == "rectangular") c.psd.window = Window::Rectangular;
      else throw ParameterError("config: unknown window '" + w + "'");
      c.psd.resolution_hz = p.value("resolution_hz", c.psd.resolution_hz);
      c.psd.overlap = p.value("overlap", c.psd.overlap);
    }
    if (j.contains("peaks")) {
      const auto& p = j.at("peaks");
      c.peaks.min_prominence_db = p.value("min_prominence_db", c.peaks.min_prominence_db);
      c.peaks.min_spacing_hz = p.value("min_spacing_hz", c.peaks.min_spacing_hz);
      c.peaks.match_tolerance_hz = p.value("match_tolerance_hz", c.peaks.match_tolerance_hz);
    }
    if (j.contains("resonance_search")) {
      const auto& r = j.at("resonance_search");
      c.resonance_search = {r.value("lo_hz", c.resonance_search.lo),
                            r.value("hi_hz", c.resonance_search.hi)};
    }
    c.channel = j.value("channel", c.channel);
    c.reference_table_path = j.value("reference_table_path", c.reference_table_path);
    c.alarm_threshold_db = j.value("alarm_threshold_db", c.alarm_threshold_db);
  } catch (const json::exception& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  for (int l : c.harmonics) {
    if (l < 2) throw ParameterError("config: harmonic orders must be >= 2");
  }
  if (!(c.psd.resolution_hz > 0.0)) throw ParameterError("config: resolution_hz must be > 0");
  return c;
}

inline json parse_json_file(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": invalid JSON: " + e.what());
  }
}

inline AnalysisConfig load_config(const std::filesystem::path& path) {
  return config_from_json(parse_json_file(path));
}

// ---- ratio tables ---------------------------------------------------------

inline json to_json(const RatioTable& t) {
  json j;
  for (const auto& [state, row] : t.rows) {
    json r = json::object();
    for (const auto& [l, e] : row) {
      r[std::to_string(l)] = {{"mean_db", sig6(e.mean_db)}, {"halfband_db", sig6(e.halfband_db)}};
    }
    j[std::string(state_name(state))] = r;
  }
  j["n_repeats"] = t.n_repeats;
  j["band_rule"] = {{"carrier_lo_hz", sig6(t.band_rule.carrier_lo())},
                    {"carrier_hi_hz", sig6(t.band_rule.carrier_hi())}};
  j["channel"] = t.channel;
  j["table_id"] = t.table_id;
  return j;
}

/// Inverse of to_json(RatioTable); state rows are the keys named after
/// PreloadState values.
inline RatioTable ratio_table_from_json(const json& j) {
  RatioTable t;
  try {
    t.n_repeats = j.at("n_repeats").get<int>();
    if (j.contains("band_rule")) {
      const auto& b = j.at("band_rule");
      t.band_rule = BandRule(b.at("carrier_lo_hz").get<double>(), b.at("carrier_hi_hz").get<double>());
    }
    t.channel = j.value("channel", std::string{});
    t.table_id = j.value("table_id", std::string{});
    for (auto it = j.begin(); it != j.end(); ++it) {
      const auto state = parse_state(it.key());
      if (!state) continue;
      for (auto e = it->begin(); e != it->end(); ++e) {
        t.rows[*state][std::stoi(e.key())] = {e->at("mean_db").get<double>(),
                                              e->at("halfband_db").get<double>()};
      }
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("ratio table: ") + e.what());
  } catch (const std::logic_error& e) {
    throw FormatError(std::string("ratio table: bad harmonic key: ") + e.what());
  }
  if (t.rows.empty()) throw FormatError("ratio table: no state rows");
  t.validate();
  return t;
}

inline RatioTable load_ratio_table(const std::filesystem::path& path) {
  return ratio_table_from_json(parse_json_file(path));
}

/// Reference ratios (dB, mean +- half-band over three runs).
inline RatioTable reference_table() {
  RatioTable t;
  t.n_repeats = 3;
  t.band_rule = kDefaultBandRule;
  t.channel = "unspecified";
  t.table_id = "table1-v1";
  t.rows[PreloadState::Loose] = {{2, {-43.8, 0.4}}, {6, {-21.5, 0.4}}};
  t.rows[PreloadState::P20] = {{2, {-55.5, 0.1}}, {6, {-53.7, 0.6}}};
  t.rows[PreloadState::P40] = {{2, {-58.8, 0.0}}, {6, {-53.4, 0.8}}};
  t.rows[PreloadState::P80] = {{2, {-61.3, 0.1}}, {6, {-58.0, 0.5}}};
  return t;
}

// ---- features and classification ------------------------------------------

inline json to_json(const HarmonicRatio& r) {
  return {{"l", r.l}, {"value_db", sig6(r.value_db)}, {"channel", r.channel}};
}

inline std::vector<HarmonicRatio> ratios_from_json(const json& j) {
  std::vector<HarmonicRatio> out;
  try {
    for (const auto& r : j) {
      out.push_back({r.at("l").get<int>(), r.at("value_db").get<double>(),
                     r.value("channel", std::string{})});
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("ratios: ") + e.what());
  }
  return out;
}

inline json to_json(const Classification& c, const RatioTable& table) {
  json d = json::object();
  for (const auto& [l, v] : c.per_l_distance) d[std::to_string(l)] = sig6(v);
  return {{"state", std::string(state_name(c.state))},
          {"margin_db", sig6(c.margin_db)},
          {"per_l_distance", d},
          {"table_id", table.table_id},
          {"channel", table.channel}};
}

inline json to_json(const SpectralPeak& p) {
  return {{"freq_hz", sig6(p.freq)},
          {"level_db", sig6(p.level_db)},
          {"prominence_db", sig6(p.prominence_db)}};
}

// ---- reports --------------------------------------------------------------

struct InputInfo {
  std::string path;
  std::string channel;
  double sample_rate = 0.0;
  std::size_t n_samples = 0;
};

struct Report {
  InputInfo input;
  std::optional<InputInfo> reference;
  EstimatorInfo estimator;
  double resolution_hz = 0.0;
  double resonance_hz = 0.0;
  std::vector<SpectralPeak> peaks;
  std::optional<std::vector<SpectralPeak>> new_peaks;
  std::vector<HarmonicRatio> ratios;
  std::optional<Classification> classification;
  std::optional<RatioTable> table;
  std::optional<bool> alarm;
  AnalysisConfig config;
};

inline json to_json(const InputInfo& i) {
  return {{"path", i.path},
          {"channel", i.channel},
          {"sample_rate_hz", sig6(i.sample_rate)},
          {"n_samples", i.n_samples}};
}

inline json to_json(const Report& r) {
  json j;
  j["input"] = to_json(r.input);
  j["psd_estimator"] = {{"window", r.estimator.window_name},
                        {"segment_length", r.estimator.segment_length},
                        {"overlap_fraction", sig6(r.estimator.overlap_fraction)},
                        {"n_segments", r.estimator.n_segments},
                        {"resolution_hz", sig6(r.resolution_hz)}};
  j["resonance_hz"] = sig6(r.resonance_hz);
  j["peaks"] = json::array();
  for (const auto& p : r.peaks) j["peaks"].push_back(to_json(p));
  if (r.reference) j["reference"] = to_json(*r.reference);
  if (r.new_peaks) {
    j["new_peaks"] = json::array();
    for (const auto& p : *r.new_peaks) j["new_peaks"].push_back(to_json(p));
  }
  j["ratios"] = json::array();
  for (const auto& h : r.ratios) j["ratios"].push_back(to_json(h));
  if (r.classification && r.table) j["classification"] = to_json(*r.classification, *r.table);
  if (r.alarm) j["alarm"] = *r.alarm;
  j["config"] = to_json(r.config);
  return j;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

/// PSD under the configured estimator. The segment is shortened to the
/// signal length when the signal is too short for the requested resolution.
inline Psd estimate_psd(const TimeSeries& ts, const PsdParams& p) {
  std::size_t seg = segment_for_resolution(ts.sample_rate, p.resolution_hz);
  seg = std::min(seg, ts.size());
  return welch_psd(ts, seg, p.overlap, p.window);
}

inline std::vector<HarmonicRatio> compute_ratios(const Psd& psd, const AnalysisConfig& cfg,
                                                 const std::string& channel) {
  std::vector<HarmonicRatio> out;
  for (int l : cfg.harmonics) out.push_back(harmonic_ratio(psd, cfg.band_rule, l, channel));
  return out;
}

/// Full single-input analysis; optional reference adds new_peaks, optional
/// table adds classification and alarm.
inline Report analyze(const TimeSeries& ts, const InputInfo& info, const AnalysisConfig& cfg,
                      const TimeSeries* reference = nullptr, const InputInfo* ref_info = nullptr,
                      const RatioTable* table = nullptr) {
  require_non_empty(ts, "analyze");
  Report r;
  r.input = info;
  r.config = cfg;
  const Psd psd = estimate_psd(ts, cfg.psd);
  r.estimator = psd.estimator;
  r.resolution_hz = psd.resolution_hz;
  r.resonance_hz = identify_resonance(psd, cfg.resonance_search.lo,
                                      std::min(cfg.resonance_search.hi, psd.max_freq()));
  r.peaks = find_peaks(psd, cfg.peaks.min_prominence_db, cfg.peaks.min_spacing_hz);
  r.ratios = compute_ratios(psd, cfg, ts.channel);
  if (reference) {
    if (reference->sample_rate != ts.sample_rate) {
      throw ParameterError("analyze: reference sample rate differs from test input");
    }
    PsdParams p = cfg.psd;
    const Psd ref = [&] {
      const std::size_t seg = psd.estimator.segment_length;
      if (seg > reference->size()) throw ParameterError("analyze: reference shorter than PSD segment");
      return welch_psd(*reference, seg, p.overlap, p.window);
    }();
    r.new_peaks = new_peaks(psd, ref, cfg.peaks.match_tolerance_hz, cfg.peaks.min_prominence_db,
                            cfg.peaks.min_spacing_hz);
    if (ref_info) r.reference = *ref_info;
  }
  if (table) {
    r.table = *table;
    r.classification = classify(r.ratios, *table);
    r.alarm = alarm(r.ratios, *table, cfg.alarm_threshold_db);
  }
  return r;
}

/// PSD as CSV (freq_hz, density, level_db) with estimator parameters in
/// '#' header comments.
inline std::string psd_csv(const Psd& psd) {
  std::string out = "# window=" + psd.estimator.window_name +
                    " segment_length=" + std::to_string(psd.estimator.segment_length) +
                    " overlap_fraction=" + io::format_double(psd.estimator.overlap_fraction, 6) +
                    " n_segments=" + std::to_string(psd.estimator.n_segments) +
                    " resolution_hz=" + io::format_double(psd.resolution_hz, 9) + "\n";
  out += "freq_hz,density,level_db\n";
  for (std::size_t k = 0; k < psd.size(); ++k) {
    out += io::format_double(psd.freqs[k], 10) + "," + io::format_double(psd.density[k], 10) + "," +
           io::format_double(to_db(psd.density[k]), 8) + "\n";
  }
  return out;
}

inline std::string peaks_csv(const std::vector<SpectralPeak>& peaks) {
  std::string out = "freq_hz,level_db,prominence_db\n";
  for (const auto& p : peaks) {
    out += io::format_double(p.freq, 10) + "," + io::format_double(p.level_db, 8) + "," +
           io::format_double(p.prominence_db, 8) + "\n";
  }
  return out;
}

}  // namespace boltscope
