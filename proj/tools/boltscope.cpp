// boltscope: stimulus generation, joint simulation and preload analysis.
//
//   boltscope generate --kind fm --carrier 130 --mod-freq 2 --deviation 5 --out fm.wav
//   boltscope simulate --out data/
//   boltscope analyze data/p0_tone_130_r0.wav --out report.json
//   boltscope compare loose.wav --reference tight.wav
//   boltscope classify report.json
//
// Exit codes: 0 ok / tight, 1 error, 2 alarm (classify only).

#include "boltscope/classify.hpp"
#include "boltscope/dataset.hpp"
#include "boltscope/excitation.hpp"
#include "boltscope/features.hpp"
#include "boltscope/jointsim.hpp"
#include "boltscope/report.hpp"
#include "boltscope/signal_io.hpp"
#include "boltscope/spectral.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#ifndef BOLTSCOPE_REFERENCE_DIR
#define BOLTSCOPE_REFERENCE_DIR "reference"
#endif

namespace fs = std::filesystem;
using namespace boltscope;

namespace {

std::uint64_t default_seed(std::uint64_t fallback) {
  if (const char* env = std::getenv("BOLTSCOPE_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ParameterError(std::string("BOLTSCOPE_SEED is not an unsigned integer: ") + env);
    }
  }
  return fallback;
}

io::WavEncoding parse_encoding(const std::string& s) {
  if (s == "float32") return io::WavEncoding::Float32;
  if (s == "pcm16") return io::WavEncoding::Pcm16;
  if (s == "pcm24") return io::WavEncoding::Pcm24;
  throw ParameterError("unknown encoding '" + s + "'");
}

void emit(const std::string& content, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << content << std::flush;
  } else {
    io::write_atomic(out, content);
  }
}

RatioTable load_table(const std::string& path) {
  if (!path.empty()) return load_ratio_table(path);
  const fs::path bundled = fs::path(BOLTSCOPE_REFERENCE_DIR) / "table1.json";
  std::error_code ec;
  if (fs::exists(bundled, ec)) return load_ratio_table(bundled);
  return reference_table();
}

struct Loaded {
  TimeSeries series;
  InputInfo info;
};

Loaded load_channel(const std::string& path, const std::string& channel, bool channel_given) {
  auto all = io::ingest(path);
  const TimeSeries* pick = nullptr;
  if (all.size() == 1) {
    pick = &all.front();
  } else {
    for (const auto& ts : all) {
      if (ts.channel == channel) pick = &ts;
    }
    if (!pick) {
      std::string names;
      for (const auto& ts : all) names += (names.empty() ? "" : ", ") + ts.channel;
      throw FormatError(path + ": no channel '" + channel + "' (available: " + names + ")");
    }
  }
  Loaded l{*pick, {}};
  if (channel_given) l.series.channel = channel;
  l.info = {path, l.series.channel, l.series.sample_rate, l.series.size()};
  return l;
}

struct CommonOpts {
  std::string config_path;
  std::string channel;
  std::string out;
  std::string table;
};

AnalysisConfig resolve_config(const CommonOpts& o) {
  AnalysisConfig cfg = o.config_path.empty() ? AnalysisConfig{} : load_config(o.config_path);
  if (!o.channel.empty()) cfg.channel = o.channel;
  if (!o.table.empty()) cfg.reference_table_path = o.table;
  return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "Analysis config JSON");
  cmd->add_option("--channel", o.channel, "Channel label to analyze");
  cmd->add_option("--out", o.out, "Output path ('-' or empty: stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"boltscope - vibro-acoustic bolt preload analysis"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Render a stimulus to WAV or CSV");
  std::string kind = "tone";
  double amplitude = 1.0, duration = 1.0, sample_rate = kDefaultSampleRate;
  double freq = 130.0, carrier = 130.0, mod_freq = 2.0, deviation = 5.0;
  double f_start = 1.0, f_end = 5000.0, f_lo = 100.0, f_hi = 350.0;
  std::optional<std::uint64_t> seed;
  std::string gen_out, encoding = "float32";
  gen->add_option("--kind", kind, "tone | fm | sweep | noise")
      ->check(CLI::IsMember({"tone", "fm", "sweep", "noise"}));
  gen->add_option("--amplitude", amplitude);
  gen->add_option("--duration", duration, "Seconds");
  gen->add_option("--sample-rate", sample_rate);
  gen->add_option("--freq", freq, "Tone frequency (Hz)");
  gen->add_option("--carrier", carrier, "FM carrier (Hz)");
  gen->add_option("--mod-freq", mod_freq, "FM modulation frequency (Hz)");
  gen->add_option("--deviation", deviation, "FM peak deviation (Hz)");
  gen->add_option("--f-start", f_start);
  gen->add_option("--f-end", f_end);
  gen->add_option("--f-lo", f_lo);
  gen->add_option("--f-hi", f_hi);
  gen->add_option("--seed", seed, "Noise seed (default: BOLTSCOPE_SEED or 7)");
  gen->add_option("--encoding", encoding, "WAV encoding: float32 | pcm16 | pcm24");
  gen->add_option("--out", gen_out, "Output .wav or .csv")->required();

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run the joint simulator over a protocol");
  std::vector<double> preloads{0.0, 0.2, 0.4, 0.8};
  std::string protocol_name = "standard", sim_format = "wav", sim_out;
  int repeats = 3;
  std::optional<std::uint64_t> sim_seed;
  double sim_duration = 8.0, sim_amplitude = 1.0;
  SimConfig sim_cfg;
  sim->add_option("--preload", preloads, "Preload fractions")->delimiter(',');
  sim->add_option("--protocol", protocol_name, "standard | tone | fm2 | sweep | noise")
      ->check(CLI::IsMember({"standard", "tone", "fm2", "sweep", "noise"}));
  sim->add_option("--repeats", repeats, "Noise seeds per stimulus")->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "Base seed (default: BOLTSCOPE_SEED or 1)");
  sim->add_option("--duration", sim_duration);
  sim->add_option("--amplitude", sim_amplitude, "Excitation force amplitude (N)");
  sim->add_option("--noise-rms", sim_cfg.noise_floor_rms);
  sim->add_option("--format", sim_format)->check(CLI::IsMember({"wav", "csv"}));
  sim->add_option("--out", sim_out, "Dataset directory")->required();

  // analyze / compare / classify
  CommonOpts an_opts, cmp_opts, cls_opts;
  std::string an_input, an_psd_csv, an_peaks_csv;
  auto* an = app.add_subcommand("analyze", "Analyze one recording");
  an->add_option("input", an_input)->required();
  add_common(an, an_opts);
  an->add_option("--table", an_opts.table, "Ratio table for classification");
  an->add_option("--psd-csv", an_psd_csv, "Write PSD plot data");
  an->add_option("--peaks-csv", an_peaks_csv, "Write peak list");

  std::string cmp_input, cmp_reference;
  auto* cmp = app.add_subcommand("compare", "Analyze a recording against a reference state");
  cmp->add_option("input", cmp_input)->required();
  cmp->add_option("--reference", cmp_reference)->required();
  add_common(cmp, cmp_opts);
  cmp->add_option("--table", cmp_opts.table, "Ratio table for classification");

  std::string cls_input;
  std::optional<double> threshold;
  auto* cls = app.add_subcommand("classify", "Classify a report, feature file or recording");
  cls->add_option("input", cls_input, "Report/feature JSON or .wav/.csv recording")->required();
  add_common(cls, cls_opts);
  cls->add_option("--table", cls_opts.table, "Ratio table (default: bundled table1.json)");
  cls->add_option("--threshold", threshold, "Alarm threshold in dB above the P80 mean");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      ExcitationSpec spec;
      if (kind == "tone") spec = make_tone(freq, amplitude, duration);
      else if (kind == "fm") spec = make_fm(carrier, mod_freq, deviation, amplitude, duration);
      else if (kind == "sweep") spec = make_sweep(f_start, f_end, amplitude, duration);
      else spec = make_band_noise(f_lo, f_hi, seed.value_or(default_seed(7)), amplitude, duration);
      TimeSeries ts = render(spec, sample_rate);
      io::write_signal(gen_out, {ts}, parse_encoding(encoding));
      std::cout << "wrote " << gen_out << " (" << ts.size() << " samples at " << sample_rate
                << " Hz)\n";
      if (const auto* fm = std::get_if<Fm>(&spec.params)) {
        std::cout << "beta=" << io::format_double(fm->modulation_index(), 6) << "\n";
      }
      return 0;
    }

    if (sim->parsed()) {
      sim_cfg.duration = sim_duration;
      const std::uint64_t base_seed = sim_seed.value_or(default_seed(1));
      std::vector<ExcitationSpec> protocol;
      if (protocol_name == "standard") protocol = standard_protocol(sim_amplitude, sim_duration);
      else if (protocol_name == "tone") protocol = {make_tone(130.0, sim_amplitude, sim_duration)};
      else if (protocol_name == "fm2") protocol = {make_fm(130.0, 2.0, 5.0, sim_amplitude, sim_duration)};
      else if (protocol_name == "sweep") protocol = {make_sweep(1.0, 5000.0, sim_amplitude, sim_duration)};
      else protocol = {make_band_noise(100.0, 350.0, base_seed, sim_amplitude, sim_duration)};

      const JointModel base = tuned_joint();
      std::vector<DatasetFile> files;
      for (double p : preloads) {
        const JointModel model = preload_to_params(p, base);
        for (int r = 0; r < repeats; ++r) {
          SimConfig cfg = sim_cfg;
          cfg.seed = entry_seed(base_seed, static_cast<std::size_t>(r) + 1000);
          auto data = run_protocol(model, protocol, cfg);
          for (auto& e : data) {
            const std::string stem = "p" + io::format_double(p, 6) + "_" + describe(e.spec) + "_r" +
                                     std::to_string(r);
            files.push_back({stem + "." + sim_format, std::move(e), torque_nm(state_for_fraction(p)),
                             static_cast<std::size_t>(r)});
          }
        }
      }
      write_dataset(sim_out, files, base, sim_cfg);
      std::cout << "wrote " << files.size() << " responses and manifest.json to " << sim_out << "\n";
      return 0;
    }

    if (an->parsed() || cmp->parsed()) {
      const bool comparing = cmp->parsed();
      const CommonOpts& o = comparing ? cmp_opts : an_opts;
      const AnalysisConfig cfg = resolve_config(o);
      const bool channel_given = !o.channel.empty();
      const Loaded test = load_channel(comparing ? cmp_input : an_input, cfg.channel, channel_given);
      std::optional<Loaded> ref;
      if (comparing) ref = load_channel(cmp_reference, cfg.channel, channel_given);
      std::optional<RatioTable> table;
      if (!cfg.reference_table_path.empty()) table = load_table(cfg.reference_table_path);
      const Report report =
          analyze(test.series, test.info, cfg, ref ? &ref->series : nullptr,
                  ref ? &ref->info : nullptr, table ? &*table : nullptr);
      if (!an_psd_csv.empty() && !comparing) {
        io::write_atomic(an_psd_csv, psd_csv(estimate_psd(test.series, cfg.psd)));
      }
      if (!an_peaks_csv.empty() && !comparing) io::write_atomic(an_peaks_csv, peaks_csv(report.peaks));
      emit(dump(to_json(report)), o.out);
      return 0;
    }

    if (cls->parsed()) {
      const AnalysisConfig cfg = resolve_config(cls_opts);
      const RatioTable table = load_table(cls_opts.table);
      std::vector<HarmonicRatio> features;
      const std::string ext = fs::path(cls_input).extension().string();
      if (ext == ".json") {
        const json j = parse_json_file(cls_input);
        features = ratios_from_json(j.contains("ratios") ? j.at("ratios") : j);
      } else {
        const Loaded in = load_channel(cls_input, cfg.channel, !cls_opts.channel.empty());
        features = compute_ratios(estimate_psd(in.series, cfg.psd), cfg, in.series.channel);
      }
      const double thr = threshold.value_or(cfg.alarm_threshold_db);
      const Classification c = classify(features, table);
      const bool raised = alarm(features, table, thr);
      json j = to_json(c, table);
      j["alarm"] = raised;
      j["threshold_db"] = sig6(thr);
      emit(dump(j), cls_opts.out);
      return raised ? 2 : 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "boltscope: error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
