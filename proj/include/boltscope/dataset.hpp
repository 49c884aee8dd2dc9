#pragma once

#include "boltscope/excitation.hpp"
#include "boltscope/features.hpp"
#include "boltscope/jointsim.hpp"
#include "boltscope/report.hpp"
#include "boltscope/signal_io.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace boltscope {

inline json to_json(const ExcitationSpec& spec) {
  json j{{"kind", kind_name(spec.kind())},
         {"amplitude", sig6(spec.amplitude)},
         {"duration_s", sig6(spec.duration)}};
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Tone>) {
          j["freq_hz"] = sig6(p.freq);
        } else if constexpr (std::is_same_v<T, Fm>) {
          j["carrier_hz"] = sig6(p.carrier);
          j["mod_freq_hz"] = sig6(p.mod_freq);
          j["deviation_hz"] = sig6(p.deviation);
          j["modulation_index"] = sig6(p.modulation_index());
        } else if constexpr (std::is_same_v<T, Sweep>) {
          j["f_start_hz"] = sig6(p.f_start);
          j["f_end_hz"] = sig6(p.f_end);
        } else {
          j["f_lo_hz"] = sig6(p.f_lo);
          j["f_hi_hz"] = sig6(p.f_hi);
          j["seed"] = p.seed;
        }
      },
      spec.params);
  return j;
}

inline json to_json(const JointModel& m) {
  return {{"modal_mass_kg", sig6(m.modal_mass)},
          {"modal_stiffness_n_per_m", sig6(m.modal_stiffness)},
          {"modal_damping_ratio", sig6(m.modal_damping_ratio)},
          {"preload_fraction", sig6(m.preload_fraction)},
          {"slip_force_at_full_preload_n", sig6(m.slip_force_at_full_preload)},
          {"clearance_at_zero_preload_m", sig6(m.clearance_at_zero_preload)},
          {"contact_stiffness_ratio", sig6(m.contact_stiffness_ratio)},
          {"yield_exponent", sig6(m.yield_exponent)},
          {"friction_velocity_scale_m_per_s", sig6(m.friction_velocity_scale)}};
}

struct DatasetFile {
  std::string file;
  DatasetEntry entry;
  double torque_nm = 0.0;
  std::size_t repeat = 0;
};

/// Writes each response as `<stem>.<ext>` in `dir` and a manifest.json
/// describing every file. Writes are atomic per file; the manifest goes last.
inline json write_dataset(const std::filesystem::path& dir, const std::vector<DatasetFile>& files,
                          const JointModel& base, const SimConfig& cfg,
                          io::WavEncoding enc = io::WavEncoding::Float32) {
  std::filesystem::create_directories(dir);
  json manifest;
  manifest["scaling_law"] =
      "linear stand-in: slip force ~ p, clearance ~ (1-p), stiffness r*k..k; not measured";
  manifest["base_model"] = to_json(base);
  manifest["sim"] = {{"integrator_step_s", sig6(cfg.integrator_step)},
                     {"duration_s", sig6(cfg.duration)},
                     {"output_sample_rate_hz", sig6(cfg.output_sample_rate)},
                     {"noise_floor_rms", sig6(cfg.noise_floor_rms)}};
  manifest["files"] = json::array();
  for (const auto& f : files) {
    io::write_signal(dir / f.file, {f.entry.response}, enc);
    manifest["files"].push_back({{"file", f.file},
                                 {"spec", to_json(f.entry.spec)},
                                 {"preload_fraction", sig6(f.entry.preload_fraction)},
                                 {"torque_nm", sig6(f.torque_nm)},
                                 {"repeat", f.repeat},
                                 {"seed", f.entry.seed},
                                 {"channel", f.entry.response.channel},
                                 {"sample_rate_hz", sig6(f.entry.response.sample_rate)}});
  }
  io::write_atomic(dir / "manifest.json", dump(manifest));
  return manifest;
}

}  // namespace boltscope
