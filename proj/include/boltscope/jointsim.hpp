#pragma once

// Single-degree-of-freedom bolted-joint surrogate.
//
// Restoring force on the modal coordinate x is the sum of
//   * a linear backbone spring     r k x                     (the structure)
//   * a Jenkins element            spring (1-r) k p in series with a slider
//                                  of slip force p F_s       (clamped friction)
//   * a one-sided dead-zone spring (1-r) k (1-p), engaged for x >= 0 and for
//                                  x < -c with clearance c = (1-p) c0
//                                  (bearing contact of the loose shank)
// plus viscous modal damping. At p = 1 the dead zone vanishes and a stuck
// Jenkins element leaves a linear oscillator of stiffness k. As p drops the
// clearance opens; the asymmetric dead zone produces even and odd harmonics,
// the slider adds odd harmonics once it slips.
//
// The slider uses a smooth Bouc-Wen style elastic-plastic law for the
// element force f:
//   df/dt = k_t v (1 - |f/F_s|^n * (1 + tanh(f v / (F_s v_eps))) / 2)
// n is the yield exponent and v_eps the tanh velocity scale of the loading
// switch. This keeps the right-hand side continuous so fixed-step RK4 can run
// without event handling.

#include "boltscope/errors.hpp"
#include "boltscope/excitation.hpp"
#include "boltscope/time_series.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace boltscope {

struct JointModel {
  double modal_mass = 1.0;  // kg
  double modal_stiffness = 1.0 * std::pow(2.0 * std::numbers::pi * 130.0, 2);  // N/m
  double modal_damping_ratio = 0.01;
  double preload_fraction = 1.0;
  double slip_force_at_full_preload = 2.0;    // N
  double clearance_at_zero_preload = 4.0e-5;  // m
  double contact_stiffness_ratio = 0.9;
  double yield_exponent = 8.0;
  double friction_velocity_scale = 1.0e-4;  // m/s

  double slip_force() const { return preload_fraction * slip_force_at_full_preload; }
  double clearance() const { return (1.0 - preload_fraction) * clearance_at_zero_preload; }
  double backbone_stiffness() const { return contact_stiffness_ratio * modal_stiffness; }
  double friction_stiffness() const {
    return (1.0 - contact_stiffness_ratio) * modal_stiffness * preload_fraction;
  }
  double bearing_stiffness() const {
    return (1.0 - contact_stiffness_ratio) * modal_stiffness * (1.0 - preload_fraction);
  }
  /// Small-amplitude stiffness with the slider stuck and the clearance open.
  double effective_stiffness() const { return backbone_stiffness() + friction_stiffness(); }
  double damping_coefficient() const {
    return 2.0 * modal_damping_ratio * std::sqrt(modal_stiffness * modal_mass);
  }
  /// Undamped natural frequency of the fully clamped joint.
  double natural_frequency() const {
    return std::sqrt(modal_stiffness / modal_mass) / (2.0 * std::numbers::pi);
  }

  void validate() const {
    if (!(preload_fraction >= 0.0 && preload_fraction <= 1.0)) {
      throw ParameterError("JointModel: preload_fraction must be in [0,1]");
    }
    if (!(modal_mass > 0.0) || !(modal_stiffness > 0.0) || !(modal_damping_ratio >= 0.0) ||
        !(slip_force_at_full_preload >= 0.0) || !(clearance_at_zero_preload >= 0.0)) {
      throw ParameterError("JointModel: physical parameters must be positive");
    }
    if (!(contact_stiffness_ratio > 0.0 && contact_stiffness_ratio <= 1.0)) {
      throw ParameterError("JointModel: contact_stiffness_ratio must be in (0,1]");
    }
    if (!(yield_exponent >= 1.0) || !(friction_velocity_scale > 0.0)) {
      throw ParameterError("JointModel: friction smoothing parameters must be positive");
    }
  }
};

/// Joint model with the stiffness tuned to a given natural frequency.
inline JointModel tuned_joint(double natural_hz = 130.0, double mass = 1.0) {
  JointModel m;
  m.modal_mass = mass;
  m.modal_stiffness = mass * std::pow(2.0 * std::numbers::pi * natural_hz, 2);
  return m;
}

/// Preload fraction mapped onto contact parameters. The laws are linear
/// stand-ins: slip force ~ p, clearance ~ (1-p), stiffness between r k and k.
inline JointModel preload_to_params(double p, const JointModel& base) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ParameterError("preload_to_params: preload fraction must be in [0,1], got " +
                         std::to_string(p));
  }
  JointModel m = base;
  m.preload_fraction = p;
  m.validate();
  return m;
}

struct SimConfig {
  double integrator_step = 1.0 / (4.0 * kDefaultSampleRate);  // s
  double duration = 8.0;                                       // s
  double output_sample_rate = kDefaultSampleRate;              // Hz
  double noise_floor_rms = 1.0e-3;                             // output units
  std::uint64_t seed = 1;

  /// Integration substeps per output sample.
  std::size_t decimation() const {
    const double ratio = 1.0 / (integrator_step * output_sample_rate);
    return static_cast<std::size_t>(std::llround(ratio));
  }

  void validate(double highest_excited_hz = 0.0) const {
    if (!(integrator_step > 0.0) || !(duration > 0.0) || !(output_sample_rate > 0.0) ||
        !(noise_floor_rms >= 0.0)) {
      throw ParameterError("SimConfig: step, duration and sample rate must be positive");
    }
    const double ratio = 1.0 / (integrator_step * output_sample_rate);
    if (ratio < 1.0 - 1e-9) {
      throw ParameterError("SimConfig: output_sample_rate exceeds 1/integrator_step");
    }
    if (std::abs(ratio - std::round(ratio)) > 1e-6 * ratio) {
      throw ParameterError("SimConfig: 1/(integrator_step*output_sample_rate) must be an integer");
    }
    if (highest_excited_hz > 0.0 && integrator_step > 1.0 / (20.0 * highest_excited_hz) * (1 + 1e-12)) {
      throw ParameterError("SimConfig: integrator_step " + std::to_string(integrator_step) +
                           " s exceeds 1/(20 f_max) for f_max = " +
                           std::to_string(highest_excited_hz) + " Hz");
    }
  }
};

/// State and right-hand side of the joint ODE. State = {x, v, f_jenkins}.
class JointDynamics {
public:
  using State = std::array<double, 3>;

  explicit JointDynamics(const JointModel& model)
      : m_(model.modal_mass),
        c_(model.damping_coefficient()),
        k_b_(model.backbone_stiffness()),
        k_t_(model.friction_stiffness()),
        k_d_(model.bearing_stiffness()),
        slip_(model.slip_force()),
        gap_(model.clearance()),
        n_(model.yield_exponent),
        v_eps_(model.friction_velocity_scale),
        has_slider_(k_t_ > 0.0 && slip_ > 0.0) {}

  double contact_force(double x) const {
    if (k_d_ == 0.0) return 0.0;
    if (x >= 0.0) return k_d_ * x;
    if (x >= -gap_) return 0.0;
    return k_d_ * (x + gap_);
  }

  double restoring_force(const State& s) const { return k_b_ * s[0] + s[2] + contact_force(s[0]); }

  double acceleration(const State& s, double force) const {
    return (force - restoring_force(s) - c_ * s[1]) / m_;
  }

  State derivative(const State& s, double force) const {
    double df = 0.0;
    if (has_slider_) {
      const double ratio = std::abs(s[2] / slip_);
      const double loading = 0.5 * (1.0 + std::tanh(s[2] * s[1] / (slip_ * v_eps_)));
      df = k_t_ * s[1] * (1.0 - std::pow(ratio, n_) * loading);
    }
    return {s[1], acceleration(s, force), df};
  }

  State rk4_step(const State& s, double h, double f0, double f_half, double f1) const {
    const State k1 = derivative(s, f0);
    const State k2 = derivative(add(s, k1, 0.5 * h), f_half);
    const State k3 = derivative(add(s, k2, 0.5 * h), f_half);
    const State k4 = derivative(add(s, k3, h), f1);
    State out;
    for (std::size_t i = 0; i < 3; ++i) {
      out[i] = s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return out;
  }

  /// Kinetic plus elastic energy; conserved when the joint is undamped and
  /// the slider never yields.
  double energy(const State& s) const {
    const double x = s[0];
    double contact = 0.0;
    if (x >= 0.0) contact = 0.5 * k_d_ * x * x;
    else if (x < -gap_) contact = 0.5 * k_d_ * (x + gap_) * (x + gap_);
    const double slider = k_t_ > 0.0 ? 0.5 * s[2] * s[2] / k_t_ : 0.0;
    return 0.5 * m_ * s[1] * s[1] + 0.5 * k_b_ * x * x + contact + slider;
  }

  /// Initial state at displacement x0, velocity v0, slider unloaded at x=0
  /// (its spring stretched by x0 if stuck from rest).
  State initial_state(double x0, double v0) const { return {x0, v0, has_slider_ ? k_t_ * x0 : 0.0}; }

private:
  static State add(const State& s, const State& d, double h) {
    return {s[0] + h * d[0], s[1] + h * d[1], s[2] + h * d[2]};
  }

  double m_, c_, k_b_, k_t_, k_d_, slip_, gap_, n_, v_eps_;
  bool has_slider_;
};

/// Integrates the joint under the excitation (treated as force in N) and
/// returns the acceleration response at cfg.output_sample_rate with additive
/// Gaussian measurement noise. Excitation past its end is zero.
inline TimeSeries simulate_response(const JointModel& model, const TimeSeries& excitation,
                                    const SimConfig& cfg, double highest_excited_hz = 0.0) {
  model.validate();
  cfg.validate(highest_excited_hz);
  require_non_empty(excitation, "simulate_response");
  if (excitation.sample_rate < cfg.output_sample_rate * (1.0 - 1e-12)) {
    throw ParameterError("simulate_response: excitation sample rate below output sample rate");
  }

  const JointDynamics dyn(model);
  const double h = cfg.integrator_step;
  const std::size_t decim = cfg.decimation();
  const auto n_out = static_cast<std::size_t>(std::llround(cfg.duration * cfg.output_sample_rate));
  const double fe = excitation.sample_rate;
  const auto& ex = excitation.samples;
  auto force_at = [&](double t) {
    const double pos = t * fe;
    if (pos < 0.0) return 0.0;
    const auto i = static_cast<std::size_t>(pos);
    if (i >= ex.size()) return 0.0;
    if (i + 1 == ex.size()) return ex[i];
    const double frac = pos - static_cast<double>(i);
    return ex[i] + frac * (ex[i + 1] - ex[i]);
  };
  const double limit = 1e6 * std::max(peak_abs(excitation), 1e-12);

  std::vector<double> out(n_out);
  JointDynamics::State s{0.0, 0.0, 0.0};
  std::size_t step = 0;
  for (std::size_t j = 0; j < n_out; ++j) {
    const double t_out = static_cast<double>(j) / cfg.output_sample_rate;
    const double a = dyn.acceleration(s, force_at(t_out));
    if (!std::isfinite(a) || std::abs(a) * model.modal_mass > limit) {
      throw NumericalError("simulate_response: integrator unstable at t=" + std::to_string(t_out) +
                           " s with integrator_step=" + std::to_string(h) +
                           " s; reduce the step size");
    }
    out[j] = a;
    for (std::size_t sub = 0; sub < decim; ++sub, ++step) {
      const double t = static_cast<double>(step) * h;
      s = dyn.rk4_step(s, h, force_at(t), force_at(t + 0.5 * h), force_at(t + h));
    }
  }

  if (cfg.noise_floor_rms > 0.0) {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, cfg.noise_floor_rms);
    for (double& v : out) v += gauss(rng);
  }
  return {std::move(out), cfg.output_sample_rate, "accel-z"};
}

struct DatasetEntry {
  ExcitationSpec spec;
  double preload_fraction = 0.0;
  std::uint64_t seed = 0;
  TimeSeries response;
};

/// Seed used for protocol entry `index` of a run seeded with `base`.
inline std::uint64_t entry_seed(std::uint64_t base, std::size_t index) {
  return base + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(index);
}

/// Runs every stimulus of the protocol through the model, in order. Stimuli
/// are rendered at the integrator rate; each entry gets its own noise seed.
inline std::vector<DatasetEntry> run_protocol(const JointModel& model,
                                              const std::vector<ExcitationSpec>& protocol,
                                              const SimConfig& cfg) {
  if (protocol.empty()) throw ParameterError("run_protocol: protocol is empty");
  std::vector<DatasetEntry> dataset;
  dataset.reserve(protocol.size());
  const double render_rate = cfg.output_sample_rate * static_cast<double>(cfg.decimation());
  for (std::size_t i = 0; i < protocol.size(); ++i) {
    SimConfig entry_cfg = cfg;
    entry_cfg.seed = entry_seed(cfg.seed, i);
    const TimeSeries stimulus = render(protocol[i], render_rate);
    dataset.push_back({protocol[i], model.preload_fraction, entry_cfg.seed,
                       simulate_response(model, stimulus, entry_cfg,
                                         highest_frequency(protocol[i]))});
  }
  return dataset;
}

/// Single 130 Hz tone plus FM around 130 Hz (+-5 Hz) at f_m = 1, 2, 5, 10, 20 Hz.
inline std::vector<ExcitationSpec> standard_protocol(double amplitude = 1.0, double duration = 8.0) {
  std::vector<ExcitationSpec> protocol{make_tone(130.0, amplitude, duration)};
  for (double fm : {1.0, 2.0, 5.0, 10.0, 20.0}) {
    protocol.push_back(make_fm(130.0, fm, 5.0, amplitude, duration));
  }
  return protocol;
}

}  // namespace boltscope
