#pragma once

#include "boltscope/errors.hpp"
#include "boltscope/fft.hpp"
#include "boltscope/time_series.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace boltscope {

inline constexpr double kDefaultSampleRate = 25600.0;

struct Tone {
  double freq = 130.0;
};

/// Sinusoidal FM around a carrier. The modulation index is derived as
/// deviation / mod_freq so the instantaneous frequency spans
/// [carrier - deviation, carrier + deviation].
struct Fm {
  double carrier = 130.0;
  double mod_freq = 2.0;
  double deviation = 5.0;

  double modulation_index() const { return deviation / mod_freq; }
};

/// Linear chirp.
struct Sweep {
  double f_start = 1.0;
  double f_end = 5000.0;
};

/// Gaussian noise band-limited to [f_lo, f_hi].
struct BandNoise {
  double f_lo = 100.0;
  double f_hi = 350.0;
  std::uint64_t seed = 0;
};

enum class ExcitationKind { Tone, Fm, Sweep, BandNoise };

struct ExcitationSpec {
  double amplitude = 1.0;
  double duration = 1.0;  // s
  std::variant<Tone, Fm, Sweep, BandNoise> params;

  ExcitationKind kind() const { return static_cast<ExcitationKind>(params.index()); }
};

inline ExcitationSpec make_tone(double freq, double amplitude, double duration) {
  return {amplitude, duration, Tone{freq}};
}
inline ExcitationSpec make_fm(double carrier, double mod_freq, double deviation, double amplitude,
                              double duration) {
  return {amplitude, duration, Fm{carrier, mod_freq, deviation}};
}
inline ExcitationSpec make_sweep(double f_start, double f_end, double amplitude, double duration) {
  return {amplitude, duration, Sweep{f_start, f_end}};
}
inline ExcitationSpec make_band_noise(double f_lo, double f_hi, std::uint64_t seed,
                                      double amplitude, double duration) {
  return {amplitude, duration, BandNoise{f_lo, f_hi, seed}};
}

inline const char* kind_name(ExcitationKind k) {
  switch (k) {
    case ExcitationKind::Tone: return "tone";
    case ExcitationKind::Fm: return "fm";
    case ExcitationKind::Sweep: return "sweep";
    case ExcitationKind::BandNoise: return "bandnoise";
  }
  return "?";
}

/// Short human-readable identifier, used for file names in datasets.
inline std::string describe(const ExcitationSpec& spec) {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return std::string(buf);
  };
  return std::visit(
      [&](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Tone>) {
          return "tone_" + num(p.freq);
        } else if constexpr (std::is_same_v<T, Fm>) {
          return "fm_" + num(p.carrier) + "_fm" + num(p.mod_freq) + "_dev" + num(p.deviation);
        } else if constexpr (std::is_same_v<T, Sweep>) {
          return "sweep_" + num(p.f_start) + "_" + num(p.f_end);
        } else {
          return "bandnoise_" + num(p.f_lo) + "_" + num(p.f_hi) + "_s" + std::to_string(p.seed);
        }
      },
      spec.params);
}

namespace detail {

inline std::size_t sample_count(const ExcitationSpec& spec, double sample_rate, const char* who) {
  if (!(sample_rate > 0.0)) throw ParameterError(std::string(who) + ": sample_rate must be > 0");
  if (!(spec.duration > 0.0)) throw ParameterError(std::string(who) + ": duration must be > 0");
  if (!std::isfinite(spec.amplitude) || spec.amplitude < 0.0) {
    throw ParameterError(std::string(who) + ": amplitude must be finite and >= 0");
  }
  const double n = std::round(spec.duration * sample_rate);
  if (n < 1.0) throw ParameterError(std::string(who) + ": duration shorter than one sample");
  return static_cast<std::size_t>(n);
}

inline void check_frequency(double f, double sample_rate, const char* who, const char* what) {
  if (!(f > 0.0)) {
    throw ParameterError(std::string(who) + ": " + what + " must be > 0 Hz");
  }
  if (!(f < 0.5 * sample_rate)) {
    throw ParameterError(std::string(who) + ": " + what + " " + std::to_string(f) +
                         " Hz is at/above Nyquist (" + std::to_string(0.5 * sample_rate) + " Hz)");
  }
}

template <class Tag>
const Tag& expect(const ExcitationSpec& spec, const char* who) {
  const Tag* p = std::get_if<Tag>(&spec.params);
  if (!p) throw ParameterError(std::string(who) + ": wrong excitation kind");
  return *p;
}

}  // namespace detail

inline TimeSeries gen_tone(const ExcitationSpec& spec, double sample_rate = kDefaultSampleRate) {
  const auto& tone = detail::expect<Tone>(spec, "gen_tone");
  detail::check_frequency(tone.freq, sample_rate, "gen_tone", "frequency");
  const std::size_t n = detail::sample_count(spec, sample_rate, "gen_tone");
  std::vector<double> x(n);
  const double w = 2.0 * std::numbers::pi * tone.freq / sample_rate;
  for (std::size_t i = 0; i < n; ++i) x[i] = spec.amplitude * std::sin(w * static_cast<double>(i));
  return {std::move(x), sample_rate, "excitation"};
}

inline TimeSeries gen_fm(const ExcitationSpec& spec, double sample_rate = kDefaultSampleRate) {
  const auto& fm = detail::expect<Fm>(spec, "gen_fm");
  if (!(fm.mod_freq > 0.0)) {
    throw ParameterError("gen_fm: modulation frequency must be > 0 (modulation index undefined)");
  }
  if (!(fm.deviation >= 0.0)) throw ParameterError("gen_fm: deviation must be >= 0");
  if (!(fm.carrier - fm.deviation > 0.0)) {
    throw ParameterError("gen_fm: carrier - deviation must stay above 0 Hz");
  }
  detail::check_frequency(fm.carrier + fm.deviation, sample_rate, "gen_fm", "carrier + deviation");
  const std::size_t n = detail::sample_count(spec, sample_rate, "gen_fm");
  const double beta = fm.modulation_index();
  std::vector<double> x(n);
  const double wc = 2.0 * std::numbers::pi * fm.carrier;
  const double wm = 2.0 * std::numbers::pi * fm.mod_freq;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    x[i] = spec.amplitude * std::sin(wc * t + beta * std::sin(wm * t));
  }
  return {std::move(x), sample_rate, "excitation"};
}

inline double sweep_instantaneous_frequency(const ExcitationSpec& spec, double t) {
  const auto& s = detail::expect<Sweep>(spec, "sweep_instantaneous_frequency");
  return s.f_start + (s.f_end - s.f_start) * t / spec.duration;
}

inline TimeSeries gen_sweep(const ExcitationSpec& spec, double sample_rate = kDefaultSampleRate) {
  const auto& s = detail::expect<Sweep>(spec, "gen_sweep");
  detail::check_frequency(s.f_start, sample_rate, "gen_sweep", "f_start");
  detail::check_frequency(s.f_end, sample_rate, "gen_sweep", "f_end");
  if (s.f_start > s.f_end) throw ParameterError("gen_sweep: f_start must not exceed f_end");
  const std::size_t n = detail::sample_count(spec, sample_rate, "gen_sweep");
  // phase(t) = 2 pi (f0 t + (f1 - f0) t^2 / (2 T))
  const double rate = (s.f_end - s.f_start) / spec.duration;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    x[i] = spec.amplitude * std::sin(2.0 * std::numbers::pi * (s.f_start * t + 0.5 * rate * t * t));
  }
  return {std::move(x), sample_rate, "excitation"};
}

/// Frequency-domain synthesis: complex Gaussian bins inside the band, zero
/// elsewhere, inverse transform, then rescaled so max |x| = amplitude.
inline TimeSeries gen_bandnoise(const ExcitationSpec& spec,
                                double sample_rate = kDefaultSampleRate) {
  const auto& b = detail::expect<BandNoise>(spec, "gen_bandnoise");
  if (!(b.f_lo > 0.0) || !(b.f_lo < b.f_hi)) {
    throw ParameterError("gen_bandnoise: band must satisfy 0 < f_lo < f_hi");
  }
  detail::check_frequency(b.f_hi, sample_rate, "gen_bandnoise", "f_hi");
  const std::size_t n = detail::sample_count(spec, sample_rate, "gen_bandnoise");
  const double df = sample_rate / static_cast<double>(n);

  std::mt19937_64 rng(b.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::complex<double>> half(n / 2 + 1);
  for (std::size_t k = 1; k < half.size(); ++k) {
    // Draw for every bin so the stream does not depend on band edges.
    const double re = gauss(rng);
    const double im = gauss(rng);
    const double f = static_cast<double>(k) * df;
    if (f >= b.f_lo && f <= b.f_hi) half[k] = {re, im};
  }
  if (n % 2 == 0) half.back() = {half.back().real(), 0.0};

  std::vector<double> x = fft::inverse_real(half, n);
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  const double scale = peak > 0.0 ? spec.amplitude / peak : 0.0;
  for (double& v : x) v *= scale;
  return {std::move(x), sample_rate, "excitation"};
}

/// Render any stimulus kind.
inline TimeSeries render(const ExcitationSpec& spec, double sample_rate = kDefaultSampleRate) {
  switch (spec.kind()) {
    case ExcitationKind::Tone: return gen_tone(spec, sample_rate);
    case ExcitationKind::Fm: return gen_fm(spec, sample_rate);
    case ExcitationKind::Sweep: return gen_sweep(spec, sample_rate);
    case ExcitationKind::BandNoise: return gen_bandnoise(spec, sample_rate);
  }
  throw ParameterError("render: unknown excitation kind");
}

/// Highest frequency present in the stimulus, for step-size checks.
inline double highest_frequency(const ExcitationSpec& spec) {
  return std::visit(
      [](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Tone>) return p.freq;
        else if constexpr (std::is_same_v<T, Fm>) return p.carrier + p.deviation;
        else if constexpr (std::is_same_v<T, Sweep>) return std::max(p.f_start, p.f_end);
        else return p.f_hi;
      },
      spec.params);
}

}  // namespace boltscope
