#include "boltscope/excitation.hpp"
#include "boltscope/features.hpp"
#include "boltscope/jointsim.hpp"
#include "boltscope/spectral.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace boltscope;

namespace {

TimeSeries respond(double p, const ExcitationSpec& spec, std::uint64_t seed = 1) {
  SimConfig cfg;
  cfg.duration = spec.duration;
  cfg.seed = seed;
  return run_protocol(preload_to_params(p, tuned_joint()), {spec}, cfg).front().response;
}

double r2_of(const TimeSeries& ts) {
  return harmonic_ratio(welch_psd_default(ts), kDefaultBandRule, 2).value_db;
}

}  // namespace

TEST(PreloadToParams, Boundaries) {
  const JointModel base = tuned_joint();
  const auto tight = preload_to_params(1.0, base);
  EXPECT_DOUBLE_EQ(tight.slip_force(), base.slip_force_at_full_preload);
  EXPECT_DOUBLE_EQ(tight.clearance(), 0.0);
  EXPECT_DOUBLE_EQ(tight.effective_stiffness(), base.modal_stiffness);
  EXPECT_DOUBLE_EQ(tight.bearing_stiffness(), 0.0);

  const auto loose = preload_to_params(0.0, base);
  EXPECT_DOUBLE_EQ(loose.slip_force(), 0.0);
  EXPECT_DOUBLE_EQ(loose.clearance(), base.clearance_at_zero_preload);
  EXPECT_DOUBLE_EQ(loose.effective_stiffness(), base.contact_stiffness_ratio * base.modal_stiffness);
}

TEST(PreloadToParams, LinearLaws) {
  const JointModel base = tuned_joint();
  for (double p : {0.2, 0.4, 0.8}) {
    const auto m = preload_to_params(p, base);
    EXPECT_NEAR(m.slip_force(), p * base.slip_force_at_full_preload, 1e-12);
    EXPECT_NEAR(m.clearance(), (1.0 - p) * base.clearance_at_zero_preload, 1e-18);
    const double r = base.contact_stiffness_ratio;
    EXPECT_NEAR(m.effective_stiffness() / base.modal_stiffness, r + (1.0 - r) * p, 1e-12);
  }
}

TEST(PreloadToParams, FiftyNewtonMetresIsEightyPercent) {
  EXPECT_DOUBLE_EQ(torque_nm(PreloadState::P80), 50.0);
  EXPECT_DOUBLE_EQ(preload_fraction(PreloadState::P80), 0.8);
  const auto m = preload_to_params(preload_fraction(PreloadState::P80), tuned_joint());
  EXPECT_DOUBLE_EQ(m.preload_fraction, 0.8);
}

TEST(PreloadToParams, RejectsOutOfRange) {
  EXPECT_THROW(preload_to_params(-0.1, tuned_joint()), ParameterError);
  EXPECT_THROW(preload_to_params(1.01, tuned_joint()), ParameterError);
}

TEST(JointModel, TunedTo130Hz) {
  EXPECT_NEAR(preload_to_params(1.0, tuned_joint()).natural_frequency(), 130.0, 0.5);
  const auto m = preload_to_params(1.0, tuned_joint());
  EXPECT_NEAR(std::sqrt(m.effective_stiffness() / m.modal_mass) / (2 * std::numbers::pi), 130.0, 0.5);
}

TEST(SimConfig, Validation) {
  SimConfig cfg;
  EXPECT_NO_THROW(cfg.validate(5000.0));
  EXPECT_THROW(cfg.validate(6000.0), ParameterError);  // step > 1/(20 f)
  cfg.output_sample_rate = 3.0e5;
  EXPECT_THROW(cfg.validate(), ParameterError);
  cfg = SimConfig{};
  cfg.integrator_step = 1.0 / 70000.0;  // not an integer multiple of 1/25600
  EXPECT_THROW(cfg.validate(), ParameterError);
}

TEST(JointDynamics, EnergyConservedInFreeDecay) {
  // Two conservative configurations: linear (no slider, closed clearance) and
  // a stuck slider that never reaches its slip force.
  JointModel linear = tuned_joint();
  linear.modal_damping_ratio = 0.0;
  linear.clearance_at_zero_preload = 0.0;
  linear = preload_to_params(0.0, linear);

  JointModel stuck = tuned_joint();
  stuck.modal_damping_ratio = 0.0;
  stuck.slip_force_at_full_preload = 1e9;
  stuck = preload_to_params(1.0, stuck);

  const SimConfig cfg;
  for (const auto& model : {linear, stuck}) {
    const JointDynamics dyn(model);
    auto s = dyn.initial_state(1e-4, 0.0);
    const double e0 = dyn.energy(s);
    const double period = 1.0 / model.natural_frequency();
    const auto steps = static_cast<std::size_t>(100.0 * period / cfg.integrator_step);
    for (std::size_t i = 0; i < steps; ++i) s = dyn.rk4_step(s, cfg.integrator_step, 0, 0, 0);
    EXPECT_LT(std::abs(dyn.energy(s) - e0) / e0, 1e-3);
  }
}

TEST(JointDynamics, DeadZoneIsOneSided) {
  JointModel m = preload_to_params(0.0, tuned_joint());
  const JointDynamics dyn(m);
  const double k_d = m.bearing_stiffness();
  const double c = m.clearance();
  EXPECT_DOUBLE_EQ(dyn.contact_force(1e-5), k_d * 1e-5);
  EXPECT_DOUBLE_EQ(dyn.contact_force(-0.5 * c), 0.0);
  EXPECT_NEAR(dyn.contact_force(-c - 1e-5), -k_d * 1e-5, 1e-12);
}

TEST(Simulate, LinearLimitResonance) {
  // p = 1, clearance 0, slider never slips: FRF peak at the tuned frequency.
  JointModel model = tuned_joint();
  model.slip_force_at_full_preload = 1e9;
  model = preload_to_params(1.0, model);
  SimConfig cfg;
  cfg.duration = 10.0;
  cfg.noise_floor_rms = 0.0;
  const auto spec = make_sweep(1.0, 5000.0, 1.0, 10.0);
  const auto ex = render(spec, 1.0 / cfg.integrator_step);
  const auto resp = simulate_response(model, ex, cfg, highest_frequency(spec));
  const auto ex_out = render(spec, cfg.output_sample_rate);
  const Psd pr = welch_psd_default(resp), pe = welch_psd_default(ex_out);
  // |H(f)|^2 = S_yy / S_xx; peak of the acceleration FRF magnitude in 100..350 Hz.
  std::size_t best = 0;
  double best_h = -1.0;
  for (std::size_t k = 0; k < pr.size(); ++k) {
    if (pr.freqs[k] < 100.0 || pr.freqs[k] > 350.0 || pe.density[k] <= 0.0) continue;
    const double h = pr.density[k] / pe.density[k];
    if (h > best_h) best_h = h, best = k;
  }
  EXPECT_NEAR(pr.freqs[best], 130.0, 2.0);
}

TEST(Simulate, TightJointIsNearlyLinear) {
  const Psd psd = welch_psd_default(respond(1.0, make_tone(130.0, 1.0, 8.0)));
  const double carrier = band_power(psd, 125.0, 135.0);
  const double second = band_power(psd, 250.0, 270.0);
  EXPECT_LE(10.0 * std::log10(second / carrier), -40.0);
}

TEST(Simulate, LooseJointRaisesSecondHarmonic) {
  const auto spec = make_tone(130.0, 1.0, 8.0);
  EXPECT_GE(r2_of(respond(0.0, spec, 5)) - r2_of(respond(0.8, spec, 5)), 15.0);
}

TEST(Simulate, QuiescentWithoutExcitation) {
  SimConfig cfg;
  cfg.duration = 2.0;
  cfg.noise_floor_rms = 0.01;
  const TimeSeries silence(std::vector<double>(static_cast<std::size_t>(2.0 * 102400), 0.0), 102400.0);
  const auto resp = simulate_response(preload_to_params(0.0, tuned_joint()), silence, cfg);
  EXPECT_LE(rms(resp), 3.0 * cfg.noise_floor_rms);
}

TEST(Simulate, SecondHarmonicPowerNonIncreasingInPreload) {
  for (const auto& spec : {make_tone(130.0, 1.0, 6.0), make_fm(130.0, 2.0, 5.0, 1.0, 6.0)}) {
    double prev = std::numeric_limits<double>::infinity();
    for (double p : {0.0, 0.2, 0.4, 0.8}) {
      const double h = band_power(welch_psd_default(respond(p, spec, 3)), 250.0, 270.0);
      EXPECT_LE(h, prev) << describe(spec) << " p=" << p;
      prev = h;
    }
  }
}

TEST(Simulate, Deterministic) {
  const auto spec = make_fm(130.0, 2.0, 5.0, 1.0, 2.0);
  const auto a = respond(0.2, spec, 42);
  const auto b = respond(0.2, spec, 42);
  const auto c = respond(0.2, spec, 43);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_NE(a.samples, c.samples);
}

TEST(Simulate, DetectsInstability) {
  // Step far beyond the RK4 stability limit for a 130 Hz oscillator.
  JointModel stiff = tuned_joint(130.0);
  stiff.modal_stiffness *= 1e6;  // ~130 kHz mode
  SimConfig cfg;
  cfg.duration = 0.2;
  cfg.noise_floor_rms = 0.0;
  const auto ex = render(make_tone(130.0, 1.0, 0.2), 102400.0);
  try {
    simulate_response(preload_to_params(1.0, stiff), ex, cfg);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("integrator_step"), std::string::npos);
  }
}

TEST(Simulate, RejectsUndersampledExcitation) {
  const auto ex = render(make_tone(130.0, 1.0, 1.0), 8000.0);
  SimConfig cfg;
  cfg.duration = 1.0;
  EXPECT_THROW(simulate_response(tuned_joint(), ex, cfg), ParameterError);
}

TEST(RunProtocol, StandardGrid) {
  const auto protocol = standard_protocol(1.0, 1.0);
  ASSERT_EQ(protocol.size(), 6u);
  EXPECT_EQ(protocol[0].kind(), ExcitationKind::Tone);
  const double expected_fm[] = {1.0, 2.0, 5.0, 10.0, 20.0};
  for (std::size_t i = 1; i < protocol.size(); ++i) {
    const auto& fm = std::get<Fm>(protocol[i].params);
    EXPECT_DOUBLE_EQ(fm.mod_freq, expected_fm[i - 1]);
    EXPECT_DOUBLE_EQ(fm.carrier - fm.deviation, 125.0);
    EXPECT_DOUBLE_EQ(fm.carrier + fm.deviation, 135.0);
  }
  SimConfig cfg;
  cfg.duration = 1.0;
  const auto data = run_protocol(preload_to_params(0.4, tuned_joint()), protocol, cfg);
  ASSERT_EQ(data.size(), protocol.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(describe(data[i].spec), describe(protocol[i]));
    EXPECT_DOUBLE_EQ(data[i].preload_fraction, 0.4);
    EXPECT_EQ(data[i].seed, entry_seed(cfg.seed, i));
    EXPECT_EQ(data[i].response.size(), 25600u);
  }
}

TEST(RunProtocol, EmptyProtocolRejected) {
  EXPECT_THROW(run_protocol(tuned_joint(), {}, SimConfig{}), ParameterError);
}

TEST(RunProtocol, ThreeSeedsGiveThreeDatasets) {
  SimConfig cfg;
  cfg.duration = 1.0;
  std::vector<std::vector<double>> first_samples;
  for (std::uint64_t s : {1u, 2u, 3u}) {
    cfg.seed = s;
    first_samples.push_back(
        run_protocol(tuned_joint(), {make_tone(130, 1, 1)}, cfg).front().response.samples);
  }
  EXPECT_NE(first_samples[0], first_samples[1]);
  EXPECT_NE(first_samples[1], first_samples[2]);
}
