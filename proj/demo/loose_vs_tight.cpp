// Simulates the loose and 80 % preload joints under the 130 Hz tone and
// prints their harmonic ratios next to the bundled reference table.

#include "boltscope/classify.hpp"
#include "boltscope/excitation.hpp"
#include "boltscope/features.hpp"
#include "boltscope/jointsim.hpp"
#include "boltscope/report.hpp"
#include "boltscope/spectral.hpp"

#include <cstdio>

int main() {
  using namespace boltscope;
  const JointModel base = tuned_joint();
  const RatioTable table = reference_table();
  for (PreloadState s : {PreloadState::Loose, PreloadState::P80}) {
    const JointModel model = preload_to_params(preload_fraction(s), base);
    const auto data = run_protocol(model, {make_tone(130.0, 1.0, 8.0)}, SimConfig{});
    const Psd psd = welch_psd_default(data.front().response);
    const auto r2 = harmonic_ratio(psd, kDefaultBandRule, 2, "accel-z");
    const auto r6 = harmonic_ratio(psd, kDefaultBandRule, 6, "accel-z");
    std::printf("%-5s  R2 = %7.1f dB (ref %6.1f)   R6 = %7.1f dB (ref %6.1f)   resonance %.1f Hz\n",
                std::string(state_name(s)).c_str(), r2.value_db, table.at(s, 2).mean_db, r6.value_db,
                table.at(s, 6).mean_db, identify_resonance(psd, 100.0, 350.0));
  }
  return 0;
}
