#include "boltscope/classify.hpp"
#include "boltscope/report.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace boltscope;

namespace {

std::vector<HarmonicRatio> row_features(const RatioTable& t, PreloadState s) {
  std::vector<HarmonicRatio> f;
  for (int l : t.orders()) f.push_back({l, t.at(s, l).mean_db, "accel-z"});
  return f;
}

}  // namespace

TEST(Classify, LooseRow) {
  const auto c = classify({{2, -43.8, ""}, {6, -21.5, ""}}, reference_table());
  EXPECT_EQ(c.state, PreloadState::Loose);
  EXPECT_GT(c.margin_db, 0.0);
}

TEST(Classify, EveryRowRecoversItself) {
  const RatioTable t = reference_table();
  for (auto s : kAllStates) {
    const auto c = classify(row_features(t, s), t);
    EXPECT_EQ(c.state, s) << state_name(s);
    EXPECT_GT(c.margin_db, 0.0);
    for (const auto& [l, d] : c.per_l_distance) EXPECT_EQ(d, 0.0);
  }
}

TEST(Classify, MidpointTieGoesToTighterState) {
  const RatioTable t = reference_table();
  std::vector<HarmonicRatio> mid;
  for (int l : {2, 6}) {
    mid.push_back({l, 0.5 * (t.at(PreloadState::P40, l).mean_db + t.at(PreloadState::P80, l).mean_db), ""});
  }
  const auto c = classify(mid, t);
  EXPECT_EQ(c.state, PreloadState::P80);
  EXPECT_NEAR(c.margin_db, 0.0, 1e-9);
}

TEST(Classify, TranslationInvariant) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-70.0, -15.0), shift(-20.0, 20.0);
  const RatioTable base = reference_table();
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<HarmonicRatio> f{{2, u(rng), ""}, {6, u(rng), ""}};
    const double c = shift(rng);
    RatioTable moved = base;
    for (auto& [s, row] : moved.rows) {
      for (auto& [l, e] : row) e.mean_db += c;
    }
    std::vector<HarmonicRatio> fm = f;
    for (auto& h : fm) h.value_db += c;
    const auto a = classify(f, base), b = classify(fm, moved);
    EXPECT_EQ(a.state, b.state);
    EXPECT_NEAR(a.margin_db, b.margin_db, 1e-9);
  }
}

TEST(Classify, Errors) {
  const RatioTable t = reference_table();
  EXPECT_THROW(classify({}, t), ParameterError);
  EXPECT_THROW(classify({{3, -50.0, ""}}, t), ParameterError);
}

TEST(Separation, ReferenceValues) {
  const RatioTable t = reference_table();
  EXPECT_NEAR(separation(t, PreloadState::Loose, PreloadState::P80, 2), 17.5, 1e-9);
  EXPECT_NEAR(separation(t, PreloadState::Loose, PreloadState::P80, 6), 36.5, 1e-9);
  for (auto s : kAllStates) EXPECT_EQ(separation(t, s, s, 2), 0.0);
}

TEST(Separation, Antisymmetric) {
  const RatioTable t = reference_table();
  for (auto a : kAllStates) {
    for (auto b : kAllStates) {
      for (int l : {2, 6}) EXPECT_EQ(separation(t, a, b, l), -separation(t, b, a, l));
    }
  }
}

TEST(Separation, MissingEntries) {
  RatioTable t = reference_table();
  t.rows.erase(PreloadState::P20);
  EXPECT_THROW(separation(t, PreloadState::P20, PreloadState::P80, 2), ParameterError);
  EXPECT_THROW(separation(t, PreloadState::Loose, PreloadState::P80, 4), ParameterError);
}

TEST(Alarm, LooseRowRaises) {
  EXPECT_TRUE(alarm({{2, -43.8, ""}, {6, -21.5, ""}}, reference_table(), 6.0));
}

TEST(Alarm, TightRowAgainstItselfIsQuiet) {
  EXPECT_FALSE(alarm({{2, -61.3, ""}, {6, -58.0, ""}}, reference_table(), 6.0));
}

TEST(Alarm, P20SecondHarmonicIsBelowThreshold) {
  // -55.5 sits 5.8 dB above the P80 mean; with the 0.1 dB half-band the bar
  // is 6.1 dB, so no alarm at 6 dB.
  EXPECT_FALSE(alarm({{2, -55.5, ""}}, reference_table(), 6.0));
  EXPECT_TRUE(alarm({{2, -55.5, ""}}, reference_table(), 5.6));
}

TEST(Alarm, NeedsTightReference) {
  RatioTable t = reference_table();
  t.rows.erase(PreloadState::P80);
  EXPECT_THROW(alarm({{2, -50.0, ""}}, t, 6.0), ParameterError);
}
