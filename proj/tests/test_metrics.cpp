#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "periocular/metrics.hpp"
#include "test_support.hpp"

using namespace periocular;

namespace {

ScoreSet random_set(std::mt19937_64& rng, bool with_ties) {
  std::uniform_int_distribution<int> size(2, 200);
  std::normal_distribution<double> n;
  ScoreSet s;
  s.genuine.resize(static_cast<std::size_t>(size(rng)));
  s.impostor.resize(static_cast<std::size_t>(size(rng)));
  for (auto& v : s.genuine) v = with_ties ? std::round(n(rng) * 3 + 2) : n(rng) + 1.0;
  for (auto& v : s.impostor) v = with_ties ? std::round(n(rng) * 3) : n(rng);
  return s;
}

// FAR at the threshold minimising |FAR - FRR| over a dense grid.
double grid_eer(const ScoreSet& s) {
  double best_gap = 2, best_far = 0;
  for (int i = 0; i <= 10000; ++i) {
    const double t = i * 1e-4;
    double far = 0, tar = 0;
    for (double v : s.impostor) far += v >= t;
    for (double v : s.genuine) tar += v >= t;
    far /= s.impostor.size();
    tar /= s.genuine.size();
    const double gap = std::abs(far - (1 - tar));
    if (gap < best_gap) {
      best_gap = gap;
      best_far = far;
    }
  }
  return best_far;
}

}  // namespace

TEST(Decidability, Examples) {
  EXPECT_EQ(decidability({{0.4, 0.6}, {0.4, 0.6}}), 0.0);
  EXPECT_NEAR(decidability({{0.8, 0.9}, {0.1, 0.2}}), 9.89949, 1e-5);
  EXPECT_THROW(decidability({{1, 1}, {0, 0}}), DegenerateDistributionError);
  EXPECT_THROW(decidability({{1}, {0, 0.5}}), InvalidArgument);
}

TEST(Decidability, AffineInvariantAndMatchesFormula) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 100; ++t) {
    const auto s = random_set(rng, false);
    const double d = decidability(s);
    EXPECT_NEAR(d, oracle::decidability(s.genuine, s.impostor), 1e-12);
    ScoreSet m = s;
    for (auto* v : {&m.genuine, &m.impostor})
      for (auto& x : *v) x = 2.5 * x - 4;
    EXPECT_NEAR(decidability(m), d, 1e-9);
  }
}

TEST(Auc, Examples) {
  EXPECT_EQ(auc({{0.9, 0.4}, {0.5, 0.1}}), 0.75);
  EXPECT_EQ(auc({{2, 3}, {0, 1}}), 1.0);
  EXPECT_EQ(auc({{1, 2, 2, 3}, {2, 1, 3, 2}}), 0.5);
  EXPECT_THROW(auc({{}, {1}}), InvalidArgument);
}

TEST(Auc, MatchesPairwiseOracleAndRocArea) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 200; ++t) {
    const auto s = random_set(rng, t % 2 == 0);
    const double a = auc(s);
    EXPECT_NEAR(a, oracle::auc(s.genuine, s.impostor), 1e-12);
    EXPECT_NEAR(roc_area(roc_curve(s)), a, 1e-9);
  }
}

TEST(Auc, SwappingLabelsComplementsWithoutTies) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    const auto s = random_set(rng, false);
    EXPECT_NEAR(auc({s.impostor, s.genuine}), 1.0 - auc(s), 1e-12);
  }
}

TEST(Roc, SinglePairEnumeration) {
  const auto roc = roc_curve({{1}, {0}});
  ASSERT_EQ(roc.size(), 3u);
  EXPECT_EQ(roc[0].far, 0.0);
  EXPECT_EQ(roc[0].tar, 0.0);
  EXPECT_TRUE(std::isinf(roc[0].threshold));
  EXPECT_EQ((RocPoint{1, 0, 1}), roc[1]);
  EXPECT_EQ((RocPoint{0, 1, 1}), roc[2]);
}

TEST(Roc, MonotoneFromOriginToOne) {
  std::mt19937_64 rng(4);
  const auto s = random_set(rng, true);
  const auto roc = roc_curve(s);
  EXPECT_EQ(roc.front().far, 0.0);
  EXPECT_EQ(roc.back().far, 1.0);
  EXPECT_EQ(roc.back().tar, 1.0);
  for (std::size_t i = 1; i < roc.size(); ++i) {
    EXPECT_GE(roc[i].far, roc[i - 1].far);
    EXPECT_GE(roc[i].tar, roc[i - 1].tar);
    EXPECT_LT(roc[i].threshold, roc[i - 1].threshold);
  }
}

TEST(Roc, PerfectSeparationPassesThroughTopLeft) {
  const auto roc = roc_curve({{0.8, 0.9, 0.7}, {0.1, 0.3}});
  bool corner = false;
  for (const auto& p : roc) corner |= p.far == 0.0 && p.tar == 1.0;
  EXPECT_TRUE(corner);
}

TEST(Eer, Examples) {
  EXPECT_EQ(eer({{0.8, 0.9}, {0.1, 0.2}}), 0.0);
  EXPECT_NEAR(eer({{0.2, 0.4, 0.6}, {0.2, 0.4, 0.6}}), 0.5, 1e-12);
  const ScoreSet s{{0.9, 0.4}, {0.5, 0.1}};
  EXPECT_NEAR(eer(s), grid_eer(s), 1e-12);
}

TEST(Eer, CloseToGridScanOnRandomSets) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u;
  for (int t = 0; t < 20; ++t) {
    ScoreSet s;
    for (int i = 0; i < 300; ++i) s.genuine.push_back(std::min(1.0, u(rng) * 0.6 + 0.4));
    for (int i = 0; i < 300; ++i) s.impostor.push_back(u(rng) * 0.7);
    // discrete steps of 1/300 bound the gap between interpolated and grid values
    EXPECT_NEAR(eer(s), grid_eer(s), 2.0 / 300);
  }
}

TEST(Report, FieldsAndDegenerateStates) {
  const auto r = build_report({{0.8, 0.9}, {0.1, 0.2}}, "lbp", Variant::normalized);
  EXPECT_EQ(r.auc, 1.0);
  EXPECT_EQ(r.eer, 0.0);
  EXPECT_EQ(r.decidability_state, DecidabilityState::finite);
  EXPECT_EQ(r.n_genuine(), 2u);
  EXPECT_NEAR(r.genuine.mean, 0.85, 1e-12);
  EXPECT_NEAR(r.impostor.stddev, std::sqrt(0.005), 1e-12);

  EXPECT_EQ(build_report({{1, 1}, {0, 0}}, "x", Variant::original).decidability_state, DecidabilityState::infinite);
  EXPECT_EQ(build_report({{1, 1}, {1, 1}}, "x", Variant::original).decidability_state, DecidabilityState::undefined);
  EXPECT_EQ(build_report({{1}, {0, 0.5}}, "x", Variant::original).decidability_state, DecidabilityState::undefined);
  EXPECT_THROW(build_report({{}, {0.5}}, "x", Variant::original), InvalidArgument);
}

TEST(Report, FromRecordsCountsMatchLabels) {
  std::vector<ScoreRecord> recs;
  for (int i = 0; i < 7; ++i)
    recs.push_back({"a", "b" + std::to_string(i), i < 3 ? PairLabel::genuine : PairLabel::impostor,
                    {{"m", i < 3 ? 0.9 - 0.01 * i : 0.1 * i}}, 0.5});
  const auto r = build_report(recs, "m", Variant::original);
  EXPECT_EQ(r.n_genuine(), 3u);
  EXPECT_EQ(r.n_impostor(), 4u);
  EXPECT_EQ(build_report(recs, "fused", Variant::original).auc, 0.5);
  EXPECT_THROW(build_report(recs, "other", Variant::original), InvalidArgument);
}

TEST(Report, JsonRoundTripAndCsv) {
  const auto dir = periocular::testing::scratch_dir("report-io");
  std::mt19937_64 rng(6);
  const auto s = random_set(rng, true);
  const auto r = build_report(s, "hog", Variant::normalized);
  write_report_json(r, dir / "r.json");
  const auto back = read_report_json(dir / "r.json");
  EXPECT_EQ(back.matcher_id, "hog");
  EXPECT_EQ(back.variant, Variant::normalized);
  EXPECT_EQ(back.auc, r.auc);
  EXPECT_EQ(back.decidability, r.decidability);
  EXPECT_EQ(back.eer, r.eer);
  EXPECT_EQ(back.roc, r.roc);
  EXPECT_EQ(back.genuine.count, r.genuine.count);

  write_roc_csv(r, dir / "r.csv");
  const auto csv = periocular::testing::read_file(dir / "r.csv");
  EXPECT_EQ(csv.substr(0, 19), "threshold,far,tar\ni");
  write_report_svg(r, s, dir / "r.svg");
  EXPECT_NE(periocular::testing::read_file(dir / "r.svg").find("<svg"), std::string::npos);
}

TEST(Report, AucPercentRoundsHalfUp) {
  EXPECT_EQ(format_auc_percent(0.9875), "98.8");
  EXPECT_EQ(format_auc_percent(0.98749), "98.7");
  EXPECT_EQ(format_auc_percent(1.0), "100.0");
  EXPECT_EQ(format_auc_percent(0.5), "50.0");
}
