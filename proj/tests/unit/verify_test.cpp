#include "hardedge/io.hpp"
#include "hardedge/verify.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <stdexcept>

namespace hardedge {
namespace {

ExperimentConfig small_clt(int threads) {
  ExperimentConfig c;
  c.kind = CampaignKind::clt;
  c.params = EnsembleParams(0.0, 1.0, 0.5, 30);
  c.grid = {0.5, 2.0};
  c.replicates = 200;
  c.seed = 77;
  c.threads = threads;
  return c;
}

TEST(Replicates, EveryIndexOnceAndErrorsPropagate) {
  std::vector<int> hits(1000, 0);
  detail::for_each_replicate(1000, 4, [&](std::int64_t r) { ++hits[static_cast<std::size_t>(r)]; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(detail::for_each_replicate(100, 3,
                                          [](std::int64_t r) {
                                            if (r == 57) throw std::runtime_error("boom");
                                          }),
               std::runtime_error);
}

TEST(Clt, SmokeTinyRun) {
  ExperimentConfig c = small_clt(1);
  c.params = EnsembleParams(0.0, 1.0, 0.5, 10);
  c.replicates = 2;
  c.grid = {1.0};
  const auto r = run_clt(c);
  EXPECT_FALSE(r.records.empty());
  for (const auto& rec : r.records) {
    EXPECT_NE(rec.quantity, "skewness");  // needs M >= 4
    EXPECT_TRUE(std::isfinite(rec.empirical));
  }
  EXPECT_THROW(run_clt([&] {
                 auto bad = c;
                 bad.replicates = 1;
                 return bad;
               }()),
               PreconditionError);
}

TEST(Clt, SmallCampaignPasses) {
  ExperimentConfig c = small_clt(1);
  c.replicates = 2000;
  const auto r = run_clt(c);
  for (const auto& a : r.assertions) {
    EXPECT_TRUE(a.passed) << a.name << " " << a.detail;
  }
  for (const auto& rec : r.records) {
    EXPECT_GT(rec.se, 0.0) << rec.quantity;
    EXPECT_TRUE(std::isfinite(rec.z)) << rec.quantity;
  }
}

TEST(Clt, DeterministicAcrossWorkerCounts) {
  const auto one = report_to_json(run_clt(small_clt(1))).dump();
  const auto four = report_to_json(run_clt(small_clt(4))).dump();
  EXPECT_EQ(one, four);
  EXPECT_EQ(one, report_to_json(run_clt(small_clt(1))).dump());
}

TEST(Clt, WrongTargetFails) {
  ExperimentConfig c = small_clt(1);
  c.z_threshold = 0.0;
  EXPECT_FALSE(run_clt(c).passed());
}

TEST(Moments, OddMomentsTargetZeroAndIsserlisTargets) {
  ExperimentConfig c = small_clt(2);
  c.kind = CampaignKind::moments;
  c.replicates = 2000;
  const auto r = run_moments(c);
  const LimitLaw law(c.params, c.phi);
  ASSERT_GE(r.records.size(), 4u);
  EXPECT_EQ(r.records[0].target, 0.0);  // E X
  EXPECT_NEAR(r.records[1].target, law.cov_G(0.5, 0.5), 1e-15);
  EXPECT_EQ(r.records[2].target, 0.0);  // E X³
  EXPECT_NEAR(r.records[3].target, 3 * std::pow(law.cov_G(0.5, 0.5), 2), 1e-15);
  EXPECT_TRUE(r.passed());
}

TEST(Escape, ExactColumnDecreases) {
  ExperimentConfig c;
  c.kind = CampaignKind::escape;
  c.params = EnsembleParams(0.0, 1.0, 0.5, 100);
  c.n_ladder = {100, 400};
  c.delta = 0.2;
  c.horizon = 10.0;
  c.threshold = 1.0;
  c.replicates = 50;
  c.seed = 3;
  const auto r = run_escape(c);
  std::vector<double> exact;
  for (const auto& row : r.table) {
    if (row.quantity == "max_low_cdf_exact") exact.push_back(row.value);
    if (row.quantity == "retained_index_fraction") {
      EXPECT_NEAR(row.value, 0.75, 1e-12);
    }
  }
  ASSERT_EQ(exact.size(), 2u);
  EXPECT_LT(exact[1], exact[0]);
  EXPECT_TRUE(r.assertions[0].passed);
}

TEST(TvDecay, SmokeSingleN) {
  ExperimentConfig c;
  c.kind = CampaignKind::tv_decay;
  c.params = EnsembleParams(0.0, 1.0, 0.5, 100);
  c.n_ladder = {100};
  c.delta = 0.1;
  c.threshold = 1.0;
  const auto r = run_tv_decay(c);
  EXPECT_TRUE(r.passed());
}

TEST(CenteringRate, SmokeAndPositiveErrors) {
  ExperimentConfig c;
  c.kind = CampaignKind::centering_rate;
  c.params = EnsembleParams(0.0, 1.0, 0.5, 50);
  c.grid = {1.0, 4.0};
  c.n_ladder = {20, 40};
  c.slope_max = 0.0;
  const auto r = run_centering_rate(c);
  for (const auto& row : r.table) {
    if (row.quantity == "sup_error") {
      EXPECT_GT(row.value, 0.0);
    }
  }
  EXPECT_TRUE(r.passed());
}

TEST(Hitting, SmallCampaign) {
  ExperimentConfig c;
  c.kind = CampaignKind::hitting;
  c.params = EnsembleParams(0.0, 1.0, 0.5, 100);
  const double kappa = c.params.kappa();
  c.levels = {0.2 * kappa, 0.5 * kappa};
  c.cross_times = {1.0};
  c.replicates = 1000;
  c.seed = 12;
  c.threads = 2;
  const auto r = run_hitting(c);
  bool saw_cov = false, saw_cross = false;
  for (const auto& rec : r.records) {
    saw_cov = saw_cov || rec.quantity == "cov";
    saw_cross = saw_cross || rec.quantity == "cross_cov";
  }
  EXPECT_TRUE(saw_cov);
  EXPECT_TRUE(saw_cross);
  for (const auto& row : r.table) {
    if (row.quantity == "infinite_frequency") {
      EXPECT_EQ(row.value, 0.0);
    }
  }
  auto bad = c;
  bad.levels = {kappa};
  EXPECT_THROW(run_hitting(bad), PreconditionError);
  bad = c;
  bad.phi = phi_constant(-1.0);
  EXPECT_THROW(run_hitting(bad), PreconditionError);
}

TEST(Report, JsonValidates) {
  const auto r = run_clt(small_clt(1));
  const auto j = report_to_json(r);
  EXPECT_EQ(validate_report_json(j), "");
  EXPECT_FALSE(j.contains("wall_seconds"));
  EXPECT_TRUE(report_to_json(r, true).contains("wall_seconds"));
  EXPECT_FALSE(j["config"].contains("threads"));
  auto broken = j;
  broken.erase("records");
  EXPECT_NE(validate_report_json(broken), "");
}

}  // namespace
}  // namespace hardedge
