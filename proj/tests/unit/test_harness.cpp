// cfisac: cell-free ISAC simulation library
// Copyright 2026 The cfisac Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <set>
#include <stdexcept>

#include <gtest/gtest.h>

#include "cfisac/harness.hpp"
#include "cfisac/linalg.hpp"
#include "support.hpp"

namespace cfisac {
namespace {

// Small detection deployment with a short sensing block.
SystemConfig small_detection_config() {
  SystemConfig cfg = testing::opc_small_config();
  cfg.sensing_len = 4;
  cfg.interference_map_samples = 500;
  return cfg;
}

DropContext small_drop(SensingMode phase, std::uint64_t seed) {
  RandomStream rng(seed);
  return build_drop(small_detection_config(), phase, {}, 0, rng);
}

TEST(Drop, DetectionTasksAreRegions) {
  const DropContext d = small_drop(SensingMode::kDetection, 91);
  EXPECT_EQ(d.num_tasks(), 4);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(d.scenario.region_of(d.task_positions[i]), i);
  for (int m : d.scenario.rx_aps) {
    EXPECT_EQ(d.budget[m], 0.0);
    EXPECT_EQ(d.corr[0][m].size(), 0);
  }
  for (int m : d.scenario.tx_aps) EXPECT_EQ(d.budget[m], 2.0);
  EXPECT_EQ(d.ap_links.size(), d.scenario.rx_aps.size());
  EXPECT_EQ(d.rcs_shape.size(), 4u);
}

TEST(Drop, TrackingTasksAreTargets) {
  const DropContext d = small_drop(SensingMode::kTracking, 92);
  ASSERT_EQ(d.num_tasks(), 2);
  EXPECT_EQ(d.task_positions[1], d.scenario.target_positions[1]);
}

TEST(Drop, PowerRules) {
  const DropContext d = small_drop(SensingMode::kDetection, 93);
  const PowerAllocation isac = allocate_power(d, PowerRule::fractional(0.0, 0.5));
  const PowerAllocation comm = allocate_power(d, PowerRule::no_sensing());
  EXPECT_EQ(comm.sense.norm(), 0.0);
  for (int m : d.scenario.tx_aps) {
    if (d.maps.ues_of_ap[m].empty()) continue;
    EXPECT_NEAR(comm.ap_total(m), 2.0, 1e-12);
    EXPECT_NEAR(isac.ap_total(m), 2.0, 1e-12);
  }
  // Sensing power costs the UEs SINR.
  const auto with = drop_sinr(d, isac), without = drop_sinr(d, comm);
  for (std::size_t k = 0; k < with.size(); ++k) EXPECT_LT(with[k].gamma(), without[k].gamma());
}

TEST(Drop, UnitClutterCovarianceMatchesDraws) {
  const DropContext d = small_drop(SensingMode::kDetection, 94);
  RandomStream rng(95);
  const FadingDraw draw = draw_fading(d, rng);
  const TransmitFrame frame = testing::drop_frame(d, PowerRule::fractional(0.0, 0.5), draw);
  const int rx = d.scenario.rx_aps[0];
  const CMatrix cov = unit_clutter_covariance(d, frame, rx);
  std::vector<CVector> samples;
  for (int i = 0; i < 30000; ++i) samples.push_back(draw_unit_clutter(d, frame, rx, rng));
  EXPECT_LT(testing::frob_rel(testing::sample_covariance(samples), cov), 0.05);
}

TEST(Drop, FiguresOfMerit) {
  const DropContext d = small_drop(SensingMode::kDetection, 96);
  RandomStream rng(97);
  const FadingDraw draw = draw_fading(d, rng);
  const TransmitFrame frame = testing::drop_frame(d, PowerRule::fractional(0.0, 0.5), draw);
  const auto s1 = detection_scnr(d, frame, 0.01, 1.0);
  const auto s10 = detection_scnr(d, frame, 0.01, 10.0);
  const auto heavy = detection_scnr(d, frame, 1.0, 1.0);
  ASSERT_EQ(s1.size(), 4u);
  for (int i = 0; i < 4; ++i) {
    EXPECT_GT(s1[i], 0.0);
    EXPECT_LT(testing::rel_err(s10[i], 10 * s1[i]), 1e-9);
    EXPECT_LE(heavy[i], s1[i] * (1 + 1e-9));
  }
  const DropContext t = small_drop(SensingMode::kTracking, 98);
  RandomStream trng(99);
  const FadingDraw tdraw = draw_fading(t, trng);
  const TransmitFrame tframe = testing::drop_frame(t, PowerRule::fractional(0.0, 0.5), tdraw);
  const auto clean = tracking_sicnr(t, tframe, 0.01, false);
  const auto interfered = tracking_sicnr(t, tframe, 0.01, true);
  for (std::size_t l = 0; l < clean.size(); ++l) EXPECT_LE(interfered[l], clean[l]);
}

TEST(Detection, PoolsAndMissProbability) {
  const DropContext d = small_drop(SensingMode::kDetection, 100);
  DetectionStudy study;
  study.rcs_dbsm = {0.0, 20.0};
  study.clutter_scales = {0.01};
  study.modes = {PowerRule::fractional(0.0, 0.5)};
  study.fading_per_drop = 3;
  RandomStream rng(101);
  const DetectionPools pools = run_detection_drop(d, study, rng);
  ASSERT_EQ(pools.pools.size(), 1u);
  ASSERT_EQ(pools.pools[0][0].size(), 2u);
  const DetectionPool& aware = pools.pools[0][0][0];
  EXPECT_EQ(aware.h0.size(), 12u);
  EXPECT_EQ(aware.h1[1].size(), 12u);
  EXPECT_EQ(pools.pools[0][0][1].h0.size(), 12u);

  DetectionPools merged;
  merged.append(pools);
  merged.append(pools);
  EXPECT_EQ(merged.pools[0][0][0].h0.size(), 24u);

  DetectionPool hand;
  for (int i = 1; i <= 100; ++i) hand.h0.push_back(i);
  hand.h1 = {{50.0, 90.0, 150.0, 200.0}};
  double threshold = 0.0;
  EXPECT_DOUBLE_EQ(miss_probability(hand, 0, 0.1, &threshold), 0.5);
  EXPECT_DOUBLE_EQ(threshold, 90.0);
  EXPECT_THROW(miss_probability(hand, 0, 0.01), std::invalid_argument);

  const DropContext tracking = small_drop(SensingMode::kTracking, 102);
  EXPECT_THROW(run_detection_drop(tracking, study, rng), std::invalid_argument);
}

TEST(Experiments, NamesRoundTrip) {
  const auto& names = experiment_names();
  EXPECT_EQ(names.size(), 9u);
  for (const auto& n : names) {
    const auto id = parse_experiment(n);
    ASSERT_TRUE(id.has_value());
    EXPECT_EQ(experiment_name(*id), n);
  }
  EXPECT_FALSE(parse_experiment("nonsense").has_value());
}

TEST(Experiments, PlanValidation) {
  const SystemConfig cfg = testing::baseline_config();
  ExperimentPlan p = default_plan(ExperimentId::kMissVsRcs, cfg, false);
  EXPECT_EQ(p.num_drops, 20);
  EXPECT_EQ(p.num_fading, 200);
  EXPECT_NO_THROW(validate_plan(p, cfg));
  const ExperimentPlan full = default_plan(ExperimentId::kMissVsRcs, cfg, true);
  EXPECT_EQ(full.num_drops, 100);
  EXPECT_EQ(full.num_fading, 1000);
  p.rcs_dbsm.clear();
  EXPECT_THROW(validate_plan(p, cfg), ConfigError);
  ExperimentPlan big = default_plan(ExperimentId::kRateCdf, cfg, false);
  big.num_drops = 2000;
  big.num_fading = 1000;
  EXPECT_THROW(validate_plan(big, cfg), ConfigError);
}

TEST(Parallel, KeepsOrderAndCountsFailures) {
  const std::function<int(int)> work = [](int d) {
    if (d == 3) throw std::runtime_error("bad drop");
    return d * d;
  };
  for (int jobs : {1, 3}) {
    const DropResults<int> r = for_each_drop<int>(7, jobs, work);
    EXPECT_EQ(r.failed, 1);
    EXPECT_EQ(r.errors[3], "bad drop");
    for (int d = 0; d < 7; ++d)
      if (d != 3) EXPECT_EQ(*r.values[d], d * d);
  }
}

TEST(Experiments, RateCdfIsReproducible) {
  SystemConfig cfg = testing::opc_small_config();
  cfg.interference_map_samples = 200;
  ExperimentPlan plan = default_plan(ExperimentId::kRateCdf, cfg, false);
  plan.num_drops = 3;
  const ResultTable a = run_experiment(plan, cfg);
  RunOptions two;
  two.jobs = 2;
  const ResultTable b = run_experiment(plan, cfg, two);
  EXPECT_EQ(a.failed_trials, 0);
  ASSERT_EQ(a.records.size(), b.records.size());
  ASSERT_FALSE(a.records.empty());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].sweep_point, b.records[i].sweep_point);
    EXPECT_EQ(a.records[i].metric, b.records[i].metric);
    EXPECT_EQ(format_number(a.records[i].value), format_number(b.records[i].value));
  }
  EXPECT_EQ(a.config_hash, config_hash(cfg));
  plan.seed += 1;
  const ResultTable c = run_experiment(plan, cfg);
  bool differs = false;
  for (std::size_t i = 0; i < std::min(a.records.size(), c.records.size()); ++i)
    differs = differs || a.records[i].value != c.records[i].value;
  EXPECT_TRUE(differs);
}

}  // namespace
}  // namespace cfisac
