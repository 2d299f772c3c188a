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


#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "cfisac/channels.hpp"
#include "cfisac/scenario.hpp"
#include "support.hpp"

namespace cfisac {
namespace {

TEST(RegionGrid, ShapeIsMostSquare) {
  EXPECT_EQ(region_grid_shape(9), std::make_pair(3, 3));
  EXPECT_EQ(region_grid_shape(4), std::make_pair(2, 2));
  EXPECT_EQ(region_grid_shape(8), std::make_pair(2, 4));
  EXPECT_EQ(region_grid_shape(7), std::make_pair(1, 7));
  EXPECT_EQ(region_grid_shape(1), std::make_pair(1, 1));
  for (int s = 1; s <= 40; ++s) {
    const auto [r, c] = region_grid_shape(s);
    EXPECT_EQ(r * c, s);
    EXPECT_LE(r, c);
  }
}

TEST(Scenario, BaselineLayout) {
  const SystemConfig cfg = testing::baseline_config();
  RandomStream rng(3);
  const Scenario s = generate_scenario(cfg, rng);
  EXPECT_EQ(s.num_aps(), 16);
  EXPECT_EQ(s.tx_aps.size(), 12u);
  EXPECT_EQ(s.rx_aps.size(), 4u);
  EXPECT_EQ(s.num_ues(), 16);
  EXPECT_EQ(s.target_positions.size(), 4u);
  EXPECT_EQ(s.regions.size(), 9u);
  for (const auto& p : s.ap_positions) {
    EXPECT_GE(p.x(), 0.0);
    EXPECT_LE(p.x(), s.side_m);
    EXPECT_DOUBLE_EQ(p.z(), cfg.ap_height_m);
  }
  for (const auto& p : s.target_positions) {
    EXPECT_GE(p.z(), cfg.target_height_min_m);
    EXPECT_LE(p.z(), cfg.target_height_max_m);
  }
  // Roles partition the APs.
  std::set<int> all(s.tx_aps.begin(), s.tx_aps.end());
  all.insert(s.rx_aps.begin(), s.rx_aps.end());
  EXPECT_EQ(all.size(), 16u);
}

TEST(Scenario, RegionsTileTheArea) {
  const SystemConfig cfg = testing::baseline_config();
  RandomStream rng(4);
  const Scenario s = generate_scenario(cfg, rng);
  double area = 0.0;
  for (const auto& r : s.regions) {
    area += (r.x_max - r.x_min) * (r.y_max - r.y_min);
    for (const auto& c : r.cells) EXPECT_TRUE(r.contains(c));
    EXPECT_EQ(r.cells.size(), s.regions.front().cells.size());
  }
  EXPECT_NEAR(area, s.side_m * s.side_m, 1e-6);
  RandomStream pts(5);
  for (int i = 0; i < 1000; ++i) {
    const Position p(pts.uniform(0.0, s.side_m), pts.uniform(0.0, s.side_m), 50.0);
    EXPECT_GE(s.region_of(p), 0);
  }
  // Cells no wider than the pitch: about 236 m regions at 50 m pitch give 5 x 5.
  EXPECT_EQ(s.cells_per_region(), 25);
}

TEST(Scenario, FixedReceiveIndices) {
  SystemConfig cfg = testing::baseline_config();
  cfg.receive_ap_indices = {1, 3, 5, 7};
  RandomStream rng(6);
  const Scenario s = generate_scenario(cfg, rng);
  EXPECT_EQ(s.rx_aps, (std::vector<int>{1, 3, 5, 7}));
  EXPECT_EQ(s.ap_roles[3], ApRole::kReceive);
  EXPECT_EQ(s.ap_roles[2], ApRole::kTransmit);
}

TEST(Scenario, SameSeedSameDeployment) {
  const SystemConfig cfg = testing::baseline_config();
  RandomStream a(9), b(9);
  const Scenario sa = generate_scenario(cfg, a), sb = generate_scenario(cfg, b);
  for (int m = 0; m < 16; ++m) EXPECT_EQ(sa.ap_positions[m], sb.ap_positions[m]);
  EXPECT_EQ(sa.rx_aps, sb.rx_aps);
}

RMatrix ue_lsf(const Scenario& s, const SystemConfig& cfg) {
  RMatrix lsf(s.num_ues(), s.num_aps());
  for (int k = 0; k < s.num_ues(); ++k)
    for (int m = 0; m < s.num_aps(); ++m)
      lsf(k, m) = path_gain((s.ap_positions[m] - s.ue_positions[k]).norm(), LinkType::kUe,
                            cfg.carrier_freq_hz);
  return lsf;
}

TEST(Association, ClusterHoldsStrongestTransmitAps) {
  const SystemConfig cfg = testing::baseline_config();
  RandomStream rng(10);
  const Scenario s = generate_scenario(cfg, rng);
  const RMatrix lsf = ue_lsf(s, cfg);
  AssociationMaps maps;
  associate_ues(s, lsf, cfg.serving_cluster_size, maps);
  for (int k = 0; k < s.num_ues(); ++k) {
    const auto& served = maps.serving_aps_of_ue[k];
    ASSERT_EQ(served.size(), 4u);
    EXPECT_TRUE(std::is_sorted(served.begin(), served.end()));
    double weakest = 1e300;
    for (int m : served) {
      EXPECT_EQ(s.ap_roles[m], ApRole::kTransmit);
      weakest = std::min(weakest, lsf(k, m));
      const auto& ues = maps.ues_of_ap[m];
      EXPECT_NE(std::find(ues.begin(), ues.end(), k), ues.end());
    }
    for (int m : s.tx_aps)
      if (std::find(served.begin(), served.end(), m) == served.end()) EXPECT_LE(lsf(k, m), weakest);
  }
  for (int m : s.rx_aps) EXPECT_TRUE(maps.ues_of_ap[m].empty());
}

TEST(Association, TiesBreakByIndex) {
  SystemConfig cfg;
  cfg.num_aps = 4;
  cfg.num_rx_aps = 1;
  cfg.num_ues = 1;
  cfg.serving_cluster_size = 2;
  cfg.tx_aps_per_task = 2;
  cfg.pilot_len = 1;
  cfg.receive_ap_indices = {3};
  RandomStream rng(1);
  const Scenario s = generate_scenario(cfg, rng);
  AssociationMaps maps;
  associate_ues(s, RMatrix::Constant(1, 4, 1e-9), 2, maps);
  EXPECT_EQ(maps.serving_aps_of_ue[0], (std::vector<int>{0, 1}));
}

TEST(Association, ClusterLargerThanTransmitSetThrows) {
  const SystemConfig cfg = testing::baseline_config();
  RandomStream rng(11);
  const Scenario s = generate_scenario(cfg, rng);
  AssociationMaps maps;
  EXPECT_THROW(associate_ues(s, ue_lsf(s, cfg), 13, maps), ConfigError);
}

TEST(Association, SensingTakesNearestAps) {
  const SystemConfig cfg = testing::baseline_config();
  RandomStream rng(12);
  const Scenario s = generate_scenario(cfg, rng);
  const Position target(100.0, 200.0, 60.0);
  const SensingTask t = associate_sensing(s, target, 4, 2);
  ASSERT_EQ(t.tx.size(), 4u);
  ASSERT_EQ(t.rx.size(), 2u);
  auto dist = [&](int m) { return (s.ap_positions[m] - target).norm(); };
  for (std::size_t i = 1; i < t.tx.size(); ++i) EXPECT_LE(dist(t.tx[i - 1]), dist(t.tx[i]));
  for (int m : s.tx_aps)
    if (std::find(t.tx.begin(), t.tx.end(), m) == t.tx.end()) EXPECT_GE(dist(m), dist(t.tx.back()));
  for (int m : t.rx) EXPECT_EQ(s.ap_roles[m], ApRole::kReceive);
}

TEST(Association, NoReceiveApsThrows) {
  SystemConfig cfg;
  cfg.num_rx_aps = 0;
  RandomStream rng(13);
  const Scenario s = generate_scenario(cfg, rng);
  EXPECT_THROW(associate_sensing(s, Position(1, 1, 50), 4, 1), ConfigError);
}

TEST(Association, PolicySwitches) {
  const SystemConfig cfg = testing::baseline_config();
  RandomStream rng(14);
  const Scenario s = generate_scenario(cfg, rng);
  const auto positions = next_scan_positions(s, 0);
  const AssociationMaps full =
      build_associations(s, ue_lsf(s, cfg), positions, cfg, AssociationPolicy{false, false});
  for (const auto& served : full.serving_aps_of_ue) EXPECT_EQ(served, s.tx_aps);
  for (const auto& task : full.tasks) {
    EXPECT_EQ(task.tx.size(), s.tx_aps.size());
    EXPECT_EQ(task.rx.size(), s.rx_aps.size());
  }
  const AssociationMaps scalable = build_associations(s, ue_lsf(s, cfg), positions, cfg);
  ASSERT_EQ(scalable.tasks.size(), 9u);
  for (std::size_t i = 0; i < scalable.tasks.size(); ++i) {
    EXPECT_EQ(scalable.tasks[i].tx.size(), 4u);
    for (int m : scalable.tasks[i].tx) {
      const auto& list = scalable.tasks_of_ap[m];
      EXPECT_NE(std::find(list.begin(), list.end(), static_cast<int>(i)), list.end());
    }
  }
}

TEST(Scan, VisitsEveryCellOnce) {
  const SystemConfig cfg = testing::baseline_config();
  RandomStream rng(15);
  const Scenario s = generate_scenario(cfg, rng);
  const int cells = s.cells_per_region();
  for (std::size_t r = 0; r < s.regions.size(); ++r) {
    std::set<std::pair<double, double>> seen;
    for (int step = 0; step < cells; ++step) {
      const Position p = next_scan_positions(s, step)[r];
      EXPECT_TRUE(s.regions[r].contains(p));
      seen.insert({p.x(), p.y()});
    }
    EXPECT_EQ(static_cast<int>(seen.size()), cells);
    EXPECT_EQ(next_scan_positions(s, cells)[r], next_scan_positions(s, 0)[r]);
  }
}

}  // namespace
}  // namespace cfisac
