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

#pragma once

#include <span>
#include <vector>

#include "cfisac/config.hpp"
#include "cfisac/rng.hpp"
#include "cfisac/types.hpp"

namespace cfisac {

enum class ApRole { kTransmit, kReceive };

struct Region {
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
  std::vector<Position> cells;  // radar-cell centers in raster order

  bool contains(const Position& p) const {
    return p.x() >= x_min && p.x() <= x_max && p.y() >= y_min && p.y() <= y_max;
  }
};

struct Scenario {
  double side_m = 0.0;
  std::vector<Position> ap_positions;
  std::vector<ApRole> ap_roles;
  std::vector<int> tx_aps;  // ascending global indices
  std::vector<int> rx_aps;
  std::vector<Position> ue_positions;
  std::vector<Position> target_positions;
  int grid_rows = 1;
  int grid_cols = 1;
  std::vector<Region> regions;  // row-major tiling

  int num_aps() const { return static_cast<int>(ap_positions.size()); }
  int num_ues() const { return static_cast<int>(ue_positions.size()); }
  int cells_per_region() const {
    return regions.empty() ? 0 : static_cast<int>(regions.front().cells.size());
  }
  int region_of(const Position& p) const;
};

// rows <= cols, rows * cols == count, rows as large as possible.
std::pair<int, int> region_grid_shape(int count);

Scenario generate_scenario(const SystemConfig& config, RandomStream& rng);

// One detection region or one tracked target with its scalable AP sets.
struct SensingTask {
  Position position;
  std::vector<int> tx;  // nearest first
  std::vector<int> rx;
};

struct AssociationMaps {
  std::vector<std::vector<int>> serving_aps_of_ue;  // per UE, ascending AP index
  std::vector<std::vector<int>> ues_of_ap;          // per AP (empty for receive APs)
  std::vector<SensingTask> tasks;                   // regions (detection) or targets (tracking)
  std::vector<std::vector<int>> tasks_of_ap;        // per AP, ascending task index
};

// UE and task association switches; both on is the scalable architecture.
struct AssociationPolicy {
  bool user_centric = true;    // off: every transmit AP serves every UE
  bool target_centric = true;  // off: every AP takes part in every task
};

// lsf is K x M over global AP indices; only transmit columns are read.
void associate_ues(const Scenario& scenario, const RMatrix& lsf, int cluster_size,
                   AssociationMaps& maps);

SensingTask associate_sensing(const Scenario& scenario, const Position& position, int num_tx,
                              int num_rx);

AssociationMaps build_associations(const Scenario& scenario, const RMatrix& lsf,
                                   std::span<const Position> task_positions,
                                   const SystemConfig& config, AssociationPolicy policy = {});

std::vector<Position> next_scan_positions(const Scenario& scenario, std::size_t step);

}  // namespace cfisac
