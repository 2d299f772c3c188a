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

#include "cfisac/scenario.hpp"

#include <algorithm>
#include <numeric>

namespace cfisac {
namespace {

std::vector<int> nearest(const std::vector<Position>& aps, const std::vector<int>& pool,
                         const Position& p, int count) {
  std::vector<int> order = pool;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double da = (aps[a] - p).norm();
    const double db = (aps[b] - p).norm();
    if (da != db) return da < db;
    return a < b;
  });
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(count)));
  return order;
}

}  // namespace

std::pair<int, int> region_grid_shape(int count) {
  int rows = 1;
  for (int r = 1; r * r <= count; ++r)
    if (count % r == 0) rows = r;
  return {rows, count / rows};
}

int Scenario::region_of(const Position& p) const {
  for (std::size_t i = 0; i < regions.size(); ++i)
    if (regions[i].contains(p)) return static_cast<int>(i);
  return -1;
}

Scenario generate_scenario(const SystemConfig& config, RandomStream& rng) {
  config.validate();
  Scenario s;
  s.side_m = config.side_m();
  const double side = s.side_m;

  s.ap_positions.resize(config.num_aps);
  for (auto& p : s.ap_positions)
    p = Position(rng.uniform(0.0, side), rng.uniform(0.0, side), config.ap_height_m);
  s.ue_positions.resize(config.num_ues);
  for (auto& p : s.ue_positions)
    p = Position(rng.uniform(0.0, side), rng.uniform(0.0, side), config.ue_height_m);
  s.target_positions.resize(config.num_targets);
  for (auto& p : s.target_positions) {
    const double x = rng.uniform(0.0, side);
    const double y = rng.uniform(0.0, side);
    p = Position(x, y, rng.uniform(config.target_height_min_m, config.target_height_max_m));
  }

  s.ap_roles.assign(config.num_aps, ApRole::kTransmit);
  std::vector<int> receive = config.receive_ap_indices;
  if (receive.empty() && config.num_rx_aps > 0) {
    std::vector<int> all(config.num_aps);
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng.engine());
    receive.assign(all.begin(), all.begin() + config.num_rx_aps);
  }
  for (int m : receive) s.ap_roles[m] = ApRole::kReceive;
  for (int m = 0; m < config.num_aps; ++m)
    (s.ap_roles[m] == ApRole::kTransmit ? s.tx_aps : s.rx_aps).push_back(m);

  auto [rows, cols] = region_grid_shape(config.num_regions);
  s.grid_rows = rows;
  s.grid_cols = cols;
  const double width = side / cols;
  const double height = side / rows;
  const int cells_x = std::max(1, static_cast<int>(std::ceil(width / config.cell_pitch_m - 1e-9)));
  const int cells_y = std::max(1, static_cast<int>(std::ceil(height / config.cell_pitch_m - 1e-9)));
  const double cell_z = 0.5 * (config.target_height_min_m + config.target_height_max_m);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      Region region;
      region.x_min = c * width;
      region.x_max = (c + 1 == cols) ? side : (c + 1) * width;
      region.y_min = r * height;
      region.y_max = (r + 1 == rows) ? side : (r + 1) * height;
      for (int iy = 0; iy < cells_y; ++iy)
        for (int ix = 0; ix < cells_x; ++ix)
          region.cells.emplace_back(region.x_min + (ix + 0.5) * width / cells_x,
                                    region.y_min + (iy + 0.5) * height / cells_y, cell_z);
      s.regions.push_back(std::move(region));
    }
  }
  return s;
}

void associate_ues(const Scenario& scenario, const RMatrix& lsf, int cluster_size,
                   AssociationMaps& maps) {
  const int num_ues = scenario.num_ues();
  if (static_cast<int>(scenario.tx_aps.size()) < cluster_size)
    throw ConfigError("fewer transmit APs than the serving cluster size");
  if (lsf.rows() != num_ues || lsf.cols() != scenario.num_aps())
    throw std::invalid_argument("lsf table must be K x M");

  maps.serving_aps_of_ue.assign(num_ues, {});
  maps.ues_of_ap.assign(scenario.num_aps(), {});
  for (int k = 0; k < num_ues; ++k) {
    std::vector<int> order = scenario.tx_aps;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      if (lsf(k, a) != lsf(k, b)) return lsf(k, a) > lsf(k, b);
      return a < b;
    });
    order.resize(cluster_size);
    std::sort(order.begin(), order.end());
    maps.serving_aps_of_ue[k] = order;
    for (int m : order) maps.ues_of_ap[m].push_back(k);
  }
}

SensingTask associate_sensing(const Scenario& scenario, const Position& position, int num_tx,
                              int num_rx) {
  if (scenario.rx_aps.empty()) throw ConfigError("no receive APs available for sensing");
  SensingTask task;
  task.position = position;
  task.tx = nearest(scenario.ap_positions, scenario.tx_aps, position, num_tx);
  task.rx = nearest(scenario.ap_positions, scenario.rx_aps, position, num_rx);
  return task;
}

AssociationMaps build_associations(const Scenario& scenario, const RMatrix& lsf,
                                   std::span<const Position> task_positions,
                                   const SystemConfig& config, AssociationPolicy policy) {
  AssociationMaps maps;
  const int cluster = policy.user_centric ? config.serving_cluster_size
                                          : static_cast<int>(scenario.tx_aps.size());
  associate_ues(scenario, lsf, cluster, maps);

  maps.tasks_of_ap.assign(scenario.num_aps(), {});
  for (std::size_t i = 0; i < task_positions.size(); ++i) {
    SensingTask task =
        policy.target_centric
            ? associate_sensing(scenario, task_positions[i], config.tx_aps_per_task,
                                config.rx_aps_per_task)
            : associate_sensing(scenario, task_positions[i],
                                static_cast<int>(scenario.tx_aps.size()),
                                static_cast<int>(scenario.rx_aps.size()));
    for (int m : task.tx) maps.tasks_of_ap[m].push_back(static_cast<int>(i));
    maps.tasks.push_back(std::move(task));
  }
  return maps;
}

std::vector<Position> next_scan_positions(const Scenario& scenario, std::size_t step) {
  std::vector<Position> out;
  out.reserve(scenario.regions.size());
  for (const auto& region : scenario.regions)
    out.push_back(region.cells[step % region.cells.size()]);
  return out;
}

}  // namespace cfisac
