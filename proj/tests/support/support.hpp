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


// Shared fixtures for the unit and acceptance tests: tolerance helpers,
// random matrices and small self-contained instances.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cfisac/comm_metrics.hpp"
#include "cfisac/config.hpp"
#include "cfisac/estimation.hpp"
#include "cfisac/harness.hpp"
#include "cfisac/precoding.hpp"
#include "cfisac/rng.hpp"
#include "cfisac/sensing.hpp"
#include "cfisac/types.hpp"

namespace cfisac::testing {

double rel_err(double value, double reference);
// ||a - ref||_F / ||ref||_F.
double frob_rel(const CMatrix& a, const CMatrix& ref);

CMatrix random_psd(int n, RandomStream& rng, double scale = 1.0);
CMatrix random_unitary(int n, RandomStream& rng);
CMatrix sample_covariance(const std::vector<CVector>& samples);

std::filesystem::path config_dir();
SystemConfig baseline_config();
SystemConfig opc_small_config();

// Every AP serves every UE and senses every task; the data model of the
// closed-form SINR and of its Monte Carlo oracle.
struct CommInstance {
  int num_aps = 0;
  int num_ues = 0;
  int num_tasks = 0;
  int num_antennas = 0;
  std::vector<Position> ap_pos;
  std::vector<Position> ue_pos;
  std::vector<std::vector<Position>> task_cells;  // candidate beam targets per task
  std::vector<std::vector<CMatrix>> corr;         // [k][m]
  std::vector<std::vector<CMatrix>> corr_sqrt;    // [k][m]
  PilotBook pilots;
  std::vector<std::vector<MmseStatistics>> mmse;  // [k][m]
  std::vector<std::vector<CMatrix>> w_maps;       // [task][m]
  LinkStatistics stats;
  PowerAllocation alloc;
  double noise_var = 0.0;
  double spacing = 0.5;

  EmpiricalSinrModel oracle_model() const;
};

struct CommInstanceOptions {
  double side_m = 200.0;
  double ap_power_w = 1.0;
  double pilot_power_w = 0.1;
  bool pilot_reuse = false;  // all UEs share one pilot
  int map_samples = 10000;
};

CommInstance make_comm_instance(int num_aps, int num_ues, int num_antennas, int num_tasks,
                                RandomStream& rng, const CommInstanceOptions& options = {});

// Transmit frame of a drop under `rule`, over the sensing block.
TransmitFrame drop_frame(const DropContext& drop, const PowerRule& rule, const FadingDraw& draw);

}  // namespace cfisac::testing
