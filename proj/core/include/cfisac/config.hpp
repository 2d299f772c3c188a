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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cfisac/types.hpp"

namespace cfisac {

enum class WhiteningMethod { kEigen, kCholesky };
enum class SymbolAlphabet { kGaussian, kQpsk };

// Complete system description. Defaults reproduce the baseline deployment.
struct SystemConfig {
  // [scenario]
  double area_km2 = 0.5;
  int num_aps = 16;
  int num_rx_aps = 4;
  int num_ues = 16;
  int num_targets = 4;
  int num_regions = 9;
  int antennas_per_ap = 4;
  int serving_cluster_size = 4;
  int tx_aps_per_task = 4;
  int rx_aps_per_task = 1;
  double ue_height_m = 1.65;
  double ap_height_m = 10.0;
  double target_height_min_m = 20.0;
  double target_height_max_m = 100.0;
  double cell_pitch_m = 50.0;
  bool strict_grid = false;
  bool allow_degenerate_rank = false;
  std::vector<int> receive_ap_indices;  // empty: random role assignment
  std::uint64_t rng_seed = 1;

  // [channels]
  double carrier_freq_hz = 2e9;
  double element_spacing = 0.5;  // wavelengths
  double ue_angular_spread_deg = 10.0;
  double ap_angular_spread_deg = 10.0;
  double rcs_view_width_deg = 20.0;
  double rcs_variance_dbsm = 10.0;
  double clutter_scale = 1e-2;

  // [estimation]
  int pilot_len = 16;
  double pilot_power_w = 1e-4;
  bool pilot_reuse = false;

  // [precoding]
  int coherence_block = 50;
  int data_len = 34;
  int sensing_len = 50;
  double ap_power_w = 2.0;
  bool unit_norm_sensing = true;
  double tracking_error_std_rad = 1e-2;
  bool tracking_error_per_ap = false;
  SymbolAlphabet symbols = SymbolAlphabet::kGaussian;

  // [comm_metrics]
  double bandwidth_hz = 20e6;
  double noise_psd_dbm_hz = -174.0;
  int interference_map_samples = 10000;

  // [sensing]
  WhiteningMethod whitening = WhiteningMethod::kEigen;
  double false_alarm_prob = 1e-2;
  bool far_target_approximation = false;
  double interference_radius_m = 0.0;  // 0 keeps every interfering echo

  // [power]
  double kappa_c = 0.0;
  double kappa_s = 0.0;
  double sir_target_db = 0.0;
  double bisection_tol = 1e-3;
  double sca_tol = 1e-4;
  int sca_max_iter = 50;

  // [harness]
  int num_drops = 20;
  int num_fading = 200;
  int full_scale_drops = 100;
  int full_scale_fading = 1000;
  long max_trials = 1000000;
  int sweep_fading = 20;  // fading draws per drop for sensing metrics in sweeps

  int num_tx_aps() const { return num_aps - num_rx_aps; }
  double side_m() const;
  double wavelength_m() const { return kSpeedOfLight / carrier_freq_hz; }
  double noise_power_w() const;
  double rcs_variance() const { return db_to_linear(rcs_variance_dbsm); }

  // Throws ConfigError naming the first violated invariant.
  void validate() const;
};

// Parses the sectioned key-value format. Unknown sections or keys are errors.
SystemConfig parse_config(std::istream& in);
SystemConfig load_config(const std::filesystem::path& path);

// Fully resolved config in the same format parse_config accepts.
std::string format_config(const SystemConfig& config);
// FNV-1a over format_config(); tags every result table.
std::uint64_t config_hash(const SystemConfig& config);

}  // namespace cfisac
