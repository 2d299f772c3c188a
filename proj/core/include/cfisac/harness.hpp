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
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cfisac/channels.hpp"
#include "cfisac/comm_metrics.hpp"
#include "cfisac/config.hpp"
#include "cfisac/estimation.hpp"
#include "cfisac/io.hpp"
#include "cfisac/power.hpp"
#include "cfisac/precoding.hpp"
#include "cfisac/rng.hpp"
#include "cfisac/scenario.hpp"
#include "cfisac/sensing.hpp"

namespace cfisac {

// ---------------------------------------------------------------------------
// Per-drop pipeline building blocks.

// How transmit power is split in a drop.
struct PowerRule {
  enum class Kind { kFractional, kNoSensing };
  Kind kind = Kind::kFractional;
  double kappa_c = 0.0;
  double kappa_s = 0.0;

  static PowerRule fractional(double kc, double ks) { return {Kind::kFractional, kc, ks}; }
  static PowerRule no_sensing() { return {Kind::kNoSensing, 0.0, 0.0}; }
};

// Long-term state of one random deployment: geometry, association,
// correlations, estimation statistics and sensing-interference maps.
struct DropContext {
  SystemConfig config;
  SensingMode phase = SensingMode::kDetection;
  Scenario scenario;
  std::vector<Position> task_positions;  // beam targets: cell centers or true target positions
  AssociationMaps maps;
  RMatrix ue_lsf;    // K x M
  RMatrix task_lsf;  // tasks x M, two-hop gain through the task position
  std::vector<std::vector<CMatrix>> corr;       // [k][m], empty for receive APs
  std::vector<std::vector<CMatrix>> corr_sqrt;  // [k][m]
  PilotBook pilots;
  std::vector<std::vector<MmseStatistics>> mmse;  // [k][m]
  std::vector<std::vector<CMatrix>> w_maps;       // [task][m]
  LinkStatistics stats;
  std::vector<double> budget;
  double noise_var = 0.0;
  // Direct AP-to-AP links, [receive index][transmit index] over scenario.rx_aps/tx_aps.
  std::vector<std::vector<ApApLink>> ap_links;
  // Unit-variance RCS correlation shape per task over its transmit set.
  std::vector<CMatrix> rcs_shape;

  int num_tasks() const { return static_cast<int>(maps.tasks.size()); }
  int rx_index(int ap) const;
  int tx_index(int ap) const;
};

// Builds a drop. Detection tasks are the regions inspected at `scan_step`;
// tracking tasks are the true targets.
DropContext build_drop(const SystemConfig& config, SensingMode phase, AssociationPolicy policy,
                       std::size_t scan_step, RandomStream& rng);

PowerAllocation allocate_power(const DropContext& drop, const PowerRule& rule);

// Closed-form SINR of every UE under `alloc`.
std::vector<SinrTerms> drop_sinr(const DropContext& drop, const PowerAllocation& alloc);

// One fading realization: UE channels, estimates, precoders and symbols.
struct FadingDraw {
  Beamformers beams;
  SymbolBlock symbols;
};

// Sensing beams of tracking tasks are perturbed by the configured pointing error.
FadingDraw draw_fading(const DropContext& drop, RandomStream& rng);

// Stacked echo model of `task` (transmit set of the task, illuminating
// `target_position`) seen at receive AP `rx_ap`.
CMatrix task_echo_model(const DropContext& drop, const TransmitFrame& frame, int task,
                        const Position& target_position, int rx_ap);

// Unit-clutter covariance (clutter scale 1) at receive AP `rx_ap`.
CMatrix unit_clutter_covariance(const DropContext& drop, const TransmitFrame& frame, int rx_ap);

// One draw of the unit-scale clutter received at `rx_ap`, stacked.
CVector draw_unit_clutter(const DropContext& drop, const TransmitFrame& frame, int rx_ap,
                          RandomStream& rng);

// SCNR of every detection task at its inspected cell center.
std::vector<double> detection_scnr(const DropContext& drop, const TransmitFrame& frame,
                                   double clutter_scale, double rcs_variance);

// SICNR of every tracked target, evaluated at the true positions. Echoes of
// the other targets count as interference when `with_interference` is set.
std::vector<double> tracking_sicnr(const DropContext& drop, const TransmitFrame& frame,
                                   double clutter_scale, bool with_interference);

// Power-control problem of a tracking drop, with the effective SIR built from
// one fading draw and the diagonal of each target's RCS correlation.
OpcProblem tracking_opc_problem(const DropContext& drop, const FadingDraw& draw);

// ---------------------------------------------------------------------------
// Detection study: H0/H1 statistic pools with common random numbers across
// the RCS levels, clutter scales and power modes.

struct DetectionStudy {
  std::vector<double> rcs_dbsm;       // sigma_alpha^2 levels
  std::vector<double> clutter_scales;  // varsigma levels
  std::vector<PowerRule> modes;
  bool clutter_blind = true;  // also evaluate the white-noise detector
  int fading_per_drop = 1;
};

// Statistic pools of one (mode, clutter scale, detector) combination.
struct DetectionPool {
  std::vector<double> h0;
  std::vector<std::vector<double>> h1;  // [rcs level][trial]
  std::vector<double> scnr_unit;        // per trial, at sigma_alpha^2 = 1
};

struct DetectionPools {
  // [mode][clutter scale][detector: 0 aware, 1 blind]
  std::vector<std::vector<std::vector<DetectionPool>>> pools;
  void append(const DetectionPools& other);
};

DetectionPools run_detection_drop(const DropContext& drop, const DetectionStudy& study,
                                  RandomStream& rng);

// Fraction of H1 statistics at or below the calibrated threshold.
double miss_probability(const DetectionPool& pool, std::size_t rcs_level, double p_fa,
                        double* threshold = nullptr);

// ---------------------------------------------------------------------------
// Experiments.

enum class ExperimentId {
  kMissVsRcs,
  kScnrCdf,
  kRateCdf,
  kKSweep,
  kTausSweep,
  kArchitectureAblation,
  kFpcSweep,
  kSicnrCdf,
  kOpcVsFpc,
};

const std::vector<std::string>& experiment_names();
std::optional<ExperimentId> parse_experiment(const std::string& name);
std::string experiment_name(ExperimentId id);

struct ExperimentPlan {
  ExperimentId id = ExperimentId::kRateCdf;
  int num_drops = 1;
  int num_fading = 1;
  std::uint64_t seed = 1;
  std::vector<double> rcs_dbsm;        // miss_vs_rcs
  std::vector<double> clutter_scales;  // miss_vs_rcs
  std::vector<double> p_fa_grid;       // ROC output
  std::vector<int> ue_counts;          // k_sweep
  std::vector<int> sensing_lengths;    // taus_sweep
  std::vector<int> region_counts;      // architecture_ablation
  std::vector<double> kappa_grid;      // fpc_sweep
};

// Desk-scale defaults (or the full-scale counts) for an experiment.
ExperimentPlan default_plan(ExperimentId id, const SystemConfig& config, bool full_scale);

// Throws ConfigError for empty grids or too many trials.
void validate_plan(const ExperimentPlan& plan, const SystemConfig& config);

struct RunOptions {
  int jobs = 1;
  std::function<void(const std::string&)> log;  // progress messages, may be empty
};

ResultTable run_experiment(const ExperimentPlan& plan, const SystemConfig& config,
                           const RunOptions& options = {});

// Runs `work(drop)` for every drop index on `jobs` threads; results keep
// drop order. Exceptions are caught per drop and counted.
template <typename T>
struct DropResults {
  std::vector<std::optional<T>> values;
  std::vector<std::string> errors;
  int failed = 0;
};

template <typename T>
DropResults<T> for_each_drop(int num_drops, int jobs, const std::function<T(int)>& work);

}  // namespace cfisac

#include "cfisac/detail/parallel.hpp"
