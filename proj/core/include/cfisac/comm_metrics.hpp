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

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "cfisac/channels.hpp"
#include "cfisac/estimation.hpp"
#include "cfisac/precoding.hpp"
#include "cfisac/rng.hpp"
#include "cfisac/types.hpp"

namespace cfisac {

// Long-term average of w0 w0^H over the cells of one region.
CMatrix sensing_interference_detection(const Position& ap, std::span<const Position> cells,
                                       int num_mc, int num_antennas, double spacing,
                                       bool unit_norm, RandomStream& rng);

using PositionSampler = std::function<Position(RandomStream&)>;
using AngleErrorSampler = std::function<Angles(RandomStream&)>;

// Nested average: target position drawn from `positions`, pointing error from `errors`.
CMatrix sensing_interference_tracking(const Position& ap, const PositionSampler& positions,
                                      const AngleErrorSampler& errors, int num_mc,
                                      int num_antennas, double spacing, bool unit_norm,
                                      RandomStream& rng);

// Second-order statistics needed by the closed-form SINR, per drop.
struct LinkStatistics {
  RMatrix trace_phi;                  // (j, m): tr(Phi_{j,m})
  std::vector<RMatrix> tr_c_phi;      // [k](j, m): tr(C_{k,m} Phi_{j,m})
  std::vector<CMatrix> tr_c_lambda;   // [k](j, m): tr(C_{k,m} Lambda_{j,m})
  std::vector<RMatrix> tr_c_w;        // [k](task, m): tr(C_{k,m} W_{task,m})
  CMatrix pilot_coupling;             // (k, j): pilot overlap times sqrt(eta_k / eta_j)

  int num_ues() const { return static_cast<int>(trace_phi.rows()); }
  int num_aps() const { return static_cast<int>(trace_phi.cols()); }
};

// corr[k][m] and mmse[k][m] may be empty for APs that never transmit;
// w_maps[task][m] may be empty where no beam exists.
LinkStatistics compute_link_statistics(const std::vector<std::vector<CMatrix>>& corr,
                                       const std::vector<std::vector<MmseStatistics>>& mmse,
                                       const std::vector<std::vector<CMatrix>>& w_maps,
                                       const PilotBook& pilots);

// Terms of the use-and-then-forget SINR, all in watts.
struct SinrTerms {
  double useful = 0.0;       // A
  double uncertainty = 0.0;  // B
  double multiuser = 0.0;    // C
  double sensing = 0.0;      // D
  double noise = 0.0;

  double gamma() const {
    const double den = uncertainty + multiuser + sensing + noise;
    return den > 0.0 ? useful / den : 0.0;
  }
};

SinrTerms closed_form_sinr(int k, const PowerAllocation& alloc, const LinkStatistics& stats,
                           double noise_var);

// Ingredients for the Monte Carlo oracle. Channels and estimates are drawn
// from scratch every block.
struct EmpiricalSinrModel {
  std::vector<std::vector<CMatrix>> corr_sqrt;           // [j][m]
  std::vector<std::vector<MmseStatistics>> mmse;         // [j][m]
  PilotBook pilots;
  double noise_var = 0.0;
  // Draws a sensing beam for (task, ap) from its long-term distribution.
  std::function<CVector(int, int, RandomStream&)> sensing_beam;
};

SinrTerms empirical_sinr(int k, const PowerAllocation& alloc, const EmpiricalSinrModel& model,
                         int num_blocks, RandomStream& rng);

double achievable_rate(double gamma, int data_len, int coherence_block, double bandwidth_hz);

struct SinrReport {
  int ue = 0;
  SinrTerms terms;
  double rate_bps = 0.0;
};

void write_sinr_csv(std::ostream& out, std::span<const SinrReport> reports);

}  // namespace cfisac
