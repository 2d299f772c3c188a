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

#include "cfisac/channels.hpp"
#include "cfisac/config.hpp"
#include "cfisac/rng.hpp"
#include "cfisac/types.hpp"

namespace cfisac {

// Transmit powers in watts, indexed by global AP.
struct PowerAllocation {
  RMatrix comm;   // K x M, eta
  RMatrix sense;  // tasks x M, mu

  static PowerAllocation zeros(int num_ues, int num_tasks, int num_aps);
  double ap_total(int m) const { return comm.col(m).sum() + sense.col(m).sum(); }
};

// Throws std::invalid_argument if any power is negative or any AP exceeds
// budget[m] * (1 + tol).
void check_budget(const PowerAllocation& alloc, std::span<const double> budget, double tol = 1e-9);

// Estimate scaled by the deterministic factor sqrt(E||h_hat||^2).
CVector mrt_precoder(const CVector& estimate, double trace_phi);

CVector sensing_precoder(const Angles& angles, int num_antennas, double spacing,
                         bool unit_norm = true);
CVector sensing_precoder(const Position& ap, const Position& target, int num_antennas,
                         double spacing, bool unit_norm = true);

// Applies a pointing error (azimuth, elevation offsets) to nominal angles.
inline Angles perturb_angles(const Angles& nominal, const Angles& error) {
  return {nominal.azimuth + error.azimuth, nominal.elevation + error.elevation};
}

struct Beamformers {
  std::vector<std::vector<CVector>> comm;   // [k][m], empty where AP m does not serve k
  std::vector<std::vector<CVector>> sense;  // [task][m], empty where AP m does not sense
};

enum class SensingMode { kDetection, kTracking };

struct SymbolBlock {
  CMatrix data;                  // K x tau
  std::vector<CMatrix> sensing;  // per AP: tasks x tau
};

SymbolBlock draw_symbols(int num_ues, int num_tasks, int num_aps, int tau,
                         SymbolAlphabet alphabet, RandomStream& rng);

struct TransmitFrame {
  SensingMode mode = SensingMode::kDetection;
  std::vector<CMatrix> signals;  // per AP: N x tau, zero for silent APs
};

TransmitFrame assemble_tx_signal(const PowerAllocation& alloc, const Beamformers& beams,
                                 const SymbolBlock& symbols, SensingMode mode,
                                 std::span<const double> budget, int num_antennas, int tau);

}  // namespace cfisac
