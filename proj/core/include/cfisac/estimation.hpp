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

#include "cfisac/rng.hpp"
#include "cfisac/types.hpp"

namespace cfisac {

// Uplink pilots, one column per UE, each with squared norm equal to the
// pilot length.
struct PilotBook {
  CMatrix pilots;  // tau_p x K
  RVector power;   // per-UE pilot power (W)

  int length() const { return static_cast<int>(pilots.rows()); }
  int num_ues() const { return static_cast<int>(pilots.cols()); }
  // pi_j^H pi_k / tau_p: 1 for the same pilot, 0 for orthogonal pilots.
  Complex overlap(int j, int k) const;
};

// DFT pilots. Without reuse pilot_len must be at least num_ues; with reuse
// UE k takes pilot k mod pilot_len.
PilotBook make_pilot_book(int num_ues, int pilot_len, double power, bool reuse);

struct MmseStatistics {
  CMatrix lambda;  // tau_p eta_k C_k Gamma^{-1}
  CMatrix gamma;   // observation covariance
  CMatrix phi;     // lambda C_k, covariance of the estimate
  double trace_phi = 0.0;
};

// Despread pilot observation of UE k at one AP. `channels` holds every UE's
// channel at that AP.
CVector ls_observation(std::span<const CVector> channels, const PilotBook& book, int k,
                       double noise_var, RandomStream& rng);

// `corr` holds every UE's correlation matrix at the AP.
MmseStatistics mmse_statistics(std::span<const CMatrix> corr, const PilotBook& book, int k,
                               double noise_var);

CVector mmse_estimate(const CVector& observation, const MmseStatistics& stats,
                      const PilotBook& book, int k);

}  // namespace cfisac
