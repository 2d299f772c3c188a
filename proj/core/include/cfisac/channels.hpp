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
#include "cfisac/scenario.hpp"
#include "cfisac/types.hpp"

namespace cfisac {

struct Angles {
  double azimuth = 0.0;
  double elevation = 0.0;
};

// Direction of `to` seen from `from`. The array axis is y; azimuth is measured
// from the x axis, so sin(azimuth) cos(elevation) is the direction cosine
// along the array.
Angles angles_between(const Position& from, const Position& to);

// Element u is exp(j 2 pi u d sin(azimuth) cos(elevation)); spacing in wavelengths.
CVector steering_vector(int num_antennas, double spacing, const Angles& angles);

// Gauss-Hermite nodes and weights for the weight exp(-x^2), Golub-Welsch.
std::pair<RVector, RVector> gauss_hermite(int order);

// Local-scattering model: Gaussian azimuth perturbation with standard
// deviation `angular_spread` (radians) around `nominal`. Trace is N * lsf.
CMatrix local_scattering_correlation(int num_antennas, double spacing, const Angles& nominal,
                                     double angular_spread, double lsf);

enum class LinkType { kUe, kAp, kTarget };

// 3GPP TR 36.814 urban micro.
double los_probability(double distance_2d);
double path_loss_db(double distance, double carrier_hz, bool los);
// UE links use the NLoS branch, target links the LoS branch, AP links the
// branch given by `ap_los`.
double path_gain(double distance, LinkType type, double carrier_hz, bool ap_los = false);
double two_hop_gain(double first_distance, double second_distance, double carrier_hz);

CVector draw_ue_channel(const CMatrix& corr_sqrt, RandomStream& rng);

// Large-scale description of one AP-to-AP link (rx AP m, tx AP m').
struct ApApLink {
  double gain = 0.0;          // b
  double rician_factor = 0.0;  // c, may be +inf
  bool los_branch = false;
  CMatrix los_response;  // V, Frobenius norm N
  CMatrix rx_corr;       // receive-side correlation, trace N
  CMatrix tx_factor;     // transmit-side Kronecker factor, trace N
  CMatrix rx_sqrt;
  CMatrix tx_factor_sqrt;

  double los_amplitude() const;
  double nlos_amplitude() const;  // sqrt(b / (1 + c)), zero for pure LoS
  // Kronecker covariance of vec(G_nlos) before path loss: tx_factor (x) rx_corr.
  CMatrix nlos_covariance() const;
};

ApApLink make_ap_ap_link(const Position& rx, const Position& tx, const SystemConfig& config,
                         RandomStream& rng);

struct ApApDraw {
  CMatrix los;
  CMatrix nlos;  // clutter scaling already applied
};

ApApDraw draw_ap_ap_channel(const ApApLink& link, double clutter_scale, RandomStream& rng);

// Two-hop reflection through a point target.
struct TargetLink {
  double gain = 0.0;  // beta
  CMatrix response;   // A = a_rx a_tx^H
};

TargetLink target_channel(const Position& tx, const Position& rx, const Position& target,
                          const SystemConfig& config);

// Azimuth of each AP seen from the target.
std::vector<double> view_angles(const Position& target, std::span<const Position> aps);

CMatrix build_rcs_correlation(std::span<const double> view_angles, double rcs_variance,
                              double view_width_rad);

CVector draw_rcs(const CMatrix& rcs_corr_sqrt, RandomStream& rng);

// Every random quantity of one coherence block, for golden dumps.
struct ChannelRealization {
  int num_antennas = 0;
  std::vector<int> tx_aps, rx_aps;
  std::vector<std::vector<CVector>> ue;                  // [k][tx index]
  std::vector<std::vector<CMatrix>> ap_los, ap_nlos;     // [rx index][tx index]
  std::vector<std::vector<std::vector<Complex>>> rcs;     // [target][rx index][tx index]
  std::vector<std::vector<std::vector<double>>> target_gain;
  std::vector<std::vector<std::vector<CMatrix>>> target_response;
};

ChannelRealization draw_channel_realization(const Scenario& scenario, const SystemConfig& config,
                                            RandomStream& rng);

}  // namespace cfisac
