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

#include "cfisac/channels.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <mutex>

#include <Eigen/Eigenvalues>

#include "cfisac/linalg.hpp"

namespace cfisac {
namespace {

constexpr int kQuadratureOrder = 64;

double deg_to_rad(double deg) { return deg * kPi / 180.0; }

double wrap_angle(double a) { return std::remainder(a, 2.0 * kPi); }

}  // namespace

Angles angles_between(const Position& from, const Position& to) {
  const Position d = to - from;
  const double horizontal = std::hypot(d.x(), d.y());
  return {std::atan2(d.y(), d.x()), std::atan2(d.z(), horizontal)};
}

CVector steering_vector(int num_antennas, double spacing, const Angles& angles) {
  CVector a(num_antennas);
  const double phase = 2.0 * kPi * spacing * std::sin(angles.azimuth) * std::cos(angles.elevation);
  for (int u = 0; u < num_antennas; ++u) a(u) = std::polar(1.0, phase * u);
  return a;
}

std::pair<RVector, RVector> gauss_hermite(int order) {
  static std::mutex mutex;
  static std::map<int, std::pair<RVector, RVector>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  if (auto it = cache.find(order); it != cache.end()) return it->second;

  RMatrix jacobi = RMatrix::Zero(order, order);
  for (int i = 1; i < order; ++i) jacobi(i, i - 1) = jacobi(i - 1, i) = std::sqrt(0.5 * i);
  Eigen::SelfAdjointEigenSolver<RMatrix> es(jacobi);
  RVector nodes = es.eigenvalues();
  RVector weights = std::sqrt(kPi) * es.eigenvectors().row(0).transpose().cwiseAbs2();
  return cache[order] = {nodes, weights};
}

CMatrix local_scattering_correlation(int num_antennas, double spacing, const Angles& nominal,
                                     double angular_spread, double lsf) {
  const double cos_el = std::cos(nominal.elevation);
  // Correlation depends only on the element lag (Toeplitz).
  CVector lag(num_antennas);
  if (angular_spread <= 0.0) {
    const double phase = 2.0 * kPi * spacing * std::sin(nominal.azimuth) * cos_el;
    for (int d = 0; d < num_antennas; ++d) lag(d) = std::polar(1.0, phase * d);
  } else {
    const auto& [nodes, weights] = gauss_hermite(kQuadratureOrder);
    for (int d = 0; d < num_antennas; ++d) {
      Complex acc = 0.0;
      for (int q = 0; q < nodes.size(); ++q) {
        const double delta = std::sqrt(2.0) * angular_spread * nodes(q);
        const double phase = 2.0 * kPi * spacing * d * std::sin(nominal.azimuth + delta) * cos_el;
        acc += weights(q) * std::polar(1.0, phase);
      }
      lag(d) = acc / std::sqrt(kPi);
    }
  }
  CMatrix r(num_antennas, num_antennas);
  for (int u = 0; u < num_antennas; ++u)
    for (int v = 0; v < num_antennas; ++v)
      r(u, v) = u >= v ? lag(u - v) : std::conj(lag(v - u));
  r = clip_to_psd(r);
  r *= num_antennas / r.trace().real();
  return lsf * r;
}

double los_probability(double distance_2d) {
  const double d = std::max(distance_2d, 1.0);
  return std::min(18.0 / d, 1.0) * (1.0 - std::exp(-d / 36.0)) + std::exp(-d / 36.0);
}

double path_loss_db(double distance, double carrier_hz, bool los) {
  const double d = std::max(distance, 1.0);
  const double fc_ghz = carrier_hz / 1e9;
  if (los) return 22.0 * std::log10(d) + 28.0 + 20.0 * std::log10(fc_ghz);
  return 36.7 * std::log10(d) + 22.7 + 26.0 * std::log10(fc_ghz);
}

double path_gain(double distance, LinkType type, double carrier_hz, bool ap_los) {
  bool los = false;
  switch (type) {
    case LinkType::kUe: los = false; break;
    case LinkType::kTarget: los = true; break;
    case LinkType::kAp: los = ap_los; break;
  }
  return db_to_linear(-path_loss_db(distance, carrier_hz, los));
}

double two_hop_gain(double first_distance, double second_distance, double carrier_hz) {
  return path_gain(first_distance, LinkType::kTarget, carrier_hz) *
         path_gain(second_distance, LinkType::kTarget, carrier_hz);
}

CVector draw_ue_channel(const CMatrix& corr_sqrt, RandomStream& rng) {
  return corr_sqrt * rng.complex_normal_vector(corr_sqrt.cols());
}

double ApApLink::los_amplitude() const {
  if (std::isinf(rician_factor)) return std::sqrt(gain);
  return std::sqrt(gain / (1.0 + rician_factor)) * std::sqrt(rician_factor);
}

double ApApLink::nlos_amplitude() const {
  if (std::isinf(rician_factor)) return 0.0;
  return std::sqrt(gain / (1.0 + rician_factor));
}

CMatrix ApApLink::nlos_covariance() const { return kron(tx_factor, rx_corr); }

ApApLink make_ap_ap_link(const Position& rx, const Position& tx, const SystemConfig& config,
                         RandomStream& rng) {
  ApApLink link;
  const int n = config.antennas_per_ap;
  const double d3 = (rx - tx).norm();
  const double d2 = std::hypot(rx.x() - tx.x(), rx.y() - tx.y());
  const double p_los = los_probability(d2);
  link.los_branch = rng.uniform() < p_los;
  link.gain = path_gain(d3, LinkType::kAp, config.carrier_freq_hz, link.los_branch);
  link.rician_factor =
      p_los >= 1.0 ? std::numeric_limits<double>::infinity() : p_los / (1.0 - p_los);

  const Angles at_rx = angles_between(rx, tx);
  const Angles at_tx = angles_between(tx, rx);
  link.los_response = steering_vector(n, config.element_spacing, at_rx) *
                      steering_vector(n, config.element_spacing, at_tx).adjoint();
  const double spread = deg_to_rad(config.ap_angular_spread_deg);
  link.rx_corr = local_scattering_correlation(n, config.element_spacing, at_rx, spread, 1.0);
  // Conjugate so that E[G^H G] is proportional to the transmit-side correlation.
  link.tx_factor =
      local_scattering_correlation(n, config.element_spacing, at_tx, spread, 1.0).conjugate();
  link.rx_sqrt = hermitian_sqrt(link.rx_corr);
  link.tx_factor_sqrt = hermitian_sqrt(link.tx_factor);
  return link;
}

ApApDraw draw_ap_ap_channel(const ApApLink& link, double clutter_scale, RandomStream& rng) {
  const Eigen::Index n = link.los_response.rows();
  ApApDraw out;
  const double psi = rng.uniform(0.0, 2.0 * kPi);
  out.los = link.los_amplitude() * std::polar(1.0, psi) * link.los_response;
  const double amp = link.nlos_amplitude() * std::sqrt(clutter_scale);
  if (amp == 0.0) {
    out.nlos = CMatrix::Zero(n, n);
  } else {
    // vec(R^{1/2} W T^{T/2}) has covariance T (x) R.
    out.nlos = amp * link.rx_sqrt * rng.complex_normal_matrix(n, n) *
               link.tx_factor_sqrt.transpose();
  }
  return out;
}

TargetLink target_channel(const Position& tx, const Position& rx, const Position& target,
                          const SystemConfig& config) {
  const int n = config.antennas_per_ap;
  TargetLink link;
  link.gain = two_hop_gain((target - tx).norm(), (target - rx).norm(), config.carrier_freq_hz);
  link.response = steering_vector(n, config.element_spacing, angles_between(rx, target)) *
                  steering_vector(n, config.element_spacing, angles_between(tx, target)).adjoint();
  return link;
}

std::vector<double> view_angles(const Position& target, std::span<const Position> aps) {
  std::vector<double> out;
  out.reserve(aps.size());
  for (const auto& ap : aps) out.push_back(std::atan2(ap.y() - target.y(), ap.x() - target.x()));
  return out;
}

CMatrix build_rcs_correlation(std::span<const double> angles, double rcs_variance,
                              double view_width_rad) {
  const Eigen::Index n = static_cast<Eigen::Index>(angles.size());
  CMatrix r(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = wrap_angle(angles[i] - angles[j]);
      r(i, j) = rcs_variance * std::exp(-d * d / (2.0 * view_width_rad * view_width_rad));
    }
  return clip_to_psd(r);
}

CVector draw_rcs(const CMatrix& rcs_corr_sqrt, RandomStream& rng) {
  return rcs_corr_sqrt * rng.complex_normal_vector(rcs_corr_sqrt.cols());
}

ChannelRealization draw_channel_realization(const Scenario& scenario, const SystemConfig& config,
                                            RandomStream& rng) {
  ChannelRealization out;
  const int n = config.antennas_per_ap;
  out.num_antennas = n;
  out.tx_aps = scenario.tx_aps;
  out.rx_aps = scenario.rx_aps;
  const double spread = deg_to_rad(config.ue_angular_spread_deg);

  out.ue.resize(scenario.num_ues());
  for (int k = 0; k < scenario.num_ues(); ++k) {
    for (int m : scenario.tx_aps) {
      const Position& ap = scenario.ap_positions[m];
      const Position& ue = scenario.ue_positions[k];
      const double lsf = path_gain((ap - ue).norm(), LinkType::kUe, config.carrier_freq_hz);
      const CMatrix c = local_scattering_correlation(n, config.element_spacing,
                                                     angles_between(ap, ue), spread, lsf);
      out.ue[k].push_back(draw_ue_channel(hermitian_sqrt(c), rng));
    }
  }

  out.ap_los.resize(scenario.rx_aps.size());
  out.ap_nlos.resize(scenario.rx_aps.size());
  for (std::size_t r = 0; r < scenario.rx_aps.size(); ++r) {
    for (int m : scenario.tx_aps) {
      const ApApLink link = make_ap_ap_link(scenario.ap_positions[scenario.rx_aps[r]],
                                            scenario.ap_positions[m], config, rng);
      ApApDraw g = draw_ap_ap_channel(link, config.clutter_scale, rng);
      out.ap_los[r].push_back(std::move(g.los));
      out.ap_nlos[r].push_back(std::move(g.nlos));
    }
  }

  std::vector<Position> tx_positions;
  for (int m : scenario.tx_aps) tx_positions.push_back(scenario.ap_positions[m]);
  const double width = deg_to_rad(config.rcs_view_width_deg);
  for (const auto& target : scenario.target_positions) {
    const auto angles = view_angles(target, tx_positions);
    const CMatrix r_sqrt =
        hermitian_sqrt(build_rcs_correlation(angles, config.rcs_variance(), width));
    std::vector<std::vector<Complex>> rcs;
    std::vector<std::vector<double>> gains;
    std::vector<std::vector<CMatrix>> responses;
    for (int rx : scenario.rx_aps) {
      const CVector alpha = draw_rcs(r_sqrt, rng);
      std::vector<Complex> a_row;
      std::vector<double> g_row;
      std::vector<CMatrix> resp_row;
      for (std::size_t t = 0; t < scenario.tx_aps.size(); ++t) {
        const TargetLink link = target_channel(tx_positions[t], scenario.ap_positions[rx],
                                               target, config);
        a_row.push_back(alpha(static_cast<Eigen::Index>(t)));
        g_row.push_back(link.gain);
        resp_row.push_back(link.response);
      }
      rcs.push_back(std::move(a_row));
      gains.push_back(std::move(g_row));
      responses.push_back(std::move(resp_row));
    }
    out.rcs.push_back(std::move(rcs));
    out.target_gain.push_back(std::move(gains));
    out.target_response.push_back(std::move(responses));
  }
  return out;
}

}  // namespace cfisac
