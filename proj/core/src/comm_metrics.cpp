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

#include "cfisac/comm_metrics.hpp"

#include <ostream>

#include "cfisac/linalg.hpp"

namespace cfisac {
namespace {

// tr(A B) without forming the product.
Complex trace_product(const CMatrix& a, const CMatrix& b) {
  return (a.transpose().cwiseProduct(b)).sum();
}

}  // namespace

CMatrix sensing_interference_detection(const Position& ap, std::span<const Position> cells,
                                       int num_mc, int num_antennas, double spacing,
                                       bool unit_norm, RandomStream& rng) {
  if (cells.empty() || num_mc < 1) throw std::invalid_argument("empty scan distribution");
  CMatrix w = CMatrix::Zero(num_antennas, num_antennas);
  if (cells.size() == 1) {
    const CVector b = sensing_precoder(ap, cells[0], num_antennas, spacing, unit_norm);
    return b * b.adjoint();
  }
  for (int s = 0; s < num_mc; ++s) {
    const Position& p = cells[rng.index(cells.size())];
    const CVector b = sensing_precoder(ap, p, num_antennas, spacing, unit_norm);
    w.noalias() += b * b.adjoint();
  }
  return hermitian_part(w / static_cast<double>(num_mc));
}

CMatrix sensing_interference_tracking(const Position& ap, const PositionSampler& positions,
                                      const AngleErrorSampler& errors, int num_mc,
                                      int num_antennas, double spacing, bool unit_norm,
                                      RandomStream& rng) {
  if (num_mc < 1) throw std::invalid_argument("num_mc must be positive");
  CMatrix w = CMatrix::Zero(num_antennas, num_antennas);
  for (int s = 0; s < num_mc; ++s) {
    const Position p = positions(rng);
    const Angles pointed = perturb_angles(angles_between(ap, p), errors(rng));
    const CVector b = sensing_precoder(pointed, num_antennas, spacing, unit_norm);
    w.noalias() += b * b.adjoint();
  }
  return hermitian_part(w / static_cast<double>(num_mc));
}

LinkStatistics compute_link_statistics(const std::vector<std::vector<CMatrix>>& corr,
                                       const std::vector<std::vector<MmseStatistics>>& mmse,
                                       const std::vector<std::vector<CMatrix>>& w_maps,
                                       const PilotBook& pilots) {
  const int num_ues = static_cast<int>(corr.size());
  const int num_aps = num_ues > 0 ? static_cast<int>(corr[0].size()) : 0;
  const int num_tasks = static_cast<int>(w_maps.size());
  LinkStatistics s;
  s.trace_phi = RMatrix::Zero(num_ues, num_aps);
  for (int j = 0; j < num_ues; ++j)
    for (int m = 0; m < num_aps; ++m)
      if (mmse[j][m].phi.size() > 0) s.trace_phi(j, m) = mmse[j][m].trace_phi;

  s.tr_c_phi.assign(num_ues, RMatrix::Zero(num_ues, num_aps));
  s.tr_c_lambda.assign(num_ues, CMatrix::Zero(num_ues, num_aps));
  s.tr_c_w.assign(num_ues, RMatrix::Zero(num_tasks, num_aps));
  for (int k = 0; k < num_ues; ++k) {
    for (int m = 0; m < num_aps; ++m) {
      const CMatrix& ck = corr[k][m];
      if (ck.size() == 0) continue;
      for (int j = 0; j < num_ues; ++j) {
        if (mmse[j][m].phi.size() == 0) continue;
        s.tr_c_phi[k](j, m) = trace_product(ck, mmse[j][m].phi).real();
        s.tr_c_lambda[k](j, m) = trace_product(ck, mmse[j][m].lambda);
      }
      for (int i = 0; i < num_tasks; ++i) {
        if (w_maps[i][m].size() == 0) continue;
        s.tr_c_w[k](i, m) = trace_product(ck, w_maps[i][m]).real();
      }
    }
  }

  s.pilot_coupling = CMatrix::Zero(num_ues, num_ues);
  for (int k = 0; k < num_ues; ++k)
    for (int j = 0; j < num_ues; ++j)
      s.pilot_coupling(k, j) = pilots.overlap(j, k) * std::sqrt(pilots.power(k) / pilots.power(j));
  return s;
}

SinrTerms closed_form_sinr(int k, const PowerAllocation& alloc, const LinkStatistics& stats,
                           double noise_var) {
  const int num_ues = stats.num_ues();
  const int num_aps = stats.num_aps();
  auto require_phi = [&](int j, int m) {
    const double t = stats.trace_phi(j, m);
    if (!(t > 0.0))
      throw std::invalid_argument("undefined statistics: UE " + std::to_string(j) +
                                  " has zero estimate power at AP " + std::to_string(m));
    return t;
  };

  SinrTerms out;
  out.noise = noise_var;
  double amplitude = 0.0;
  for (int m = 0; m < num_aps; ++m) {
    const double eta = alloc.comm(k, m);
    if (eta <= 0.0) continue;
    amplitude += std::sqrt(eta * require_phi(k, m));
  }
  out.useful = amplitude * amplitude;

  const RMatrix& c_phi = stats.tr_c_phi[k];
  const CMatrix& c_lambda = stats.tr_c_lambda[k];
  for (int j = 0; j < num_ues; ++j) {
    double variance = 0.0;
    Complex mean = 0.0;
    for (int m = 0; m < num_aps; ++m) {
      const double eta = alloc.comm(j, m);
      if (eta <= 0.0) continue;
      const double tp = require_phi(j, m);
      variance += eta * c_phi(j, m) / tp;
      mean += std::sqrt(eta) * c_lambda(j, m) / std::sqrt(tp);
    }
    if (j == k) {
      out.uncertainty += variance;
    } else {
      out.multiuser += variance + std::norm(stats.pilot_coupling(k, j) * mean);
    }
  }

  const RMatrix& c_w = stats.tr_c_w[k];
  for (Eigen::Index i = 0; i < alloc.sense.rows(); ++i)
    for (int m = 0; m < num_aps; ++m) {
      const double mu = alloc.sense(i, m);
      if (mu > 0.0) out.sensing += mu * c_w(i, m);
    }
  return out;
}

SinrTerms empirical_sinr(int k, const PowerAllocation& alloc, const EmpiricalSinrModel& model,
                         int num_blocks, RandomStream& rng) {
  const int num_ues = static_cast<int>(model.corr_sqrt.size());
  const int num_aps = static_cast<int>(alloc.comm.cols());
  const int tau = model.pilots.length();
  const CMatrix& pilots = model.pilots.pilots;

  // APs that carry any power.
  std::vector<int> active;
  for (int m = 0; m < num_aps; ++m)
    if (alloc.ap_total(m) > 0.0) active.push_back(m);

  Complex sum_own = 0.0;
  double sum_own_sq = 0.0;
  double sum_others_sq = 0.0;
  double sum_sensing = 0.0;

  std::vector<CVector> h(num_ues);
  CVector g(num_ues);
  for (int b = 0; b < num_blocks; ++b) {
    g.setZero();
    double sensing = 0.0;
    for (int m : active) {
      const Eigen::Index n = model.corr_sqrt[k][m].rows();
      for (int j = 0; j < num_ues; ++j) h[j] = draw_ue_channel(model.corr_sqrt[j][m], rng);
      // Received pilot block, then despreading with each UE's own pilot.
      CMatrix y = std::sqrt(model.noise_var) * rng.complex_normal_matrix(n, tau);
      for (int j = 0; j < num_ues; ++j)
        y.noalias() += std::sqrt(model.pilots.power(j)) * h[j] * pilots.col(j).transpose();
      for (int j = 0; j < num_ues; ++j) {
        const double eta = alloc.comm(j, m);
        if (eta <= 0.0) continue;
        const MmseStatistics& st = model.mmse[j][m];
        const CVector phi = y * pilots.col(j).conjugate() / std::sqrt(static_cast<double>(tau));
        const CVector est = st.lambda * phi / std::sqrt(tau * model.pilots.power(j));
        const CVector w = est / std::sqrt(st.trace_phi);
        g(j) += std::sqrt(eta) * h[k].dot(w);
      }
      for (Eigen::Index i = 0; i < alloc.sense.rows(); ++i) {
        const double mu = alloc.sense(i, m);
        if (mu <= 0.0) continue;
        const CVector w0 = model.sensing_beam(static_cast<int>(i), m, rng);
        sensing += mu * std::norm(h[k].dot(w0));
      }
    }
    sum_own += g(k);
    sum_own_sq += std::norm(g(k));
    for (int j = 0; j < num_ues; ++j)
      if (j != k) sum_others_sq += std::norm(g(j));
    sum_sensing += sensing;
  }

  const double nb = num_blocks;
  SinrTerms out;
  const Complex mean_own = sum_own / nb;
  out.useful = std::norm(mean_own);
  out.uncertainty = std::max(0.0, sum_own_sq / nb - out.useful);
  out.multiuser = sum_others_sq / nb;
  out.sensing = sum_sensing / nb;
  out.noise = model.noise_var;
  return out;
}

double achievable_rate(double gamma, int data_len, int coherence_block, double bandwidth_hz) {
  if (gamma < 0.0) throw std::invalid_argument("negative SINR");
  return static_cast<double>(data_len) / coherence_block * bandwidth_hz * std::log2(1.0 + gamma);
}

void write_sinr_csv(std::ostream& out, std::span<const SinrReport> reports) {
  out << "ue_id,gamma_linear,rate_bps,A,B,C,D,noise\n";
  out.precision(10);
  for (const auto& r : reports)
    out << r.ue << ',' << r.terms.gamma() << ',' << r.rate_bps << ',' << r.terms.useful << ','
        << r.terms.uncertainty << ',' << r.terms.multiuser << ',' << r.terms.sensing << ','
        << r.terms.noise << '\n';
}

}  // namespace cfisac
