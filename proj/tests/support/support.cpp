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


#include "support.hpp"

#include <cmath>

#include "cfisac/channels.hpp"
#include "cfisac/linalg.hpp"

#ifndef CFISAC_CONFIG_DIR
#error "CFISAC_CONFIG_DIR must point at the shipped configs"
#endif

namespace cfisac::testing {

double rel_err(double value, double reference) {
  return std::abs(value - reference) / std::abs(reference);
}

double frob_rel(const CMatrix& a, const CMatrix& ref) { return (a - ref).norm() / ref.norm(); }

CMatrix random_psd(int n, RandomStream& rng, double scale) {
  const CMatrix g = rng.complex_normal_matrix(n, n);
  return scale * hermitian_part(g * g.adjoint() / static_cast<double>(n));
}

CMatrix random_unitary(int n, RandomStream& rng) {
  Eigen::HouseholderQR<CMatrix> qr(rng.complex_normal_matrix(n, n));
  return qr.householderQ() * CMatrix::Identity(n, n);
}

CMatrix sample_covariance(const std::vector<CVector>& samples) {
  const Eigen::Index n = samples.front().size();
  CMatrix c = CMatrix::Zero(n, n);
  for (const auto& x : samples) c.noalias() += x * x.adjoint();
  return c / static_cast<double>(samples.size());
}

std::filesystem::path config_dir() { return CFISAC_CONFIG_DIR; }

SystemConfig baseline_config() { return load_config(config_dir() / "baseline.cfg"); }

SystemConfig opc_small_config() { return load_config(config_dir() / "opc_small.cfg"); }

EmpiricalSinrModel CommInstance::oracle_model() const {
  EmpiricalSinrModel model;
  model.corr_sqrt = corr_sqrt;
  model.mmse = mmse;
  model.pilots = pilots;
  model.noise_var = noise_var;
  const auto cells = task_cells;
  const auto aps = ap_pos;
  const int n = num_antennas;
  const double d = spacing;
  model.sensing_beam = [cells, aps, n, d](int task, int m, RandomStream& rng) {
    const auto& c = cells[static_cast<std::size_t>(task)];
    return sensing_precoder(aps[static_cast<std::size_t>(m)], c[rng.index(c.size())], n, d);
  };
  return model;
}

CommInstance make_comm_instance(int num_aps, int num_ues, int num_antennas, int num_tasks,
                                RandomStream& rng, const CommInstanceOptions& options) {
  SystemConfig cfg;
  CommInstance inst;
  inst.num_aps = num_aps;
  inst.num_ues = num_ues;
  inst.num_tasks = num_tasks;
  inst.num_antennas = num_antennas;
  inst.noise_var = cfg.noise_power_w();
  const double side = options.side_m;
  for (int m = 0; m < num_aps; ++m)
    inst.ap_pos.emplace_back(rng.uniform(0.0, side), rng.uniform(0.0, side), cfg.ap_height_m);
  for (int k = 0; k < num_ues; ++k)
    inst.ue_pos.emplace_back(rng.uniform(0.0, side), rng.uniform(0.0, side), cfg.ue_height_m);
  for (int i = 0; i < num_tasks; ++i) {
    // A 2 x 2 block of candidate cells, 40 m apart.
    const double x = rng.uniform(0.2 * side, 0.8 * side);
    const double y = rng.uniform(0.2 * side, 0.8 * side);
    std::vector<Position> cells;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) cells.emplace_back(x + 40.0 * a, y + 40.0 * b, 50.0);
    inst.task_cells.push_back(cells);
  }

  const double spread = cfg.ue_angular_spread_deg * kPi / 180.0;
  inst.corr.assign(num_ues, std::vector<CMatrix>(num_aps));
  inst.corr_sqrt.assign(num_ues, std::vector<CMatrix>(num_aps));
  for (int k = 0; k < num_ues; ++k)
    for (int m = 0; m < num_aps; ++m) {
      const double lsf = path_gain((inst.ap_pos[m] - inst.ue_pos[k]).norm(), LinkType::kUe,
                                   cfg.carrier_freq_hz);
      inst.corr[k][m] = local_scattering_correlation(
          num_antennas, inst.spacing, angles_between(inst.ap_pos[m], inst.ue_pos[k]), spread, lsf);
      inst.corr_sqrt[k][m] = hermitian_sqrt(inst.corr[k][m]);
    }

  const int pilot_len = options.pilot_reuse ? 1 : num_ues;
  inst.pilots = make_pilot_book(num_ues, pilot_len, options.pilot_power_w, options.pilot_reuse);
  inst.mmse.assign(num_ues, std::vector<MmseStatistics>(num_aps));
  for (int m = 0; m < num_aps; ++m) {
    std::vector<CMatrix> at_ap;
    for (int k = 0; k < num_ues; ++k) at_ap.push_back(inst.corr[k][m]);
    for (int k = 0; k < num_ues; ++k)
      inst.mmse[k][m] = mmse_statistics(at_ap, inst.pilots, k, inst.noise_var);
  }

  inst.w_maps.assign(num_tasks, std::vector<CMatrix>(num_aps));
  for (int i = 0; i < num_tasks; ++i)
    for (int m = 0; m < num_aps; ++m)
      inst.w_maps[i][m] = sensing_interference_detection(inst.ap_pos[m], inst.task_cells[i],
                                                         options.map_samples, num_antennas,
                                                         inst.spacing, true, rng);
  inst.stats = compute_link_statistics(inst.corr, inst.mmse, inst.w_maps, inst.pilots);

  // Uniform split of every AP's budget over its beams.
  inst.alloc = PowerAllocation::zeros(num_ues, num_tasks, num_aps);
  const double share = options.ap_power_w / (num_ues + num_tasks);
  inst.alloc.comm.setConstant(share);
  inst.alloc.sense.setConstant(share);
  return inst;
}

TransmitFrame drop_frame(const DropContext& drop, const PowerRule& rule, const FadingDraw& draw) {
  const PowerAllocation alloc = allocate_power(drop, rule);
  return assemble_tx_signal(alloc, draw.beams, draw.symbols, drop.phase, drop.budget,
                            drop.config.antennas_per_ap, drop.config.sensing_len);
}

}  // namespace cfisac::testing
