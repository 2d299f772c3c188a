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

#include "cfisac/precoding.hpp"

namespace cfisac {

PowerAllocation PowerAllocation::zeros(int num_ues, int num_tasks, int num_aps) {
  return {RMatrix::Zero(num_ues, num_aps), RMatrix::Zero(num_tasks, num_aps)};
}

void check_budget(const PowerAllocation& alloc, std::span<const double> budget, double tol) {
  if (alloc.comm.size() > 0 && alloc.comm.minCoeff() < 0.0)
    throw std::invalid_argument("negative communication power");
  if (alloc.sense.size() > 0 && alloc.sense.minCoeff() < 0.0)
    throw std::invalid_argument("negative sensing power");
  for (Eigen::Index m = 0; m < alloc.comm.cols(); ++m) {
    const double total = alloc.ap_total(static_cast<int>(m));
    const double cap = budget[static_cast<std::size_t>(m)];
    if (total > cap * (1.0 + tol))
      throw std::invalid_argument("AP " + std::to_string(m) + " exceeds its power budget");
  }
}

CVector mrt_precoder(const CVector& estimate, double trace_phi) {
  if (!(trace_phi > 0.0)) throw std::invalid_argument("estimate has zero power, beam undefined");
  return estimate / std::sqrt(trace_phi);
}

CVector sensing_precoder(const Angles& angles, int num_antennas, double spacing, bool unit_norm) {
  CVector a = steering_vector(num_antennas, spacing, angles);
  if (unit_norm) a /= std::sqrt(static_cast<double>(num_antennas));
  return a;
}

CVector sensing_precoder(const Position& ap, const Position& target, int num_antennas,
                         double spacing, bool unit_norm) {
  return sensing_precoder(angles_between(ap, target), num_antennas, spacing, unit_norm);
}

SymbolBlock draw_symbols(int num_ues, int num_tasks, int num_aps, int tau,
                         SymbolAlphabet alphabet, RandomStream& rng) {
  auto draw = [&](Eigen::Index rows, Eigen::Index cols) {
    if (alphabet == SymbolAlphabet::kGaussian) return rng.complex_normal_matrix(rows, cols);
    constexpr double kScale = 0.70710678118654752440;
    CMatrix out(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
      for (Eigen::Index r = 0; r < rows; ++r)
        out(r, c) = Complex(rng.uniform() < 0.5 ? -kScale : kScale,
                            rng.uniform() < 0.5 ? -kScale : kScale);
    return out;
  };
  SymbolBlock block;
  block.data = draw(num_ues, tau);
  block.sensing.reserve(num_aps);
  for (int m = 0; m < num_aps; ++m) block.sensing.push_back(draw(num_tasks, tau));
  return block;
}

TransmitFrame assemble_tx_signal(const PowerAllocation& alloc, const Beamformers& beams,
                                 const SymbolBlock& symbols, SensingMode mode,
                                 std::span<const double> budget, int num_antennas, int tau) {
  check_budget(alloc, budget);
  const int num_aps = static_cast<int>(alloc.comm.cols());
  TransmitFrame frame;
  frame.mode = mode;
  frame.signals.assign(num_aps, CMatrix::Zero(num_antennas, tau));
  for (int m = 0; m < num_aps; ++m) {
    CMatrix& s = frame.signals[m];
    for (Eigen::Index k = 0; k < alloc.comm.rows(); ++k) {
      const double eta = alloc.comm(k, m);
      if (eta <= 0.0) continue;
      const CVector& w = beams.comm[k][m];
      if (w.size() == 0) throw std::invalid_argument("power assigned to a UE without a beam");
      s.noalias() += std::sqrt(eta) * w * symbols.data.row(k).head(tau);
    }
    for (Eigen::Index i = 0; i < alloc.sense.rows(); ++i) {
      const double mu = alloc.sense(i, m);
      if (mu <= 0.0) continue;
      const CVector& w = beams.sense[i][m];
      if (w.size() == 0) throw std::invalid_argument("power assigned to a task without a beam");
      s.noalias() += std::sqrt(mu) * w * symbols.sensing[m].row(i).head(tau);
    }
  }
  return frame;
}

}  // namespace cfisac
