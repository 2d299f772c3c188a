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

#include "cfisac/estimation.hpp"

#include "cfisac/linalg.hpp"

namespace cfisac {

Complex PilotBook::overlap(int j, int k) const {
  return pilots.col(j).dot(pilots.col(k)) / static_cast<double>(length());
}

PilotBook make_pilot_book(int num_ues, int pilot_len, double power, bool reuse) {
  if (pilot_len < 1) throw std::invalid_argument("pilot length must be positive");
  if (!reuse && pilot_len < num_ues)
    throw std::invalid_argument("orthogonal pilots need pilot_len >= num_ues");
  PilotBook book;
  book.pilots.resize(pilot_len, num_ues);
  for (int k = 0; k < num_ues; ++k) {
    const int index = k % pilot_len;
    for (int t = 0; t < pilot_len; ++t)
      book.pilots(t, k) = std::polar(1.0, -2.0 * kPi * t * index / pilot_len);
  }
  book.power = RVector::Constant(num_ues, power);
  return book;
}

CVector ls_observation(std::span<const CVector> channels, const PilotBook& book, int k,
                       double noise_var, RandomStream& rng) {
  const Eigen::Index n = channels[static_cast<std::size_t>(k)].size();
  CVector out = std::sqrt(noise_var) * rng.complex_normal_vector(n);
  const double tau = book.length();
  for (int j = 0; j < book.num_ues(); ++j) {
    const Complex ov = book.overlap(j, k);
    if (std::abs(ov) == 0.0) continue;
    out += std::sqrt(tau * book.power(j)) * ov * channels[static_cast<std::size_t>(j)];
  }
  return out;
}

MmseStatistics mmse_statistics(std::span<const CMatrix> corr, const PilotBook& book, int k,
                               double noise_var) {
  const CMatrix& ck = corr[static_cast<std::size_t>(k)];
  const Eigen::Index n = ck.rows();
  const double tau = book.length();
  MmseStatistics s;
  s.gamma = noise_var * CMatrix::Identity(n, n);
  for (int j = 0; j < book.num_ues(); ++j) {
    const double ov2 = std::norm(book.overlap(j, k));
    if (ov2 == 0.0) continue;
    s.gamma += tau * book.power(j) * ov2 * corr[static_cast<std::size_t>(j)];
  }
  s.gamma = hermitian_part(s.gamma);
  Eigen::LLT<CMatrix> llt(s.gamma);
  if (llt.info() != Eigen::Success) throw NumericalError("observation covariance is singular");
  // lambda = tau eta C Gamma^{-1} = (Gamma^{-1} C tau eta)^H since both are Hermitian.
  s.lambda = (llt.solve(tau * book.power(k) * ck)).adjoint();
  s.phi = hermitian_part(s.lambda * ck);
  s.trace_phi = s.phi.trace().real();
  return s;
}

CVector mmse_estimate(const CVector& observation, const MmseStatistics& stats,
                      const PilotBook& book, int k) {
  return stats.lambda * observation / std::sqrt(book.length() * book.power(k));
}

}  // namespace cfisac
