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

#include "cfisac/sensing.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "cfisac/linalg.hpp"

namespace cfisac {

CMatrix build_stacked_model(std::span<const CMatrix> tx_signals,
                            std::span<const TargetLink> links, int tau_s) {
  if (tx_signals.size() != links.size())
    throw std::invalid_argument("one transmit signal per target link is required");
  if (links.empty()) throw std::invalid_argument("empty transmit set");
  const Eigen::Index n = links[0].response.rows();
  CMatrix d(n * tau_s, static_cast<Eigen::Index>(links.size()));
  for (std::size_t j = 0; j < links.size(); ++j) {
    const CMatrix& s = tx_signals[j];
    if (s.rows() != links[j].response.cols() || s.cols() < tau_s)
      throw std::invalid_argument("transmit signal dimensions do not match the array");
    const CMatrix echo = std::sqrt(links[j].gain) * links[j].response * s.leftCols(tau_s);
    // Column-major N x tau_s is exactly the stacked layout.
    d.col(static_cast<Eigen::Index>(j)) = echo.reshaped();
  }
  return d;
}

CMatrix clutter_covariance(std::span<const ClutterTerm> terms, int num_antennas, int tau_s) {
  const Eigen::Index n = num_antennas;
  CMatrix q = CMatrix::Zero(n * tau_s, n * tau_s);
  for (const auto& term : terms) {
    if (term.power <= 0.0) continue;
    const CMatrix st = term.signal.leftCols(tau_s).transpose();  // tau x N, rows s[t]^T
    const CMatrix time = term.power * st * term.tx_factor * st.adjoint();
    for (Eigen::Index t = 0; t < tau_s; ++t)
      for (Eigen::Index u = 0; u < tau_s; ++u)
        q.block(t * n, u * n, n, n).noalias() += time(t, u) * term.rx_corr;
  }
  return hermitian_part(q);
}

CMatrix whitened_covariance(const CMatrix& clutter, double noise_var) {
  CMatrix psi = clutter;
  psi.diagonal().array() += noise_var;
  return psi;
}

Whitener::Whitener(CMatrix covariance, WhiteningMethod method)
    : method_(method), covariance_(std::move(covariance)) {
  if (method_ == WhiteningMethod::kEigen) {
    inv_sqrt_ = hermitian_inv_sqrt(covariance_);
  } else {
    llt_.compute(covariance_);
    if (llt_.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
  }
}

Whitener Whitener::white_noise(double noise_var, Eigen::Index dim) {
  if (!(noise_var > 0.0)) throw NumericalError("noise variance must be positive");
  Whitener w;
  w.white_scale_ = 1.0 / std::sqrt(noise_var);
  w.covariance_ = noise_var * CMatrix::Identity(dim, dim);
  return w;
}

CMatrix Whitener::apply(const CMatrix& x) const {
  if (white_scale_ > 0.0) return white_scale_ * x;
  if (method_ == WhiteningMethod::kEigen) return inv_sqrt_ * x;
  return llt_.matrixL().solve(x);
}

CMatrix Whitener::apply_adjoint(const CMatrix& x) const {
  if (white_scale_ > 0.0) return white_scale_ * x;
  if (method_ == WhiteningMethod::kEigen) return inv_sqrt_ * x;
  return llt_.matrixU().solve(x);
}

CVector Whitener::apply(const CVector& x) const {
  if (white_scale_ > 0.0) return white_scale_ * x;
  if (method_ == WhiteningMethod::kEigen) return inv_sqrt_ * x;
  return llt_.matrixL().solve(x);
}

SensingProblem make_sensing_problem(CMatrix stacked, std::shared_ptr<const Whitener> whitener) {
  SensingProblem p;
  p.stacked = std::move(stacked);
  p.whitener = std::move(whitener);
  p.whitened = p.whitener->apply(p.stacked);
  Eigen::JacobiSVD<CMatrix> svd(p.whitened, Eigen::ComputeThinU);
  p.singular_values = svd.singularValues();
  const double top = p.singular_values.size() > 0 ? p.singular_values(0) : 0.0;
  p.rank = 0;
  if (top > 0.0)
    for (Eigen::Index i = 0; i < p.singular_values.size(); ++i)
      if (p.singular_values(i) > top * kRankCutoff) ++p.rank;
  p.basis = svd.matrixU().leftCols(p.rank);
  return p;
}

CVector receive_echo(std::span<const EchoSource> echoes, std::span<const DirectPath> direct,
                     double noise_var, int num_antennas, int tau_s, RandomStream& rng) {
  const Eigen::Index n = num_antennas;
  CMatrix y = std::sqrt(noise_var) * rng.complex_normal_matrix(n, tau_s);
  for (const auto& e : echoes) y.reshaped() += e.stacked * e.rcs;
  CMatrix known = CMatrix::Zero(n, tau_s);
  for (const auto& d : direct) {
    const auto s = d.signal.leftCols(tau_s);
    y.noalias() += (d.los + d.nlos) * s;
    known.noalias() += d.los * s;
  }
  y -= known;
  return y.reshaped();
}

CVector ml_rcs_estimate(const SensingProblem& problem, const CVector& observation,
                        bool* rank_deficient) {
  const CVector wy = problem.whitener->apply(observation);
  const Eigen::Index cols = problem.whitened.cols();
  if (rank_deficient) *rank_deficient = problem.rank < cols;
  if (problem.rank == cols) return problem.whitened.colPivHouseholderQr().solve(wy);
  Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(problem.whitened);
  cod.setThreshold(kRankCutoff);
  return cod.solve(wy);
}

double glrt_objective(const SensingProblem& problem, const CVector& observation,
                      const CVector& rcs) {
  const CVector wd = problem.whitened * rcs;
  const CVector wy = problem.whitener->apply(observation);
  return wd.squaredNorm() - 2.0 * std::real(wd.dot(wy));
}

double projected_energy(const SensingProblem& problem, const CVector& observation) {
  if (problem.rank == 0) return 0.0;
  return (problem.basis.adjoint() * problem.whitener->apply(observation)).squaredNorm();
}

double glrt_statistic(std::span<const SensingProblem> problems,
                      std::span<const CVector> observations) {
  if (problems.size() != observations.size())
    throw std::invalid_argument("one observation per receive AP is required");
  double total = 0.0;
  for (std::size_t m = 0; m < problems.size(); ++m)
    total += projected_energy(problems[m], observations[m]);
  return total;
}

TestResult glrt_test(std::span<const SensingProblem> problems,
                     std::span<const CVector> observations, double log_threshold) {
  TestResult r;
  r.statistic = glrt_statistic(problems, observations);
  r.log_threshold = log_threshold;
  r.detected = r.statistic > log_threshold;
  for (std::size_t m = 0; m < problems.size(); ++m)
    r.ml_rcs.push_back(ml_rcs_estimate(problems[m], observations[m]));
  return r;
}

double calibrate_threshold(std::span<const double> h0_statistics, double false_alarm_prob) {
  if (!(false_alarm_prob > 0.0 && false_alarm_prob < 1.0))
    throw std::invalid_argument("false-alarm probability must lie in (0, 1)");
  const double needed = 10.0 / false_alarm_prob;
  if (static_cast<double>(h0_statistics.size()) < needed)
    throw std::invalid_argument("calibration needs at least " +
                                std::to_string(static_cast<long>(std::ceil(needed))) +
                                " H0 trials");
  std::vector<double> sorted(h0_statistics.begin(), h0_statistics.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  // Smallest order statistic with at most p_fa * n samples strictly above it.
  const auto index = static_cast<std::size_t>(
      std::clamp(std::ceil((1.0 - false_alarm_prob) * n) - 1.0, 0.0, n - 1.0));
  return sorted[index];
}

std::vector<TestResult> tracking_glrt(const std::vector<std::vector<SensingProblem>>& problems,
                                      const std::vector<std::vector<CVector>>& observations,
                                      std::span<const double> log_thresholds) {
  if (problems.size() != observations.size() || problems.size() != log_thresholds.size())
    throw std::invalid_argument("one problem set, observation set and threshold per target");
  std::vector<TestResult> out;
  out.reserve(problems.size());
  for (std::size_t l = 0; l < problems.size(); ++l)
    out.push_back(glrt_test(problems[l], observations[l], log_thresholds[l]));
  return out;
}

double projected_power(const SensingProblem& problem, const CMatrix& stacked,
                       const CMatrix& rcs_corr) {
  if (problem.rank == 0) return 0.0;
  const CMatrix whitened =
      (&stacked == &problem.stacked) ? problem.whitened : problem.whitener->apply(stacked);
  const CMatrix xd = problem.basis.adjoint() * whitened;
  return (xd * rcs_corr * xd.adjoint()).trace().real();
}

double projected_disturbance(const SensingProblem& problem, const CMatrix& true_covariance) {
  if (problem.rank == 0) return 0.0;
  const CMatrix xi_h = problem.whitener->apply_adjoint(problem.basis);
  return (xi_h.adjoint() * true_covariance * xi_h).trace().real();
}

double scnr(std::span<const SensingProblem> problems, std::span<const CMatrix> rcs_corr) {
  double num = 0.0, den = 0.0;
  for (std::size_t m = 0; m < problems.size(); ++m) {
    num += projected_power(problems[m], problems[m].stacked, rcs_corr[m]);
    den += problems[m].rank;
  }
  return den > 0.0 ? num / den : 0.0;
}

double scnr(std::span<const SensingProblem> problems, std::span<const CMatrix> rcs_corr,
            std::span<const CMatrix> true_covariances) {
  double num = 0.0, den = 0.0;
  for (std::size_t m = 0; m < problems.size(); ++m) {
    num += projected_power(problems[m], problems[m].stacked, rcs_corr[m]);
    den += projected_disturbance(problems[m], true_covariances[m]);
  }
  return den > 0.0 ? num / den : 0.0;
}

double sicnr(std::span<const SensingProblem> problems, std::span<const CMatrix> rcs_corr,
             const std::vector<std::vector<InterferingEcho>>& interferers) {
  double num = 0.0, den = 0.0;
  for (std::size_t m = 0; m < problems.size(); ++m) {
    num += projected_power(problems[m], problems[m].stacked, rcs_corr[m]);
    den += problems[m].rank;
    if (m < interferers.size())
      for (const auto& e : interferers[m]) den += projected_power(problems[m], e.stacked, e.rcs_corr);
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace cfisac
