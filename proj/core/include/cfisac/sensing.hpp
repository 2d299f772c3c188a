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

#include <memory>
#include <span>
#include <vector>

#include "cfisac/channels.hpp"
#include "cfisac/config.hpp"
#include "cfisac/rng.hpp"
#include "cfisac/types.hpp"

namespace cfisac {

// Stacked echo model of one receive AP: block t (rows tN..tN+N-1), column j
// is sqrt(beta_j) A_j s_j[t], for the j-th transmit AP of the task.
CMatrix build_stacked_model(std::span<const CMatrix> tx_signals,
                            std::span<const TargetLink> links, int tau_s);

// One transmit AP's contribution to the clutter at a receive AP.
struct ClutterTerm {
  CMatrix signal;     // N x tau transmit signal
  double power = 0.0;  // b / (1 + c) times the clutter scale
  CMatrix tx_factor;  // Kronecker factors, see ApApLink
  CMatrix rx_corr;
};

// Covariance of the stacked clutter, sum of power (S T S^H) (x) R.
CMatrix clutter_covariance(std::span<const ClutterTerm> terms, int num_antennas, int tau_s);

// Clutter plus white noise.
CMatrix whitened_covariance(const CMatrix& clutter, double noise_var);

// Factor Xi0 with Xi0^H Xi0 = Psi^{-1}. Eigen gives the Hermitian inverse
// square root, Cholesky the inverse lower factor; every figure of merit built
// from the projected statistic is identical for both.
class Whitener {
 public:
  Whitener(CMatrix covariance, WhiteningMethod method);
  // Psi = noise_var I without forming or factoring the matrix.
  static Whitener white_noise(double noise_var, Eigen::Index dim);

  CMatrix apply(const CMatrix& x) const;
  CVector apply(const CVector& x) const;
  // Xi0^H x.
  CMatrix apply_adjoint(const CMatrix& x) const;

  WhiteningMethod method() const { return method_; }
  const CMatrix& covariance() const { return covariance_; }

 private:
  Whitener() = default;

  WhiteningMethod method_ = WhiteningMethod::kEigen;
  double white_scale_ = 0.0;  // 1 / sigma for the white-noise shortcut, else 0
  CMatrix covariance_;
  CMatrix inv_sqrt_;
  Eigen::LLT<CMatrix> llt_;
};

struct SensingProblem {
  CMatrix stacked;  // D
  std::shared_ptr<const Whitener> whitener;
  CMatrix whitened;  // Xi0 D
  CMatrix basis;     // U, left singular vectors of Xi0 D
  RVector singular_values;
  int rank = 0;
};

inline constexpr double kRankCutoff = 1e-9;

SensingProblem make_sensing_problem(CMatrix stacked, std::shared_ptr<const Whitener> whitener);

// Target echo and direct-path components of one receive AP's input.
struct EchoSource {
  CMatrix stacked;
  CVector rcs;
};
struct DirectPath {
  CMatrix signal;  // N x tau
  CMatrix los;
  CMatrix nlos;
};

// Synthesizes echoes + direct paths + noise, then removes the known LoS
// direct paths. Returns the stacked observation.
CVector receive_echo(std::span<const EchoSource> echoes, std::span<const DirectPath> direct,
                     double noise_var, int num_antennas, int tau_s, RandomStream& rng);

// Whitened least squares; pseudo-inverse when the normal matrix is singular.
CVector ml_rcs_estimate(const SensingProblem& problem, const CVector& observation,
                        bool* rank_deficient = nullptr);

// a^H D^H Psi^{-1} D a - 2 Re(a^H D^H Psi^{-1} y).
double glrt_objective(const SensingProblem& problem, const CVector& observation,
                      const CVector& rcs);

// ||U^H Xi0 y||^2 for one receive AP.
double projected_energy(const SensingProblem& problem, const CVector& observation);

struct TestResult {
  double statistic = 0.0;
  double log_threshold = 0.0;
  bool detected = false;
  std::vector<CVector> ml_rcs;  // per receive AP
};

double glrt_statistic(std::span<const SensingProblem> problems,
                      std::span<const CVector> observations);

TestResult glrt_test(std::span<const SensingProblem> problems,
                     std::span<const CVector> observations, double log_threshold);

// Empirical (1 - p_fa) quantile of H0 statistics. Needs at least 10 / p_fa samples.
double calibrate_threshold(std::span<const double> h0_statistics, double false_alarm_prob);

// One test per target; problems[l] and observations[l] run over that target's
// receive APs. Interference lives in the observations, not the whitener.
std::vector<TestResult> tracking_glrt(const std::vector<std::vector<SensingProblem>>& problems,
                                      const std::vector<std::vector<CVector>>& observations,
                                      std::span<const double> log_thresholds);

// tr(Xi D R D^H Xi^H), Xi = U^H Xi0 of `problem`.
double projected_power(const SensingProblem& problem, const CMatrix& stacked,
                       const CMatrix& rcs_corr);

// tr(Xi C Xi^H) for the true clutter-plus-noise covariance C; equals the
// rank when the problem's whitener is exact.
double projected_disturbance(const SensingProblem& problem, const CMatrix& true_covariance);

double scnr(std::span<const SensingProblem> problems, std::span<const CMatrix> rcs_corr);

// As scnr, with the denominator taken under a possibly different true covariance.
double scnr(std::span<const SensingProblem> problems, std::span<const CMatrix> rcs_corr,
            std::span<const CMatrix> true_covariances);

struct InterferingEcho {
  CMatrix stacked;
  CMatrix rcs_corr;
};

// interferers[m] lists the other targets' echoes at the m-th receive AP.
double sicnr(std::span<const SensingProblem> problems, std::span<const CMatrix> rcs_corr,
             const std::vector<std::vector<InterferingEcho>>& interferers);

}  // namespace cfisac
