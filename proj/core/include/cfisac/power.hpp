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

#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "cfisac/channels.hpp"
#include "cfisac/comm_metrics.hpp"
#include "cfisac/convex.hpp"
#include "cfisac/precoding.hpp"
#include "cfisac/scenario.hpp"
#include "cfisac/types.hpp"

namespace cfisac {

// Per-AP budgets: ap_power_w for transmit APs, zero for receive APs.
std::vector<double> ap_budgets(const Scenario& scenario, const SystemConfig& config);

// Normalized fractional power control. ue_lsf is K x M, task_lsf is tasks x M;
// only entries of served UEs and sensed tasks are read (they must be > 0).
// Each AP spends its whole budget; an AP with nothing assigned stays silent.
PowerAllocation fpc_allocate(const RMatrix& ue_lsf, const RMatrix& task_lsf,
                             const AssociationMaps& maps, std::span<const double> budget,
                             double kappa_c, double kappa_s);

enum class EntityType { kUe, kTarget };

// Amplitude vector b: per transmit AP, its served UEs then its sensing tasks.
struct VariableLayout {
  struct Variable {
    int ap = 0;
    EntityType type = EntityType::kUe;
    int entity = 0;
  };
  std::vector<Variable> vars;
  std::vector<std::vector<int>> of_ap;  // indices into vars, per global AP
  int num_ues = 0;
  int num_tasks = 0;
  int num_aps = 0;

  static VariableLayout from_maps(const AssociationMaps& maps, int num_ues, int num_aps);

  int size() const { return static_cast<int>(vars.size()); }
  // -1 when the pair is not a variable.
  int index(int ap, EntityType type, int entity) const;
  RVector amplitudes(const PowerAllocation& alloc) const;
  PowerAllocation allocation(const RVector& b) const;
};

// Target link from transmit AP `tx` to receive AP `rx` for target `target`.
using TargetLinkFn = std::function<TargetLink(int target, int rx, int tx)>;
// RCS correlation over the target's transmit set at receive AP `rx`.
using RcsCorrelationFn = std::function<CMatrix(int target, int rx)>;

// Effective SIR of each tracked target as a ratio of quadratic forms in b.
struct EffectiveSirModel {
  VariableLayout layout;
  // Per target and per transmit AP of the network (index into tx list of the
  // layout's APs), Hermitian blocks over that AP's variables.
  std::vector<std::vector<CMatrix>> own_blocks;    // F-bar
  std::vector<std::vector<CMatrix>> cross_blocks;  // F-tilde
  // Embedded real forms: A(b) = b^T signal_form b, B(b) = b^T interference_form b.
  std::vector<RMatrix> signal_form;
  std::vector<RMatrix> interference_form;

  int num_targets() const { return static_cast<int>(signal_form.size()); }
  double signal(int target, const RVector& b) const;
  double interference(int target, const RVector& b) const;
  // +infinity when the interference form vanishes at b.
  double sir(int target, const RVector& b) const;
  // Gradient of the signal form, 2 * signal_form * b.
  RVector signal_gradient(int target, const RVector& b) const;
};

inline constexpr double kSirUnbounded = std::numeric_limits<double>::infinity();

// maps.tasks are the tracked targets. Beams and symbols follow precoding's
// layout; only the first sensing_len symbols are used. Throws ConfigError for
// a non-diagonal RCS correlation.
EffectiveSirModel build_effective_sir(const AssociationMaps& maps, int num_aps,
                                      const Beamformers& beams, const SymbolBlock& symbols,
                                      int sensing_len, const TargetLinkFn& link,
                                      const RcsCorrelationFn& rcs_corr);

// First-order under-estimator of the signal form at b_prev: value + grad^T (b - b_prev).
struct AffineBound {
  RVector gradient;
  double offset = 0.0;  // value at b = 0

  double operator()(const RVector& b) const { return gradient.dot(b) + offset; }
};

AffineBound sca_linearize(const EffectiveSirModel& model, int target, const RVector& b_prev);

// Second-order cone form of the per-UE rate constraint:
// ||G_k b + e|| <= sqrt(1 + 1/gamma) h_k^T b, with every row divided by the
// noise standard deviation so e is a unit vector.
struct RateSocModel {
  std::vector<RMatrix> stack;  // G_k
  std::vector<RVector> useful;  // h_k

  int num_ues() const { return static_cast<int>(stack.size()); }
  // gamma_k(b) from the cone, equal to the closed-form SINR.
  double sinr(int ue, const RVector& b) const;
};

RateSocModel build_rate_soc(const VariableLayout& layout, const LinkStatistics& stats,
                            double noise_var);

struct OpcProblem {
  VariableLayout layout;
  EffectiveSirModel sir;  // may hold zero targets
  RateSocModel rate;
  LinkStatistics stats;
  double noise_var = 0.0;
  std::vector<double> budget;
  double sir_target = 1.0;  // linear
};

struct OpcOptions {
  double bisection_tol = 1e-3;
  double sca_tol = 1e-4;
  int sca_max_iter = 50;
  bool enforce_rate = true;
  bool enforce_sir = true;
  BarrierOptions barrier;
};

OpcOptions opc_options(const SystemConfig& config);

struct FeasibilityOutcome {
  FeasibilityStatus status = FeasibilityStatus::kSolverFailure;
  RVector b;
  double max_violation = 0.0;
};

// One convexified feasibility problem around b_prev (gamma <= 0 drops the rate cones).
ConvexFeasibilityProblem assemble_feasibility(const OpcProblem& problem, double gamma,
                                              double sir_target, const RVector& b_prev,
                                              const OpcOptions& options);

FeasibilityOutcome solve_feasibility(const OpcProblem& problem, double gamma, double sir_target,
                                     const RVector& b_prev, const OpcOptions& options);

struct ScaOutcome {
  FeasibilityStatus status = FeasibilityStatus::kSolverFailure;
  RVector b;
  int iterations = 0;
  int flips = 0;  // feasible -> infeasible transitions, expected zero
  bool converged = false;
};

ScaOutcome sca_feasibility(const OpcProblem& problem, double gamma, double sir_target,
                           const RVector& b0, const OpcOptions& options);

struct OpcResult {
  bool success = false;
  RVector b;
  PowerAllocation alloc;
  double gamma_min = 0.0;  // final bisection bracket
  double gamma_max = 0.0;
  double min_sinr = 0.0;   // audited min_k gamma_k(b)
  std::vector<double> sir;  // audited effective SIR per target
  double sir_target = 0.0;
  int bisection_steps = 0;
  int sca_solves = 0;
  int flips = 0;
};

// Outer bisection with inner SCA; b0 must be feasible at gamma_lo.
OpcResult opc_bisection(const OpcProblem& problem, double gamma_lo, double gamma_hi,
                        const RVector& b0, double sir_target, const OpcOptions& options);

// Min over UEs of the full-power single-user SINR bound.
double sinr_upper_bound(const OpcProblem& problem);

// Communication-prioritized max-min: starts from the best of UPC and a few FPC
// candidates that meets the SIR target.
OpcResult optimize_comm_priority(const OpcProblem& problem, const AssociationMaps& maps,
                                 const RMatrix& ue_lsf, const RMatrix& task_lsf,
                                 const OpcOptions& options);

// Sensing-prioritized: maximizes the smallest effective SIR first, then runs
// the communication max-min at that SIR level.
OpcResult optimize_sensing_priority(const OpcProblem& problem, const AssociationMaps& maps,
                                    const RMatrix& ue_lsf, const RMatrix& task_lsf,
                                    const OpcOptions& options);

// Rows (ap, entity_type, entity_id, power_watts) for every nonzero coefficient.
void write_allocation_csv(std::ostream& out, const PowerAllocation& alloc);

}  // namespace cfisac
