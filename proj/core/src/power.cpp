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

#include "cfisac/power.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace cfisac {
namespace {

// Largest |off-diagonal| relative to the largest diagonal entry.
bool is_diagonal(const CMatrix& r) {
  const double scale = std::max(r.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  for (Eigen::Index i = 0; i < r.rows(); ++i)
    for (Eigen::Index j = 0; j < r.cols(); ++j)
      if (i != j && std::abs(r(i, j)) > 1e-12 * scale) return false;
  return true;
}

// Exponents relative to the AP's largest, computed in the log domain.
std::vector<double> normalized_powers(const std::vector<double>& lsf, double kappa) {
  std::vector<double> out(lsf.size());
  if (lsf.empty()) return out;
  double top = -std::numeric_limits<double>::infinity();
  for (double v : lsf) {
    if (!(v > 0.0)) throw std::invalid_argument("large-scale fading must be positive");
    top = std::max(top, kappa * std::log(v));
  }
  for (std::size_t i = 0; i < lsf.size(); ++i) out[i] = std::exp(kappa * std::log(lsf[i]) - top);
  return out;
}

double min_sinr(const OpcProblem& problem, const PowerAllocation& alloc) {
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < problem.stats.num_ues(); ++k)
    worst = std::min(worst, closed_form_sinr(k, alloc, problem.stats, problem.noise_var).gamma());
  return problem.stats.num_ues() > 0 ? worst : 0.0;
}

// Smallest effective SIR over targets with a non-vanishing interference form.
double min_sir(const OpcProblem& problem, const RVector& b) {
  double worst = kSirUnbounded;
  for (int l = 0; l < problem.sir.num_targets(); ++l) worst = std::min(worst, problem.sir.sir(l, b));
  return worst;
}

void audit(const OpcProblem& problem, OpcResult& r) {
  r.alloc = problem.layout.allocation(r.b);
  r.min_sinr = min_sinr(problem, r.alloc);
  r.sir.clear();
  for (int l = 0; l < problem.sir.num_targets(); ++l) r.sir.push_back(problem.sir.sir(l, r.b));
}

RVector clip_nonnegative(RVector b) { return b.cwiseMax(0.0); }

}  // namespace

std::vector<double> ap_budgets(const Scenario& scenario, const SystemConfig& config) {
  std::vector<double> budget(scenario.num_aps(), 0.0);
  for (int m : scenario.tx_aps) budget[m] = config.ap_power_w;
  return budget;
}

PowerAllocation fpc_allocate(const RMatrix& ue_lsf, const RMatrix& task_lsf,
                             const AssociationMaps& maps, std::span<const double> budget,
                             double kappa_c, double kappa_s) {
  if (!std::isfinite(kappa_c) || !std::isfinite(kappa_s))
    throw std::invalid_argument("power-control exponents must be finite");
  const int num_aps = static_cast<int>(budget.size());
  PowerAllocation alloc = PowerAllocation::zeros(static_cast<int>(ue_lsf.rows()),
                                                 static_cast<int>(task_lsf.rows()), num_aps);
  for (int m = 0; m < num_aps; ++m) {
    const auto& ues = m < static_cast<int>(maps.ues_of_ap.size()) ? maps.ues_of_ap[m]
                                                                  : std::vector<int>{};
    const auto& tasks = m < static_cast<int>(maps.tasks_of_ap.size()) ? maps.tasks_of_ap[m]
                                                                     : std::vector<int>{};
    if (ues.empty() && tasks.empty()) continue;
    std::vector<double> rho, lambda;
    for (int k : ues) rho.push_back(ue_lsf(k, m));
    for (int l : tasks) lambda.push_back(task_lsf(l, m));
    const std::vector<double> comm = normalized_powers(rho, kappa_c);
    const std::vector<double> sense = normalized_powers(lambda, kappa_s);
    double total = 0.0;
    for (double v : comm) total += v;
    for (double v : sense) total += v;
    const double scale = budget[m] / total;
    for (std::size_t i = 0; i < ues.size(); ++i) alloc.comm(ues[i], m) = scale * comm[i];
    for (std::size_t i = 0; i < tasks.size(); ++i) alloc.sense(tasks[i], m) = scale * sense[i];
  }
  return alloc;
}

VariableLayout VariableLayout::from_maps(const AssociationMaps& maps, int num_ues, int num_aps) {
  VariableLayout layout;
  layout.num_ues = num_ues;
  layout.num_tasks = static_cast<int>(maps.tasks.size());
  layout.num_aps = num_aps;
  layout.of_ap.assign(num_aps, {});
  for (int m = 0; m < num_aps; ++m) {
    if (m < static_cast<int>(maps.ues_of_ap.size()))
      for (int k : maps.ues_of_ap[m]) {
        layout.of_ap[m].push_back(layout.size());
        layout.vars.push_back({m, EntityType::kUe, k});
      }
    if (m < static_cast<int>(maps.tasks_of_ap.size()))
      for (int l : maps.tasks_of_ap[m]) {
        layout.of_ap[m].push_back(layout.size());
        layout.vars.push_back({m, EntityType::kTarget, l});
      }
  }
  return layout;
}

int VariableLayout::index(int ap, EntityType type, int entity) const {
  if (ap < 0 || ap >= num_aps) return -1;
  for (int v : of_ap[ap])
    if (vars[v].type == type && vars[v].entity == entity) return v;
  return -1;
}

RVector VariableLayout::amplitudes(const PowerAllocation& alloc) const {
  RVector b(size());
  for (int v = 0; v < size(); ++v) {
    const auto& var = vars[v];
    const double p = var.type == EntityType::kUe ? alloc.comm(var.entity, var.ap)
                                                 : alloc.sense(var.entity, var.ap);
    b(v) = std::sqrt(std::max(p, 0.0));
  }
  return b;
}

PowerAllocation VariableLayout::allocation(const RVector& b) const {
  if (b.size() != size()) throw std::invalid_argument("amplitude vector has wrong dimension");
  PowerAllocation alloc = PowerAllocation::zeros(num_ues, num_tasks, num_aps);
  for (int v = 0; v < size(); ++v) {
    const auto& var = vars[v];
    const double a = std::max(b(v), 0.0);
    if (var.type == EntityType::kUe)
      alloc.comm(var.entity, var.ap) = a * a;
    else
      alloc.sense(var.entity, var.ap) = a * a;
  }
  return alloc;
}

double EffectiveSirModel::signal(int target, const RVector& b) const {
  return b.dot(signal_form[target] * b);
}

double EffectiveSirModel::interference(int target, const RVector& b) const {
  return b.dot(interference_form[target] * b);
}

double EffectiveSirModel::sir(int target, const RVector& b) const {
  const double den = interference(target, b);
  if (!(den > 0.0)) return kSirUnbounded;
  return signal(target, b) / den;
}

RVector EffectiveSirModel::signal_gradient(int target, const RVector& b) const {
  return 2.0 * signal_form[target] * b;
}

EffectiveSirModel build_effective_sir(const AssociationMaps& maps, int num_aps,
                                      const Beamformers& beams, const SymbolBlock& symbols,
                                      int sensing_len, const TargetLinkFn& link,
                                      const RcsCorrelationFn& rcs_corr) {
  EffectiveSirModel model;
  const int num_ues = static_cast<int>(symbols.data.rows());
  model.layout = VariableLayout::from_maps(maps, num_ues, num_aps);
  const VariableLayout& layout = model.layout;
  const int num_targets = static_cast<int>(maps.tasks.size());
  const int dim = layout.size();

  // Beam and symbol matrices of every transmit AP over its variables.
  std::vector<CMatrix> beam_of(num_aps), sym_of(num_aps);
  for (int i = 0; i < num_aps; ++i) {
    const auto& vars = layout.of_ap[i];
    if (vars.empty()) continue;
    Eigen::Index n = 0;
    for (int v : vars) {
      const auto& var = layout.vars[v];
      const CVector& w =
          var.type == EntityType::kUe ? beams.comm[var.entity][i] : beams.sense[var.entity][i];
      n = std::max(n, w.size());
    }
    beam_of[i] = CMatrix::Zero(n, static_cast<Eigen::Index>(vars.size()));
    sym_of[i] = CMatrix::Zero(static_cast<Eigen::Index>(vars.size()), sensing_len);
    for (std::size_t c = 0; c < vars.size(); ++c) {
      const auto& var = layout.vars[vars[c]];
      const auto col = static_cast<Eigen::Index>(c);
      if (var.type == EntityType::kUe) {
        const CVector& w = beams.comm[var.entity][i];
        if (w.size() > 0) beam_of[i].col(col) = w;
        sym_of[i].row(col) = symbols.data.row(var.entity).head(sensing_len);
      } else {
        const CVector& w = beams.sense[var.entity][i];
        if (w.size() > 0) beam_of[i].col(col) = w;
        sym_of[i].row(col) = symbols.sensing[i].row(var.entity).head(sensing_len);
      }
    }
  }
  // Sum over t of (x[t] x[t]^H)^*, shared by every quadratic form of the AP.
  std::vector<CMatrix> sym_gram(num_aps);
  for (int i = 0; i < num_aps; ++i)
    if (sym_of[i].size() > 0) sym_gram[i] = sym_of[i].conjugate() * sym_of[i].transpose();

  // F for one (target, receive AP, transmit AP) triple, over AP i's variables.
  auto block = [&](int target, int rx, int tx, double rcs_var) -> CMatrix {
    const TargetLink tl = link(target, rx, tx);
    const CMatrix aw = tl.response * beam_of[tx];
    const CMatrix g = tl.gain * (aw.adjoint() * aw);
    return rcs_var * g.cwiseProduct(sym_gram[tx]);
  };

  auto rcs_variances = [&](int target, int rx) -> RVector {
    const CMatrix r = rcs_corr(target, rx);
    const auto& tx = maps.tasks[target].tx;
    if (r.rows() != static_cast<Eigen::Index>(tx.size()) || r.cols() != r.rows())
      throw std::invalid_argument("RCS correlation must match the target's transmit set");
    if (!is_diagonal(r))
      throw ConfigError(
          "effective SIR requires a diagonal RCS correlation: the signal and interference "
          "forms are convex only for uncorrelated reflections");
    return r.diagonal().real();
  };

  model.own_blocks.assign(num_targets, std::vector<CMatrix>(num_aps));
  model.cross_blocks.assign(num_targets, std::vector<CMatrix>(num_aps));
  model.signal_form.assign(num_targets, RMatrix::Zero(dim, dim));
  model.interference_form.assign(num_targets, RMatrix::Zero(dim, dim));

  auto accumulate = [&](std::vector<CMatrix>& blocks, RMatrix& form, int tx, const CMatrix& f) {
    if (blocks[tx].size() == 0) blocks[tx] = CMatrix::Zero(f.rows(), f.cols());
    blocks[tx] += f;
    const auto& vars = layout.of_ap[tx];
    for (std::size_t u = 0; u < vars.size(); ++u)
      for (std::size_t v = 0; v < vars.size(); ++v)
        form(vars[u], vars[v]) += f(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)).real();
  };

  for (int l = 0; l < num_targets; ++l) {
    for (int rx : maps.tasks[l].rx) {
      for (int lp = 0; lp < num_targets; ++lp) {
        const auto& tx_set = maps.tasks[lp].tx;
        const RVector var = rcs_variances(lp, rx);
        for (std::size_t j = 0; j < tx_set.size(); ++j) {
          const int i = tx_set[j];
          if (layout.of_ap[i].empty()) continue;
          const CMatrix f = block(lp, rx, i, var(static_cast<Eigen::Index>(j)));
          if (lp == l)
            accumulate(model.own_blocks[l], model.signal_form[l], i, f);
          else
            accumulate(model.cross_blocks[l], model.interference_form[l], i, f);
        }
      }
    }
    model.signal_form[l] = 0.5 * (model.signal_form[l] + model.signal_form[l].transpose()).eval();
    model.interference_form[l] =
        0.5 * (model.interference_form[l] + model.interference_form[l].transpose()).eval();
  }
  return model;
}

AffineBound sca_linearize(const EffectiveSirModel& model, int target, const RVector& b_prev) {
  AffineBound bound;
  bound.gradient = model.signal_gradient(target, b_prev);
  // value(b_prev) - grad^T b_prev = A - 2A = -A
  bound.offset = -model.signal(target, b_prev);
  return bound;
}

RateSocModel build_rate_soc(const VariableLayout& layout, const LinkStatistics& stats,
                            double noise_var) {
  if (!(noise_var > 0.0)) throw std::invalid_argument("noise variance must be positive");
  const double inv_sigma = 1.0 / std::sqrt(noise_var);
  const int num_ues = stats.num_ues();
  const int dim = layout.size();
  RateSocModel model;

  std::vector<std::vector<int>> comm_vars(num_ues);  // variables of each UE
  std::vector<int> sense_vars;
  for (int v = 0; v < dim; ++v) {
    if (layout.vars[v].type == EntityType::kUe)
      comm_vars[layout.vars[v].entity].push_back(v);
    else
      sense_vars.push_back(v);
  }
  Eigen::Index comm_count = 0;
  for (const auto& vs : comm_vars) comm_count += static_cast<Eigen::Index>(vs.size());

  for (int k = 0; k < num_ues; ++k) {
    const Eigen::Index rows = 2 * (num_ues - 1) + comm_count +
                              static_cast<Eigen::Index>(sense_vars.size());
    RMatrix g = RMatrix::Zero(rows, dim);
    RVector h = RVector::Zero(dim);
    Eigen::Index row = 0;
    // Pilot-contamination means, real and imaginary parts.
    for (int j = 0; j < num_ues; ++j) {
      if (j == k) continue;
      for (int v : comm_vars[j]) {
        const int m = layout.vars[v].ap;
        const double tp = stats.trace_phi(j, m);
        if (!(tp > 0.0)) continue;
        const Complex c = stats.pilot_coupling(k, j) * stats.tr_c_lambda[k](j, m) / std::sqrt(tp);
        g(row, v) = c.real() * inv_sigma;
        g(row + 1, v) = c.imag() * inv_sigma;
      }
      row += 2;
    }
    // Beamforming-uncertainty and multi-user variances.
    for (int j = 0; j < num_ues; ++j)
      for (int v : comm_vars[j]) {
        const int m = layout.vars[v].ap;
        const double tp = stats.trace_phi(j, m);
        if (tp > 0.0)
          g(row, v) = std::sqrt(std::max(stats.tr_c_phi[k](j, m), 0.0) / tp) * inv_sigma;
        ++row;
      }
    // Sensing interference.
    for (int v : sense_vars) {
      const auto& var = layout.vars[v];
      g(row, v) = std::sqrt(std::max(stats.tr_c_w[k](var.entity, var.ap), 0.0)) * inv_sigma;
      ++row;
    }
    for (int v : comm_vars[k]) {
      const double tp = stats.trace_phi(k, layout.vars[v].ap);
      h(v) = std::sqrt(std::max(tp, 0.0)) * inv_sigma;
    }
    model.stack.push_back(std::move(g));
    model.useful.push_back(std::move(h));
  }
  return model;
}

double RateSocModel::sinr(int ue, const RVector& b) const {
  const double amplitude = useful[ue].dot(b);
  const double den = (stack[ue] * b).squaredNorm() + 1.0;
  return amplitude * amplitude / den;
}

OpcOptions opc_options(const SystemConfig& config) {
  OpcOptions o;
  o.bisection_tol = config.bisection_tol;
  o.sca_tol = config.sca_tol;
  o.sca_max_iter = config.sca_max_iter;
  return o;
}

ConvexFeasibilityProblem assemble_feasibility(const OpcProblem& problem, double gamma,
                                              double sir_target, const RVector& b_prev,
                                              const OpcOptions& options) {
  const VariableLayout& layout = problem.layout;
  const int dim = layout.size();
  ConvexFeasibilityProblem cp;
  cp.dim = dim;

  // C1: b >= 0.
  for (int v = 0; v < dim; ++v) {
    LinearConstraint c;
    c.a = RVector::Zero(dim);
    c.a(v) = -1.0;
    cp.linear.push_back(std::move(c));
  }
  // C2: per-AP budget, normalized by the budget.
  for (int m = 0; m < layout.num_aps; ++m) {
    if (layout.of_ap[m].empty()) continue;
    const double budget = problem.budget[m];
    if (!(budget > 0.0)) throw std::invalid_argument("AP with variables has no power budget");
    QuadraticConstraint c;
    c.q = RMatrix::Zero(dim, dim);
    for (int v : layout.of_ap[m]) c.q(v, v) = 1.0 / budget;
    c.a = RVector::Zero(dim);
    c.c = -1.0;
    cp.quadratic.push_back(std::move(c));
  }
  // C3: sir_target * B(b) <= A(b_prev) + grad^T (b - b_prev), normalized.
  if (options.enforce_sir && sir_target > 0.0) {
    for (int l = 0; l < problem.sir.num_targets(); ++l) {
      const RMatrix& hb = problem.sir.interference_form[l];
      if (!(hb.cwiseAbs().maxCoeff() > 0.0)) continue;  // interference-free target
      const AffineBound bound = sca_linearize(problem.sir, l, b_prev);
      const double value = problem.sir.signal(l, b_prev);
      const double tr = problem.sir.signal_form[l].trace();
      const double scale = value > 0.0 ? value : (tr > 0.0 ? tr : 1.0);
      QuadraticConstraint c;
      c.q = (sir_target / scale) * hb;
      c.a = -bound.gradient / scale;
      c.c = -bound.offset / scale;
      cp.quadratic.push_back(std::move(c));
    }
  }
  // C4: ||(h^T b, G b + e)|| <= sqrt(1 + 1/gamma) h^T b.
  if (options.enforce_rate && gamma > 0.0) {
    const double factor = std::sqrt(1.0 + 1.0 / gamma);
    for (int k = 0; k < problem.rate.num_ues(); ++k) {
      const RMatrix& g = problem.rate.stack[k];
      SocConstraint c;
      c.g = RMatrix::Zero(g.rows() + 2, dim);
      c.g.row(0) = problem.rate.useful[k].transpose();
      c.g.middleRows(1, g.rows()) = g;
      c.g0 = RVector::Zero(g.rows() + 2);
      c.g0(g.rows() + 1) = 1.0;
      c.h = factor * problem.rate.useful[k];
      cp.soc.push_back(std::move(c));
    }
  }
  return cp;
}

FeasibilityOutcome solve_feasibility(const OpcProblem& problem, double gamma, double sir_target,
                                     const RVector& b_prev, const OpcOptions& options) {
  const ConvexFeasibilityProblem cp =
      assemble_feasibility(problem, gamma, sir_target, b_prev, options);
  const ConvexFeasibilityResult r = find_feasible_point(cp, b_prev, options.barrier);
  FeasibilityOutcome out;
  out.status = r.status;
  out.b = r.x;
  out.max_violation = r.max_violation;
  return out;
}

ScaOutcome sca_feasibility(const OpcProblem& problem, double gamma, double sir_target,
                           const RVector& b0, const OpcOptions& options) {
  ScaOutcome out;
  out.b = b0;
  RVector b_prev = b0;
  bool feasible_seen = false;
  for (int u = 0; u < options.sca_max_iter; ++u) {
    const FeasibilityOutcome step = solve_feasibility(problem, gamma, sir_target, b_prev, options);
    ++out.iterations;
    if (step.status != FeasibilityStatus::kFeasible) {
      if (!feasible_seen) {
        out.status = step.status;
        return out;
      }
      // The previous iterate already satisfies the original constraints.
      ++out.flips;
      out.status = FeasibilityStatus::kFeasible;
      out.b = b_prev;
      return out;
    }
    feasible_seen = true;
    const RVector b = clip_nonnegative(step.b);
    const double norm = b.squaredNorm();
    const double change = norm > 0.0 ? (b - b_prev).squaredNorm() / norm : 0.0;
    b_prev = b;
    out.b = b;
    if (change <= options.sca_tol) {
      out.converged = true;
      out.status = FeasibilityStatus::kFeasible;
      return out;
    }
  }
  // Iteration cap: conservatively infeasible at this gamma.
  out.status = FeasibilityStatus::kInfeasible;
  return out;
}

OpcResult opc_bisection(const OpcProblem& problem, double gamma_lo, double gamma_hi,
                        const RVector& b0, double sir_target, const OpcOptions& options) {
  OpcResult r;
  r.sir_target = sir_target;
  r.b = b0;
  double lo = gamma_lo, hi = std::max(gamma_hi, gamma_lo);
  while (hi - lo > options.bisection_tol) {
    const double gamma = 0.5 * (lo + hi);
    const ScaOutcome s = sca_feasibility(problem, gamma, sir_target, r.b, options);
    r.sca_solves += s.iterations;
    r.flips += s.flips;
    ++r.bisection_steps;
    if (s.status == FeasibilityStatus::kFeasible) {
      lo = gamma;
      r.b = s.b;
    } else {
      hi = gamma;
    }
  }
  r.gamma_min = lo;
  r.gamma_max = hi;
  r.success = true;
  audit(problem, r);
  return r;
}

double sinr_upper_bound(const OpcProblem& problem) {
  const LinkStatistics& s = problem.stats;
  double bound = std::numeric_limits<double>::infinity();
  for (int k = 0; k < s.num_ues(); ++k) {
    std::vector<int> aps;
    for (int v = 0; v < problem.layout.size(); ++v) {
      const auto& var = problem.layout.vars[v];
      if (var.type == EntityType::kUe && var.entity == k) aps.push_back(var.ap);
    }
    if (aps.empty()) return 0.0;
    const double share = problem.noise_var / static_cast<double>(aps.size());
    double total = 0.0;
    for (int m : aps) {
      const double tp = s.trace_phi(k, m);
      if (!(tp > 0.0)) continue;
      const double p = problem.budget[m];
      total += p * tp / (p * s.tr_c_phi[k](k, m) / tp + share);
    }
    bound = std::min(bound, total);
  }
  return std::isfinite(bound) ? bound : 0.0;
}

namespace {

struct StartPoint {
  bool ok = false;
  RVector b;
  double min_sinr = 0.0;
};

// Raises the smallest effective SIR from b0 by SCA on the SIR constraints
// alone, doubling the goal after each success and stopping at `cap`.
struct SirClimb {
  RVector b;
  double level = 0.0;
  int solves = 0;
};

SirClimb climb_sir(const OpcProblem& problem, const RVector& b0, double cap,
                   const OpcOptions& options) {
  OpcOptions sir_only = options;
  sir_only.enforce_rate = false;
  SirClimb c{b0, min_sir(problem, b0), 0};
  for (int grow = 0; grow < 60 && c.level < cap; ++grow) {
    const double goal = c.level > 0.0 ? std::min(cap, 2.0 * c.level) : cap;
    const ScaOutcome s = sca_feasibility(problem, 0.0, goal, c.b, sir_only);
    c.solves += s.iterations;
    if (s.status != FeasibilityStatus::kFeasible) break;
    c.b = s.b;
    c.level = std::max(goal, min_sir(problem, s.b));
  }
  return c;
}

// UPC when it meets the SIR target; otherwise the best FPC candidate that
// does; otherwise the SIR is climbed from the candidate with the best SIR.
StartPoint initial_point(const OpcProblem& problem, const AssociationMaps& maps,
                         const RMatrix& ue_lsf, const RMatrix& task_lsf, double sir_target,
                         const OpcOptions& options) {
  static constexpr double kCandidates[][2] = {{0.0, 0.0},  {0.0, 0.5}, {0.5, 0.0},
                                              {0.5, 0.5},  {0.0, 1.0}, {1.0, 0.0},
                                              {1.0, 1.0},  {0.0, -0.5}, {-0.5, 0.0}};
  StartPoint best;
  RVector best_sir_b;
  double best_sir = -1.0;
  for (const auto& kappa : kCandidates) {
    const PowerAllocation alloc =
        fpc_allocate(ue_lsf, task_lsf, maps, problem.budget, kappa[0], kappa[1]);
    const RVector b = problem.layout.amplitudes(alloc);
    const double sir = min_sir(problem, b);
    if (sir > best_sir) {
      best_sir = sir;
      best_sir_b = b;
    }
    if (options.enforce_sir && !(sir >= sir_target)) continue;
    const double g = min_sinr(problem, alloc);
    if (!best.ok || g > best.min_sinr) best = {true, b, g};
    if (kappa[0] == 0.0 && kappa[1] == 0.0) return best;  // UPC is the reference start
  }
  if (best.ok) return best;
  const SirClimb c = climb_sir(problem, best_sir_b, sir_target, options);
  if (c.level >= sir_target) {
    best.ok = true;
    best.b = c.b;
    best.min_sinr = min_sinr(problem, problem.layout.allocation(c.b));
  }
  return best;
}

OpcResult comm_max_min(const OpcProblem& problem, const StartPoint& start, double sir_target,
                       const OpcOptions& options) {
  const double hi = std::max(sinr_upper_bound(problem) * (1.0 + 1e-9), start.min_sinr);
  return opc_bisection(problem, start.min_sinr, hi, start.b, sir_target, options);
}

}  // namespace

OpcResult optimize_comm_priority(const OpcProblem& problem, const AssociationMaps& maps,
                                 const RMatrix& ue_lsf, const RMatrix& task_lsf,
                                 const OpcOptions& options) {
  const StartPoint start =
      initial_point(problem, maps, ue_lsf, task_lsf, problem.sir_target, options);
  if (!start.ok) {
    OpcResult r;
    r.sir_target = problem.sir_target;
    return r;
  }
  return comm_max_min(problem, start, problem.sir_target, options);
}

OpcResult optimize_sensing_priority(const OpcProblem& problem, const AssociationMaps& maps,
                                    const RMatrix& ue_lsf, const RMatrix& task_lsf,
                                    const OpcOptions& options) {
  const StartPoint start = initial_point(problem, maps, ue_lsf, task_lsf, 0.0, options);
  if (!start.ok) return {};
  const double base = min_sir(problem, start.b);
  if (!std::isfinite(base) || !(base > 0.0))
    return comm_max_min(problem, start, problem.sir_target, options);

  OpcOptions sir_only = options;
  sir_only.enforce_rate = false;
  // Bracket the largest attainable smallest SIR, then bisect relative to it.
  const SirClimb climb = climb_sir(problem, start.b, kSirUnbounded, options);
  int solves = climb.solves;
  double lo = std::max(base, climb.level);
  RVector b_lo = climb.b;
  double hi = 2.0 * lo;
  while (hi - lo > options.bisection_tol * lo) {
    const double mid = 0.5 * (lo + hi);
    const ScaOutcome s = sca_feasibility(problem, 0.0, mid, b_lo, sir_only);
    solves += s.iterations;
    if (s.status == FeasibilityStatus::kFeasible) {
      lo = std::max(mid, min_sir(problem, s.b));
      b_lo = s.b;
    } else {
      hi = mid;
    }
  }
  const double sir_level = lo * (1.0 - options.bisection_tol);
  StartPoint sensing_start{true, b_lo, min_sinr(problem, problem.layout.allocation(b_lo))};
  OpcResult r = comm_max_min(problem, sensing_start, sir_level, options);
  r.sca_solves += solves;
  return r;
}

void write_allocation_csv(std::ostream& out, const PowerAllocation& alloc) {
  out << "ap,entity_type,entity_id,power_watts\n";
  out.precision(12);
  for (Eigen::Index m = 0; m < alloc.comm.cols(); ++m) {
    for (Eigen::Index k = 0; k < alloc.comm.rows(); ++k)
      if (alloc.comm(k, m) > 0.0) out << m << ",ue," << k << ',' << alloc.comm(k, m) << '\n';
    for (Eigen::Index l = 0; l < alloc.sense.rows(); ++l)
      if (alloc.sense(l, m) > 0.0) out << m << ",target," << l << ',' << alloc.sense(l, m) << '\n';
  }
}

}  // namespace cfisac
