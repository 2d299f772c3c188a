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

#include <vector>

#include "cfisac/types.hpp"

namespace cfisac {

// a^T x + c <= 0
struct LinearConstraint {
  RVector a;
  double c = 0.0;
};

// x^T Q x + a^T x + c <= 0, Q symmetric PSD
struct QuadraticConstraint {
  RMatrix q;
  RVector a;
  double c = 0.0;
};

// ||G x + g|| - h^T x - h0 <= 0; g must be nonzero somewhere G x vanishes
// (keeps the norm differentiable).
struct SocConstraint {
  RMatrix g;
  RVector g0;
  RVector h;
  double h0 = 0.0;
};

struct ConvexFeasibilityProblem {
  int dim = 0;
  std::vector<LinearConstraint> linear;
  std::vector<QuadraticConstraint> quadratic;
  std::vector<SocConstraint> soc;

  int num_constraints() const {
    return static_cast<int>(linear.size() + quadratic.size() + soc.size());
  }
  // Largest constraint value at x; <= 0 means feasible.
  double max_violation(const RVector& x) const;
};

enum class FeasibilityStatus { kFeasible, kInfeasible, kSolverFailure };

struct BarrierOptions {
  double feasibility_tol = 1e-7;
  double gap_tol = 1e-9;
  double barrier_growth = 20.0;
  int max_newton_steps = 2000;
  // Return the first strictly feasible central point instead of the most interior one.
  bool stop_when_feasible = false;
};

struct ConvexFeasibilityResult {
  FeasibilityStatus status = FeasibilityStatus::kSolverFailure;
  RVector x;
  double max_violation = 0.0;  // at x
  double lower_bound = 0.0;    // on the optimal phase-I slack
  int newton_steps = 0;
};

// Phase-I log-barrier method: minimizes s subject to f_j(x) <= s, starting
// from x0. The returned point maximizes the smallest slack, so it is the most
// interior feasible point when the set is non-empty. Infeasibility is reported
// only when the duality bound proves a positive optimal slack.
ConvexFeasibilityResult find_feasible_point(const ConvexFeasibilityProblem& problem,
                                            const RVector& x0, const BarrierOptions& options = {});

}  // namespace cfisac
