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

#include "cfisac/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

namespace cfisac {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double value(const LinearConstraint& c, const RVector& x) { return c.a.dot(x) + c.c; }

double value(const QuadraticConstraint& c, const RVector& x) {
  return x.dot(c.q * x) + c.a.dot(x) + c.c;
}

double value(const SocConstraint& c, const RVector& x) {
  return (c.g * x + c.g0).norm() - c.h.dot(x) - c.h0;
}

// Cached Gram matrices of the SOC rows, which the Hessian needs every step.
struct Prepared {
  const ConvexFeasibilityProblem* problem;
  std::vector<RMatrix> gram;     // G^T G
  std::vector<RVector> gram_g0;  // G^T g0
  std::vector<double> g0_sq;     // g0^T g0

  explicit Prepared(const ConvexFeasibilityProblem& p) : problem(&p) {
    for (const auto& c : p.soc) {
      gram.push_back(c.g.transpose() * c.g);
      gram_g0.push_back(c.g.transpose() * c.g0);
      g0_sq.push_back(c.g0.squaredNorm());
    }
  }

  // Constraint values; also fills grad/hessian contributions of the barrier
  // t*s - sum log(s - f_j(x)) when requested. z = (x, s).
  double barrier(const RVector& z, double t, RVector* grad, RMatrix* hess) const {
    const auto& p = *problem;
    const Eigen::Index n = p.dim;
    const RVector x = z.head(n);
    const double s = z(n);
    double phi = t * s;
    if (grad) {
      grad->setZero(n + 1);
      (*grad)(n) = t;
    }
    if (hess) hess->setZero(n + 1, n + 1);

    // Adds -log(s - f) with gradient df and Hessian d2f (optional) of f.
    auto add = [&](double f, const RVector& df, const RMatrix* d2f, double d2f_scale,
                   const RVector* rank1, double rank1_scale) -> bool {
      const double r = s - f;
      if (!(r > 0.0)) return false;
      phi -= std::log(r);
      if (grad) {
        grad->head(n) += df / r;
        (*grad)(n) -= 1.0 / r;
      }
      if (hess) {
        const double r2 = r * r;
        hess->topLeftCorner(n, n).noalias() += df * df.transpose() / r2;
        hess->topRightCorner(n, 1).noalias() -= df / r2;
        hess->bottomLeftCorner(1, n).noalias() -= df.transpose() / r2;
        (*hess)(n, n) += 1.0 / r2;
        if (d2f) hess->topLeftCorner(n, n).noalias() += (d2f_scale / r) * (*d2f);
        if (rank1) hess->topLeftCorner(n, n).noalias() -= (rank1_scale / r) * (*rank1) * rank1->transpose();
      }
      return true;
    };

    for (const auto& c : p.linear)
      if (!add(value(c, x), c.a, nullptr, 0.0, nullptr, 0.0)) return kInf;
    for (const auto& c : p.quadratic) {
      const RVector qx = c.q * x;
      const double f = x.dot(qx) + c.a.dot(x) + c.c;
      const RVector df = 2.0 * qx + c.a;
      if (!add(f, df, &c.q, 2.0, nullptr, 0.0)) return kInf;
    }
    for (std::size_t i = 0; i < p.soc.size(); ++i) {
      const auto& c = p.soc[i];
      // ||r||^2 = x^T G^T G x + 2 x^T G^T g0 + g0^T g0
      const RVector gx = gram[i] * x + gram_g0[i];
      const double norm_sq = x.dot(gram[i] * x) + 2.0 * x.dot(gram_g0[i]) + g0_sq[i];
      const double norm = std::sqrt(std::max(norm_sq, 0.0));
      if (!(norm > 0.0)) return kInf;
      const double f = norm - c.h.dot(x) - c.h0;
      const RVector df = gx / norm - c.h;
      // Hessian of ||r||: G^T G / ||r|| - (G^T r)(G^T r)^T / ||r||^3
      if (!add(f, df, &gram[i], 1.0 / norm, &gx, 1.0 / (norm * norm * norm))) return kInf;
    }
    return phi;
  }
};

}  // namespace

double ConvexFeasibilityProblem::max_violation(const RVector& x) const {
  double worst = -kInf;
  for (const auto& c : linear) worst = std::max(worst, value(c, x));
  for (const auto& c : quadratic) worst = std::max(worst, value(c, x));
  for (const auto& c : soc) worst = std::max(worst, value(c, x));
  return worst;
}

ConvexFeasibilityResult find_feasible_point(const ConvexFeasibilityProblem& problem,
                                            const RVector& x0, const BarrierOptions& options) {
  if (x0.size() != problem.dim) throw std::invalid_argument("initial point has wrong dimension");
  ConvexFeasibilityResult result;
  result.x = x0;
  const int num = problem.num_constraints();
  if (num == 0) {
    result.status = FeasibilityStatus::kFeasible;
    result.max_violation = 0.0;
    result.lower_bound = -kInf;
    return result;
  }

  const Prepared prep(problem);
  const Eigen::Index n = problem.dim;
  RVector z(n + 1);
  z.head(n) = x0;
  const double start_violation = problem.max_violation(x0);
  z(n) = start_violation + std::max(1.0, std::abs(start_violation));

  double t = 1.0;
  RVector grad;
  RMatrix hess;
  int steps = 0;
  bool failed = false;
  while (true) {
    // Centering by damped Newton.
    while (steps < options.max_newton_steps) {
      const double phi = prep.barrier(z, t, &grad, &hess);
      if (!std::isfinite(phi)) {
        failed = true;
        break;
      }
      hess.diagonal().array() += 1e-14 * std::max(1.0, hess.diagonal().cwiseAbs().maxCoeff());
      Eigen::LDLT<RMatrix> ldlt(hess);
      const RVector step = -ldlt.solve(grad);
      if (ldlt.info() != Eigen::Success || !step.allFinite()) {
        failed = true;
        break;
      }
      const double decrement = -grad.dot(step);
      ++steps;
      if (decrement / 2.0 <= 1e-12) break;
      double alpha = 1.0;
      double next = kInf;
      while (alpha > 1e-16) {
        next = prep.barrier(z + alpha * step, t, nullptr, nullptr);
        if (std::isfinite(next) && next <= phi - 0.25 * alpha * decrement) break;
        alpha *= 0.5;
      }
      if (alpha <= 1e-16) break;  // numerical floor reached
      z += alpha * step;
    }
    if (failed || steps >= options.max_newton_steps) break;

    const double gap = num / t;
    const double s = z(n);
    // s is within `gap` of the optimal slack: decide as early as possible.
    if (options.stop_when_feasible && s <= -options.feasibility_tol &&
        problem.max_violation(z.head(n)) <= 0.0)
      break;
    if (s - gap > 0.0) break;
    if (gap <= options.gap_tol) break;
    t *= options.barrier_growth;
  }

  result.x = z.head(n);
  result.newton_steps = steps;
  result.max_violation = problem.max_violation(result.x);
  result.lower_bound = z(n) - num / t;
  if (result.max_violation <= options.feasibility_tol) {
    result.status = FeasibilityStatus::kFeasible;
  } else if (result.lower_bound > 0.0 && !failed) {
    result.status = FeasibilityStatus::kInfeasible;
  } else {
    result.status = FeasibilityStatus::kSolverFailure;
  }
  return result;
}

}  // namespace cfisac
