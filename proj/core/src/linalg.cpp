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

#include "cfisac/linalg.hpp"

#include <Eigen/Eigenvalues>

namespace cfisac {

CMatrix hermitian_part(const CMatrix& a) { return 0.5 * (a + a.adjoint()); }

CMatrix hermitian_sqrt(const CMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a));
  RVector d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

CMatrix hermitian_inv_sqrt(const CMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a));
  const RVector& ev = es.eigenvalues();
  if (ev.size() == 0 || !(ev.minCoeff() > 0.0))
    throw NumericalError("matrix is not positive definite");
  RVector d = ev.cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

CMatrix clip_to_psd(const CMatrix& a) {
  CMatrix h = hermitian_part(a);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  if (es.eigenvalues().minCoeff() >= 0.0) return h;
  const double trace = h.trace().real();
  RVector d = es.eigenvalues().cwiseMax(0.0);
  CMatrix out = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
  const double clipped = d.sum();
  if (clipped > 0.0) out *= trace / clipped;
  return hermitian_part(out);
}

double min_eigenvalue(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double min_eigenvalue(const RMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace cfisac
