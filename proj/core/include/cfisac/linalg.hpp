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

#include "cfisac/types.hpp"

namespace cfisac {

// Principal square root of a Hermitian PSD matrix; negative eigenvalues are
// treated as zero.
CMatrix hermitian_sqrt(const CMatrix& a);

// Hermitian inverse square root; throws NumericalError if a is not PD.
CMatrix hermitian_inv_sqrt(const CMatrix& a);

// Clips negative eigenvalues at zero and rescales to the original trace.
CMatrix clip_to_psd(const CMatrix& a);

double min_eigenvalue(const CMatrix& a);
double min_eigenvalue(const RMatrix& a);

CMatrix kron(const CMatrix& a, const CMatrix& b);

// Hermitian part (A + A^H) / 2.
CMatrix hermitian_part(const CMatrix& a);

}  // namespace cfisac
