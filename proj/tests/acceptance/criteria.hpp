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


// Acceptance criteria: each check returns a verdict plus a one-line detail.

#pragma once

#include <filesystem>
#include <string>

namespace cfisac::acceptance {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Context {
  // Holds results shared between criteria (the desk-scale detection sweep).
  std::filesystem::path cache_dir;
};

Verdict closed_form_sinr_fidelity(const Context& ctx);   // 1
Verdict glrt_ml_oracle(const Context& ctx);              // 2
Verdict null_calibration(const Context& ctx);            // 3
Verdict detection_trends(const Context& ctx);            // 4
Verdict scnr_operating_point(const Context& ctx);        // 5
Verdict sicnr_reduction(const Context& ctx);             // 6
Verdict fpc_budget_exactness(const Context& ctx);        // 7
Verdict sir_form_convexity(const Context& ctx);          // 8
Verdict opc_contract(const Context& ctx);                // 9
Verdict opc_ordering(const Context& ctx);                // 10
Verdict determinism(const Context& ctx);                 // 11

}  // namespace cfisac::acceptance
