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


#include <algorithm>
#include <map>
#include <sstream>

#include "cfisac/comm_metrics.hpp"
#include "criteria.hpp"
#include "support.hpp"

namespace cfisac::acceptance {

// Closed-form SINR terms against the Monte Carlo moment oracle on small
// instances where every AP serves every UE.
Verdict closed_form_sinr_fidelity(const Context&) {
  constexpr int kInstances = 10;
  constexpr int kBlocks = 10000;
  constexpr double kTolerance = 0.03;  // relative, per term and on the SINR

  RandomStream root(20260101);
  double worst = 0.0;
  std::string worst_where;
  std::map<std::string, double> worst_per_term;
  for (int i = 0; i < kInstances; ++i) {
    RandomStream inst_rng = root.substream({1, static_cast<std::uint64_t>(i)});
    const testing::CommInstance inst = testing::make_comm_instance(4, 2, 2, 1, inst_rng);
    const EmpiricalSinrModel model = inst.oracle_model();
    for (int k = 0; k < inst.num_ues; ++k) {
      const SinrTerms cf = closed_form_sinr(k, inst.alloc, inst.stats, inst.noise_var);
      RandomStream mc = root.substream({2, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(k)});
      const SinrTerms em = empirical_sinr(k, inst.alloc, model, kBlocks, mc);
      const std::pair<const char*, double> errors[] = {
          {"A", testing::rel_err(em.useful, cf.useful)},
          {"B", testing::rel_err(em.uncertainty, cf.uncertainty)},
          {"C", testing::rel_err(em.multiuser, cf.multiuser)},
          {"D", testing::rel_err(em.sensing, cf.sensing)},
          {"gamma", testing::rel_err(em.gamma(), cf.gamma())},
      };
      for (const auto& [name, err] : errors) {
        worst_per_term[name] = std::max(worst_per_term[name], err);
        if (err > worst) {
          worst = err;
          worst_where = std::string(name) + " of UE " + std::to_string(k) + " in instance " +
                        std::to_string(i);
        }
      }
    }
  }
  std::ostringstream detail;
  detail << "worst relative error " << worst << " (" << worst_where << "), tolerance " << kTolerance
         << " over " << kInstances << " instances x " << kBlocks << " blocks; worst per term:";
  for (const auto& [name, err] : worst_per_term) detail << " " << name << " " << err;
  return {worst <= kTolerance, detail.str()};
}

}  // namespace cfisac::acceptance
