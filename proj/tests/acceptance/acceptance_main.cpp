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


// Runs one acceptance criterion (--criterion N) or all of them and prints a
// PASS/FAIL line per criterion. Exit status is non-zero if any check fails.

#include <chrono>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "criteria.hpp"

namespace {

using cfisac::acceptance::Context;
using cfisac::acceptance::Verdict;

struct Criterion {
  int id;
  const char* name;
  Verdict (*run)(const Context&);
  std::optional<double> limit_s;  // pinned runtime limit
};

const std::vector<Criterion>& criteria() {
  namespace a = cfisac::acceptance;
  static const std::vector<Criterion> list = {
      {1, "closed-form SINR fidelity", a::closed_form_sinr_fidelity, 120.0},
      {2, "GLRT ML oracle", a::glrt_ml_oracle, 30.0},
      {3, "H0 calibration", a::null_calibration, 300.0},
      {4, "detection trends", a::detection_trends, 1800.0},
      {5, "SCNR operating point", a::scnr_operating_point, std::nullopt},
      {6, "SICNR reduction", a::sicnr_reduction, std::nullopt},
      {7, "FPC budget exactness", a::fpc_budget_exactness, std::nullopt},
      {8, "SIR form convexity", a::sir_form_convexity, std::nullopt},
      {9, "OPC contract", a::opc_contract, 600.0},
      {10, "OPC vs FPC ordering", a::opc_ordering, std::nullopt},
      {11, "determinism", a::determinism, std::nullopt},
  };
  return list;
}

bool run_one(const Criterion& c, const Context& ctx) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = c.run(ctx);
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  bool pass = v.pass;
  std::string timing = "runtime " + std::to_string(static_cast<int>(seconds + 0.5)) + " s";
  if (c.limit_s) {
    timing += " (limit " + std::to_string(static_cast<int>(*c.limit_s)) + " s)";
    if (seconds > *c.limit_s) {
      pass = false;
      timing += " EXCEEDED";
    }
  }
  std::cout << "criterion " << c.id << " [" << c.name << "]: " << (pass ? "PASS" : "FAIL") << " - "
            << v.detail << "; " << timing << std::endl;
  return pass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cfisac acceptance suite"};
  std::optional<int> only;
  std::string cache = "acceptance_cache";
  app.add_option("--criterion", only, "run a single criterion (1-11)")->check(CLI::Range(1, 11));
  app.add_option("--cache-dir", cache, "directory for results shared between criteria");
  CLI11_PARSE(app, argc, argv);

  Context ctx;
  ctx.cache_dir = cache;
  bool all_pass = true;
  for (const auto& c : criteria())
    if (!only || *only == c.id) all_pass = run_one(c, ctx) && all_pass;
  return all_pass ? EXIT_SUCCESS : EXIT_FAILURE;
}
