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

// Command-line driver: parses arguments, loads the config and dispatches to
// the library. No numerical logic lives here.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cfisac/channels.hpp"
#include "cfisac/config.hpp"
#include "cfisac/harness.hpp"
#include "cfisac/io.hpp"
#include "cfisac/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

constexpr const char* kConfigExample =
    "example config (INI, sections mirror the library modules):\n"
    "  [scenario]\n"
    "  num_aps = 16\n"
    "  num_ues = 16\n"
    "  antennas_per_ap = 4\n"
    "  [sensing]\n"
    "  whitening = cholesky\n"
    "see configs/baseline.cfg for the full baseline\n";

// Thrown for problems the user can fix by changing the invocation or config.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

cfisac::SystemConfig load(const std::string& path) {
  if (path.empty()) throw UsageError(std::string("missing --config\n") + kConfigExample);
  if (!std::filesystem::exists(path))
    throw UsageError("config file not found: " + path + "\n" + kConfigExample);
  try {
    cfisac::SystemConfig config = cfisac::load_config(path);
    config.validate();
    return config;
  } catch (const cfisac::ConfigError& e) {
    throw UsageError(std::string("invalid config ") + path + ": " + e.what());
  }
}

std::filesystem::path default_out_dir() {
  if (const char* env = std::getenv("CFISAC_OUT_DIR"); env && *env) return env;
  return "results";
}

std::string summary_line(const cfisac::SystemConfig& c) {
  return "M=" + std::to_string(c.num_aps) + ", K=" + std::to_string(c.num_ues) +
         ", N=" + std::to_string(c.antennas_per_ap) + ", L=" + std::to_string(c.num_targets) +
         ", S=" + std::to_string(c.num_regions);
}

struct RunArgs {
  std::string config;
  std::string experiment;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::string out;
  bool full_scale = false;
  std::optional<int> drops;
  std::optional<int> fading;
};

int cmd_run(const RunArgs& a) {
  const cfisac::SystemConfig config = load(a.config);
  const auto id = cfisac::parse_experiment(a.experiment);
  if (!id) throw UsageError("unknown experiment '" + a.experiment + "' (see list-experiments)");
  cfisac::ExperimentPlan plan = cfisac::default_plan(*id, config, a.full_scale);
  if (a.seed) plan.seed = *a.seed;
  if (a.drops) plan.num_drops = *a.drops;
  if (a.fading) plan.num_fading = *a.fading;
  try {
    cfisac::validate_plan(plan, config);
  } catch (const cfisac::ConfigError& e) {
    throw UsageError(std::string("invalid plan: ") + e.what());
  }

  cfisac::RunOptions options;
  options.jobs = a.jobs;
  options.log = [](const std::string& msg) { spdlog::debug("{}", msg); };
  spdlog::info("running {} ({} drops x {} fading, seed {}, {} jobs)", a.experiment,
               plan.num_drops, plan.num_fading, plan.seed, a.jobs);
  const cfisac::ResultTable table = cfisac::run_experiment(plan, config, options);
  const std::filesystem::path dir = a.out.empty() ? default_out_dir() : std::filesystem::path(a.out);
  for (const auto& p : cfisac::write_result_files(dir, table)) spdlog::info("wrote {}", p.string());
  if (table.failed_trials > 0)
    spdlog::warn("{} of {} trials failed", table.failed_trials, table.total_trials);
  return kExitOk;
}

int cmd_validate(const std::string& path) {
  const cfisac::SystemConfig config = load(path);
  std::cout << cfisac::format_config(config) << "\n" << summary_line(config) << "\n";
  return kExitOk;
}

int cmd_golden(const std::string& path, std::optional<std::uint64_t> seed,
               const std::string& out) {
  const cfisac::SystemConfig config = load(path);
  if (out.empty()) throw UsageError("golden-dump needs --out <file>");
  cfisac::RandomStream rng(seed.value_or(config.rng_seed));
  cfisac::RandomStream scenario_rng = rng.substream(1);
  const cfisac::Scenario scenario = cfisac::generate_scenario(config, scenario_rng);
  cfisac::RandomStream channel_rng = rng.substream(2);
  const auto realization = cfisac::draw_channel_realization(scenario, config, channel_rng);
  std::ofstream f(out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + out);
  cfisac::write_golden(f, realization);
  spdlog::info("wrote {}", out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("cfisac");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"cell-free ISAC simulator"};
  app.require_subcommand(1);
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "more progress output (repeatable)");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "run a named experiment");
  run_cmd->add_option("--config", run.config, "config file");
  run_cmd->add_option("--experiment", run.experiment, "experiment name")->required();
  run_cmd->add_option("--seed", run.seed, "seed override");
  run_cmd->add_option("--jobs", run.jobs, "worker threads")->check(CLI::PositiveNumber);
  run_cmd->add_option("--out", run.out, "output directory (default $CFISAC_OUT_DIR or ./results)");
  run_cmd->add_flag("--full-scale", run.full_scale, "use the full-scale drop and fading counts");
  run_cmd->add_option("--drops", run.drops, "override the number of drops")->check(CLI::PositiveNumber);
  run_cmd->add_option("--fading", run.fading, "override fading draws per drop")
      ->check(CLI::PositiveNumber);

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate-config", "check and print a config");
  validate_cmd->add_option("--config", validate_path, "config file");

  app.add_subcommand("list-experiments", "print the experiment names");

  std::string golden_path, golden_out;
  std::optional<std::uint64_t> golden_seed;
  auto* golden_cmd = app.add_subcommand("golden-dump", "write one channel realization");
  golden_cmd->add_option("--config", golden_path, "config file");
  golden_cmd->add_option("--seed", golden_seed, "seed override");
  golden_cmd->add_option("--out", golden_out, "output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  spdlog::set_level(verbosity >= 1 ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*run_cmd) return cmd_run(run);
    if (*validate_cmd) return cmd_validate(validate_path);
    if (*golden_cmd) return cmd_golden(golden_path, golden_seed, golden_out);
    for (const auto& name : cfisac::experiment_names()) std::cout << name << "\n";
    return kExitOk;
  } catch (const UsageError& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
}
