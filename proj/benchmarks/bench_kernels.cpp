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


// Micro-benchmarks of the per-drop kernels that dominate experiment runtime.

#include <memory>

#include <benchmark/benchmark.h>

#include "cfisac/harness.hpp"
#include "cfisac/sensing.hpp"

namespace cfisac {
namespace {

SystemConfig load(const char* name) {
  return load_config(std::filesystem::path(CFISAC_CONFIG_DIR) / name);
}

struct DetectionSetup {
  SystemConfig config = load("baseline.cfg");
  DropContext drop;
  TransmitFrame frame;
  int rx_ap = 0;

  DetectionSetup() {
    RandomStream rng(config.rng_seed);
    RandomStream drop_rng = rng.substream(0);
    drop = build_drop(config, SensingMode::kDetection, {}, 0, drop_rng);
    RandomStream fade_rng = rng.substream(1);
    const FadingDraw fd = draw_fading(drop, fade_rng);
    frame = assemble_tx_signal(allocate_power(drop, PowerRule::fractional(0.0, 0.0)), fd.beams,
                               fd.symbols, SensingMode::kDetection, drop.budget,
                               config.antennas_per_ap, config.sensing_len);
    rx_ap = drop.maps.tasks.front().rx.front();
  }
};

const DetectionSetup& detection_setup() {
  static const DetectionSetup setup;
  return setup;
}

void BM_BuildDropOpcSmall(benchmark::State& state) {
  const SystemConfig config = load("opc_small.cfg");
  std::uint64_t i = 0;
  for (auto _ : state) {
    RandomStream rng(++i);
    benchmark::DoNotOptimize(build_drop(config, SensingMode::kTracking, {}, 0, rng));
  }
}
BENCHMARK(BM_BuildDropOpcSmall)->Unit(benchmark::kMillisecond);

void BM_ClosedFormSinr(benchmark::State& state) {
  const auto& s = detection_setup();
  const PowerAllocation alloc = allocate_power(s.drop, PowerRule::fractional(0.0, 0.0));
  for (auto _ : state) benchmark::DoNotOptimize(drop_sinr(s.drop, alloc));
}
BENCHMARK(BM_ClosedFormSinr)->Unit(benchmark::kMicrosecond);

void BM_UnitClutterCovariance(benchmark::State& state) {
  const auto& s = detection_setup();
  for (auto _ : state) benchmark::DoNotOptimize(unit_clutter_covariance(s.drop, s.frame, s.rx_ap));
}
BENCHMARK(BM_UnitClutterCovariance)->Unit(benchmark::kMillisecond);

void BM_Whitener(benchmark::State& state) {
  const auto& s = detection_setup();
  const CMatrix psi = whitened_covariance(
      s.config.clutter_scale * unit_clutter_covariance(s.drop, s.frame, s.rx_ap), s.drop.noise_var);
  const auto method = state.range(0) ? WhiteningMethod::kCholesky : WhiteningMethod::kEigen;
  for (auto _ : state) benchmark::DoNotOptimize(Whitener(psi, method));
  state.SetLabel(state.range(0) ? "cholesky" : "eigen");
}
BENCHMARK(BM_Whitener)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_GlrtStatistic(benchmark::State& state) {
  const auto& s = detection_setup();
  const CMatrix psi = whitened_covariance(
      s.config.clutter_scale * unit_clutter_covariance(s.drop, s.frame, s.rx_ap), s.drop.noise_var);
  std::vector<SensingProblem> problems{make_sensing_problem(
      task_echo_model(s.drop, s.frame, 0, s.drop.task_positions[0], s.rx_ap),
      std::make_shared<const Whitener>(psi, s.config.whitening))};
  RandomStream rng(5);
  std::vector<CVector> obs{rng.complex_normal_vector(psi.rows())};
  for (auto _ : state) benchmark::DoNotOptimize(glrt_statistic(problems, obs));
}
BENCHMARK(BM_GlrtStatistic)->Unit(benchmark::kMicrosecond);

void BM_CommPriorityOpc(benchmark::State& state) {
  const SystemConfig config = load("opc_small.cfg");
  RandomStream rng(config.rng_seed);
  RandomStream drop_rng = rng.substream(0);
  const DropContext drop = build_drop(config, SensingMode::kTracking, {}, 0, drop_rng);
  RandomStream fade_rng = rng.substream(1);
  const OpcProblem problem = tracking_opc_problem(drop, draw_fading(drop, fade_rng));
  const OpcOptions options = opc_options(config);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        optimize_comm_priority(problem, drop.maps, drop.ue_lsf, drop.task_lsf, options));
}
BENCHMARK(BM_CommPriorityOpc)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace
}  // namespace cfisac

BENCHMARK_MAIN();
