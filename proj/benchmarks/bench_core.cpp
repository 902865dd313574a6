// Copyright 2026 The ftfsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <string>

#include "ftf/benchmarking.hpp"
#include "ftf/circuit.hpp"
#include "ftf/hamiltonian.hpp"
#include "ftf/mitigation.hpp"
#include "ftf/spectral.hpp"

using namespace ftf;

namespace {

const DeviceConfig& unit() {
  static const DeviceConfig c = load_config(std::string(FTF_SOURCE_DIR) + "/configs/unit.cfg");
  return c;
}

void BM_FluxoniumOscillator(benchmark::State& state) {
  const auto p = unit().node("Q2").fluxonium();
  for (auto _ : state) benchmark::DoNotOptimize(fluxonium_hamiltonian(p).f_ge());
}
BENCHMARK(BM_FluxoniumOscillator)->Unit(benchmark::kMicrosecond);

void BM_FluxoniumGrid(benchmark::State& state) {
  const auto p = unit().node("Q2").fluxonium();
  for (auto _ : state) benchmark::DoNotOptimize(fluxonium_hamiltonian(p, ElementBasis::flux_grid()).f_ge());
}
BENCHMARK(BM_FluxoniumGrid)->Unit(benchmark::kMillisecond);

// Argument: levels per fluxonium (couplers get one fewer).
void BM_ThreeNodeSpectrum(benchmark::State& state) {
  const int l = static_cast<int>(state.range(0));
  const auto c = unit().with_flux({{"C23", 0.5}});
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_subsystem(c, {"Q2", "C23", "Q3"}, {{"Q2", l}, {"C23", l - 1}, {"Q3", l}}, 48).energy("eeg"));
}
BENCHMARK(BM_ThreeNodeSpectrum)->Arg(4)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_StaticZzFiveNode(benchmark::State& state) {
  const LevelMap lv{{"Q1", 4}, {"C12", 3}, {"Q2", 4}, {"C23", 3}, {"Q3", 4}};
  for (auto _ : state) benchmark::DoNotOptimize(static_zz(unit(), {"Q1", "Q3"}, {{"C12", 0.0}, {"C23", 0.0}}, lv));
}
BENCHMARK(BM_StaticZzFiveNode)->Unit(benchmark::kMillisecond);

void BM_GhzDensity(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto noise = NoiseModel::from_fidelities(0.9999, 0.99);
  const auto c = compile_ghz(n);
  for (auto _ : state) benchmark::DoNotOptimize(run_density(c, noise).trace());
}
BENCHMARK(BM_GhzDensity)->DenseRange(4, 10, 2)->Unit(benchmark::kMillisecond);

void BM_SimulateShots(benchmark::State& state) {
  const auto noise = NoiseModel::from_fidelities(0.9999, 0.99, 0.02, 8);
  const auto c = compile_ghz(8);
  for (auto _ : state) benchmark::DoNotOptimize(simulate(c, noise, 100000, 1, true).shots());
}
BENCHMARK(BM_SimulateShots)->Unit(benchmark::kMillisecond);

void BM_TwoQubitCliffordRb(benchmark::State& state) {
  const auto noise = NoiseModel::from_fidelities(0.999, 0.99);
  const auto seqs = generate_rb(2, {32}, 1, 3);
  for (auto _ : state) benchmark::DoNotOptimize(rb_survival(seqs[0], noise));
}
BENCHMARK(BM_TwoQubitCliffordRb)->Unit(benchmark::kMillisecond);

void BM_Unfold(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto model = ConfusionModel::symmetric(n, 0.05, 0.05);
  const auto rec = apply_confusion(simulate(compile_ghz(n), {}, 100000, 2), model, 3);
  const Eigen::VectorXd d = rec.distribution();
  for (auto _ : state) benchmark::DoNotOptimize(unfold(d, model).iterations);
}
BENCHMARK(BM_Unfold)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
