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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ftf/circuit.hpp"
#include "ftf/errors.hpp"

using namespace ftf;

namespace {

constexpr double kPi = std::numbers::pi;

double ghz_fidelity_of(const Circuit& prep, const NoiseModel& noise) {
  const int n = prep.qubits;
  const Eigen::VectorXd p = probabilities(run_density(prep, noise));
  const auto par = parity_experiment(prep, noise, phase_grid(n));
  return ghz_fidelity(p(0), p(p.size() - 1), par.a_n);
}

}  // namespace

TEST(Ghz, DepthGrowsFromCentre) {
  EXPECT_EQ(compile_ghz(2).cz_layers(), 1);
  EXPECT_EQ(compile_ghz(3).cz_layers(), 2);
  EXPECT_EQ(compile_ghz(4).cz_layers(), 2);
  EXPECT_EQ(compile_ghz(10).cz_layers(), 5);
  EXPECT_EQ(ghz_central_qubit(10), 4);
  for (int n = 2; n <= 10; ++n) EXPECT_NO_THROW(compile_ghz(n).validate());
  EXPECT_THROW(compile_ghz(1), ValidationError);
  EXPECT_THROW(compile_ghz(4, 3), ValidationError);
}

TEST(Ghz, PreparesGhzState) {
  for (int n : {2, 3, 6}) {
    const auto psi = run_statevector(compile_ghz(n));
    EXPECT_NEAR(std::norm(psi.dot(ghz_state(n))), 1.0, 1e-12) << n;
  }
  // Embedded in a longer chain the other qubits stay in g.
  const auto psi = run_statevector(compile_ghz(3, 5, 1));
  EXPECT_NEAR(std::norm(psi(0b01110)), 0.5, 1e-12);
  EXPECT_NEAR(std::norm(psi(0)), 0.5, 1e-12);
}

TEST(Ghz, NoisyFidelityTracksGateProduct) {
  NoiseModel noise;
  noise.two_qubit = 0.01;
  const double f = state_fidelity(run_density(compile_ghz(4), noise), ghz_state(4));
  const double theory = theory_fidelity(4, {1, 1, 1, 1}, {0.9925, 0.9925, 0.9925});
  EXPECT_NEAR(f / theory, 1.0, 0.02);
  EXPECT_NEAR(theory_fidelity(2, {0.9999, 0.9999}, {0.99}), 0.98960, 1e-5);
}

TEST(Ghz, FidelityFormula) {
  EXPECT_DOUBLE_EQ(ghz_fidelity(0.5, 0.5, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(ghz_fidelity(0.5, 0.5, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(ghz_fidelity(0.25, 0.25, 0.0), 0.25);
  EXPECT_THROW(ghz_fidelity(1.2, 0.0, 0.0), ValidationError);
  EXPECT_THROW(theory_fidelity(3, {1, 1}, {1, 1}), ValidationError);
}

TEST(Ghz, TomographyAgreesWithParityFidelity) {
  const auto noise = NoiseModel::from_fidelities(0.999, 0.98);
  const Circuit prep = compile_ghz(3);
  const double f_tomo = state_fidelity(state_tomography(prep, noise), ghz_state(3));
  EXPECT_NEAR(f_tomo, ghz_fidelity_of(prep, noise), 1e-8);
  EXPECT_NEAR(f_tomo, state_fidelity(run_density(prep, noise), ghz_state(3)), 1e-8);
}

TEST(Parity, IdealGhzOscillatesAtOrderN) {
  const auto r = parity_experiment(compile_ghz(5), {}, phase_grid(5));
  EXPECT_EQ(r.dominant_order, 5);
  EXPECT_NEAR(r.a_n, 1.0, 1e-10);
  for (int m = 0; m < 5; ++m) EXPECT_NEAR(r.amplitude(m), 0.0, 1e-10);
}

TEST(Parity, DominantOrderUnderDefaultNoise) {
  const auto noise = NoiseModel::from_fidelities(0.9999, 0.99);
  for (int n = 2; n <= 8; ++n) {
    const auto r = parity_experiment(compile_ghz(n), noise, phase_grid(n, 4 * n));
    EXPECT_EQ(r.dominant_order, n);
  }
}

TEST(Parity, FitRecoversSyntheticHarmonics) {
  const auto phi = phase_grid(5);
  std::vector<double> y;
  for (double p : phi) y.push_back(0.8 * std::cos(5 * p + 0.4) + 0.05 * std::cos(2 * p) - 0.03);
  const auto r = fit_parity(phi, y, 5);
  EXPECT_EQ(r.dominant_order, 5);
  EXPECT_NEAR(r.a_n, 0.8, 1e-12);
  EXPECT_NEAR(r.harmonics[5].phase, 0.4, 1e-12);
  EXPECT_NEAR(r.amplitude(2), 0.05, 1e-12);
  EXPECT_NEAR(r.amplitude(0), 0.03, 1e-12);
  EXPECT_NEAR(r.amplitude(3), 0.0, 1e-12);
  EXPECT_LT(r.rms_residual, 1e-12);
}

TEST(Parity, RejectsUndersampledGrids) {
  EXPECT_THROW(phase_grid(5, 10), ValidationError);
  std::vector<double> phi, y;
  for (int k = 0; k < 20; ++k) {
    phi.push_back(0.01 * k);
    y.push_back(0.0);
  }
  EXPECT_THROW(fit_parity(phi, y, 5), ValidationError);
  EXPECT_THROW(fit_parity({0.0, 1.0}, {0.0}, 1), ValidationError);
}

TEST(Simulate, BasisRecords) {
  const auto empty = simulate(Circuit(3), {}, 100, 1);
  for (auto w : empty.m2) EXPECT_EQ(w, 0u);
  Circuit flip(3);
  for (int q = 0; q < 3; ++q) flip.append(Gate::x180(q));
  const auto all = simulate(flip, {}, 100, 1);
  for (auto w : all.m2) EXPECT_EQ(w, 0b111u);
  EXPECT_FALSE(all.has_m1());
  EXPECT_DOUBLE_EQ(all.parity(), -1.0);
}

TEST(Simulate, InitializationNoiseAppearsInM1) {
  NoiseModel noise;
  noise.init_excited = {0.2, 0.0};
  const auto r = simulate(Circuit(2), noise, 20000, 3, true);
  ASSERT_TRUE(r.has_m1());
  std::size_t excited = 0;
  for (std::size_t s = 0; s < r.shots(); ++s) {
    EXPECT_EQ(r.m1[s], r.m2[s]);  // nothing happens between the two measurements
    excited += outcome_bit(r.m1[s], 2, 0);
  }
  EXPECT_NEAR(double(excited) / r.shots(), 0.2, 0.01);
}

TEST(Simulate, DeterministicPerSeed) {
  const auto noise = NoiseModel::from_fidelities(0.999, 0.99, 0.02, 4);
  const auto a = simulate(compile_ghz(4), noise, 5000, 11, true);
  const auto b = simulate(compile_ghz(4), noise, 5000, 11, true);
  const auto c = simulate(compile_ghz(4), noise, 5000, 12, true);
  EXPECT_EQ(a, b);
  EXPECT_NE(a.m2, c.m2);
  EXPECT_NE(split_seed(1, 0), split_seed(1, 1));
}

TEST(Circuit, LayeringAndValidation) {
  Circuit c(3);
  c.append(Gate::x90(0));
  c.append(Gate::x90(1));
  c.append(Gate::cz(0, 1));
  c.append(Gate::x90(2));
  EXPECT_EQ(c.layers.size(), 2u);
  EXPECT_EQ(c.gate_count(), 4u);
  c.append(Gate::vz(2, 0.3));
  EXPECT_EQ(c.gate_count(true), 4u);
  Circuit bad(3);
  bad.add_layer({Gate::cz(0, 2)});
  EXPECT_THROW(bad.validate(), ValidationError);
  Circuit overlap(2);
  overlap.add_layer({Gate::x90(0), Gate::x180(0)});
  EXPECT_THROW(overlap.validate(), ValidationError);
}

TEST(Circuit, HadamardMatchesComposite) {
  Circuit a(1), b(1);
  a.append(Gate::hadamard(0));
  b.append(Gate::vz(0, kPi / 2));
  b.append(Gate::x90(0));
  b.append(Gate::vz(0, kPi / 2));
  EXPECT_NEAR(std::norm(run_statevector(a).dot(run_statevector(b))), 1.0, 1e-12);
  EXPECT_NEAR(std::norm(run_statevector(a)(1)), 0.5, 1e-12);
}
