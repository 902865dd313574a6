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

#include "ftf/errors.hpp"
#include "ftf/open_system.hpp"
#include "util.hpp"

using namespace ftf;

namespace {

Eigen::MatrixXcd projector(Eigen::Index dim, Eigen::Index i) {
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(dim, dim);
  p(i, i) = 1.0;
  return p;
}

}  // namespace

TEST(Lindblad, AmplitudeDampingIsExponential) {
  const double kappa = 0.7, omega = 3.0;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2, 2);
  h(1, 1) = omega;
  Eigen::MatrixXcd sm = Eigen::MatrixXcd::Zero(2, 2);
  sm(0, 1) = 1.0;
  std::vector<double> t;
  for (int i = 0; i <= 20; ++i) t.push_back(0.25 * i);
  const auto rho = lindblad_evolve(h, {{sm, kappa}}, projector(2, 1), t);
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_NEAR(rho[i](1, 1).real(), std::exp(-kappa * t[i]), 1e-8);
    EXPECT_NEAR(rho[i].trace().real(), 1.0, 1e-10);
  }
}

TEST(Lindblad, DephasingDecaysCoherenceAtGamma) {
  const double gamma = 0.4;
  Eigen::MatrixXcd n = Eigen::MatrixXcd::Zero(2, 2);
  n(1, 1) = 1.0;
  Eigen::MatrixXcd rho0 = Eigen::MatrixXcd::Constant(2, 2, 0.5);
  const auto rho = lindblad_evolve(Eigen::MatrixXcd::Zero(2, 2), {{n, 2 * gamma}}, rho0, {0.0, 1.0, 3.0});
  EXPECT_NEAR(std::abs(rho[1](0, 1)), 0.5 * std::exp(-gamma), 1e-8);
  EXPECT_NEAR(std::abs(rho[2](0, 1)), 0.5 * std::exp(-3 * gamma), 1e-8);
}

TEST(Lindblad, NoNoiseMatchesUnitaryPropagation) {
  Eigen::MatrixXcd sx(2, 2);
  sx << 0, 1, 1, 0;
  const DrivenModel m(make_frame(Eigen::Vector2d(0.0, 1.0), {"g", "e"}, {{"D", sx}}));
  PulseSegment s;
  s.node = "D";
  s.amplitude = 0.01;
  s.frequency = 1.0;
  s.duration = 35.0;
  s.envelope = Envelope::Cosine;
  PulseSchedule p;
  p.segments = {s};
  p.total_duration = 35.0;
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(2);
  psi(0) = 1.0;
  const auto u = propagate_states(m, p, psi);
  const auto traj = lindblad_propagate(m, {}, p, psi * psi.adjoint(), {0.0, 35.0});
  EXPECT_LT((traj.rho[1] - u * u.adjoint()).norm(), 1e-7);
  EXPECT_NEAR(traj.population(0, "g"), 1.0, 1e-12);
}

TEST(Lindblad, TraceAndPositivityUnderNoise) {
  const DrivenModel m(testing_util::fluxonium_pair(0.05), {"A", "B"}, {{"A", 3}, {"B", 3}});
  NoiseSpec noise;
  noise.relaxation = {{"A", 20.0}, {"B", 5.0}};
  noise.dephasing = {{"A", 8.0}};
  PulseSchedule idle;
  idle.total_duration = 100.0;
  const auto k = static_cast<Eigen::Index>(m.base().dimension());
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(k);
  psi(static_cast<Eigen::Index>(m.base().state("eg"))) = std::sqrt(0.5);
  psi(static_cast<Eigen::Index>(m.base().state("ee"))) = std::sqrt(0.5);
  const auto traj = lindblad_propagate(m, noise, idle, psi * psi.adjoint(), {0.0, 20.0, 50.0, 100.0});
  for (const auto& r : traj.rho) {
    EXPECT_NEAR(r.trace().real(), 1.0, 1e-9);
    EXPECT_LT((r - r.adjoint()).norm(), 1e-10);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r);
    EXPECT_GT(es.eigenvalues().minCoeff(), -1e-9);
  }
  EXPECT_LT(traj.population(3, "eg") + traj.population(3, "ee"), 0.2);
  NoiseSpec bad;
  bad.relaxation = {{"A", -1.0}};
  EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(Ramsey, RecoversInjectedZz) {
  const double zz = -5e-6;  // GHz
  const DrivenModel m(make_frame((Eigen::VectorXd(4) << 0.0, 0.3, 0.45, 0.75 + zz).finished(), {"gg", "ge", "eg", "ee"},
                                 {{"D", Eigen::MatrixXcd::Zero(4, 4)}}));
  std::vector<double> t;
  for (int i = 0; i <= 20; ++i) t.push_back(1000.0 * i);
  const auto r = conditional_ramsey_zz(m, {"gg", "ge", "eg", "ee"}, t);
  EXPECT_NEAR(r.g_zz, -zz, 1e-10);
  EXPECT_NEAR(std::abs(r.g_zz) * 1e6, 5.0, 1e-4);
}

TEST(ConditionalT1, XxFormula) {
  const auto e = conditional_t1_xx(0.03, 0.01, 0.011, 0.010);
  EXPECT_TRUE(e.consistent);
  EXPECT_NEAR(e.g_xx, 3.1623e-3, 1e-7);
  EXPECT_NEAR(e.hz(), 503.3, 0.1);
  EXPECT_EQ(conditional_t1_xx(0.03, 0.01, 0.01, 0.01).g_xx, 0.0);
  const auto neg = conditional_t1_xx(0.03, 0.01, 0.009, 0.01);
  EXPECT_FALSE(neg.consistent);
  EXPECT_FALSE(neg.diagnostic.empty());
  EXPECT_THROW(conditional_t1_xx(-0.1, 0.01, 0.01, 0.01), ValidationError);
}

TEST(ConditionalT1, WeakCouplingRateAndRecovery) {
  const double kc = 1.0, kt = 0.02;
  EXPECT_NEAR(effective_target_rate(0.0, kc, kt), kt, 1e-15);
  EXPECT_LT(effective_rate_error(0.03, kc, kt), 0.05);
  const auto sim = simulate_conditional_t1(0.03, kc, kt, {});
  EXPECT_NEAR(sim.fit_e.rate, kt, 1e-3 * kt);
  EXPECT_NEAR(sim.estimate.g_xx / 0.03, 1.0, 0.05);
  EXPECT_THROW(effective_rate_error(0.0, kc, kt), ValidationError);
}
