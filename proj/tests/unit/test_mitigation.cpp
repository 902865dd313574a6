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

#include <random>

#include "ftf/circuit.hpp"
#include "ftf/errors.hpp"
#include "ftf/mitigation.hpp"
#include "oracles.hpp"

using namespace ftf;

namespace {

Eigen::VectorXd known_distribution(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::VectorXd p(Eigen::Index{1} << n);
  for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = 0.05 + static_cast<double>(rng() % 1000) / 1000.0;
  return p / p.sum();
}

MeasurementRecord record_from(const Eigen::VectorXd& p, int n, std::size_t shots, std::uint64_t seed) {
  Circuit c(n);
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::uint64_t> d(p.data(), p.data() + p.size());
  MeasurementRecord r;
  r.qubits = n;
  r.seed = seed;
  for (std::size_t s = 0; s < shots; ++s) r.m2.push_back(d(rng));
  return r;
}

std::vector<Eigen::Matrix2d> asymmetric_factors() {
  std::vector<Eigen::Matrix2d> f;
  const double pge[] = {0.02, 0.05, 0.03, 0.04}, peg[] = {0.06, 0.04, 0.08, 0.05};
  for (int q = 0; q < 4; ++q) {
    Eigen::Matrix2d m;
    m << 1 - pge[q], peg[q], pge[q], 1 - peg[q];
    f.push_back(m);
  }
  return f;
}

}  // namespace

TEST(Confusion, IdentityLeavesInputUnchanged) {
  const auto model = ConfusionModel::symmetric(3, 0.0, 0.0);
  const auto p = known_distribution(3, 1);
  EXPECT_TRUE(apply_confusion(p, model).isApprox(p, 0.0));
  const auto u = unfold(p, model);
  EXPECT_LT((u.probabilities - p).lpNorm<Eigen::Infinity>(), 1e-15);
  const auto rec = record_from(p, 3, 1000, 3);
  EXPECT_EQ(apply_confusion(rec, model, 9).m2, rec.m2);
}

TEST(Confusion, ProductMatchesDenseKronecker) {
  const auto f = asymmetric_factors();
  const ConfusionModel model(f);
  const Eigen::MatrixXd dense = oracle::kron_all(f);
  const auto p = known_distribution(4, 7);
  EXPECT_LT((apply_confusion(p, model) - dense * p).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_LT((model.matrix() - dense).lpNorm<Eigen::Infinity>(), 1e-15);
  EXPECT_LT((model.apply_transpose(p) - dense.transpose() * p).lpNorm<Eigen::Infinity>(), 1e-12);
  const auto joint = ConfusionModel::joint(dense);
  EXPECT_LT((apply_confusion(p, joint) - dense * p).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(Confusion, SingleQubitFlipRate) {
  const auto model = ConfusionModel::symmetric(1, 0.05, 0.05);
  MeasurementRecord rec;
  rec.qubits = 1;
  rec.m2.assign(100000, 0);
  const auto out = apply_confusion(rec, model, 11);
  const double frac = out.distribution()(1);
  EXPECT_NEAR(frac, 0.05, 4.0 * std::sqrt(0.05 * 0.95 / 1e5));
  EXPECT_EQ(apply_confusion(rec, model, 11), out);
  EXPECT_NE(apply_confusion(rec, model, 12).m2, out.m2);
}

TEST(Confusion, Validation) {
  Eigen::Matrix2d bad;
  bad << 0.9, 0.1, 0.2, 0.9;
  EXPECT_THROW(ConfusionModel({bad}), ValidationError);
  Eigen::Matrix2d poor;
  poor << 0.4, 0.3, 0.6, 0.7;
  EXPECT_THROW(ConfusionModel({poor}), ValidationError);
  EXPECT_THROW(ConfusionModel::joint(Eigen::MatrixXd::Identity(128, 128)), DimensionError);
  const auto model = ConfusionModel::symmetric(2, 0.01, 0.01);
  EXPECT_THROW(apply_confusion(Eigen::VectorXd::Constant(8, 0.125), model), DimensionError);
}

TEST(Unfold, RoundTripImprovesWithShots) {
  const ConfusionModel model(asymmetric_factors());
  const auto truth = known_distribution(4, 5);
  double previous = 1.0;
  for (std::size_t shots : {10000u, 100000u, 1000000u}) {
    const auto rec = apply_confusion(record_from(truth, 4, shots, shots), model, shots + 1);
    const auto u = unfold(rec.distribution(), model);
    const double tv = total_variation(u.probabilities, truth);
    EXPECT_LT(tv, previous);
    previous = tv;
    EXPECT_GE(u.probabilities.minCoeff(), 0.0);
    EXPECT_NEAR(u.probabilities.sum(), 1.0, 1e-10);
  }
  EXPECT_LT(previous, 0.01);
}

TEST(Unfold, PositivityWhereNaiveInverseFails) {
  // Few shots, true state all-g: naive inversion of the empirical histogram goes negative.
  const auto model = ConfusionModel::symmetric(3, 0.08, 0.08);
  Eigen::VectorXd truth = Eigen::VectorXd::Zero(8);
  truth(0) = 1.0;
  const auto rec = apply_confusion(record_from(truth, 3, 50, 1), model, 2);
  const auto measured = rec.distribution();
  EXPECT_LT(naive_inverse(measured, model).minCoeff(), 0.0);
  const auto u = unfold(measured, model);
  EXPECT_GE(u.probabilities.minCoeff(), 0.0);
  EXPECT_NEAR(u.probabilities.sum(), 1.0, 1e-10);
  // Deterministic.
  EXPECT_EQ(unfold(measured, model).probabilities, u.probabilities);
}

TEST(Unfold, MaximizesLikelihood) {
  const ConfusionModel model(asymmetric_factors());
  const auto rec = apply_confusion(record_from(known_distribution(4, 8), 4, 3000, 8), model, 3);
  const auto m = rec.distribution();
  const auto u = unfold(m, model).probabilities;
  auto loglik = [&](const Eigen::VectorXd& p) {
    const Eigen::VectorXd q = model.apply(p);
    double l = 0;
    for (Eigen::Index i = 0; i < m.size(); ++i)
      if (m(i) > 0) l += m(i) * std::log(q(i));
    return l;
  };
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(-1e-3, 1e-3);
  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd p = u;
    for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = std::max(0.0, p(i) + d(rng));
    p /= p.sum();
    EXPECT_LE(loglik(p), loglik(u) + 1e-12);
  }
}

TEST(Preselect, KeepsAllGroundShots) {
  MeasurementRecord r;
  r.qubits = 2;
  r.m2 = {0, 1, 2, 3};
  r.m1 = {0, 0, 0, 0};
  const auto ps = preselect(r);
  EXPECT_DOUBLE_EQ(ps.retention, 1.0);
  EXPECT_EQ(ps.record.m2, r.m2);
  EXPECT_EQ(ps.record.m1, r.m1);
  r.m1 = {0, 1, 0, 2};
  const auto half = preselect(r);
  EXPECT_DOUBLE_EQ(half.retention, 0.5);
  EXPECT_EQ(half.record.m2, (std::vector<std::uint64_t>{0, 2}));
  const auto again = preselect(half.record);
  EXPECT_EQ(again.record, half.record);
  EXPECT_DOUBLE_EQ(again.retention, 1.0);
  r.m1.clear();
  EXPECT_THROW(preselect(r), ValidationError);
}

TEST(Preselect, RetentionUnderInitializationError) {
  Circuit c(4);
  NoiseModel noise;
  noise.init_excited.assign(4, 0.1);
  const auto rec = simulate(c, noise, 100000, 5, true);
  const double retention = preselect(rec).retention;
  const double expect = std::pow(0.9, 4);
  EXPECT_NEAR(retention, expect, 4.0 * std::sqrt(expect * (1 - expect) / 1e5));
}

TEST(Preselect, ImperfectM1LetsExcitedShotsThrough) {
  Circuit c(2);
  NoiseModel noise;
  noise.init_excited.assign(2, 0.2);
  const auto rec = simulate(c, noise, 50000, 6, true);
  const auto model = ConfusionModel::symmetric(2, 0.0, 0.1);
  const auto kept = preselect(apply_confusion(rec, model, 7, true)).record;
  std::size_t excited = 0;
  for (auto w : kept.m2) excited += w != 0;
  EXPECT_GT(excited, 0u);
  const auto clean = preselect(rec).record;
  for (auto w : clean.m2) EXPECT_EQ(w, 0u);
}
