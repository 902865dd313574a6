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

#include "ftf/mitigation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ftf/errors.hpp"

namespace ftf {

namespace {

using Index = std::uint64_t;

Index mask_of(int n, int q) { return Index{1} << (n - 1 - q); }

void check_distribution(const Eigen::VectorXd& p, int qubits) {
  if (p.size() != (Eigen::Index{1} << qubits)) throw DimensionError("distribution size does not match the model");
  if (!p.allFinite() || p.minCoeff() < -1e-12) throw ValidationError("distribution has negative or non-finite entries");
  if (std::abs(p.sum() - 1.0) > 1e-9) throw ValidationError("distribution must sum to 1");
}

Eigen::VectorXd apply_factors(const std::vector<Eigen::Matrix2d>& factors, Eigen::VectorXd v, bool transpose) {
  const int n = static_cast<int>(factors.size());
  const auto dim = static_cast<Index>(v.size());
  for (int q = 0; q < n; ++q) {
    const Eigen::Matrix2d m = transpose ? Eigen::Matrix2d(factors[static_cast<std::size_t>(q)].transpose())
                                        : factors[static_cast<std::size_t>(q)];
    const Index k = mask_of(n, q);
    for (Index i = 0; i < dim; ++i) {
      if (i & k) continue;
      const double a = v(static_cast<Eigen::Index>(i)), b = v(static_cast<Eigen::Index>(i | k));
      v(static_cast<Eigen::Index>(i)) = m(0, 0) * a + m(0, 1) * b;
      v(static_cast<Eigen::Index>(i | k)) = m(1, 0) * a + m(1, 1) * b;
    }
  }
  return v;
}

}  // namespace

ConfusionModel::ConfusionModel(std::vector<Eigen::Matrix2d> per_qubit)
    : qubits_(static_cast<int>(per_qubit.size())), per_qubit_(std::move(per_qubit)) {
  validate();
}

ConfusionModel ConfusionModel::symmetric(int qubits, double p_ge, double p_eg) {
  if (qubits < 1) throw ValidationError("confusion model needs at least one qubit");
  Eigen::Matrix2d m;
  m << 1.0 - p_ge, p_eg, p_ge, 1.0 - p_eg;
  return ConfusionModel(std::vector<Eigen::Matrix2d>(static_cast<std::size_t>(qubits), m));
}

ConfusionModel ConfusionModel::from_config(const DeviceConfig& config, const std::vector<std::string>& qubits) {
  std::vector<Eigen::Matrix2d> f;
  for (const auto& name : qubits) {
    if (!config.has_node(name)) throw ValidationError("unknown qubit '" + name + "'");
    Eigen::Matrix2d m = Eigen::Matrix2d::Identity();
    for (const auto& r : config.readout())
      if (r.qubit == name) m << 1.0 - r.p_ge, r.p_eg, r.p_ge, 1.0 - r.p_eg;
    f.push_back(m);
  }
  return ConfusionModel(std::move(f));
}

ConfusionModel ConfusionModel::joint(const Eigen::MatrixXd& m) {
  ConfusionModel c;
  const auto dim = m.rows();
  if (dim != m.cols() || dim < 2 || (dim & (dim - 1)) != 0) throw DimensionError("joint confusion must be 2^n square");
  while ((Eigen::Index{1} << c.qubits_) < dim) ++c.qubits_;
  if (c.qubits_ > kMaxJointConfusionQubits) throw DimensionError("joint confusion is limited to 6 qubits");
  c.joint_ = m;
  c.validate();
  return c;
}

void ConfusionModel::validate() const {
  auto check = [](const Eigen::MatrixXd& m) {
    if (!m.allFinite() || m.minCoeff() < 0.0 || m.maxCoeff() > 1.0) throw ValidationError("confusion entries must lie in [0, 1]");
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (std::abs(m.col(j).sum() - 1.0) > 1e-9) throw ValidationError("confusion columns must sum to 1");
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (!(m(j, j) > 0.5)) throw ValidationError("assignment fidelity must exceed 0.5 for every state");
  };
  if (qubits_ < 1) throw ValidationError("confusion model needs at least one qubit");
  if (joint_) check(*joint_);
  for (const auto& m : per_qubit_) check(m);
}

Eigen::MatrixXd ConfusionModel::matrix() const {
  if (joint_) return *joint_;
  if (qubits_ > 12) throw DimensionError("dense confusion matrix is limited to 12 qubits");
  const auto dim = Eigen::Index{1} << qubits_;
  Eigen::MatrixXd m(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) m.col(j) = apply(Eigen::VectorXd::Unit(dim, j));
  return m;
}

Eigen::VectorXd ConfusionModel::apply(const Eigen::VectorXd& p) const {
  if (p.size() != (Eigen::Index{1} << qubits_)) throw DimensionError("distribution size does not match the model");
  if (joint_) return *joint_ * p;
  return apply_factors(per_qubit_, p, false);
}

Eigen::VectorXd ConfusionModel::apply_transpose(const Eigen::VectorXd& r) const {
  if (r.size() != (Eigen::Index{1} << qubits_)) throw DimensionError("distribution size does not match the model");
  if (joint_) return joint_->transpose() * r;
  return apply_factors(per_qubit_, r, true);
}

nlohmann::json ConfusionModel::to_json() const {
  nlohmann::json j;
  if (joint_) {
    j["joint"] = nlohmann::json::array();
    for (Eigen::Index r = 0; r < joint_->rows(); ++r) {
      std::vector<double> row(joint_->row(r).data(), joint_->row(r).data() + joint_->cols());
      for (Eigen::Index c = 0; c < joint_->cols(); ++c) row[static_cast<std::size_t>(c)] = (*joint_)(r, c);
      j["joint"].push_back(row);
    }
    return j;
  }
  j["qubits"] = nlohmann::json::array();
  for (const auto& m : per_qubit_) j["qubits"].push_back({{"p_ge", m(1, 0)}, {"p_eg", m(0, 1)}});
  return j;
}

Eigen::VectorXd apply_confusion(const Eigen::VectorXd& distribution, const ConfusionModel& model) {
  check_distribution(distribution, model.qubits());
  return model.apply(distribution);
}

MeasurementRecord apply_confusion(const MeasurementRecord& record, const ConfusionModel& model, std::uint64_t seed,
                                  bool include_m1) {
  record.validate();
  if (record.qubits != model.qubits()) throw DimensionError("record and confusion model differ in qubit count");
  std::mt19937_64 rng(seed);
  auto uni = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const int n = model.qubits();
  std::vector<std::vector<double>> joint_cdf;
  if (model.is_joint()) {
    const Eigen::MatrixXd m = model.matrix();
    for (Eigen::Index s = 0; s < m.cols(); ++s) {
      std::vector<double> c;
      double acc = 0;
      for (Eigen::Index r = 0; r < m.rows(); ++r) c.push_back(acc += m(r, s));
      c.back() = 1.0;
      joint_cdf.push_back(std::move(c));
    }
  }
  auto corrupt = [&](std::uint64_t word) {
    if (model.is_joint()) {
      const auto& c = joint_cdf[word];
      return static_cast<std::uint64_t>(std::upper_bound(c.begin(), c.end(), uni()) - c.begin());
    }
    std::uint64_t out = word;
    for (int q = 0; q < n; ++q) {
      const int s = outcome_bit(word, n, q);
      if (uni() < model.qubit(q)(1 - s, s)) out ^= mask_of(n, q);
    }
    return out;
  };
  MeasurementRecord out = record;
  for (std::size_t s = 0; s < out.shots(); ++s) {
    out.m2[s] = corrupt(out.m2[s]);
    if (include_m1 && out.has_m1()) out.m1[s] = corrupt(out.m1[s]);
  }
  return out;
}

nlohmann::json UnfoldResult::to_json() const {
  return {{"probabilities", std::vector<double>(probabilities.data(), probabilities.data() + probabilities.size())},
          {"iterations", iterations},
          {"last_change", last_change},
          {"converged", converged}};
}

UnfoldResult unfold(const Eigen::VectorXd& measured, const ConfusionModel& model, int max_iterations,
                    double tolerance) {
  check_distribution(measured, model.qubits());
  if (max_iterations < 1 || !(tolerance > 0)) throw ValidationError("bad iteration budget");
  const Eigen::VectorXd m = measured.cwiseMax(0.0) / measured.cwiseMax(0.0).sum();
  UnfoldResult r;
  Eigen::VectorXd p = Eigen::VectorXd::Constant(m.size(), 1.0 / double(m.size()));
  for (r.iterations = 1; r.iterations <= max_iterations; ++r.iterations) {
    const Eigen::VectorXd pred = model.apply(p);
    Eigen::VectorXd ratio(m.size());
    for (Eigen::Index i = 0; i < m.size(); ++i) ratio(i) = pred(i) > 0 ? m(i) / pred(i) : 0.0;
    Eigen::VectorXd next = p.cwiseProduct(model.apply_transpose(ratio));
    next /= next.sum();
    r.last_change = (next - p).lpNorm<1>();
    p = std::move(next);
    if (r.last_change <= tolerance) {
      r.converged = true;
      break;
    }
  }
  r.iterations = std::min(r.iterations, max_iterations);
  if (!r.converged && r.last_change > 1e-6)
    throw NumericalError("unfolding did not converge: last L1 change " + std::to_string(r.last_change));
  r.probabilities = p;
  return r;
}

Eigen::VectorXd naive_inverse(const Eigen::VectorXd& measured, const ConfusionModel& model) {
  check_distribution(measured, model.qubits());
  return model.matrix().partialPivLu().solve(measured);
}

PreselectResult preselect(const MeasurementRecord& record) {
  record.validate();
  if (!record.has_m1()) throw ValidationError("record carries no M1 outcomes to pre-select on");
  PreselectResult r;
  r.record = record;
  r.record.m1.clear();
  r.record.m2.clear();
  for (std::size_t s = 0; s < record.shots(); ++s)
    if (record.m1[s] == 0) {
      r.record.m2.push_back(record.m2[s]);
      r.record.m1.push_back(0);
    }
  r.record.preselected = true;
  r.kept = r.record.shots();
  r.retention = record.shots() ? double(r.kept) / double(record.shots()) : 0.0;
  return r;
}

double total_variation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw DimensionError("distributions differ in size");
  return 0.5 * (a - b).lpNorm<1>();
}

}  // namespace ftf
