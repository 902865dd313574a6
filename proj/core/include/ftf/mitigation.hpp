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


#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ftf/device.hpp"
#include "ftf/record.hpp"

namespace ftf {

// Assignment matrices M(read, true); columns sum to one. Qubit 0 is the most significant bit.
class ConfusionModel {
 public:
  ConfusionModel() = default;
  // One 2x2 matrix per qubit.
  explicit ConfusionModel(std::vector<Eigen::Matrix2d> per_qubit);
  // p_ge = P(read e | g), p_eg = P(read g | e), as in the config readout block.
  static ConfusionModel symmetric(int qubits, double p_ge, double p_eg);
  static ConfusionModel from_config(const DeviceConfig& config, const std::vector<std::string>& qubits);
  // Full joint matrix for n <= 6.
  static ConfusionModel joint(const Eigen::MatrixXd& m);

  int qubits() const { return qubits_; }
  bool is_joint() const { return joint_.has_value(); }
  const Eigen::Matrix2d& qubit(int q) const { return per_qubit_.at(static_cast<std::size_t>(q)); }
  Eigen::MatrixXd matrix() const;  // dense, n <= 12
  Eigen::VectorXd apply(const Eigen::VectorXd& p) const;
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& r) const;
  nlohmann::json to_json() const;

 private:
  void validate() const;
  int qubits_ = 0;
  std::vector<Eigen::Matrix2d> per_qubit_;
  std::optional<Eigen::MatrixXd> joint_;
};

inline constexpr int kMaxJointConfusionQubits = 6;

Eigen::VectorXd apply_confusion(const Eigen::VectorXd& distribution, const ConfusionModel& model);
// Per-shot stochastic flips; M1 outcomes pass through the same model when `include_m1`.
MeasurementRecord apply_confusion(const MeasurementRecord& record, const ConfusionModel& model, std::uint64_t seed,
                                  bool include_m1 = true);

struct UnfoldResult {
  Eigen::VectorXd probabilities;
  int iterations = 0;
  double last_change = 0.0;  // L1 norm of the final update
  bool converged = false;

  nlohmann::json to_json() const;
};

inline constexpr int kUnfoldMaxIterations = 10000;
inline constexpr double kUnfoldTolerance = 1e-10;

// Multinomial maximum likelihood by expectation-maximization updates from the uniform start.
UnfoldResult unfold(const Eigen::VectorXd& measured, const ConfusionModel& model,
                    int max_iterations = kUnfoldMaxIterations, double tolerance = kUnfoldTolerance);

// Unconstrained inverse, for comparison; may contain negative entries.
Eigen::VectorXd naive_inverse(const Eigen::VectorXd& measured, const ConfusionModel& model);

struct PreselectResult {
  MeasurementRecord record;
  double retention = 0.0;
  std::size_t kept = 0;
};

// Keeps shots whose M1 outcome is all-g.
PreselectResult preselect(const MeasurementRecord& record);

double total_variation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace ftf
