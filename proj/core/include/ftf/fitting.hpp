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

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace ftf {

struct FitReport {
  std::vector<std::string> names;
  Eigen::VectorXd values;
  Eigen::VectorXd errors;  // one standard deviation
  Eigen::MatrixXd covariance;
  double residual_sum_squares = 0.0;
  int evaluations = 0;

  double value(const std::string& name) const;
  double error(const std::string& name) const;
  nlohmann::json to_json() const;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_error = 0.0;
  double intercept_error = 0.0;
};

// Ordinary least squares y = slope * x + intercept; errors from the residual variance.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

using ScalarModel = std::function<double(const Eigen::VectorXd& params, double x)>;

// Levenberg-Marquardt least squares with a forward-difference Jacobian.
FitReport nonlinear_fit(const ScalarModel& model, const std::vector<double>& x, const std::vector<double>& y,
                        const Eigen::VectorXd& initial, std::vector<std::string> names, int max_evaluations = 4000);

// A exp(-rate t) + offset, seeded from a log-linear regression on the baseline-subtracted signal.
struct DecayFit {
  double rate = 0.0;
  double amplitude = 0.0;
  double offset = 0.0;
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();  // order: amplitude, rate, offset
  double rate_error() const { return std::sqrt(std::max(0.0, covariance(1, 1))); }
  nlohmann::json to_json() const;
};
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& y);

// Removes 2 pi jumps between consecutive samples.
std::vector<double> unwrap_phase(const std::vector<double>& phase);

}  // namespace ftf
