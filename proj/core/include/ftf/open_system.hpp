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

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ftf/dynamics.hpp"
#include "ftf/fitting.hpp"

namespace ftf {

// Rates are angular, in 1/us.
struct NoiseSpec {
  std::map<std::string, double> relaxation;
  std::map<std::string, double> dephasing;

  void validate() const;
};

struct CollapseOperator {
  Eigen::MatrixXcd op;
  double rate = 0.0;  // 1/ns
};

inline constexpr long kMaxDensityDimension = 200;

// Per-node ladder (sqrt(j+1) |j><j+1|) and number operators, in the dressed basis of `frame`.
// Dephasing uses sqrt(2 gamma) n so that the g-e coherence decays at gamma.
std::vector<CollapseOperator> collapse_operators(const StaticFrame& frame, const NoiseSpec& noise);

struct DensityTrajectory {
  std::vector<double> times;          // ns
  std::vector<Eigen::MatrixXcd> rho;  // base dressed basis, Schroedinger picture
  std::vector<std::string> labels;

  double population(std::size_t sample, const std::string& label) const;
  std::string populations_csv() const;
};

// Sample times may run past the schedule; the system then evolves freely.
DensityTrajectory lindblad_propagate(const DrivenModel& model, const NoiseSpec& noise, const PulseSchedule& schedule,
                                     const Eigen::MatrixXcd& rho0, const std::vector<double>& sample_times,
                                     const PropagationOptions& opt = {});

// Static Lindblad problem; h and rates in consistent angular units of 1/time.
std::vector<Eigen::MatrixXcd> lindblad_evolve(const Eigen::MatrixXcd& h, const std::vector<CollapseOperator>& ops,
                                              const Eigen::MatrixXcd& rho0, const std::vector<double>& times,
                                              double rtol = 1e-10, double atol = 1e-12);

struct RamseyResult {
  double omega_g = 0.0;  // target frequency with control in g, GHz
  double omega_e = 0.0;
  double g_zz = 0.0;  // omega_g - omega_e, GHz
  double g_zz_error = 0.0;
  std::vector<double> times;
  std::vector<double> phase_g, phase_e;  // unwrapped, relative to `reference`
  double reference = 0.0;

  nlohmann::json to_json() const;
};

// Labels: target superposed between (ground, target_excited) with control in g, and
// (control_excited, both_excited) with control in e.
RamseyResult conditional_ramsey_zz(const DrivenModel& model, const std::array<std::string, 4>& labels,
                                   const std::vector<double>& times, const NoiseSpec& noise = {});
// Node-name form for device-backed models; other nodes stay in g.
RamseyResult conditional_ramsey_zz(const DrivenModel& model, const std::string& target, const std::string& control,
                                   const std::vector<double>& times, const NoiseSpec& noise = {});

struct XxEstimate {
  double g_xx = 0.0;  // angular 1/us
  double delta_gamma = 0.0;
  bool consistent = true;
  std::string diagnostic;

  double hz() const;
  nlohmann::json to_json() const;
};

XxEstimate conditional_t1_xx(double kappa_c, double kappa_t, double gamma_g, double gamma_e);

// Weak-coupling prediction of the target decay with the control in g.
double effective_target_rate(double g, double kappa_c, double kappa_t);

struct ConditionalT1 {
  DecayFit fit_g, fit_e;
  XxEstimate estimate;
  std::vector<double> times;  // us
  std::vector<double> target_g;  // target excited, control prepared in g
  std::vector<double> target_e;  // population of |ee>, control prepared and held in e

  nlohmann::json to_json() const;
};

// Two two-level qubits on resonance with H = g (s+ s- + h.c.) in the rotating frame.
// With `blocked_arm_relaxation` false the control keeps no relaxation in the e arm.
ConditionalT1 simulate_conditional_t1(double g, double kappa_c, double kappa_t, const std::vector<double>& times_us,
                                      bool blocked_arm_relaxation = false);

// |Gamma_sim - formula| / (formula - kappa_t) from a fitted Lindblad decay.
double effective_rate_error(double g, double kappa_c, double kappa_t);

}  // namespace ftf
