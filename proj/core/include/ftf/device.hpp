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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace ftf {

// Energies in h*GHz, flux in units of the flux quantum, times in microseconds.
struct FluxoniumParams {
  double e_c = 0.0;
  double e_j = 0.0;
  double e_l = 0.0;
  double flux_ext = 0.5;
  std::optional<double> t1;
  std::optional<double> t2_echo;

  bool operator==(const FluxoniumParams&) const = default;
};

struct TransmonCouplerParams {
  double e_c = 0.0;
  double e_j1 = 0.0;
  double e_j2 = 0.0;
  double flux_ext = 0.0;

  bool operator==(const TransmonCouplerParams&) const = default;
};

struct Node {
  std::string name;
  std::variant<FluxoniumParams, TransmonCouplerParams> params;

  bool is_fluxonium() const { return std::holds_alternative<FluxoniumParams>(params); }
  const FluxoniumParams& fluxonium() const { return std::get<FluxoniumParams>(params); }
  const TransmonCouplerParams& coupler() const { return std::get<TransmonCouplerParams>(params); }
  double flux() const;
  bool operator==(const Node&) const = default;
};

// Assignment errors: p_ge = P(read e | prepared g), p_eg = P(read g | prepared e).
struct ReadoutParams {
  std::string qubit;
  double p_ge = 0.0;
  double p_eg = 0.0;

  bool operator==(const ReadoutParams&) const = default;
};

// Depolarizing probabilities per gate application.
struct GateNoiseParams {
  double single_qubit = 0.0;
  double cz = 0.0;
  double init_excited = 0.0;

  bool operator==(const GateNoiseParams&) const = default;
};

using FluxPoint = std::map<std::string, double>;

class DeviceConfig {
 public:
  DeviceConfig() = default;
  // Throws ValidationError on any invariant violation.
  DeviceConfig(std::vector<Node> nodes, const std::vector<std::tuple<std::string, std::string, double>>& couplings,
               std::vector<ReadoutParams> readout = {}, std::optional<GateNoiseParams> gate_noise = std::nullopt);

  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(const std::string& name) const;
  std::size_t index_of(const std::string& name) const;
  bool has_node(const std::string& name) const;
  double coupling(const std::string& a, const std::string& b) const;
  const Eigen::MatrixXd& coupling_matrix() const { return j_; }
  const std::vector<ReadoutParams>& readout() const { return readout_; }
  const std::optional<GateNoiseParams>& gate_noise() const { return gate_noise_; }

  // Copy with some external fluxes replaced.
  DeviceConfig with_flux(const FluxPoint& flux) const;
  // Copy with every coupling scaled by s.
  DeviceConfig with_coupling_scale(double s) const;
  // Copy with one coupling overwritten (symmetrically).
  DeviceConfig with_coupling(const std::string& a, const std::string& b, double j) const;
  FluxPoint flux_point() const;

  bool operator==(const DeviceConfig&) const;

 private:
  std::vector<Node> nodes_;
  Eigen::MatrixXd j_;
  std::vector<ReadoutParams> readout_;
  std::optional<GateNoiseParams> gate_noise_;
};

DeviceConfig parse_config(const nlohmann::json& doc);
DeviceConfig parse_config_text(const std::string& text);
DeviceConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const DeviceConfig& config);
std::string serialize(const DeviceConfig& config);

// Design-band checks. Never throws; returns human-readable warnings.
std::vector<std::string> validate(const DeviceConfig& config);

}  // namespace ftf
