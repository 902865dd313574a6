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
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ftf/device.hpp"
#include "ftf/hamiltonian.hpp"

namespace ftf {

struct Transition {
  std::string initial;
  std::string final_state;
  double frequency = 0.0;                      // GHz
  std::map<std::string, double> matrix_element;  // |<f|n_k|i>| per node
};

struct TransitionTable {
  std::vector<Transition> transitions;
  const Transition& find(const std::string& final_state) const;
};

// Transitions that raise exactly one node by `max_step` levels or fewer.
TransitionTable transition_table(const Subsystem& sys, const std::string& from_label, int max_step = 1);

// Contiguous run of config nodes covering all the given names, in config order.
std::vector<std::string> chain_between(const DeviceConfig& config, const std::vector<std::string>& names);

struct DeltaMinOptions {
  LevelMap levels;
  std::string drive_node;              // default: first coupler in the chain
  double min_relative_strength = 0.01;  // competitors weaker than this fraction of the target are ignored
};

struct DeltaMinResult {
  double delta_min = 0.0;
  double target_frequency = 0.0;
  double target_matrix_element = 0.0;
  std::string competitor_initial;
  std::string competitor_final;
  double competitor_frequency = 0.0;
};

// Smallest |f - target| over `others`; +inf when empty.
double min_detuning(double target, const std::vector<double>& others);

DeltaMinResult delta_min_detail(const Subsystem& sys, const std::pair<std::string, std::string>& target,
                                const DeltaMinOptions& opt = {});
// `flux` is applied to every coupler between the active pair.
double delta_min(const DeviceConfig& config, const std::pair<std::string, std::string>& active_pair,
                 const std::pair<std::string, std::string>& target, double flux, const DeltaMinOptions& opt = {});

struct EpsilonMaxOptions {
  LevelMap levels;               // defaults: 5 per fluxonium, 4 per coupler
  double energy_margin = 1.5;    // GHz above the highest needed bare state kept in the eigen-solve
};

struct EpsilonMaxResult {
  double epsilon_max = 0.0;
  std::map<char, double> frequency;  // A->B frequency with the spectator in g, e, f
  double min_overlap = 1.0;
};

// A->B transition frequency for each spectator letter in `states`. Couplers between the active chain and the
// spectator are set to `spectator_coupler_flux` when given, otherwise the config flux is used.
struct SpectatorFrequencies {
  std::map<char, double> frequency;
  double min_overlap = 1.0;
};
SpectatorFrequencies spectator_frequencies(const DeviceConfig& config,
                                           const std::pair<std::string, std::string>& active_pair,
                                           const std::string& spectator,
                                           const std::pair<std::string, std::string>& drive_states,
                                           std::optional<double> spectator_coupler_flux, const std::string& states,
                                           const EpsilonMaxOptions& opt = {});

EpsilonMaxResult epsilon_max_detail(const DeviceConfig& config, const std::pair<std::string, std::string>& active_pair,
                                    const std::string& spectator,
                                    const std::pair<std::string, std::string>& drive_states,
                                    double spectator_coupler_flux, const EpsilonMaxOptions& opt = {});
double epsilon_max(const DeviceConfig& config, const std::pair<std::string, std::string>& active_pair,
                   const std::string& spectator, const std::pair<std::string, std::string>& drive_states,
                   double spectator_coupler_flux, const EpsilonMaxOptions& opt = {});

// Composite label for the chain with the given per-node letters; unspecified nodes are 'g'.
std::string compose_label(const std::vector<std::string>& chain, const std::map<std::string, char>& letters);

// zeta = (E_ee + E_gg) - (E_eg + E_ge), on the chain between the pair.
double static_zz(const DeviceConfig& config, const std::pair<std::string, std::string>& qubit_pair,
                 const FluxPoint& flux_point, const LevelMap& levels = {});

struct SweepResult {
  std::string metric;
  std::string subsystem;
  std::vector<double> axis;
  std::vector<double> values;

  std::string to_csv() const;
  nlohmann::json to_json() const;
};

// Inclusive grid start, start+step, ... up to stop (with a small tolerance on the last point).
std::vector<double> make_axis(double start, double stop, double step);

// Independent points; evaluated on up to `threads` workers, results stored in axis order.
SweepResult flux_sweep(const std::string& metric_name, const std::function<double(double)>& metric,
                       const std::vector<double>& axis, int threads = 1, const std::string& subsystem = "");

// Sequential sweep of one node's flux with labels carried between neighbouring points.
SweepResult tracked_sweep(const std::string& metric_name, const DeviceConfig& config,
                          const std::vector<std::string>& subsystem, const LevelMap& levels, const std::string& node,
                          const std::vector<double>& axis, const std::function<double(const Subsystem&)>& metric);

}  // namespace ftf
