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

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ftf/device.hpp"
#include "ftf/fitting.hpp"
#include "ftf/hamiltonian.hpp"
#include "ftf/spectral.hpp"

namespace ftf {

enum class Channel { Flux, ChargeDrive };
enum class Envelope { Square, Cosine, CosineFlatTop };

// Charge drives add amplitude * env(t) * cos(2 pi f t + phase) * n_node (amplitude in GHz per unit charge).
// Flux segments hold the node at `amplitude` (flux quanta) for their duration; they must be square.
struct PulseSegment {
  std::string node;
  Channel channel = Channel::ChargeDrive;
  Envelope envelope = Envelope::Square;
  double amplitude = 0.0;
  double frequency = 0.0;  // GHz
  double phase = 0.0;      // rad
  double start = 0.0;      // ns
  double duration = 0.0;   // ns
  double ramp = 0.0;       // ns, cosine flat-top only

  double end() const { return start + duration; }
  double envelope_at(double t) const;
  // Integral of the envelope over the segment.
  double area() const;
};

struct PulseSchedule {
  std::vector<PulseSegment> segments;
  double total_duration = 0.0;
  double buffer = 0.0;

  void validate() const;
  nlohmann::json to_json() const;
  static PulseSchedule from_json(const nlohmann::json& j);
};

// Square flux pulse on `coupler` to `on_flux`, with a drive of `drive_duration` centred inside it
// after `buffer` ns.
PulseSchedule map_cz_schedule(const std::string& coupler, double on_flux, const std::string& drive_node,
                              double frequency, double amplitude, double drive_duration = 60.0, double buffer = 10.0);

// Static Hamiltonian in its own eigenbasis plus charge operators in that basis.
struct StaticFrame {
  Eigen::VectorXd energies;
  std::vector<std::string> labels;
  std::vector<std::string> nodes;
  std::vector<Eigen::MatrixXcd> charge;
  FluxPoint flux;
  std::shared_ptr<const Subsystem> source;  // null for synthetic frames

  std::size_t dimension() const { return static_cast<std::size_t>(energies.size()); }
  std::size_t state(const std::string& label) const;
  const Eigen::MatrixXcd& charge_of(const std::string& node) const;
};

StaticFrame make_frame(Eigen::VectorXd energies, std::vector<std::string> labels,
                       std::map<std::string, Eigen::MatrixXcd> charge);

// Builds and caches frames at the flux points a schedule visits.
class DrivenModel {
 public:
  DrivenModel(DeviceConfig config, std::vector<std::string> subsystem, LevelMap levels = {}, int n_states = 0);
  explicit DrivenModel(StaticFrame synthetic);

  const StaticFrame& base() const { return *base_; }
  std::shared_ptr<const StaticFrame> frame_at(const FluxPoint& overrides) const;
  bool synthetic() const { return !config_; }

 private:
  std::shared_ptr<const StaticFrame> build(const DeviceConfig& config) const;

  std::optional<DeviceConfig> config_;
  std::vector<std::string> subsystem_;
  LevelMap levels_;
  int n_states_ = 0;
  std::shared_ptr<const StaticFrame> base_;
  mutable std::mutex mutex_;
  mutable std::map<FluxPoint, std::shared_ptr<const StaticFrame>> cache_;
};

enum class Frame { Lab, Rwa };

struct PropagationOptions {
  Frame frame = Frame::Lab;
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 1e-3;  // ns
};

struct GateResult {
  Eigen::MatrixXcd final_amplitudes;  // base dressed basis, Schroedinger picture
  bool has_gate = false;
  Eigen::Matrix4cd computational = Eigen::Matrix4cd::Zero();  // order gg, ge, eg, ee
  double conditional_phase = 0.0;  // in [0, 2 pi)
  double leakage = 0.0;
  double fidelity = 0.0;
  std::array<double, 2> local_phases{};  // virtual-Z angles on first and second qubit

  nlohmann::json to_json() const;
};

// Columns of `initial` are states in the base dressed basis.
Eigen::MatrixXcd propagate_states(const DrivenModel& model, const PulseSchedule& schedule,
                                  const Eigen::MatrixXcd& initial, const PropagationOptions& opt = {});

// Propagates the four computational states (gg, ge, eg, ee) and evaluates the gate.
GateResult propagate(const DrivenModel& model, const PulseSchedule& schedule,
                     const std::array<std::string, 4>& computational, const PropagationOptions& opt = {});

// Gate metrics of a computational block. With `local_phases` given, those virtual-Z angles are applied;
// otherwise they are read off the diagonal.
GateResult gate_metrics(const Eigen::Matrix4cd& u, std::optional<std::array<double, 2>> local_phases = std::nullopt);

// Labels (gg, ge, eg, ee) for the two end qubits of a chain, couplers in g.
std::array<std::string, 4> computational_labels(const std::vector<std::string>& chain);

// Population left in `initial_label`; rows follow `frequencies`, columns follow `amplitudes`.
Eigen::MatrixXd chevron_scan(const DrivenModel& model, const std::string& drive_node,
                             const std::vector<double>& frequencies, const std::vector<double>& amplitudes,
                             double duration, const std::string& initial_label, Envelope envelope = Envelope::Square,
                             const PropagationOptions& opt = {}, int threads = 1);

struct CzCalibrationOptions {
  double duration = 60.0;
  Envelope envelope = Envelope::Cosine;
  double min_isolation = 0.03;      // GHz
  double frequency_window = 0.006;  // GHz, half width of the golden-section bracket
  int budget = 60;                  // evaluations per stage
  double phase_tolerance = 1e-3;    // rad
  int rounds = 6;
  int repetitions = 8;              // repeated-gate counts for the single-qubit phase fit
  bool rwa_presearch = true;
  PropagationOptions propagation;
};

struct CzCalibration {
  PulseSchedule schedule;
  GateResult result;
  std::array<double, 2> phase_corrections{};  // phi_sq per qubit, rad per gate
  double frequency = 0.0;
  double amplitude = 0.0;
  int evaluations = 0;
  std::vector<std::string> log;

  nlohmann::json to_json() const;
};

CzCalibration calibrate_cz(const DrivenModel& model, const std::string& drive_node,
                           const std::pair<std::string, std::string>& target,
                           const std::array<std::string, 4>& computational, const CzCalibrationOptions& opt = {});

// phi_sq from a linear fit of accumulated phase against the number of repeated gates.
LineFit fit_repeated_phase(const std::vector<double>& counts, const std::vector<double>& phases);

// |phi_g - pi| for H = (delta/2) sz + (rabi/2) sx driven once around its cycle.
double detuning_phase_error(double delta, double rabi);

struct SpectatorRow {
  char state = 'g';
  double frequency = 0.0;
  double shift = 0.0;
  double phase_error = 0.0;
};

struct SpectatorReport {
  double gate_time = 120.0;
  double rabi = 0.0;  // GHz
  std::vector<SpectatorRow> rows;

  double max_phase_error() const;
  nlohmann::json to_json() const;
};

// Shifts of the A->B transition across spectator states (relative to the spectator in g) and the
// resulting geometric phase errors at the Rabi rate of a cyclic pulse of length `gate_time`.
SpectatorReport spectator_phase_report(const DeviceConfig& config, const std::pair<std::string, std::string>& active_pair,
                                       const std::string& spectator,
                                       const std::pair<std::string, std::string>& drive_states,
                                       const std::string& states, const FluxPoint& coupler_fluxes,
                                       double gate_time = 120.0, const EpsilonMaxOptions& opt = {});

}  // namespace ftf
