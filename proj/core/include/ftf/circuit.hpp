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

// X90/X180 are physical rotations about x; VirtualZ and Rz are frame updates and never noisy.
// Hadamard is the composite VirtualZ(pi/2) X90 VirtualZ(pi/2), counted as one rotation.
enum class GateKind { X90, X180, VirtualZ, Rz, Hadamard, CZ };

struct Gate {
  GateKind kind = GateKind::X90;
  std::vector<int> targets;
  double angle = 0.0;

  static Gate x90(int q) { return {GateKind::X90, {q}, 0.0}; }
  static Gate x180(int q) { return {GateKind::X180, {q}, 0.0}; }
  static Gate vz(int q, double theta) { return {GateKind::VirtualZ, {q}, theta}; }
  static Gate rz(int q, double phi) { return {GateKind::Rz, {q}, phi}; }
  static Gate hadamard(int q) { return {GateKind::Hadamard, {q}, 0.0}; }
  static Gate cz(int a, int b) { return {GateKind::CZ, {a, b}, 0.0}; }

  bool two_qubit() const { return kind == GateKind::CZ; }
  bool noisy() const { return kind != GateKind::VirtualZ && kind != GateKind::Rz; }
  Eigen::Matrix2cd matrix() const;  // single-qubit gates
  std::string name() const;
};

struct Circuit {
  int qubits = 0;
  std::vector<std::vector<Gate>> layers;

  explicit Circuit(int n = 0) : qubits(n) {}
  // Places the gate in the earliest layer after every layer touching its qubits.
  void append(const Gate& g);
  void add_layer(std::vector<Gate> layer);
  void extend(const Circuit& other);
  // Disjoint targets within a layer; CZ only between chain neighbours.
  void validate() const;
  int cz_layers() const;
  std::size_t gate_count(bool noisy_only = false) const;
  nlohmann::json to_json() const;
};

// Depolarizing probability per noisy gate, optional per-layer damping on every qubit,
// and initialization excited-state probability per qubit.
struct NoiseModel {
  double single_qubit = 0.0;
  double two_qubit = 0.0;
  double amplitude_damping = 0.0;
  double phase_damping = 0.0;
  std::vector<double> init_excited;  // empty means none

  void validate(int qubits) const;
  bool gate_noise() const { return single_qubit > 0 || two_qubit > 0 || amplitude_damping > 0 || phase_damping > 0; }
  bool init_noise() const;
  double init(int q) const { return init_excited.empty() ? 0.0 : init_excited.at(static_cast<std::size_t>(q)); }

  // p = (1 - F) d / (d - 1) for average gate fidelities F.
  static NoiseModel from_fidelities(double f_sq, double f_cz, double init = 0.0, int qubits = 0);
  static NoiseModel from_config(const GateNoiseParams& p, int qubits);
};

inline constexpr int kMaxStatevectorQubits = 20;
inline constexpr int kMaxDensityQubits = 12;

Eigen::VectorXcd run_statevector(const Circuit& c, std::optional<std::uint64_t> initial_basis_state = std::nullopt);
// Initial state is the product mixture unless `initial_basis_state` fixes it.
Eigen::MatrixXcd run_density(const Circuit& c, const NoiseModel& noise,
                             std::optional<std::uint64_t> initial_basis_state = std::nullopt);

// Per-task generator seeds: splitmix64 of (seed + index).
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index);

// Draws `shots` outcomes of a final Z measurement. With `record_m1`, each shot first draws its
// initialization configuration, which is stored as the M1 outcome (ideal M1 readout).
MeasurementRecord simulate(const Circuit& c, const NoiseModel& noise, std::size_t shots, std::uint64_t seed,
                           bool record_m1 = false);

// Outcome probabilities of a state (vector or density matrix).
Eigen::VectorXd probabilities(const Eigen::VectorXcd& psi);
Eigen::VectorXd probabilities(const Eigen::MatrixXcd& rho);

// GHZ on qubits [offset, offset + n) of a chain of `chain` qubits, grown outward from the centre.
Circuit compile_ghz(int n, int chain = 0, int offset = 0);
int ghz_central_qubit(int n, int offset = 0);

struct Harmonic {
  int order = 0;
  double amplitude = 0.0;
  double phase = 0.0;  // A cos(m phi + phase)
};

struct ParityResult {
  std::vector<double> phases;
  std::vector<double> parity;
  std::vector<Harmonic> harmonics;  // orders 0..n
  int dominant_order = 0;
  double a_n = 0.0;
  double rms_residual = 0.0;

  double amplitude(int m) const { return harmonics.at(static_cast<std::size_t>(m)).amplitude; }
  nlohmann::json to_json() const;
  std::string to_csv() const;
};

// Joint least squares on {1, cos(m phi), sin(m phi)}, m = 1..n.
ParityResult fit_parity(const std::vector<double>& phases, const std::vector<double>& parity, int n);

// Appends Rz(phi) on every qubit then a global X90.
Circuit parity_analysis(int n, double phi);

// Exact parity values of `prep` on the given grid (analysis rotations noise-free unless asked).
ParityResult parity_experiment(const Circuit& prep, const NoiseModel& noise, const std::vector<double>& phases,
                               bool noisy_analysis = false);
// Sampled version; with `preselect`, shots whose M1 is not all-g are dropped.
ParityResult parity_experiment_sampled(const Circuit& prep, const NoiseModel& noise,
                                       const std::vector<double>& phases, std::size_t shots, std::uint64_t seed,
                                       bool preselect);

std::vector<double> phase_grid(int n, int points = 0);

double ghz_fidelity(double p_g, double p_e, double a_n);
// F_SQ(central) * prod over the other qubits of F_SQ^3 * prod F_CZ.
double theory_fidelity(int n, const std::vector<double>& sq, const std::vector<double>& cz, int central = -1);

// Pauli linear inversion, then projection onto unit-trace positive matrices (n <= 5).
// shots == 0 uses exact probabilities.
Eigen::MatrixXcd state_tomography(const Circuit& prep, const NoiseModel& noise, std::size_t shots = 0,
                                  std::uint64_t seed = 0);
Eigen::MatrixXcd project_to_density(const Eigen::MatrixXcd& m);
double state_fidelity(const Eigen::MatrixXcd& rho, const Eigen::VectorXcd& psi);
Eigen::VectorXcd ghz_state(int n);

}  // namespace ftf
