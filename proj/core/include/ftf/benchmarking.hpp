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
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ftf/circuit.hpp"
#include "ftf/fitting.hpp"

namespace ftf {

// Clifford group on 1 or 2 qubits, enumerated breadth-first from {H, S} (plus CZ for two qubits),
// with matrices compared up to global phase.
class CliffordGroup {
 public:
  static const CliffordGroup& get(int qubits);

  int qubits() const { return qubits_; }
  std::size_t size() const { return elements_.size(); }
  const Eigen::MatrixXcd& matrix(std::size_t i) const { return elements_.at(i); }
  std::size_t index_of(const Eigen::MatrixXcd& u) const;  // throws ValidationError when not a Clifford
  std::size_t inverse(std::size_t i) const;
  // Native gates (Hadamard, VirtualZ(pi/2), CZ) of the shortest generator word.
  void append_to(Circuit& c, std::size_t i, int first_qubit = 0) const;

 private:
  explicit CliffordGroup(int qubits);
  int qubits_;
  std::vector<Eigen::MatrixXcd> elements_;
  std::vector<std::vector<int>> words_;
  std::vector<std::pair<std::string, std::size_t>> keys_;  // sorted for lookup
};

struct RbSequence {
  int length = 0;
  std::vector<std::size_t> cliffords;  // including the final inverse and any interleaved gates
  Circuit circuit;
};

// `interleaved` is a Clifford index inserted after every random Clifford.
std::vector<RbSequence> generate_rb(int qubits, const std::vector<int>& lengths, int per_length, std::uint64_t seed,
                                    std::optional<std::size_t> interleaved = std::nullopt);

// Probability of returning to all-g under gate-level noise; shots == 0 gives the exact value.
double rb_survival(const RbSequence& s, const NoiseModel& noise, std::size_t shots = 0, std::uint64_t seed = 0);
// Clifford-level depolarizing channel rho -> (1 - p) rho + p I/d after every Clifford.
double rb_survival_depolarizing(const RbSequence& s, int qubits, double p);

struct DecayCurveFit {
  FitReport fit;  // A, p, B
  double p = 1.0;
  double p_error = 0.0;
  double fidelity = 1.0;
  double fidelity_error = 0.0;
  int dimension = 2;
  bool offset_fixed = false;  // B held at 1/d after an unphysical free fit
  nlohmann::json to_json() const;
};

// F(L) = A p^L + B; fidelity = 1 - (1 - p)(d - 1)/d.
DecayCurveFit fit_rb(const std::vector<double>& lengths, const std::vector<double>& survival, int qubits);

// r = (d - 1)(1 - p_int / p_ref) / d, returned as fidelity 1 - r with propagated error.
std::pair<double, double> interleaved_fidelity(const DecayCurveFit& reference, const DecayCurveFit& interleaved);

// Linear cross entropy (M - U)/(E - U) with E = sum Pth^2, U = 1/D, M = sum P Pth.
double xeb_fidelity(const Eigen::VectorXd& measured, const Eigen::VectorXd& ideal);
// Ensemble form sum (M - U)(E - U) / sum (E - U)^2 over circuits of one depth.
double xeb_fidelity(const std::vector<Eigen::VectorXd>& measured, const std::vector<Eigen::VectorXd>& ideal);

double epc(int qubits, double p);

// Haar-random single-qubit rotation as VZ X90 VZ X90 X180 VZ (two X90, one X180).
void append_random_rotation(Circuit& c, int q, std::mt19937_64& rng);

// Cycles of random rotations on every qubit followed by CZ on all pairs; a final rotation layer.
Circuit generate_rcs(int qubits, const std::vector<std::pair<int, int>>& pairs, int cycles, std::uint64_t seed);

}  // namespace ftf
