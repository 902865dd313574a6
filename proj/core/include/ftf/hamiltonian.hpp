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

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <nlohmann/json.hpp>

#include "ftf/device.hpp"

namespace ftf {

using SparseC = Eigen::SparseMatrix<std::complex<double>>;
using LevelMap = std::map<std::string, int>;

enum class BasisKind { FluxoniumOscillator, TransmonCharge, FluxGrid };

struct ElementBasis {
  BasisKind kind = BasisKind::FluxoniumOscillator;
  int dimension = 120;
  int truncation_levels = 6;

  static ElementBasis oscillator(int levels = 6, int dim = 120) { return {BasisKind::FluxoniumOscillator, dim, levels}; }
  // dimension = 2*cutoff + 1 charge states.
  static ElementBasis charge(int levels = 5, int cutoff = 40) { return {BasisKind::TransmonCharge, 2 * cutoff + 1, levels}; }
  // Uniform grid on [-6 pi, 6 pi] with an 8th-order stencil.
  static ElementBasis flux_grid(int levels = 6, int points = 2001) { return {BasisKind::FluxGrid, points, levels}; }
};

// Kept eigenbasis of one circuit element. Energies are shifted so the ground state sits at 0.
struct ElementSpectrum {
  Eigen::VectorXd energies;
  double ground_energy = 0.0;  // absolute, before the shift
  Eigen::MatrixXcd charge;     // kept x kept
  Eigen::MatrixXcd phase;      // fluxonium only
  Eigen::MatrixXd vectors;     // raw basis -> kept eigenvectors (flux independent raw basis)
  BasisKind kind = BasisKind::FluxoniumOscillator;

  double f_ge() const { return energies(1) - energies(0); }
  double f_ef() const { return energies(2) - energies(1); }
  double f_gf() const { return energies(2) - energies(0); }
};

ElementSpectrum fluxonium_hamiltonian(const FluxoniumParams& params, const ElementBasis& basis = ElementBasis::oscillator());
double transmon_ej_eff(const TransmonCouplerParams& params);
ElementSpectrum transmon_hamiltonian(const TransmonCouplerParams& params, const ElementBasis& basis = ElementBasis::charge());

inline constexpr int kDefaultFluxoniumLevels = 6;
inline constexpr int kDefaultCouplerLevels = 5;
inline constexpr long kMaxCompositeDimension = 20000;

// Composite Hamiltonian in the tensor product of element eigenbases (last node fastest).
struct OperatorSet {
  std::vector<std::string> nodes;
  std::vector<int> levels;
  FluxPoint flux;
  std::vector<ElementSpectrum> elements;
  Eigen::MatrixXcd hamiltonian;
  std::vector<SparseC> charge_ops;  // embedded, one per node

  Eigen::Index dimension() const { return hamiltonian.rows(); }
  std::size_t node_index(const std::string& name) const;
  // Bare (uncoupled) energy of a product index.
  double bare_energy(Eigen::Index product_index) const;
  std::vector<int> digits(Eigen::Index product_index) const;
  Eigen::Index product_index(const std::vector<int>& digits) const;
};

// Levels default to 6 per fluxonium and 5 per coupler when absent from `levels`.
OperatorSet build_composite(const DeviceConfig& config, const std::vector<std::string>& subsystem,
                            const LevelMap& levels = {});

struct EigenSystem {
  Eigen::VectorXd energies;  // ascending
  Eigen::MatrixXcd vectors;  // product basis x kept
};

// n_states <= 0 keeps everything.
EigenSystem diagonalize(const OperatorSet& ops, int n_states = 0);
// Number of bare product states with energy <= cutoff; a convenient n_states.
int count_bare_states_below(const OperatorSet& ops, double cutoff);

std::string level_letter(int level);
int level_from_letter(char c);
std::string bare_label(const OperatorSet& ops, Eigen::Index product_index);
int excitation_count(const std::string& label);

struct SpectrumResult {
  std::vector<std::string> nodes;
  Eigen::VectorXd energies;
  std::vector<std::string> labels;
  std::vector<double> overlaps;
  std::vector<bool> ambiguous;
  FluxPoint flux_point;

  std::size_t size() const { return labels.size(); }
  bool has(const std::string& label) const;
  std::size_t index(const std::string& label) const;  // throws ValidationError if absent
  double energy(const std::string& label) const { return energies(static_cast<Eigen::Index>(index(label))); }
  // Throws AmbiguityError if the label is missing or flagged.
  std::size_t resolved_index(const std::string& label) const;
};

inline constexpr double kAmbiguityThreshold = 0.5;

// Greedy assignment by descending squared overlap with the bare product states.
SpectrumResult label_states(const OperatorSet& ops, const EigenSystem& eig);

// Carries labels from a neighbouring flux point by eigenvector continuity.
SpectrumResult track_labels(const OperatorSet& prev_ops, const EigenSystem& prev_eig, const SpectrumResult& prev,
                            const OperatorSet& ops, const EigenSystem& eig);

// V^dagger op V in the kept dressed basis.
Eigen::MatrixXcd dressed_operator(const EigenSystem& eig, const SparseC& op);

// Overlap <prev dressed | current dressed> through the flux-independent raw element bases.
Eigen::MatrixXcd dressed_overlap(const OperatorSet& prev_ops, const EigenSystem& prev_eig, const OperatorSet& ops,
                                 const EigenSystem& eig);

// Everything needed for one flux point.
struct Subsystem {
  OperatorSet ops;
  EigenSystem eig;
  SpectrumResult spectrum;

  double energy(const std::string& label) const { return spectrum.energy(label); }
  Eigen::MatrixXcd dressed_charge(const std::string& node) const;
};

Subsystem solve_subsystem(const DeviceConfig& config, const std::vector<std::string>& subsystem,
                          const LevelMap& levels = {}, int n_states = 0);

nlohmann::json to_json(const SpectrumResult& s);

}  // namespace ftf
