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

#include "ftf/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "ftf/errors.hpp"
#include "linalg.hpp"

namespace ftf {

using cd = std::complex<double>;

namespace {

constexpr char kAlphabet[] = "gefhijklmnopqrstuvwxyz";
constexpr double kGridHalfWidth = 6.0 * std::numbers::pi;

// Make the largest component of each column positive so repeated calls agree on phase.
template <class Mat>
void fix_signs(Mat& v) {
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    Eigen::Index imax = 0;
    v.col(c).cwiseAbs().maxCoeff(&imax);
    if (v(imax, c) < 0) v.col(c) *= -1.0;
  }
}

void check_levels(const ElementBasis& basis) {
  if (basis.truncation_levels < 2 || basis.truncation_levels > basis.dimension)
    throw ValidationError("truncation_levels must lie in [2, dimension]");
}

ElementSpectrum finish(const Eigen::VectorXd& evals, Eigen::MatrixXd evecs, BasisKind kind) {
  fix_signs(evecs);
  ElementSpectrum s;
  s.kind = kind;
  s.ground_energy = evals(0);
  s.energies = evals.array() - evals(0);
  s.vectors = std::move(evecs);
  return s;
}

ElementSpectrum fluxonium_oscillator(const FluxoniumParams& p, const ElementBasis& basis) {
  const int dim = basis.dimension;
  const int keep = basis.truncation_levels;
  const double phi_osc = std::pow(8.0 * p.e_c / p.e_l, 0.25);
  const double omega = std::sqrt(8.0 * p.e_c * p.e_l);

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
  for (int k = 1; k < dim; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  const Eigen::MatrixXd phi = phi_osc / std::sqrt(2.0) * (a + a.transpose());
  // n = i/(sqrt2 phi_osc) (a^dag - a); stored as its real factor.
  const Eigen::MatrixXd n_im = (a.transpose() - a) / (std::sqrt(2.0) * phi_osc);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> phi_es(phi);
  const Eigen::VectorXd shifted = (phi_es.eigenvalues().array() - kTwoPi * p.flux_ext).cos();
  Eigen::MatrixXd h = -p.e_j * (phi_es.eigenvectors() * shifted.asDiagonal() * phi_es.eigenvectors().transpose());
  for (int k = 0; k < dim; ++k) h(k, k) += omega * (k + 0.5);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("fluxonium eigensolver failed");
  Eigen::MatrixXd v = es.eigenvectors().leftCols(keep);

  // Tail-weight test: kept states must not reach the top of the oscillator ladder.
  const int tail = std::max(1, dim / 10);
  const double tail_weight = v.bottomRows(tail).colwise().squaredNorm().maxCoeff();
  if (tail_weight > 1e-10) throw NumericalError("fluxonium oscillator basis too small (tail weight " +
                                                std::to_string(tail_weight) + ")");

  ElementSpectrum s = finish(es.eigenvalues().head(keep), std::move(v), BasisKind::FluxoniumOscillator);
  s.charge = cd(0, 1) * (s.vectors.transpose() * n_im * s.vectors).cast<cd>();
  s.phase = (s.vectors.transpose() * phi * s.vectors).cast<cd>();
  return s;
}

ElementSpectrum fluxonium_grid(const FluxoniumParams& p, const ElementBasis& basis) {
  const int n = basis.dimension;
  const int keep = basis.truncation_levels;
  if (n < 101) throw ValidationError("flux grid needs at least 101 points");
  const double h = 2.0 * kGridHalfWidth / (n - 1);
  static constexpr double c2[] = {-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0};
  static constexpr double c1[] = {0.0, 4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};

  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x(i) = -kGridHalfWidth + i * h;
  std::vector<Eigen::VectorXd> bands(5, Eigen::VectorXd::Zero(n));
  bands[0] = (-4.0 * p.e_c * c2[0] / (h * h)) + (0.5 * p.e_l * x.array().square()) -
             p.e_j * (x.array() - kTwoPi * p.flux_ext).cos();
  for (int k = 1; k <= 4; ++k) bands[k].setConstant(-4.0 * p.e_c * c2[k] / (h * h));

  Eigen::VectorXd w;
  Eigen::MatrixXd v;
  detail::banded_lowest(bands, keep, w, v);
  ElementSpectrum s = finish(w, std::move(v), BasisKind::FluxGrid);

  // d/dphi applied to the kept vectors.
  Eigen::MatrixXd dv = Eigen::MatrixXd::Zero(n, keep);
  for (int i = 0; i < n; ++i)
    for (int k = 1; k <= 4; ++k) {
      if (i + k < n) dv.row(i) += c1[k] / h * s.vectors.row(i + k);
      if (i - k >= 0) dv.row(i) -= c1[k] / h * s.vectors.row(i - k);
    }
  s.charge = cd(0, -1) * (s.vectors.transpose() * dv).cast<cd>();
  s.phase = (s.vectors.transpose() * x.asDiagonal() * s.vectors).cast<cd>();
  return s;
}

// Applies a Kronecker product of per-node matrices to every column of x.
Eigen::MatrixXcd apply_kron(const std::vector<Eigen::MatrixXd>& factors, const Eigen::MatrixXcd& x) {
  std::vector<Eigen::Index> dims;
  for (const auto& f : factors) dims.push_back(f.cols());
  Eigen::MatrixXcd cur = x;
  for (std::size_t k = 0; k < factors.size(); ++k) {
    Eigen::Index left = 1, right = 1;
    for (std::size_t m = 0; m < k; ++m) left *= dims[m];
    for (std::size_t m = k + 1; m < factors.size(); ++m) right *= dims[m];
    const auto& f = factors[k];
    const Eigen::Index in = f.cols(), out = f.rows();
    Eigen::MatrixXcd next = Eigen::MatrixXcd::Zero(left * out * right, cur.cols());
    for (Eigen::Index l = 0; l < left; ++l)
      for (Eigen::Index o = 0; o < out; ++o)
        for (Eigen::Index i = 0; i < in; ++i) {
          const double fv = f(o, i);
          if (fv == 0.0) continue;
          next.middleRows((l * out + o) * right, right) += fv * cur.middleRows((l * in + i) * right, right);
        }
    cur = std::move(next);
    dims[k] = out;
  }
  return cur;
}

}  // namespace

ElementSpectrum fluxonium_hamiltonian(const FluxoniumParams& params, const ElementBasis& basis) {
  check_levels(basis);
  if (params.e_c <= 0 || params.e_l <= 0 || params.e_j < 0) throw ValidationError("fluxonium energies must be positive");
  switch (basis.kind) {
    case BasisKind::FluxoniumOscillator:
      return fluxonium_oscillator(params, basis);
    case BasisKind::FluxGrid:
      return fluxonium_grid(params, basis);
    default:
      throw ValidationError("fluxonium_hamiltonian needs an oscillator or flux-grid basis");
  }
}

double transmon_ej_eff(const TransmonCouplerParams& p) {
  const double sum = p.e_j1 + p.e_j2;
  const double d = (p.e_j2 - p.e_j1) / sum;
  const double c = std::cos(std::numbers::pi * p.flux_ext);
  const double s = std::sin(std::numbers::pi * p.flux_ext);
  return sum * std::sqrt(c * c + d * d * s * s);
}

ElementSpectrum transmon_hamiltonian(const TransmonCouplerParams& params, const ElementBasis& basis) {
  check_levels(basis);
  if (basis.kind != BasisKind::TransmonCharge) throw ValidationError("transmon_hamiltonian needs a charge basis");
  if (basis.dimension % 2 == 0) throw ValidationError("charge basis dimension must be odd");
  const int cutoff = basis.dimension / 2;
  const double ej = transmon_ej_eff(params);
  Eigen::VectorXd diag(basis.dimension);
  Eigen::VectorXd ns(basis.dimension);
  for (int i = 0; i < basis.dimension; ++i) {
    ns(i) = i - cutoff;
    diag(i) = 4.0 * params.e_c * ns(i) * ns(i);
  }
  Eigen::MatrixXd h = diag.asDiagonal();
  for (int i = 0; i + 1 < basis.dimension; ++i) h(i, i + 1) = h(i + 1, i) = -0.5 * ej;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("transmon eigensolver failed");
  ElementSpectrum s = finish(es.eigenvalues().head(basis.truncation_levels),
                             es.eigenvectors().leftCols(basis.truncation_levels), BasisKind::TransmonCharge);
  s.charge = (s.vectors.transpose() * ns.asDiagonal() * s.vectors).cast<cd>();
  return s;
}

std::size_t OperatorSet::node_index(const std::string& name) const {
  auto it = std::find(nodes.begin(), nodes.end(), name);
  if (it == nodes.end()) throw ValidationError("node '" + name + "' not in subsystem");
  return static_cast<std::size_t>(it - nodes.begin());
}

std::vector<int> OperatorSet::digits(Eigen::Index idx) const {
  std::vector<int> d(levels.size());
  for (std::size_t k = levels.size(); k-- > 0;) {
    d[k] = static_cast<int>(idx % levels[k]);
    idx /= levels[k];
  }
  return d;
}

Eigen::Index OperatorSet::product_index(const std::vector<int>& d) const {
  Eigen::Index idx = 0;
  for (std::size_t k = 0; k < levels.size(); ++k) idx = idx * levels[k] + d.at(k);
  return idx;
}

double OperatorSet::bare_energy(Eigen::Index idx) const {
  const auto d = digits(idx);
  double e = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) e += elements[k].energies(d[k]);
  return e;
}

OperatorSet build_composite(const DeviceConfig& config, const std::vector<std::string>& subsystem,
                            const LevelMap& levels) {
  if (subsystem.empty()) throw ValidationError("empty subsystem");
  OperatorSet ops;
  ops.nodes = subsystem;
  long dim = 1;
  for (const auto& name : subsystem) {
    if (std::count(subsystem.begin(), subsystem.end(), name) > 1)
      throw ValidationError("node '" + name + "' listed twice in subsystem");
    const Node& node = config.node(name);
    auto it = levels.find(name);
    const int l = it != levels.end() ? it->second
                                     : (node.is_fluxonium() ? kDefaultFluxoniumLevels : kDefaultCouplerLevels);
    if (l < 2) throw ValidationError("levels for '" + name + "' must be >= 2");
    ops.levels.push_back(l);
    dim *= l;
    if (dim > kMaxCompositeDimension)
      throw DimensionError("composite dimension exceeds " + std::to_string(kMaxCompositeDimension) +
                           "; reduce levels_per_node or the subsystem");
    ops.flux[name] = node.flux();
  }
  for (std::size_t k = 0; k < subsystem.size(); ++k) {
    const Node& node = config.node(subsystem[k]);
    ops.elements.push_back(node.is_fluxonium()
                               ? fluxonium_hamiltonian(node.fluxonium(), ElementBasis::oscillator(ops.levels[k]))
                               : transmon_hamiltonian(node.coupler(), ElementBasis::charge(ops.levels[k])));
  }

  const Eigen::Index d = dim;
  const std::size_t nn = subsystem.size();
  std::vector<Eigen::Index> stride(nn, 1);
  for (std::size_t k = nn - 1; k-- > 0;) stride[k] = stride[k + 1] * ops.levels[k + 1];

  ops.charge_ops.resize(nn);
  for (std::size_t k = 0; k < nn; ++k) {
    std::vector<Eigen::Triplet<cd>> trip;
    const auto& nk = ops.elements[k].charge;
    const int lk = ops.levels[k];
    for (Eigen::Index b = 0; b < d; ++b) {
      const int dk = static_cast<int>((b / stride[k]) % lk);
      for (int l = 0; l < lk; ++l) {
        const cd v = nk(l, dk);
        if (std::abs(v) < 1e-15) continue;
        trip.emplace_back(b + (l - dk) * stride[k], b, v);
      }
    }
    ops.charge_ops[k].resize(d, d);
    ops.charge_ops[k].setFromTriplets(trip.begin(), trip.end());
  }

  ops.hamiltonian = Eigen::MatrixXcd::Zero(d, d);
  for (Eigen::Index b = 0; b < d; ++b) ops.hamiltonian(b, b) = ops.bare_energy(b);
  for (std::size_t i = 0; i < nn; ++i)
    for (std::size_t j = i + 1; j < nn; ++j) {
      const double jij = config.coupling(subsystem[i], subsystem[j]);
      if (jij == 0.0) continue;
      const SparseC prod = ops.charge_ops[i] * ops.charge_ops[j];
      for (int o = 0; o < prod.outerSize(); ++o)
        for (SparseC::InnerIterator it(prod, o); it; ++it) ops.hamiltonian(it.row(), it.col()) += jij * it.value();
    }
  // Remove rounding asymmetry so the matrix is Hermitian to machine precision.
  ops.hamiltonian = 0.5 * (ops.hamiltonian + ops.hamiltonian.adjoint()).eval();
  return ops;
}

EigenSystem diagonalize(const OperatorSet& ops, int n_states) {
  EigenSystem e;
  const int d = static_cast<int>(ops.dimension());
  if (n_states <= 0 || n_states > d) n_states = d;
  detail::hermitian_lowest(ops.hamiltonian, n_states, e.energies, e.vectors);
  return e;
}

int count_bare_states_below(const OperatorSet& ops, double cutoff) {
  int count = 0;
  for (Eigen::Index b = 0; b < ops.dimension(); ++b)
    if (ops.bare_energy(b) <= cutoff) ++count;
  return count;
}

std::string level_letter(int level) {
  if (level < 0 || level >= static_cast<int>(sizeof(kAlphabet) - 1)) throw ValidationError("level out of range");
  return std::string(1, kAlphabet[level]);
}

int level_from_letter(char c) {
  for (int i = 0; kAlphabet[i]; ++i)
    if (kAlphabet[i] == c) return i;
  throw ValidationError(std::string("unknown level letter '") + c + "'");
}

std::string bare_label(const OperatorSet& ops, Eigen::Index idx) {
  std::string s;
  for (int d : ops.digits(idx)) s += level_letter(d);
  return s;
}

int excitation_count(const std::string& label) {
  int n = 0;
  for (char c : label) n += level_from_letter(c);
  return n;
}

bool SpectrumResult::has(const std::string& label) const {
  return std::find(labels.begin(), labels.end(), label) != labels.end();
}

std::size_t SpectrumResult::index(const std::string& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw ValidationError("label '" + label + "' not present in spectrum");
  return static_cast<std::size_t>(it - labels.begin());
}

std::size_t SpectrumResult::resolved_index(const std::string& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw AmbiguityError("label '" + label + "' not assigned in the kept spectrum");
  const auto i = static_cast<std::size_t>(it - labels.begin());
  if (ambiguous[i])
    throw AmbiguityError("state '" + label + "' is ambiguous (overlap " + std::to_string(overlaps[i]) + ")");
  return i;
}

namespace {

// Greedy bijection between columns (states) and rows (labels) of a weight matrix.
// Returns the chosen row per column.
std::vector<Eigen::Index> greedy_assign(const Eigen::MatrixXd& w) {
  const Eigen::Index rows = w.rows(), cols = w.cols();
  constexpr int kTop = 8;
  std::vector<std::tuple<double, Eigen::Index, Eigen::Index>> cand;
  for (Eigen::Index c = 0; c < cols; ++c) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(rows));
    std::iota(idx.begin(), idx.end(), 0);
    const auto top = std::min<Eigen::Index>(kTop, rows);
    std::partial_sort(idx.begin(), idx.begin() + top, idx.end(),
                      [&](Eigen::Index a, Eigen::Index b) { return w(a, c) > w(b, c) || (w(a, c) == w(b, c) && a < b); });
    for (Eigen::Index t = 0; t < top; ++t) cand.emplace_back(w(idx[t], c), c, idx[t]);
  }
  std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
    return std::get<2>(a) < std::get<2>(b);
  });
  std::vector<Eigen::Index> choice(static_cast<std::size_t>(cols), -1);
  std::vector<char> used(static_cast<std::size_t>(rows), 0);
  for (const auto& [v, c, r] : cand) {
    if (choice[c] >= 0 || used[r]) continue;
    choice[c] = r;
    used[r] = 1;
  }
  for (Eigen::Index c = 0; c < cols; ++c) {
    if (choice[c] >= 0) continue;
    Eigen::Index best = -1;
    for (Eigen::Index r = 0; r < rows; ++r)
      if (!used[r] && (best < 0 || w(r, c) > w(best, c))) best = r;
    choice[c] = best;
    used[best] = 1;
  }
  return choice;
}

}  // namespace

SpectrumResult label_states(const OperatorSet& ops, const EigenSystem& eig) {
  SpectrumResult s;
  s.nodes = ops.nodes;
  s.flux_point = ops.flux;
  s.energies = eig.energies;
  const Eigen::MatrixXd w = eig.vectors.cwiseAbs2();
  const auto choice = greedy_assign(w);
  for (Eigen::Index c = 0; c < eig.vectors.cols(); ++c) {
    const double ov = w(choice[c], c);
    s.labels.push_back(bare_label(ops, choice[c]));
    s.overlaps.push_back(ov);
    s.ambiguous.push_back(ov <= kAmbiguityThreshold);
  }
  return s;
}

Eigen::MatrixXcd dressed_overlap(const OperatorSet& prev_ops, const EigenSystem& prev_eig, const OperatorSet& ops,
                                 const EigenSystem& eig) {
  if (prev_ops.nodes != ops.nodes || prev_ops.levels != ops.levels)
    throw ValidationError("dressed_overlap: subsystems differ");
  std::vector<Eigen::MatrixXd> factors;
  for (std::size_t k = 0; k < ops.nodes.size(); ++k)
    factors.push_back(prev_ops.elements[k].vectors.transpose() * ops.elements[k].vectors);
  return prev_eig.vectors.adjoint() * apply_kron(factors, eig.vectors);
}

SpectrumResult track_labels(const OperatorSet& prev_ops, const EigenSystem& prev_eig, const SpectrumResult& prev,
                            const OperatorSet& ops, const EigenSystem& eig) {
  const Eigen::MatrixXd w = dressed_overlap(prev_ops, prev_eig, ops, eig).cwiseAbs2();
  SpectrumResult s;
  s.nodes = ops.nodes;
  s.flux_point = ops.flux;
  s.energies = eig.energies;
  const auto choice = greedy_assign(w);
  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    const double ov = w(choice[c], c);
    s.labels.push_back(prev.labels[static_cast<std::size_t>(choice[c])]);
    s.overlaps.push_back(ov);
    s.ambiguous.push_back(ov <= kAmbiguityThreshold);
  }
  return s;
}

Eigen::MatrixXcd dressed_operator(const EigenSystem& eig, const SparseC& op) {
  return eig.vectors.adjoint() * (op * eig.vectors);
}

Eigen::MatrixXcd Subsystem::dressed_charge(const std::string& node) const {
  return dressed_operator(eig, ops.charge_ops[ops.node_index(node)]);
}

Subsystem solve_subsystem(const DeviceConfig& config, const std::vector<std::string>& subsystem,
                          const LevelMap& levels, int n_states) {
  Subsystem s;
  s.ops = build_composite(config, subsystem, levels);
  s.eig = diagonalize(s.ops, n_states);
  s.spectrum = label_states(s.ops, s.eig);
  return s;
}

nlohmann::json to_json(const SpectrumResult& s) {
  nlohmann::json j;
  j["nodes"] = s.nodes;
  j["flux_point"] = s.flux_point;
  j["energy_unit"] = "GHz";
  j["states"] = nlohmann::json::array();
  for (std::size_t i = 0; i < s.size(); ++i)
    j["states"].push_back({{"label", s.labels[i]},
                           {"energy", s.energies(static_cast<Eigen::Index>(i))},
                           {"overlap", s.overlaps[i]},
                           {"ambiguous", static_cast<bool>(s.ambiguous[i])}});
  return j;
}

}  // namespace ftf
