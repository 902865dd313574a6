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

#include "ftf/circuit.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <random>

#include "ftf/errors.hpp"

namespace ftf {

using cd = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::Matrix2cd rot_x(double theta) {
  Eigen::Matrix2cd m;
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  m << c, cd(0, -s), cd(0, -s), c;
  return m;
}

Eigen::Matrix2cd rot_z(double theta) {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(0, 0) = std::polar(1.0, -theta / 2);
  m(1, 1) = std::polar(1.0, theta / 2);
  return m;
}

using Index = std::uint64_t;

Index mask_of(int n, int q) { return Index{1} << (n - 1 - q); }

double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void apply_1q(Eigen::VectorXcd& v, const Eigen::Matrix2cd& u, Index m) {
  const auto dim = static_cast<Index>(v.size());
  for (Index i = 0; i < dim; ++i) {
    if (i & m) continue;
    const cd a = v(static_cast<Eigen::Index>(i)), b = v(static_cast<Eigen::Index>(i | m));
    v(static_cast<Eigen::Index>(i)) = u(0, 0) * a + u(0, 1) * b;
    v(static_cast<Eigen::Index>(i | m)) = u(1, 0) * a + u(1, 1) * b;
  }
}

void apply_1q(Eigen::MatrixXcd& rho, const Eigen::Matrix2cd& u, Index m) {
  const auto dim = static_cast<Index>(rho.rows());
  for (Index j = 0; j < dim; ++j) {
    cd* col = rho.col(static_cast<Eigen::Index>(j)).data();
    for (Index i = 0; i < dim; ++i) {
      if (i & m) continue;
      const cd a = col[i], b = col[i | m];
      col[i] = u(0, 0) * a + u(0, 1) * b;
      col[i | m] = u(1, 0) * a + u(1, 1) * b;
    }
  }
  const Eigen::Matrix2cd w = u.conjugate();
  for (Index j = 0; j < dim; ++j) {
    if (j & m) continue;
    cd* c0 = rho.col(static_cast<Eigen::Index>(j)).data();
    cd* c1 = rho.col(static_cast<Eigen::Index>(j | m)).data();
    for (Index i = 0; i < dim; ++i) {
      const cd a = c0[i], b = c1[i];
      c0[i] = a * w(0, 0) + b * w(0, 1);
      c1[i] = a * w(1, 0) + b * w(1, 1);
    }
  }
}

Eigen::VectorXcd cz_phases(int n, int a, int b) {
  const Index dim = Index{1} << n, ma = mask_of(n, a), mb = mask_of(n, b);
  Eigen::VectorXcd d = Eigen::VectorXcd::Ones(static_cast<Eigen::Index>(dim));
  for (Index i = 0; i < dim; ++i)
    if ((i & ma) && (i & mb)) d(static_cast<Eigen::Index>(i)) = -1.0;
  return d;
}

void apply_gate(Eigen::VectorXcd& v, const Gate& g, int n) {
  if (g.kind == GateKind::CZ)
    v = v.cwiseProduct(cz_phases(n, g.targets[0], g.targets[1]));
  else
    apply_1q(v, g.matrix(), mask_of(n, g.targets[0]));
}

void apply_gate(Eigen::MatrixXcd& rho, const Gate& g, int n) {
  if (g.kind == GateKind::CZ) {
    const Eigen::VectorXcd d = cz_phases(n, g.targets[0], g.targets[1]);
    rho = d.asDiagonal() * rho * d.conjugate().asDiagonal();
  } else {
    apply_1q(rho, g.matrix(), mask_of(n, g.targets[0]));
  }
}

// rho -> (1 - p) rho + p (I/d on the masked qubits) x Tr_masked(rho).
void depolarize(Eigen::MatrixXcd& rho, double p, const std::vector<Index>& masks) {
  if (p <= 0) return;
  Index all = 0;
  for (auto m : masks) all |= m;
  std::vector<Index> subsets{0};
  for (auto m : masks) {
    const auto sz = subsets.size();
    for (std::size_t k = 0; k < sz; ++k) subsets.push_back(subsets[k] | m);
  }
  const double d = static_cast<double>(subsets.size());
  const auto dim = static_cast<Index>(rho.rows());
  for (Index j = 0; j < dim; ++j) {
    cd* col = rho.col(static_cast<Eigen::Index>(j)).data();
    for (Index i = 0; i < dim; ++i)
      if ((i ^ j) & all) col[i] *= (1.0 - p);
  }
  for (Index j0 = 0; j0 < dim; ++j0) {
    if (j0 & all) continue;
    for (Index i0 = 0; i0 < dim; ++i0) {
      if (i0 & all) continue;
      cd s = 0;
      for (auto k : subsets) s += rho(static_cast<Eigen::Index>(i0 | k), static_cast<Eigen::Index>(j0 | k));
      for (auto k : subsets) {
        cd& e = rho(static_cast<Eigen::Index>(i0 | k), static_cast<Eigen::Index>(j0 | k));
        e = (1.0 - p) * e + p * s / d;
      }
    }
  }
}

void damp(Eigen::MatrixXcd& rho, double gamma, double lambda, Index m) {
  const auto dim = static_cast<Index>(rho.rows());
  const double coh = std::sqrt((1.0 - gamma) * (1.0 - lambda));
  for (Index j = 0; j < dim; ++j) {
    if (j & m) continue;
    for (Index i = 0; i < dim; ++i) {
      if (i & m) continue;
      auto e = [&](Index a, Index b) -> cd& { return rho(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)); };
      e(i, j) += gamma * e(i | m, j | m);
      e(i | m, j | m) *= (1.0 - gamma);
      e(i, j | m) *= coh;
      e(i | m, j) *= coh;
    }
  }
}

void check_prob(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(std::string(what) + " must lie in [0, 1]");
}

Eigen::VectorXd parity_signs(int n) {
  Eigen::VectorXd s(Eigen::Index{1} << n);
  for (Eigen::Index x = 0; x < s.size(); ++x) s(x) = (std::popcount(static_cast<Index>(x)) & 1) ? -1.0 : 1.0;
  return s;
}

}  // namespace

Eigen::Matrix2cd Gate::matrix() const {
  switch (kind) {
    case GateKind::X90:
      return rot_x(kPi / 2);
    case GateKind::X180:
      return rot_x(kPi);
    case GateKind::VirtualZ:
    case GateKind::Rz:
      return rot_z(angle);
    case GateKind::Hadamard:
      return rot_z(kPi / 2) * rot_x(kPi / 2) * rot_z(kPi / 2);
    case GateKind::CZ:
      break;
  }
  throw ValidationError("CZ has no single-qubit matrix");
}

std::string Gate::name() const {
  switch (kind) {
    case GateKind::X90:
      return "x90";
    case GateKind::X180:
      return "x180";
    case GateKind::VirtualZ:
      return "vz";
    case GateKind::Rz:
      return "rz";
    case GateKind::Hadamard:
      return "h";
    case GateKind::CZ:
      return "cz";
  }
  return "?";
}

void Circuit::append(const Gate& g) {
  std::size_t slot = 0;
  for (std::size_t l = layers.size(); l-- > 0;) {
    bool touches = false;
    for (const auto& o : layers[l])
      for (int t : o.targets)
        if (std::find(g.targets.begin(), g.targets.end(), t) != g.targets.end()) touches = true;
    if (touches) {
      slot = l + 1;
      break;
    }
  }
  if (slot == layers.size()) layers.emplace_back();
  layers[slot].push_back(g);
}

void Circuit::add_layer(std::vector<Gate> layer) { layers.push_back(std::move(layer)); }

void Circuit::extend(const Circuit& other) {
  if (other.qubits != qubits) throw ValidationError("circuit qubit counts differ");
  layers.insert(layers.end(), other.layers.begin(), other.layers.end());
}

void Circuit::validate() const {
  if (qubits < 1) throw ValidationError("circuit needs at least one qubit");
  for (const auto& layer : layers) {
    std::vector<bool> used(static_cast<std::size_t>(qubits), false);
    for (const auto& g : layer) {
      if (g.targets.size() != (g.two_qubit() ? 2U : 1U)) throw ValidationError("wrong target count for " + g.name());
      if (!std::isfinite(g.angle)) throw ValidationError("gate angle must be finite");
      for (int t : g.targets) {
        if (t < 0 || t >= qubits) throw ValidationError("gate target out of range");
        if (used[static_cast<std::size_t>(t)]) throw ValidationError("gates within a layer must act on disjoint qubits");
        used[static_cast<std::size_t>(t)] = true;
      }
      if (g.two_qubit() && std::abs(g.targets[0] - g.targets[1]) != 1)
        throw ValidationError("CZ targets must be chain neighbours");
    }
  }
}

int Circuit::cz_layers() const {
  int c = 0;
  for (const auto& layer : layers)
    if (std::any_of(layer.begin(), layer.end(), [](const Gate& g) { return g.two_qubit(); })) ++c;
  return c;
}

std::size_t Circuit::gate_count(bool noisy_only) const {
  std::size_t c = 0;
  for (const auto& layer : layers)
    for (const auto& g : layer)
      if (!noisy_only || g.noisy()) ++c;
  return c;
}

nlohmann::json Circuit::to_json() const {
  nlohmann::json j{{"qubits", qubits}, {"layers", nlohmann::json::array()}};
  for (const auto& layer : layers) {
    nlohmann::json l = nlohmann::json::array();
    for (const auto& g : layer) {
      nlohmann::json jg{{"gate", g.name()}, {"targets", g.targets}};
      if (g.kind == GateKind::VirtualZ || g.kind == GateKind::Rz) jg["angle"] = g.angle;
      l.push_back(jg);
    }
    j["layers"].push_back(l);
  }
  return j;
}

void NoiseModel::validate(int qubits) const {
  check_prob(single_qubit, "single-qubit depolarizing probability");
  check_prob(two_qubit, "two-qubit depolarizing probability");
  check_prob(amplitude_damping, "amplitude damping");
  check_prob(phase_damping, "phase damping");
  if (!init_excited.empty() && static_cast<int>(init_excited.size()) != qubits)
    throw ValidationError("initialization error needs one probability per qubit");
  for (double e : init_excited) check_prob(e, "initialization excited probability");
}

bool NoiseModel::init_noise() const {
  return std::any_of(init_excited.begin(), init_excited.end(), [](double e) { return e > 0; });
}

NoiseModel NoiseModel::from_fidelities(double f_sq, double f_cz, double init, int qubits) {
  if (!(f_sq >= 0.5 && f_sq <= 1.0) || !(f_cz >= 0.25 && f_cz <= 1.0))
    throw ValidationError("gate fidelities outside the depolarizing range");
  NoiseModel m;
  m.single_qubit = 2.0 * (1.0 - f_sq);
  m.two_qubit = 4.0 / 3.0 * (1.0 - f_cz);
  if (init > 0) {
    if (qubits < 1) throw ValidationError("initialization error needs a qubit count");
    m.init_excited.assign(static_cast<std::size_t>(qubits), init);
  }
  m.validate(qubits);
  return m;
}

NoiseModel NoiseModel::from_config(const GateNoiseParams& p, int qubits) {
  NoiseModel m;
  m.single_qubit = p.single_qubit;
  m.two_qubit = p.cz;
  if (p.init_excited > 0) m.init_excited.assign(static_cast<std::size_t>(qubits), p.init_excited);
  m.validate(qubits);
  return m;
}

Eigen::VectorXcd run_statevector(const Circuit& c, std::optional<std::uint64_t> initial_basis_state) {
  c.validate();
  if (c.qubits > kMaxStatevectorQubits) throw DimensionError("statevector mode is limited to 20 qubits");
  const Index dim = Index{1} << c.qubits;
  const Index init = initial_basis_state.value_or(0);
  if (init >= dim) throw ValidationError("initial basis state out of range");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(init)) = 1.0;
  for (const auto& layer : c.layers)
    for (const auto& g : layer) apply_gate(v, g, c.qubits);
  return v;
}

Eigen::MatrixXcd run_density(const Circuit& c, const NoiseModel& noise, std::optional<std::uint64_t> initial_basis_state) {
  c.validate();
  noise.validate(c.qubits);
  if (c.qubits > kMaxDensityQubits) throw DimensionError("density-matrix mode is limited to 12 qubits");
  const int n = c.qubits;
  const Index dim = Index{1} << n;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  if (initial_basis_state) {
    if (*initial_basis_state >= dim) throw ValidationError("initial basis state out of range");
    rho(static_cast<Eigen::Index>(*initial_basis_state), static_cast<Eigen::Index>(*initial_basis_state)) = 1.0;
  } else {
    for (Index i = 0; i < dim; ++i) {
      double p = 1.0;
      for (int q = 0; q < n; ++q) p *= (i & mask_of(n, q)) ? noise.init(q) : 1.0 - noise.init(q);
      rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = p;
    }
  }
  for (const auto& layer : c.layers) {
    for (const auto& g : layer) {
      apply_gate(rho, g, n);
      if (!g.noisy()) continue;
      if (g.two_qubit())
        depolarize(rho, noise.two_qubit, {mask_of(n, g.targets[0]), mask_of(n, g.targets[1])});
      else
        depolarize(rho, noise.single_qubit, {mask_of(n, g.targets[0])});
    }
    if (noise.amplitude_damping > 0 || noise.phase_damping > 0)
      for (int q = 0; q < n; ++q) damp(rho, noise.amplitude_damping, noise.phase_damping, mask_of(n, q));
  }
  return rho;
}

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Eigen::VectorXd probabilities(const Eigen::VectorXcd& psi) { return psi.cwiseAbs2(); }

Eigen::VectorXd probabilities(const Eigen::MatrixXcd& rho) {
  Eigen::VectorXd p = rho.diagonal().real().cwiseMax(0.0);
  return p / p.sum();
}

namespace {

std::vector<double> cumulative(const Eigen::VectorXd& p) {
  std::vector<double> c(static_cast<std::size_t>(p.size()));
  double s = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) c[static_cast<std::size_t>(i)] = (s += p(i));
  for (auto& v : c) v /= s;
  c.back() = 1.0;
  return c;
}

std::uint64_t draw(const std::vector<double>& cdf, std::mt19937_64& rng) {
  const double u = uniform(rng);
  return static_cast<std::uint64_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
}

Eigen::VectorXd final_probabilities(const Circuit& c, const NoiseModel& noise, std::optional<std::uint64_t> init) {
  if (!noise.gate_noise() && (init || !noise.init_noise())) return probabilities(run_statevector(c, init));
  return probabilities(run_density(c, noise, init));
}

}  // namespace

MeasurementRecord simulate(const Circuit& c, const NoiseModel& noise, std::size_t shots, std::uint64_t seed,
                           bool record_m1) {
  c.validate();
  noise.validate(c.qubits);
  if (shots == 0) throw ValidationError("shots must be positive");
  MeasurementRecord r;
  r.qubits = c.qubits;
  r.seed = seed;
  r.m2.reserve(shots);
  std::mt19937_64 rng(seed);
  if (!record_m1 || !noise.init_noise()) {
    const auto cdf = cumulative(final_probabilities(c, noise, std::nullopt));
    for (std::size_t s = 0; s < shots; ++s) r.m2.push_back(draw(cdf, rng));
    if (record_m1) r.m1.assign(shots, 0);
    return r;
  }
  r.m1.reserve(shots);
  std::map<std::uint64_t, std::vector<double>> cache;
  const int n = c.qubits;
  for (std::size_t s = 0; s < shots; ++s) {
    std::uint64_t config = 0;
    for (int q = 0; q < n; ++q)
      if (uniform(rng) < noise.init(q)) config |= mask_of(n, q);
    auto it = cache.find(config);
    if (it == cache.end()) it = cache.emplace(config, cumulative(final_probabilities(c, noise, config))).first;
    r.m1.push_back(config);
    r.m2.push_back(draw(it->second, rng));
  }
  return r;
}

int ghz_central_qubit(int n, int offset) { return offset + (n - 1) / 2; }

Circuit compile_ghz(int n, int chain, int offset) {
  if (chain == 0) chain = n;
  if (n < 2) throw ValidationError("GHZ needs at least two qubits");
  if (offset < 0 || offset + n > chain) throw ValidationError("chain too short for the requested GHZ state");
  Circuit c(chain);
  // One step of parallel CNOTs: Hadamard on the targets, the CZ layer, then the post-CZ Hadamard
  // as Y90 (VZ X90 VZ) followed by X180, so each CNOT costs three rotations.
  auto step = [&](const std::vector<std::pair<int, int>>& pairs) {
    std::vector<Gate> pre, cz, l1, l2, l3, l4;
    for (auto [ctl, tgt] : pairs) {
      pre.push_back(Gate::hadamard(tgt));
      cz.push_back(Gate::cz(ctl, tgt));
      l1.push_back(Gate::vz(tgt, -kPi / 2));
      l2.push_back(Gate::x90(tgt));
      l3.push_back(Gate::vz(tgt, kPi / 2));
      l4.push_back(Gate::x180(tgt));
    }
    for (auto* l : {&pre, &cz, &l1, &l2, &l3, &l4}) c.add_layer(std::move(*l));
  };
  const int centre = ghz_central_qubit(n, offset);
  // The centre's own Hadamard must precede its first CZ, so it gets a layer of its own.
  c.add_layer({Gate::hadamard(centre)});
  step({{centre, centre + 1}});
  int left = centre, right = centre + 1;
  const int last = offset + n - 1;
  while (left > offset || right < last) {
    std::vector<std::pair<int, int>> pairs;
    if (left > offset) {
      pairs.emplace_back(left, left - 1);
      --left;
    }
    if (right < last) {
      pairs.emplace_back(right, right + 1);
      ++right;
    }
    step(pairs);
  }
  c.validate();
  return c;
}

nlohmann::json ParityResult::to_json() const {
  nlohmann::json h = nlohmann::json::array();
  for (const auto& x : harmonics) h.push_back({{"order", x.order}, {"amplitude", x.amplitude}, {"phase", x.phase}});
  return {{"harmonics", h}, {"dominant_order", dominant_order}, {"a_n", a_n}, {"rms_residual", rms_residual}};
}

std::string ParityResult::to_csv() const {
  std::string s = "phi,parity\n";
  char buf[64];
  for (std::size_t i = 0; i < phases.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.15g,%.15g\n", phases[i], parity[i]);
    s += buf;
  }
  return s;
}

ParityResult fit_parity(const std::vector<double>& phases, const std::vector<double>& parity, int n) {
  if (n < 1) throw ValidationError("harmonic order must be >= 1");
  if (phases.size() != parity.size()) throw ValidationError("phase and parity lengths differ");
  if (phases.size() < static_cast<std::size_t>(4 * n))
    throw ValidationError("undersampled grid: need at least 4n = " + std::to_string(4 * n) + " points");
  const auto [lo, hi] = std::minmax_element(phases.begin(), phases.end());
  if (*hi - *lo < 2.0 * kPi / n * (1.0 - 1e-9)) throw ValidationError("undersampled grid: less than one period of order n");
  for (double p : parity)
    if (!(std::abs(p) <= 1.0 + 1e-9)) throw ValidationError("parity values must lie in [-1, 1]");
  const auto rows = static_cast<Eigen::Index>(phases.size());
  Eigen::MatrixXd a(rows, 2 * n + 1);
  Eigen::VectorXd y(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double phi = phases[static_cast<std::size_t>(i)];
    a(i, 0) = 1.0;
    for (int m = 1; m <= n; ++m) {
      a(i, 2 * m - 1) = std::cos(m * phi);
      a(i, 2 * m) = std::sin(m * phi);
    }
    y(i) = parity[static_cast<std::size_t>(i)];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < 2 * n + 1) throw ValidationError("undersampled grid: harmonics are aliased");
  const Eigen::VectorXd x = qr.solve(y);
  ParityResult r;
  r.phases = phases;
  r.parity = parity;
  r.harmonics.push_back({0, std::abs(x(0)), x(0) < 0 ? kPi : 0.0});
  for (int m = 1; m <= n; ++m) {
    const double c = x(2 * m - 1), s = x(2 * m);
    r.harmonics.push_back({m, std::hypot(c, s), std::atan2(-s, c)});
  }
  r.dominant_order = 1;
  for (int m = 2; m <= n; ++m)
    if (r.amplitude(m) > r.amplitude(r.dominant_order)) r.dominant_order = m;
  r.a_n = r.amplitude(n);
  r.rms_residual = std::sqrt((a * x - y).squaredNorm() / double(rows));
  return r;
}

Circuit parity_analysis(int n, double phi) {
  Circuit c(n);
  std::vector<Gate> rot, x;
  for (int q = 0; q < n; ++q) {
    rot.push_back(Gate::rz(q, phi));
    x.push_back(Gate::x90(q));
  }
  c.add_layer(rot);
  c.add_layer(x);
  return c;
}

std::vector<double> phase_grid(int n, int points) {
  if (points == 0) points = std::max(8 * n, 16);
  if (points < 4 * n) throw ValidationError("phase grid needs at least 4n points");
  std::vector<double> g;
  for (int k = 0; k < points; ++k) g.push_back(2.0 * kPi * k / points);
  return g;
}

ParityResult parity_experiment(const Circuit& prep, const NoiseModel& noise, const std::vector<double>& phases,
                               bool noisy_analysis) {
  const int n = prep.qubits;
  const Eigen::VectorXd signs = parity_signs(n);
  std::vector<double> values;
  NoiseModel analysis = noisy_analysis ? noise : NoiseModel{};
  analysis.init_excited.clear();
  if (!noise.gate_noise() && !noise.init_noise()) {
    const Eigen::VectorXcd psi = run_statevector(prep);
    for (double phi : phases) {
      Eigen::VectorXcd v = psi;
      for (const auto& layer : parity_analysis(n, phi).layers)
        for (const auto& g : layer) apply_gate(v, g, n);
      values.push_back(signs.dot(probabilities(v)));
    }
  } else {
    const Eigen::MatrixXcd rho = run_density(prep, noise);
    for (double phi : phases) {
      Eigen::MatrixXcd r = rho;
      for (const auto& layer : parity_analysis(n, phi).layers)
        for (const auto& g : layer) {
          apply_gate(r, g, n);
          if (g.noisy()) depolarize(r, analysis.single_qubit, {mask_of(n, g.targets[0])});
        }
      values.push_back(std::clamp(signs.dot(probabilities(r)), -1.0, 1.0));
    }
  }
  return fit_parity(phases, values, n);
}

ParityResult parity_experiment_sampled(const Circuit& prep, const NoiseModel& noise,
                                       const std::vector<double>& phases, std::size_t shots, std::uint64_t seed,
                                       bool preselect) {
  const int n = prep.qubits;
  std::vector<double> values;
  for (std::size_t k = 0; k < phases.size(); ++k) {
    Circuit c = prep;
    c.extend(parity_analysis(n, phases[k]));
    MeasurementRecord r = simulate(c, noise, shots, split_seed(seed, k), preselect);
    if (preselect) {
      MeasurementRecord kept;
      kept.qubits = n;
      for (std::size_t s = 0; s < r.shots(); ++s)
        if (r.m1[s] == 0) kept.m2.push_back(r.m2[s]);
      if (kept.m2.empty()) throw NumericalError("pre-selection kept no shots");
      r = kept;
    }
    values.push_back(r.parity());
  }
  return fit_parity(phases, values, n);
}

double ghz_fidelity(double p_g, double p_e, double a_n) {
  check_prob(p_g, "P_g");
  check_prob(p_e, "P_e");
  check_prob(a_n, "A_N");
  return std::clamp(0.5 * (p_g + p_e + a_n), 0.0, 1.0);
}

double theory_fidelity(int n, const std::vector<double>& sq, const std::vector<double>& cz, int central) {
  if (n < 2) throw ValidationError("theory fidelity needs n >= 2");
  if (sq.size() != static_cast<std::size_t>(n) || cz.size() != static_cast<std::size_t>(n - 1))
    throw ValidationError("need n single-qubit and n-1 CZ fidelities");
  if (central < 0) central = ghz_central_qubit(n);
  if (central >= n) throw ValidationError("central qubit out of range");
  for (double f : sq) check_prob(f, "fidelity");
  for (double f : cz) check_prob(f, "fidelity");
  double f = sq[static_cast<std::size_t>(central)];
  for (int i = 0; i < n; ++i)
    if (i != central) f *= std::pow(sq[static_cast<std::size_t>(i)], 3);
  for (double x : cz) f *= x;
  return f;
}

Eigen::VectorXcd ghz_state(int n) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(Eigen::Index{1} << n);
  v(0) = v(v.size() - 1) = std::sqrt(0.5);
  return v;
}

double state_fidelity(const Eigen::MatrixXcd& rho, const Eigen::VectorXcd& psi) {
  if (rho.rows() != psi.size()) throw DimensionError("state dimensions differ");
  return (psi.adjoint() * rho * psi)(0, 0).real();
}

Eigen::MatrixXcd project_to_density(const Eigen::MatrixXcd& m) {
  const Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  Eigen::VectorXd v = es.eigenvalues();
  // Euclidean projection of the spectrum onto the probability simplex.
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.rbegin(), u.rend());
  double cum = 0, theta = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cum += u[k];
    const double t = (cum - 1.0) / double(k + 1);
    if (u[k] - t > 0) theta = t;
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = std::max(v(i) - theta, 0.0);
  return es.eigenvectors() * v.asDiagonal() * es.eigenvectors().adjoint();
}

Eigen::MatrixXcd state_tomography(const Circuit& prep, const NoiseModel& noise, std::size_t shots, std::uint64_t seed) {
  const int n = prep.qubits;
  if (n > 5) throw DimensionError("tomography is limited to 5 qubits");
  const Eigen::MatrixXcd rho = run_density(prep, noise);
  const Index dim = Index{1} << n;
  Eigen::Matrix2cd h, sdg;
  h << 1, 1, 1, -1;
  h /= std::sqrt(2.0);
  sdg << 1, 0, 0, cd(0, -1);
  const std::array<Eigen::Matrix2cd, 3> to_z{h, h * sdg, Eigen::Matrix2cd::Identity()};  // X, Y, Z
  std::array<Eigen::Matrix2cd, 4> pauli;
  pauli[0] = Eigen::Matrix2cd::Identity();
  pauli[1] << 0, 1, 1, 0;
  pauli[2] << 0, cd(0, -1), cd(0, 1), 0;
  pauli[3] << 1, 0, 0, -1;

  int settings = 1;
  for (int q = 0; q < n; ++q) settings *= 3;
  std::vector<Eigen::VectorXd> probs(static_cast<std::size_t>(settings));
  for (int s = 0; s < settings; ++s) {
    Eigen::MatrixXcd r = rho;
    int code = s;
    for (int q = n - 1; q >= 0; --q, code /= 3) apply_1q(r, to_z[static_cast<std::size_t>(code % 3)], mask_of(n, q));
    Eigen::VectorXd p = probabilities(r);
    if (shots > 0) {
      std::mt19937_64 rng(split_seed(seed, static_cast<std::uint64_t>(s)));
      const auto cdf = cumulative(p);
      Eigen::VectorXd c = Eigen::VectorXd::Zero(p.size());
      for (std::size_t k = 0; k < shots; ++k) c(static_cast<Eigen::Index>(draw(cdf, rng))) += 1.0;
      p = c / double(shots);
    }
    probs[static_cast<std::size_t>(s)] = p;
  }
  Eigen::MatrixXcd est = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  int strings = 1;
  for (int q = 0; q < n; ++q) strings *= 4;
  for (int ps = 0; ps < strings; ++ps) {
    std::vector<int> code(static_cast<std::size_t>(n));
    int x = ps, setting = 0;
    for (int q = n - 1; q >= 0; --q, x /= 4) code[static_cast<std::size_t>(q)] = x % 4;
    Index support = 0;
    for (int q = 0; q < n; ++q) {
      const int c = code[static_cast<std::size_t>(q)];
      setting = setting * 3 + (c == 0 ? 2 : c - 1);
      if (c) support |= mask_of(n, q);
    }
    const auto& p = probs[static_cast<std::size_t>(setting)];
    double expect = 0;
    for (Index o = 0; o < dim; ++o)
      expect += ((std::popcount(o & support) & 1) ? -1.0 : 1.0) * p(static_cast<Eigen::Index>(o));
    Eigen::MatrixXcd op = pauli[static_cast<std::size_t>(code[0])];
    for (int q = 1; q < n; ++q) {
      const auto& b = pauli[static_cast<std::size_t>(code[static_cast<std::size_t>(q)])];
      Eigen::MatrixXcd k(op.rows() * 2, op.cols() * 2);
      for (Eigen::Index i = 0; i < op.rows(); ++i)
        for (Eigen::Index j = 0; j < op.cols(); ++j) k.block(2 * i, 2 * j, 2, 2) = op(i, j) * b;
      op = std::move(k);
    }
    est += expect * op;
  }
  return project_to_density(est / double(dim));
}

}  // namespace ftf
