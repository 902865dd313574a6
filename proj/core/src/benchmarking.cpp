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

#include "ftf/benchmarking.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "ftf/errors.hpp"

namespace ftf {

using cd = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

// Global phase removed by making the first significant entry real and positive.
std::string phase_key(const Eigen::MatrixXcd& u) {
  cd ref = 0;
  for (Eigen::Index j = 0; j < u.cols() && ref == cd(0); ++j)
    for (Eigen::Index i = 0; i < u.rows(); ++i)
      if (std::abs(u(i, j)) > 1e-6) {
        ref = std::conj(u(i, j)) / std::abs(u(i, j));
        break;
      }
  std::ostringstream os;
  for (Eigen::Index j = 0; j < u.cols(); ++j)
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      const cd v = u(i, j) * ref;
      os << std::llround(v.real() * 1e6) << ',' << std::llround(v.imag() * 1e6) << ';';
    }
  return os.str();
}

struct Generator {
  Eigen::MatrixXcd matrix;
  int kind;  // 0 H, 1 S, 2 CZ
  int qubit;
};

Eigen::MatrixXcd embed(const Eigen::Matrix2cd& g, int n, int q) {
  if (n == 1) return g;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  const Eigen::Matrix2cd& a = q == 0 ? g : id;
  const Eigen::Matrix2cd& b = q == 0 ? id : g;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m.block(2 * i, 2 * j, 2, 2) = a(i, j) * b;
  return m;
}

}  // namespace

CliffordGroup::CliffordGroup(int qubits) : qubits_(qubits) {
  Eigen::Matrix2cd h, s;
  h << 1, 1, 1, -1;
  h /= std::sqrt(2.0);
  s << 1, 0, 0, cd(0, 1);
  std::vector<Generator> gens;
  for (int q = 0; q < qubits; ++q) {
    gens.push_back({embed(h, qubits, q), 0, q});
    gens.push_back({embed(s, qubits, q), 1, q});
  }
  if (qubits == 2) gens.push_back({Eigen::Vector4cd(1, 1, 1, -1).asDiagonal().toDenseMatrix(), 2, 0});
  const auto dim = Eigen::Index{1} << qubits;
  std::map<std::string, std::size_t> seen;
  elements_.push_back(Eigen::MatrixXcd::Identity(dim, dim));
  words_.emplace_back();
  seen.emplace(phase_key(elements_[0]), 0);
  for (std::size_t head = 0; head < elements_.size(); ++head)
    for (std::size_t g = 0; g < gens.size(); ++g) {
      Eigen::MatrixXcd next = gens[g].matrix * elements_[head];
      auto key = phase_key(next);
      if (seen.count(key)) continue;
      seen.emplace(std::move(key), elements_.size());
      auto w = words_[head];
      w.push_back(static_cast<int>(g));
      elements_.push_back(std::move(next));
      words_.push_back(std::move(w));
    }
  keys_.assign(seen.begin(), seen.end());
}

const CliffordGroup& CliffordGroup::get(int qubits) {
  if (qubits != 1 && qubits != 2) throw ValidationError("Clifford tables exist for 1 and 2 qubits");
  static const CliffordGroup one(1);
  static const CliffordGroup two(2);
  return qubits == 1 ? one : two;
}

std::size_t CliffordGroup::index_of(const Eigen::MatrixXcd& u) const {
  const auto key = phase_key(u);
  auto it = std::lower_bound(keys_.begin(), keys_.end(), key,
                             [](const auto& a, const std::string& k) { return a.first < k; });
  if (it == keys_.end() || it->first != key) throw ValidationError("matrix is not a Clifford");
  return it->second;
}

std::size_t CliffordGroup::inverse(std::size_t i) const { return index_of(matrix(i).adjoint()); }

void CliffordGroup::append_to(Circuit& c, std::size_t i, int first_qubit) const {
  // Generator g = 2q + {0: H, 1: S}, 2 * qubits for CZ; words list the first gate first.
  for (int g : words_.at(i)) {
    const int q = first_qubit + (g / 2 < qubits_ ? g / 2 : 0);
    if (g == 2 * qubits_)
      c.append(Gate::cz(first_qubit, first_qubit + 1));
    else if (g % 2 == 0)
      c.append(Gate::hadamard(q));
    else
      c.append(Gate::vz(q, kPi / 2));
  }
}

std::vector<RbSequence> generate_rb(int qubits, const std::vector<int>& lengths, int per_length, std::uint64_t seed,
                                    std::optional<std::size_t> interleaved) {
  const auto& group = CliffordGroup::get(qubits);
  if (lengths.empty() || per_length < 1) throw ValidationError("need lengths and at least one sequence per length");
  if (interleaved && *interleaved >= group.size()) throw ValidationError("interleaved gate is not a Clifford index");
  std::vector<RbSequence> out;
  std::uint64_t task = 0;
  for (int len : lengths) {
    if (len < 0) throw ValidationError("sequence lengths must be >= 0");
    for (int k = 0; k < per_length; ++k, ++task) {
      std::mt19937_64 rng(split_seed(seed, task));
      RbSequence s;
      s.length = len;
      s.circuit = Circuit(qubits);
      const auto dim = Eigen::Index{1} << qubits;
      Eigen::MatrixXcd total = Eigen::MatrixXcd::Identity(dim, dim);
      auto add = [&](std::size_t c) {
        s.cliffords.push_back(c);
        group.append_to(s.circuit, c);
        total = group.matrix(c) * total;
      };
      for (int l = 0; l < len; ++l) {
        add(static_cast<std::size_t>(rng() % group.size()));
        if (interleaved) add(*interleaved);
      }
      add(group.index_of(total.adjoint()));
      out.push_back(std::move(s));
    }
  }
  return out;
}

double rb_survival(const RbSequence& s, const NoiseModel& noise, std::size_t shots, std::uint64_t seed) {
  if (shots == 0) {
    const Eigen::MatrixXcd rho = run_density(s.circuit, noise);
    return rho(0, 0).real();
  }
  const auto r = simulate(s.circuit, noise, shots, seed);
  return double(std::count(r.m2.begin(), r.m2.end(), 0ULL)) / double(shots);
}

double rb_survival_depolarizing(const RbSequence& s, int qubits, double p) {
  if (!(p >= 0 && p <= 1)) throw ValidationError("depolarizing probability must lie in [0, 1]");
  const auto& group = CliffordGroup::get(qubits);
  const auto dim = Eigen::Index{1} << qubits;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  rho(0, 0) = 1.0;
  const Eigen::MatrixXcd mixed = Eigen::MatrixXcd::Identity(dim, dim) / double(dim);
  for (auto c : s.cliffords) {
    const auto& u = group.matrix(c);
    rho = (1.0 - p) * (u * rho * u.adjoint()) + p * mixed;
  }
  return rho(0, 0).real();
}

nlohmann::json DecayCurveFit::to_json() const {
  return {{"fit", fit.to_json()},       {"p", p},
          {"p_error", p_error},         {"fidelity", fidelity},
          {"fidelity_error", fidelity_error}, {"dimension", dimension},
          {"offset_fixed", offset_fixed}};
}

namespace {

// Shot noise grows with length, so a single pooled residual variance understates the error on p. With
// repeated sequences at every length, use the sandwich covariance with the residual variance pooled per length.
void robust_covariance(const std::vector<double>& lengths, const std::vector<double>& survival, DecayCurveFit& r) {
  std::map<double, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < lengths.size(); ++i) groups[lengths[i]].push_back(i);
  for (const auto& [len, idx] : groups)
    if (idx.size() < 2) return;
  const int k = r.offset_fixed ? 2 : 3;
  const auto n = static_cast<Eigen::Index>(lengths.size());
  if (n <= k) return;
  const double a = r.fit.values(0), p = r.fit.values(1), b = r.fit.values(2);
  Eigen::MatrixXd j(n, k);
  Eigen::VectorXd var(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = lengths[static_cast<std::size_t>(i)];
    j(i, 0) = std::pow(p, x);
    j(i, 1) = a * x * std::pow(p, x - 1.0);
    if (k == 3) j(i, 2) = 1.0;
  }
  const Eigen::MatrixXd bread = (j.transpose() * j).inverse();
  // Residuals inflated by their leverage, which offsets the small-sample bias of the sandwich.
  for (const auto& [len, idx] : groups) {
    double ss = 0.0;
    for (auto i : idx) {
      const auto row = static_cast<Eigen::Index>(i);
      const double h = j.row(row) * bread * j.row(row).transpose();
      ss += std::pow((survival[i] - (a * std::pow(p, len) + b)) / (1.0 - std::min(h, 0.9)), 2);
    }
    for (auto i : idx) var(static_cast<Eigen::Index>(i)) = ss / double(idx.size() - 1);
  }
  const Eigen::MatrixXd cov = bread * (j.transpose() * var.asDiagonal() * j) * bread;
  if (!cov.allFinite()) return;
  r.fit.covariance.setZero();
  r.fit.covariance.topLeftCorner(k, k) = cov;
  for (int i = 0; i < k; ++i) r.fit.errors(i) = std::sqrt(std::max(0.0, cov(i, i)));
}

}  // namespace

DecayCurveFit fit_rb(const std::vector<double>& lengths, const std::vector<double>& survival, int qubits) {
  if (lengths.size() != survival.size()) throw ValidationError("lengths and survival differ in size");
  if (qubits < 1 || qubits > 20) throw ValidationError("qubit count out of range");
  if (std::set<double>(lengths.begin(), lengths.end()).size() < 3)
    throw ValidationError("decay fit needs at least three distinct lengths");
  for (double y : survival)
    if (!std::isfinite(y)) throw ValidationError("survival values must be finite");
  DecayCurveFit r;
  r.dimension = 1 << qubits;
  const double d = r.dimension;
  const auto [mn, mx] = std::minmax_element(survival.begin(), survival.end());
  r.fit.names = {"A", "p", "B"};
  if (*mx - *mn <= 1e-12) {
    r.fit.values = Eigen::Vector3d(0.0, 1.0, *mn);
    r.fit.errors = Eigen::Vector3d::Zero();
    r.fit.covariance = Eigen::Matrix3d::Zero();
    return r;
  }
  // Seed from a log-linear regression of (y - B0) with B0 just below the data.
  double b0 = std::min(1.0 / d, *mn - 1e-3 * (*mx - *mn));
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < lengths.size(); ++i)
    if (survival[i] - b0 > 0) {
      lx.push_back(lengths[i]);
      ly.push_back(std::log(survival[i] - b0));
    }
  double p0 = 0.99, a0 = *mx - b0;
  if (lx.size() >= 2 && std::set<double>(lx.begin(), lx.end()).size() >= 2) {
    const auto lf = fit_line(lx, ly);
    p0 = std::clamp(std::exp(lf.slope), 1e-3, 1.0 - 1e-9);
    a0 = std::exp(lf.intercept);
  }
  const ScalarModel model = [](const Eigen::VectorXd& q, double x) { return q(0) * std::pow(q(1), x) + q(2); };
  r.fit = nonlinear_fit(model, lengths, survival, Eigen::Vector3d(a0, p0, b0), {"A", "p", "B"});
  // Weak decay leaves A and B degenerate; fall back to the twirled asymptote B = 1/d.
  const double af = r.fit.value("A"), bf = r.fit.value("B");
  if (!(bf >= 0.0 && bf <= 1.0 && af >= 0.0 && af <= 1.5)) {
    const double b = 1.0 / d;
    const ScalarModel fixed = [b](const Eigen::VectorXd& q, double x) { return q(0) * std::pow(q(1), x) + b; };
    const FitReport two = nonlinear_fit(fixed, lengths, survival, Eigen::Vector2d(std::max(*mx - b, 1e-3), p0), {"A", "p"});
    r.fit.values = Eigen::Vector3d(two.values(0), two.values(1), b);
    r.fit.errors = Eigen::Vector3d(two.errors(0), two.errors(1), 0.0);
    r.fit.covariance = Eigen::Matrix3d::Zero();
    r.fit.covariance.topLeftCorner<2, 2>() = two.covariance;
    r.fit.residual_sum_squares = two.residual_sum_squares;
    r.fit.evaluations += two.evaluations;
    r.offset_fixed = true;
  }
  robust_covariance(lengths, survival, r);
  r.p = r.fit.value("p");
  r.p_error = r.fit.error("p");
  if (!(r.p > 0.0 && r.p <= 1.0 + 1e-9))
    throw NumericalError("decay parameter p = " + std::to_string(r.p) + " outside (0, 1]");
  r.p = std::min(r.p, 1.0);
  r.fidelity = 1.0 - (1.0 - r.p) * (d - 1.0) / d;
  r.fidelity_error = r.p_error * (d - 1.0) / d;
  return r;
}

std::pair<double, double> interleaved_fidelity(const DecayCurveFit& reference, const DecayCurveFit& interleaved) {
  if (reference.dimension != interleaved.dimension) throw ValidationError("decay fits differ in dimension");
  if (!(reference.p > 0)) throw ValidationError("reference decay must be positive");
  const double d = reference.dimension;
  const double ratio = interleaved.p / reference.p;
  const double r = (d - 1.0) * (1.0 - ratio) / d;
  const double ratio_err = ratio * std::hypot(interleaved.p_error / interleaved.p, reference.p_error / reference.p);
  return {1.0 - r, (d - 1.0) / d * ratio_err};
}

namespace {

void check_pair(const Eigen::VectorXd& measured, const Eigen::VectorXd& ideal) {
  if (measured.size() != ideal.size() || ideal.size() < 2) throw DimensionError("distributions differ in size");
  if ((ideal.size() & (ideal.size() - 1)) != 0) throw DimensionError("distribution size must be a power of two");
  if (measured.minCoeff() < -1e-12 || ideal.minCoeff() < -1e-12) throw ValidationError("negative probability");
  if (std::abs(measured.sum() - 1.0) > 1e-9 || std::abs(ideal.sum() - 1.0) > 1e-9)
    throw ValidationError("distributions must sum to 1");
}

}  // namespace

double xeb_fidelity(const Eigen::VectorXd& measured, const Eigen::VectorXd& ideal) {
  return xeb_fidelity(std::vector<Eigen::VectorXd>{measured}, std::vector<Eigen::VectorXd>{ideal});
}

double xeb_fidelity(const std::vector<Eigen::VectorXd>& measured, const std::vector<Eigen::VectorXd>& ideal) {
  if (measured.size() != ideal.size() || measured.empty()) throw ValidationError("need matching, nonempty circuit sets");
  double num = 0, den = 0;
  for (std::size_t c = 0; c < measured.size(); ++c) {
    check_pair(measured[c], ideal[c]);
    const double u = ideal[c].sum() / double(ideal[c].size());
    const double e = ideal[c].squaredNorm();
    const double m = measured[c].dot(ideal[c]);
    num += (m - u) * (e - u);
    den += (e - u) * (e - u);
  }
  if (den <= 1e-24) throw NumericalError("XEB undefined: ideal distribution is uniform (E = U)");
  return num / den;
}

double epc(int qubits, double p) {
  if (qubits < 1 || qubits > 62) throw ValidationError("qubit count out of range");
  const double d = std::ldexp(1.0, qubits);
  return (d - 1.0) / d * (1.0 - p);
}

void append_random_rotation(Circuit& c, int q, std::mt19937_64& rng) {
  auto uni = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const double theta = std::acos(1.0 - 2.0 * uni());
  const double phi = 2.0 * kPi * uni();
  const double lambda = 2.0 * kPi * uni();
  // Rz(phi) Ry(theta) Rz(lambda), with Ry(theta) = Rx(-pi/2) Rz(theta) Rx(pi/2) and Rx(-pi/2) ~ X180 X90.
  c.append(Gate::vz(q, lambda));
  c.append(Gate::x90(q));
  c.append(Gate::vz(q, theta));
  c.append(Gate::x90(q));
  c.append(Gate::x180(q));
  c.append(Gate::vz(q, phi));
}

Circuit generate_rcs(int qubits, const std::vector<std::pair<int, int>>& pairs, int cycles, std::uint64_t seed) {
  if (qubits < 1) throw ValidationError("RCS needs at least one qubit");
  if (cycles < 0) throw ValidationError("cycle count must be >= 0");
  std::vector<bool> used(static_cast<std::size_t>(qubits), false);
  for (auto [a, b] : pairs) {
    if (a < 0 || b < 0 || a >= qubits || b >= qubits) throw ValidationError("pair index out of range");
    if (std::abs(a - b) != 1) throw ValidationError("pairs must be chain neighbours");
    for (int q : {a, b}) {
      if (used[static_cast<std::size_t>(q)]) throw ValidationError("overlapping pairs");
      used[static_cast<std::size_t>(q)] = true;
    }
  }
  std::mt19937_64 rng(seed);
  Circuit c(qubits);
  for (int k = 0; k < cycles; ++k) {
    for (int q = 0; q < qubits; ++q) append_random_rotation(c, q, rng);
    // Every qubit carries the same rotation depth, so the CZs of a cycle land in one layer.
    for (auto [a, b] : pairs) c.append(Gate::cz(a, b));
  }
  for (int q = 0; q < qubits; ++q) append_random_rotation(c, q, rng);
  c.validate();
  return c;
}

}  // namespace ftf
