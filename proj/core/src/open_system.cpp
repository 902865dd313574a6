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

#include "ftf/open_system.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <exception>
#include <numbers>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "ftf/errors.hpp"

namespace ftf {

using cd = std::complex<double>;
using State = std::vector<cd>;
namespace odeint = boost::numeric::odeint;

namespace {

void add_dissipator(const Eigen::MatrixXcd& l, double rate, const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) {
  const Eigen::MatrixXcd lr = l * rho;
  const Eigen::MatrixXcd ldl = l.adjoint() * l;
  out.noalias() += rate * (lr * l.adjoint());
  out.noalias() -= (0.5 * rate) * (ldl * rho + rho * ldl);
}

struct DriveTerm {
  const PulseSegment* seg = nullptr;
  Eigen::MatrixXcd op, lower, upper;
};

// Interaction picture in the static eigenbasis: rho~ = U0^dag rho U0.
class LindbladRhs {
 public:
  LindbladRhs(const Eigen::VectorXd& e, const std::vector<DriveTerm>& drives, const std::vector<CollapseOperator>& ops,
              bool rwa)
      : e_(e), drives_(drives), ops_(ops), rwa_(rwa), k_(e.size()) {}

  void operator()(const State& x, State& dx, double t) const {
    Eigen::Map<const Eigen::MatrixXcd> rho(x.data(), k_, k_);
    Eigen::Map<Eigen::MatrixXcd> d(dx.data(), k_, k_);
    Eigen::VectorXcd u(k_);
    for (Eigen::Index a = 0; a < k_; ++a) u(a) = std::polar(1.0, kTwoPi * e_(a) * t);
    const Eigen::MatrixXcd phase = u * u.adjoint();
    d.setZero();
    Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(k_, k_);
    bool driven = false;
    for (const auto& dr : drives_) {
      const double env = dr.seg->amplitude * dr.seg->envelope_at(t);
      if (env == 0.0) continue;
      driven = true;
      const double theta = kTwoPi * dr.seg->frequency * t + dr.seg->phase;
      if (rwa_)
        v += (0.5 * env) * (std::polar(1.0, -theta) * dr.lower + std::polar(1.0, theta) * dr.upper);
      else
        v += (env * std::cos(theta)) * dr.op;
    }
    if (driven) {
      v = kTwoPi * v.cwiseProduct(phase);
      d.noalias() += cd(0, -1) * (v * rho - rho * v);
    }
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(k_, k_);
    for (const auto& c : ops_) add_dissipator(c.op.cwiseProduct(phase), c.rate, rho, acc);
    d += acc;
  }

 private:
  const Eigen::VectorXd& e_;
  const std::vector<DriveTerm>& drives_;
  const std::vector<CollapseOperator>& ops_;
  bool rwa_;
  Eigen::Index k_;
};

Eigen::MatrixXcd to_interaction(const Eigen::VectorXd& e, double t, const Eigen::MatrixXcd& rho) {
  Eigen::VectorXcd u(e.size());
  for (Eigen::Index a = 0; a < e.size(); ++a) u(a) = std::polar(1.0, kTwoPi * e(a) * t);
  return rho.cwiseProduct(u * u.adjoint());
}

Eigen::MatrixXcd from_interaction(const Eigen::VectorXd& e, double t, const Eigen::MatrixXcd& rho) {
  Eigen::VectorXcd u(e.size());
  for (Eigen::Index a = 0; a < e.size(); ++a) u(a) = std::polar(1.0, -kTwoPi * e(a) * t);
  return rho.cwiseProduct(u * u.adjoint());
}

template <class System>
void integrate(System sys, State& x, double ta, double tb, double rtol, double atol) {
  if (tb <= ta) return;
  try {
    auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(atol, rtol);
    odeint::integrate_adaptive(stepper, sys, x, ta, tb, std::min(1e-3, tb - ta));
  } catch (const std::exception& e) {
    throw NumericalError(std::string("Lindblad integrator failed (step-size underflow): ") + e.what());
  }
}

void check_density(const Eigen::MatrixXcd& rho, long dim) {
  if (rho.rows() != dim || rho.cols() != dim) throw DimensionError("density matrix does not match the model dimension");
  if ((rho - rho.adjoint()).norm() > 1e-10) throw ValidationError("density matrix is not Hermitian");
  if (std::abs(rho.trace() - 1.0) > 1e-8) throw ValidationError("density matrix trace is not 1");
}

void check_times(const std::vector<double>& times) {
  if (times.empty()) throw ValidationError("no sample times");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0) || !std::isfinite(times[i])) throw ValidationError("sample times must be finite and >= 0");
    if (i && times[i] < times[i - 1]) throw ValidationError("sample times must be sorted");
  }
}

}  // namespace

void NoiseSpec::validate() const {
  for (const auto* m : {&relaxation, &dephasing})
    for (const auto& [n, r] : *m)
      if (!(r >= 0) || !std::isfinite(r)) throw ValidationError("rate for '" + n + "' must be finite and >= 0");
}

std::vector<CollapseOperator> collapse_operators(const StaticFrame& frame, const NoiseSpec& noise) {
  noise.validate();
  std::vector<CollapseOperator> out;
  if (noise.relaxation.empty() && noise.dephasing.empty()) return out;
  if (!frame.source) throw ValidationError("noise channels need a device-backed model");
  const OperatorSet& ops = frame.source->ops;
  const Eigen::Index dim = ops.dimension();
  auto build = [&](const std::string& node, bool ladder) {
    const std::size_t k = ops.node_index(node);
    std::vector<Eigen::Triplet<cd>> trip;
    for (Eigen::Index p = 0; p < dim; ++p) {
      auto d = ops.digits(p);
      const int j = d[k];
      if (!ladder) {
        if (j) trip.emplace_back(p, p, double(j));
      } else if (j + 1 < ops.levels[k]) {
        d[k] = j + 1;
        trip.emplace_back(p, ops.product_index(d), std::sqrt(double(j + 1)));
      }
    }
    SparseC m(dim, dim);
    m.setFromTriplets(trip.begin(), trip.end());
    return dressed_operator(frame.source->eig, m);
  };
  for (const auto& [node, kappa] : noise.relaxation)
    if (kappa > 0) out.push_back({build(node, true), kappa * 1e-3});
  for (const auto& [node, gamma] : noise.dephasing)
    if (gamma > 0) out.push_back({build(node, false), 2.0 * gamma * 1e-3});
  return out;
}

double DensityTrajectory::population(std::size_t sample, const std::string& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw ValidationError("state '" + label + "' not in trajectory");
  const auto i = static_cast<Eigen::Index>(it - labels.begin());
  return rho.at(sample)(i, i).real();
}

std::string DensityTrajectory::populations_csv() const {
  std::ostringstream os;
  os << "time_ns";
  for (const auto& l : labels) os << ',' << l;
  os << '\n';
  char buf[32];
  for (std::size_t s = 0; s < times.size(); ++s) {
    std::snprintf(buf, sizeof buf, "%.15g", times[s]);
    os << buf;
    for (Eigen::Index i = 0; i < rho[s].rows(); ++i) {
      std::snprintf(buf, sizeof buf, ",%.15g", rho[s](i, i).real());
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

DensityTrajectory lindblad_propagate(const DrivenModel& model, const NoiseSpec& noise, const PulseSchedule& schedule,
                                     const Eigen::MatrixXcd& rho0, const std::vector<double>& sample_times,
                                     const PropagationOptions& opt) {
  schedule.validate();
  const StaticFrame& base = model.base();
  const long k = static_cast<long>(base.dimension());
  if (k > kMaxDensityDimension)
    throw DimensionError("density-matrix dimension " + std::to_string(k) + " exceeds " +
                         std::to_string(kMaxDensityDimension));
  check_density(rho0, k);
  check_times(sample_times);

  std::vector<double> times{0.0, schedule.total_duration};
  for (const auto& s : schedule.segments) {
    times.push_back(s.start);
    times.push_back(s.end());
  }
  times.insert(times.end(), sample_times.begin(), sample_times.end());
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
              times.end());

  DensityTrajectory traj;
  traj.labels = base.labels;
  auto cur = model.frame_at({});
  auto ops = collapse_operators(*cur, noise);
  Eigen::MatrixXcd rho = rho0;  // interaction picture of `cur`
  State x(static_cast<std::size_t>(k * k));
  std::size_t next_sample = 0;

  auto record = [&](double t) {
    while (next_sample < sample_times.size() && std::abs(sample_times[next_sample] - t) < 1e-12) {
      Eigen::MatrixXcd r = from_interaction(cur->energies, t, rho);
      if (cur != model.frame_at({})) {
        const Eigen::MatrixXcd o = dressed_overlap(base.source->ops, base.source->eig, cur->source->ops, cur->source->eig);
        r = o * r * o.adjoint();
      }
      traj.times.push_back(sample_times[next_sample]);
      traj.rho.push_back(0.5 * (r + r.adjoint()));
      ++next_sample;
    }
  };
  record(0.0);
  for (std::size_t iv = 0; iv + 1 < times.size(); ++iv) {
    const double ta = times[iv], tb = times[iv + 1], mid = 0.5 * (ta + tb);
    FluxPoint overrides;
    std::vector<DriveTerm> drives;
    for (const auto& s : schedule.segments) {
      if (!(s.start <= mid && mid < s.end())) continue;
      if (s.channel == Channel::Flux) overrides[s.node] = s.amplitude;
    }
    auto next = model.frame_at(overrides);
    if (next != cur) {
      const Eigen::MatrixXcd o = dressed_overlap(cur->source->ops, cur->source->eig, next->source->ops, next->source->eig);
      const Eigen::MatrixXcd r = from_interaction(cur->energies, ta, rho);
      rho = to_interaction(next->energies, ta, o.adjoint() * r * o);
      cur = next;
      ops = collapse_operators(*cur, noise);
    }
    for (const auto& s : schedule.segments) {
      if (!(s.start <= mid && mid < s.end()) || s.channel != Channel::ChargeDrive) continue;
      DriveTerm d;
      d.seg = &s;
      d.op = cur->charge_of(s.node);
      if (opt.frame == Frame::Rwa) {
        d.lower = d.op.triangularView<Eigen::StrictlyLower>();
        d.upper = d.op.triangularView<Eigen::StrictlyUpper>();
      }
      drives.push_back(std::move(d));
    }
    if (!drives.empty() || !ops.empty()) {
      std::copy(rho.data(), rho.data() + k * k, x.begin());
      integrate(LindbladRhs(cur->energies, drives, ops, opt.frame == Frame::Rwa), x, ta, tb, opt.rtol, opt.atol);
      std::copy(x.begin(), x.end(), rho.data());
      if (!rho.allFinite()) throw NumericalError("Lindblad integration produced non-finite values");
    }
    record(tb);
  }
  return traj;
}

std::vector<Eigen::MatrixXcd> lindblad_evolve(const Eigen::MatrixXcd& h, const std::vector<CollapseOperator>& ops,
                                              const Eigen::MatrixXcd& rho0, const std::vector<double>& times,
                                              double rtol, double atol) {
  const long k = h.rows();
  if (k > kMaxDensityDimension) throw DimensionError("density-matrix dimension exceeds the cap");
  if ((h - h.adjoint()).norm() > 1e-12 * std::max(1.0, h.norm())) throw ValidationError("Hamiltonian is not Hermitian");
  check_density(rho0, k);
  check_times(times);
  for (const auto& c : ops)
    if (c.op.rows() != k || c.op.cols() != k || !(c.rate >= 0)) throw ValidationError("bad collapse operator");
  auto rhs = [&](const State& x, State& dx, double) {
    Eigen::Map<const Eigen::MatrixXcd> rho(x.data(), k, k);
    Eigen::Map<Eigen::MatrixXcd> d(dx.data(), k, k);
    Eigen::MatrixXcd acc = cd(0, -1) * (h * rho - rho * h);
    for (const auto& c : ops) add_dissipator(c.op, c.rate, rho, acc);
    d = acc;
  };
  std::vector<Eigen::MatrixXcd> out;
  State x(rho0.data(), rho0.data() + k * k);
  double t = 0.0;
  for (double ts : times) {
    integrate(rhs, x, t, ts, rtol, atol);
    t = ts;
    Eigen::Map<const Eigen::MatrixXcd> r(x.data(), k, k);
    out.emplace_back(0.5 * (r + r.adjoint()));
  }
  return out;
}

nlohmann::json RamseyResult::to_json() const {
  return {{"omega_g_ghz", omega_g},         {"omega_e_ghz", omega_e},   {"g_zz_khz", g_zz * 1e6},
          {"g_zz_error_khz", g_zz_error * 1e6}, {"reference_ghz", reference}, {"times_ns", times},
          {"phase_g", phase_g},             {"phase_e", phase_e}};
}

RamseyResult conditional_ramsey_zz(const DrivenModel& model, const std::array<std::string, 4>& labels,
                                   const std::vector<double>& times, const NoiseSpec& noise) {
  check_times(times);
  if (times.size() < 3) throw ValidationError("Ramsey fit needs at least three times");
  const StaticFrame& f = model.base();
  std::array<Eigen::Index, 4> idx{};
  for (int i = 0; i < 4; ++i)
    idx[i] = static_cast<Eigen::Index>(f.source ? f.source->spectrum.resolved_index(labels[i]) : f.state(labels[i]));
  RamseyResult res;
  res.times = times;
  res.reference = f.energies(idx[1]) - f.energies(idx[0]);
  PulseSchedule idle;
  idle.total_duration = std::max(times.back(), 1e-9);
  const auto k = static_cast<Eigen::Index>(f.dimension());

  auto arm = [&](Eigen::Index lo, Eigen::Index hi, std::vector<double>& phase) {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(k);
    psi(lo) = psi(hi) = std::sqrt(0.5);
    const auto traj = lindblad_propagate(model, noise, idle, psi * psi.adjoint(), times);
    std::vector<double> raw;
    for (std::size_t s = 0; s < times.size(); ++s) {
      const cd c = traj.rho[s](hi, lo) * std::polar(1.0, kTwoPi * res.reference * times[s]);
      if (std::abs(c) < 1e-6) throw NumericalError("Ramsey coherence lost before the last sample");
      raw.push_back(-std::arg(c));
    }
    phase = unwrap_phase(raw);
    for (std::size_t s = 1; s < phase.size(); ++s)
      if (std::abs(phase[s] - phase[s - 1]) > 0.5 * std::numbers::pi)
        throw NumericalError("Ramsey phase undersampled: non-monotonic unwrap");
    const LineFit fit = fit_line(times, phase);
    return std::pair{res.reference + fit.slope / kTwoPi, fit.slope_error / kTwoPi};
  };
  const auto [wg, eg] = arm(idx[0], idx[1], res.phase_g);
  const auto [we, ee] = arm(idx[2], idx[3], res.phase_e);
  res.omega_g = wg;
  res.omega_e = we;
  res.g_zz = wg - we;
  res.g_zz_error = std::hypot(eg, ee);
  return res;
}

RamseyResult conditional_ramsey_zz(const DrivenModel& model, const std::string& target, const std::string& control,
                                   const std::vector<double>& times, const NoiseSpec& noise) {
  const StaticFrame& f = model.base();
  if (!f.source) throw ValidationError("node names need a device-backed model; pass labels instead");
  const auto& nodes = f.source->ops.nodes;
  const std::size_t t = f.source->ops.node_index(target), c = f.source->ops.node_index(control);
  if (t == c) throw ValidationError("target and control must differ");
  std::string gg(nodes.size(), 'g');
  std::string ge = gg, eg = gg, ee = gg;
  ge[t] = 'e';
  eg[c] = 'e';
  ee[t] = ee[c] = 'e';
  return conditional_ramsey_zz(model, {gg, ge, eg, ee}, times, noise);
}

double XxEstimate::hz() const { return g_xx * 1e6 / kTwoPi; }

nlohmann::json XxEstimate::to_json() const {
  nlohmann::json j{{"g_xx_per_us", g_xx}, {"g_xx_hz", hz()}, {"delta_gamma_per_us", delta_gamma},
                   {"consistent", consistent}};
  if (!diagnostic.empty()) j["diagnostic"] = diagnostic;
  return j;
}

XxEstimate conditional_t1_xx(double kappa_c, double kappa_t, double gamma_g, double gamma_e) {
  for (double v : {kappa_c, kappa_t, gamma_g, gamma_e})
    if (!std::isfinite(v) || v < 0) throw ValidationError("rates must be finite and >= 0");
  XxEstimate r;
  r.delta_gamma = gamma_g - gamma_e;
  if (r.delta_gamma < 0) {
    r.consistent = false;
    char buf[160];
    std::snprintf(buf, sizeof buf, "inconsistent with weak-coupling model: delta gamma = %.6g /us", r.delta_gamma);
    r.diagnostic = buf;
    return r;
  }
  r.g_xx = 0.5 * std::sqrt((kappa_c + kappa_t) * r.delta_gamma);
  return r;
}

double effective_target_rate(double g, double kappa_c, double kappa_t) {
  if (!(kappa_c + kappa_t > 0)) throw ValidationError("kappa_c + kappa_t must be positive");
  return kappa_t + 4.0 * g * g / (kappa_c + kappa_t);
}

nlohmann::json ConditionalT1::to_json() const {
  return {{"fit_g", fit_g.to_json()}, {"fit_e", fit_e.to_json()}, {"estimate", estimate.to_json()}};
}

ConditionalT1 simulate_conditional_t1(double g, double kappa_c, double kappa_t, const std::vector<double>& times_us,
                                      bool blocked_arm_relaxation) {
  if (!(g >= 0) || !(kappa_c >= 0) || !(kappa_t > 0)) throw ValidationError("need g >= 0, kappa_c >= 0, kappa_t > 0");
  std::vector<double> times = times_us;
  if (times.empty()) {
    const double horizon = 3.0 / effective_target_rate(g, kappa_c, kappa_t);
    for (int i = 0; i < 300; ++i) times.push_back(horizon * i / 299.0);
  }
  // Basis |control target>, index 2c + t.
  Eigen::Matrix2cd sm;
  sm << 0, 1, 0, 0;
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  auto kron = [](const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
    Eigen::Matrix4cd m;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) m.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return m;
  };
  const Eigen::MatrixXcd c = kron(sm, id), t = kron(id, sm);
  const Eigen::MatrixXcd h = g * (c.adjoint() * t + c * t.adjoint());
  const Eigen::MatrixXcd nt = kron(id, Eigen::Vector2cd(0, 1).asDiagonal());
  // With the control held in e, only |ee> counts: an excitation returned through |ge> is not the blocked arm.
  Eigen::MatrixXcd pee = Eigen::MatrixXcd::Zero(4, 4);
  pee(3, 3) = 1.0;

  ConditionalT1 out;
  out.times = times;
  auto arm = [&](bool control_e, bool control_relax, std::vector<double>& pop) {
    std::vector<CollapseOperator> ops{{t, kappa_t}};
    if (control_relax) ops.push_back({c, kappa_c});
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(4, 4);
    const int i = (control_e ? 2 : 0) + 1;
    rho(i, i) = 1.0;
    const Eigen::MatrixXcd& obs = control_e ? pee : nt;
    for (const auto& r : lindblad_evolve(h, ops, rho, times)) pop.push_back((obs * r).trace().real());
    return fit_decay(times, pop);
  };
  out.fit_g = arm(false, true, out.target_g);
  out.fit_e = arm(true, blocked_arm_relaxation, out.target_e);
  out.estimate = conditional_t1_xx(kappa_c, kappa_t, out.fit_g.rate, out.fit_e.rate);
  return out;
}

double effective_rate_error(double g, double kappa_c, double kappa_t) {
  const auto sim = simulate_conditional_t1(g, kappa_c, kappa_t, {});
  const double formula = effective_target_rate(g, kappa_c, kappa_t);
  if (!(formula > kappa_t)) throw ValidationError("relative error undefined for g = 0");
  return std::abs(sim.fit_g.rate - formula) / (formula - kappa_t);
}

}  // namespace ftf
