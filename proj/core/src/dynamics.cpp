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

#include "ftf/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <thread>

#include <boost/numeric/odeint.hpp>

#include "ftf/errors.hpp"
#include "ftf/fitting.hpp"

namespace ftf {

using cd = std::complex<double>;
using State = std::vector<cd>;
namespace odeint = boost::numeric::odeint;

namespace {

constexpr double kPi = std::numbers::pi;

const char* envelope_name(Envelope e) {
  switch (e) {
    case Envelope::Square:
      return "square";
    case Envelope::Cosine:
      return "cosine";
    case Envelope::CosineFlatTop:
      return "cosine_flat_top";
  }
  return "square";
}

Envelope envelope_from(const std::string& s) {
  if (s == "square") return Envelope::Square;
  if (s == "cosine") return Envelope::Cosine;
  if (s == "cosine_flat_top") return Envelope::CosineFlatTop;
  throw ParseError("unknown envelope '" + s + "'");
}

double wrap_2pi(double x) {
  x = std::fmod(x, 2.0 * kPi);
  return x < 0 ? x + 2.0 * kPi : x;
}

double wrap_pi(double x) { return wrap_2pi(x + kPi) - kPi; }

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

struct ActiveDrive {
  const PulseSegment* seg = nullptr;
  const Eigen::MatrixXcd* op = nullptr;
  Eigen::MatrixXcd lower;  // E_row > E_col, rotating as exp(-i theta) under RWA
  Eigen::MatrixXcd upper;
};

// Interaction picture with respect to the static frame: c = exp(i 2 pi E t) a.
class InteractionRhs {
 public:
  InteractionRhs(const Eigen::VectorXd& e, const std::vector<ActiveDrive>& drives, bool rwa, Eigen::Index m)
      : e_(e), drives_(drives), rwa_(rwa), k_(e.size()), m_(m) {}

  void operator()(const State& x, State& dx, double t) const {
    Eigen::Map<const Eigen::MatrixXcd> c(x.data(), k_, m_);
    Eigen::Map<Eigen::MatrixXcd> d(dx.data(), k_, m_);
    Eigen::VectorXcd u(k_);
    for (Eigen::Index a = 0; a < k_; ++a) u(a) = std::polar(1.0, kTwoPi * e_(a) * t);
    const Eigen::MatrixXcd y = u.conjugate().asDiagonal() * c;
    Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(k_, m_);
    for (const auto& dr : drives_) {
      const double env = dr.seg->amplitude * dr.seg->envelope_at(t);
      if (env == 0.0) continue;
      const double theta = kTwoPi * dr.seg->frequency * t + dr.seg->phase;
      if (rwa_) {
        z.noalias() += (0.5 * env * std::polar(1.0, -theta)) * (dr.lower * y);
        z.noalias() += (0.5 * env * std::polar(1.0, theta)) * (dr.upper * y);
      } else {
        z.noalias() += (env * std::cos(theta)) * (*dr.op * y);
      }
    }
    d = cd(0.0, -kTwoPi) * (u.asDiagonal() * z);
  }

 private:
  const Eigen::VectorXd& e_;
  const std::vector<ActiveDrive>& drives_;
  bool rwa_;
  Eigen::Index k_, m_;
};

// Schroedinger-picture amplitudes in `to` from those in `from` at the same instant.
Eigen::MatrixXcd change_frame(const StaticFrame& from, const StaticFrame& to, const Eigen::MatrixXcd& a) {
  const Eigen::MatrixXcd o = dressed_overlap(from.source->ops, from.source->eig, to.source->ops, to.source->eig);
  return o.adjoint() * a;
}

Eigen::VectorXcd phases(const Eigen::VectorXd& e, double t, double sign) {
  Eigen::VectorXcd u(e.size());
  for (Eigen::Index a = 0; a < e.size(); ++a) u(a) = std::polar(1.0, sign * kTwoPi * e(a) * t);
  return u;
}

std::size_t frame_index(const StaticFrame& f, const std::string& label, bool require_resolved) {
  if (require_resolved && f.source) return f.source->spectrum.resolved_index(label);
  return f.state(label);
}

// Regula falsi with the Illinois update on a sign-changing bracket; returns the last iterate.
template <class F>
std::pair<double, double> illinois(F&& fn, double a, double b, double fa, double fb, double xtol, double ftol,
                                   int budget, int& used) {
  int side = 0;
  double c = a, fc = fa;
  while (used < budget) {
    c = (a * fb - b * fa) / (fb - fa);
    fc = fn(c);
    ++used;
    if (std::abs(fc) <= ftol || std::abs(b - a) <= xtol) break;
    if (fc * fb > 0) {
      b = c;
      fb = fc;
      if (side == -1) fa *= 0.5;
      side = -1;
    } else {
      a = c;
      fa = fc;
      if (side == 1) fb *= 0.5;
      side = 1;
    }
  }
  return {c, fc};
}

}  // namespace

double PulseSegment::envelope_at(double t) const {
  if (t < start || t > end()) return 0.0;
  const double s = t - start;
  switch (envelope) {
    case Envelope::Square:
      return 1.0;
    case Envelope::Cosine:
      return 0.5 * (1.0 - std::cos(kTwoPi * s / duration));
    case Envelope::CosineFlatTop: {
      if (ramp <= 0.0) return 1.0;
      if (s < ramp) return 0.5 * (1.0 - std::cos(kPi * s / ramp));
      const double r = end() - t;
      if (r < ramp) return 0.5 * (1.0 - std::cos(kPi * r / ramp));
      return 1.0;
    }
  }
  return 0.0;
}

double PulseSegment::area() const {
  switch (envelope) {
    case Envelope::Square:
      return duration;
    case Envelope::Cosine:
      return 0.5 * duration;
    case Envelope::CosineFlatTop:
      return duration - ramp;
  }
  return duration;
}

void PulseSchedule::validate() const {
  if (!(total_duration > 0)) throw ValidationError("schedule total duration must be positive");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (!(s.duration > 0)) throw ValidationError("segment duration must be positive");
    if (s.start < 0) throw ValidationError("segment start must be >= 0");
    if (s.end() > total_duration + 1e-9) throw ValidationError("segment ends after the schedule");
    if (!std::isfinite(s.amplitude) || !std::isfinite(s.frequency) || !std::isfinite(s.phase))
      throw ValidationError("segment parameters must be finite");
    if (s.channel == Channel::Flux && s.envelope != Envelope::Square)
      throw ValidationError("flux segments must be square");
    if (s.envelope == Envelope::CosineFlatTop && (s.ramp < 0 || 2 * s.ramp > s.duration))
      throw ValidationError("flat-top ramp must lie in [0, duration/2]");
    for (std::size_t j = 0; j < i; ++j) {
      const auto& o = segments[j];
      if (o.node == s.node && o.channel == s.channel && s.start < o.end() - 1e-12 && o.start < s.end() - 1e-12)
        throw ValidationError("overlapping segments on node '" + s.node + "'");
    }
  }
}

nlohmann::json PulseSchedule::to_json() const {
  nlohmann::json j;
  j["total_duration"] = total_duration;
  j["buffer"] = buffer;
  j["segments"] = nlohmann::json::array();
  for (const auto& s : segments) {
    nlohmann::json js{{"node", s.node},
                      {"channel", s.channel == Channel::Flux ? "flux" : "charge"},
                      {"envelope", envelope_name(s.envelope)},
                      {"amplitude", s.amplitude},
                      {"frequency", s.frequency},
                      {"phase", s.phase},
                      {"start", s.start},
                      {"duration", s.duration}};
    if (s.envelope == Envelope::CosineFlatTop) js["ramp"] = s.ramp;
    j["segments"].push_back(js);
  }
  return j;
}

PulseSchedule PulseSchedule::from_json(const nlohmann::json& j) {
  PulseSchedule p;
  try {
    p.total_duration = j.at("total_duration").get<double>();
    p.buffer = j.value("buffer", 0.0);
    for (const auto& js : j.at("segments")) {
      PulseSegment s;
      s.node = js.at("node").get<std::string>();
      const auto ch = js.at("channel").get<std::string>();
      if (ch == "flux")
        s.channel = Channel::Flux;
      else if (ch == "charge")
        s.channel = Channel::ChargeDrive;
      else
        throw ParseError("unknown channel '" + ch + "'");
      s.envelope = envelope_from(js.value("envelope", std::string("square")));
      s.amplitude = js.at("amplitude").get<double>();
      s.frequency = js.value("frequency", 0.0);
      s.phase = js.value("phase", 0.0);
      s.start = js.at("start").get<double>();
      s.duration = js.at("duration").get<double>();
      s.ramp = js.value("ramp", 0.0);
      p.segments.push_back(s);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("schedule: ") + e.what());
  }
  p.validate();
  return p;
}

PulseSchedule map_cz_schedule(const std::string& coupler, double on_flux, const std::string& drive_node,
                              double frequency, double amplitude, double drive_duration, double buffer) {
  PulseSchedule p;
  p.buffer = buffer;
  p.total_duration = drive_duration + 2.0 * buffer;
  p.segments.push_back({coupler, Channel::Flux, Envelope::Square, on_flux, 0.0, 0.0, 0.0, p.total_duration, 0.0});
  p.segments.push_back(
      {drive_node, Channel::ChargeDrive, Envelope::Cosine, amplitude, frequency, 0.0, buffer, drive_duration, 0.0});
  p.validate();
  return p;
}

std::size_t StaticFrame::state(const std::string& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw ValidationError("state '" + label + "' not in frame");
  return static_cast<std::size_t>(it - labels.begin());
}

const Eigen::MatrixXcd& StaticFrame::charge_of(const std::string& node) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i] == node) return charge[i];
  throw ValidationError("node '" + node + "' not driven in this frame");
}

StaticFrame make_frame(Eigen::VectorXd energies, std::vector<std::string> labels,
                       std::map<std::string, Eigen::MatrixXcd> charge) {
  StaticFrame f;
  if (labels.size() != static_cast<std::size_t>(energies.size()))
    throw ValidationError("frame: one label per energy required");
  for (Eigen::Index i = 1; i < energies.size(); ++i)
    if (energies(i) < energies(i - 1)) throw ValidationError("frame energies must be ascending");
  f.energies = std::move(energies);
  f.labels = std::move(labels);
  for (auto& [name, op] : charge) {
    if (op.rows() != f.energies.size() || op.cols() != f.energies.size())
      throw ValidationError("frame: operator size mismatch for '" + name + "'");
    if ((op - op.adjoint()).norm() > 1e-12 * std::max(1.0, op.norm()))
      throw ValidationError("frame: operator for '" + name + "' is not Hermitian");
    f.nodes.push_back(name);
    f.charge.push_back(op);
  }
  return f;
}

DrivenModel::DrivenModel(DeviceConfig config, std::vector<std::string> subsystem, LevelMap levels, int n_states)
    : config_(std::move(config)), subsystem_(std::move(subsystem)), levels_(std::move(levels)), n_states_(n_states) {
  base_ = build(*config_);
}

DrivenModel::DrivenModel(StaticFrame synthetic) : base_(std::make_shared<const StaticFrame>(std::move(synthetic))) {}

std::shared_ptr<const StaticFrame> DrivenModel::build(const DeviceConfig& config) const {
  auto sub = std::make_shared<Subsystem>(solve_subsystem(config, subsystem_, levels_, n_states_));
  auto f = std::make_shared<StaticFrame>();
  f->energies = sub->eig.energies;
  f->labels = sub->spectrum.labels;
  f->nodes = sub->ops.nodes;
  for (const auto& n : sub->ops.nodes) f->charge.push_back(sub->dressed_charge(n));
  f->flux = sub->ops.flux;
  f->source = std::move(sub);
  return f;
}

std::shared_ptr<const StaticFrame> DrivenModel::frame_at(const FluxPoint& overrides) const {
  if (overrides.empty()) return base_;
  if (!config_) throw ValidationError("flux pulses need a device-backed model");
  FluxPoint key = base_->flux;
  bool same = true;
  for (const auto& [n, v] : overrides) {
    if (!key.count(n)) throw ValidationError("flux pulse on node '" + n + "' outside the subsystem");
    if (key[n] != v) same = false;
    key[n] = v;
  }
  if (same) return base_;
  std::lock_guard lock(mutex_);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  auto f = build(config_->with_flux(overrides));
  cache_.emplace(key, f);
  return f;
}

Eigen::MatrixXcd propagate_states(const DrivenModel& model, const PulseSchedule& schedule,
                                  const Eigen::MatrixXcd& initial, const PropagationOptions& opt) {
  schedule.validate();
  const StaticFrame& base = model.base();
  const auto k = static_cast<Eigen::Index>(base.dimension());
  if (initial.rows() != k) throw ValidationError("initial states do not match the model dimension");
  const Eigen::Index m = initial.cols();

  std::vector<double> times{0.0, schedule.total_duration};
  for (const auto& s : schedule.segments) {
    times.push_back(s.start);
    times.push_back(s.end());
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
              times.end());

  std::shared_ptr<const StaticFrame> cur = model.frame_at({});
  Eigen::MatrixXcd c = initial;
  State x(static_cast<std::size_t>(k * m));
  for (std::size_t iv = 0; iv + 1 < times.size(); ++iv) {
    const double ta = times[iv], tb = times[iv + 1];
    if (tb > schedule.total_duration + 1e-12) break;
    const double mid = 0.5 * (ta + tb);
    FluxPoint overrides;
    std::vector<const PulseSegment*> active;
    for (const auto& s : schedule.segments) {
      if (!(s.start <= mid && mid < s.end())) continue;
      if (s.channel == Channel::Flux)
        overrides[s.node] = s.amplitude;
      else
        active.push_back(&s);
    }
    auto next = model.frame_at(overrides);
    if (next != cur) {
      const Eigen::MatrixXcd a = phases(cur->energies, ta, -1.0).asDiagonal() * c;
      c = phases(next->energies, ta, 1.0).asDiagonal() * change_frame(*cur, *next, a);
      cur = next;
    }
    if (active.empty()) continue;

    std::vector<ActiveDrive> drives;
    for (const auto* s : active) {
      ActiveDrive d;
      d.seg = s;
      d.op = &cur->charge_of(s->node);
      if (opt.frame == Frame::Rwa) {
        d.lower = d.op->triangularView<Eigen::StrictlyLower>();
        d.upper = d.op->triangularView<Eigen::StrictlyUpper>();
      }
      drives.push_back(std::move(d));
    }
    InteractionRhs rhs(cur->energies, drives, opt.frame == Frame::Rwa, m);
    std::copy(c.data(), c.data() + k * m, x.begin());
    try {
      auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(opt.atol, opt.rtol);
      odeint::integrate_adaptive(stepper, rhs, x, ta, tb, std::min(opt.initial_step, tb - ta));
    } catch (const std::exception& e) {
      throw NumericalError(std::string("integrator failed (step-size underflow): ") + e.what());
    }
    std::copy(x.begin(), x.end(), c.data());
    if (!c.allFinite()) throw NumericalError("integrator produced non-finite amplitudes");
  }
  const double t_end = schedule.total_duration;
  Eigen::MatrixXcd a = phases(cur->energies, t_end, -1.0).asDiagonal() * c;
  if (cur != model.frame_at({})) a = change_frame(*cur, base, a);
  return a;
}

std::array<std::string, 4> computational_labels(const std::vector<std::string>& chain) {
  if (chain.size() < 2) throw ValidationError("computational labels need at least two nodes");
  std::string gg(chain.size(), 'g');
  std::string ge = gg, eg = gg, ee = gg;
  ge.back() = 'e';
  eg.front() = 'e';
  ee.front() = ee.back() = 'e';
  return {gg, ge, eg, ee};
}

GateResult gate_metrics(const Eigen::Matrix4cd& u, std::optional<std::array<double, 2>> local_phases) {
  GateResult r;
  r.has_gate = true;
  r.computational = u;
  const double p0 = std::arg(u(0, 0));
  std::array<double, 2> lp{};
  if (local_phases) {
    lp = *local_phases;
  } else {
    lp[0] = std::arg(u(2, 2)) - p0;
    lp[1] = std::arg(u(1, 1)) - p0;
  }
  r.local_phases = lp;
  r.conditional_phase = wrap_2pi(std::arg(u(0, 0) * std::conj(u(1, 1)) * std::conj(u(2, 2)) * u(3, 3)));
  Eigen::Vector4cd corr(1.0, std::polar(1.0, -lp[1]), std::polar(1.0, -lp[0]), std::polar(1.0, -lp[0] - lp[1]));
  const Eigen::Matrix4cd uc = corr.asDiagonal() * u * std::polar(1.0, -p0);
  const Eigen::Vector4cd cz(1.0, 1.0, 1.0, -1.0);
  const cd tr = (cz.conjugate().asDiagonal() * uc).trace();
  r.fidelity = (std::norm(tr) + (uc.adjoint() * uc).trace().real()) / 20.0;
  r.leakage = std::clamp(1.0 - u.colwise().squaredNorm().mean(), 0.0, 1.0);
  r.fidelity = std::clamp(r.fidelity, 0.0, 1.0);
  return r;
}

GateResult propagate(const DrivenModel& model, const PulseSchedule& schedule,
                     const std::array<std::string, 4>& computational, const PropagationOptions& opt) {
  const StaticFrame& f = model.base();
  std::array<std::size_t, 4> idx{};
  Eigen::MatrixXcd init = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(f.dimension()), 4);
  for (int i = 0; i < 4; ++i) {
    idx[i] = frame_index(f, computational[i], true);
    init(static_cast<Eigen::Index>(idx[i]), i) = 1.0;
  }
  const Eigen::MatrixXcd out = propagate_states(model, schedule, init, opt);
  Eigen::Matrix4cd u;
  for (int r = 0; r < 4; ++r) u.row(r) = out.row(static_cast<Eigen::Index>(idx[r]));
  GateResult g = gate_metrics(u);
  g.final_amplitudes = out;
  return g;
}

nlohmann::json GateResult::to_json() const {
  nlohmann::json j;
  if (has_gate) {
    j["conditional_phase"] = conditional_phase;
    j["leakage"] = leakage;
    j["fidelity"] = fidelity;
    j["local_phases"] = {local_phases[0], local_phases[1]};
    nlohmann::json m = nlohmann::json::array();
    for (int r = 0; r < 4; ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < 4; ++c) row.push_back({computational(r, c).real(), computational(r, c).imag()});
      m.push_back(row);
    }
    j["computational_block"] = m;
  }
  return j;
}

Eigen::MatrixXd chevron_scan(const DrivenModel& model, const std::string& drive_node,
                             const std::vector<double>& frequencies, const std::vector<double>& amplitudes,
                             double duration, const std::string& initial_label, Envelope envelope,
                             const PropagationOptions& opt, int threads) {
  if (frequencies.empty() || amplitudes.empty()) throw ValidationError("chevron grid is empty");
  const StaticFrame& f = model.base();
  const std::size_t i0 = frame_index(f, initial_label, true);
  f.charge_of(drive_node);
  Eigen::MatrixXcd init = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(f.dimension()), 1);
  init(static_cast<Eigen::Index>(i0), 0) = 1.0;

  const std::size_t nf = frequencies.size(), na = amplitudes.size();
  Eigen::MatrixXd pop(static_cast<Eigen::Index>(nf), static_cast<Eigen::Index>(na));
  std::vector<std::exception_ptr> errors(nf * na);
  const auto workers = static_cast<std::size_t>(std::clamp<long>(threads, 1, static_cast<long>(nf * na)));
  auto run = [&](std::size_t w) {
    for (std::size_t p = w; p < nf * na; p += workers) {
      const std::size_t fi = p / na, ai = p % na;
      try {
        PulseSchedule s;
        s.total_duration = duration;
        s.segments.push_back({drive_node, Channel::ChargeDrive, envelope, amplitudes[ai], frequencies[fi], 0.0, 0.0,
                              duration, envelope == Envelope::CosineFlatTop ? duration / 4 : 0.0});
        const Eigen::MatrixXcd out = propagate_states(model, s, init, opt);
        pop(static_cast<Eigen::Index>(fi), static_cast<Eigen::Index>(ai)) =
            std::norm(out(static_cast<Eigen::Index>(i0), 0));
      } catch (...) {
        errors[p] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return pop;
}

LineFit fit_repeated_phase(const std::vector<double>& counts, const std::vector<double>& phases_in) {
  return fit_line(counts, unwrap_phase(phases_in));
}

CzCalibration calibrate_cz(const DrivenModel& model, const std::string& drive_node,
                           const std::pair<std::string, std::string>& target,
                           const std::array<std::string, 4>& computational, const CzCalibrationOptions& opt) {
  const StaticFrame& f = model.base();
  const std::size_t ti = frame_index(f, target.first, true);
  const std::size_t tf = frame_index(f, target.second, true);
  std::array<std::size_t, 4> comp{};
  for (int i = 0; i < 4; ++i) comp[i] = frame_index(f, computational[i], true);
  if (std::find(comp.begin(), comp.end(), ti) == comp.end())
    throw ValidationError("target initial state must be computational");
  const Eigen::MatrixXcd& n = f.charge_of(drive_node);
  const auto E = [&](std::size_t i) { return f.energies(static_cast<Eigen::Index>(i)); };
  const auto N = [&](std::size_t a, std::size_t b) {
    return std::abs(n(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
  };

  CzCalibration cal;
  // (i) identify the transition and check that it is isolated from every other driven transition
  // out of the computational subspace.
  const double f0 = E(tf) - E(ti);
  const double m = N(tf, ti);
  if (!(f0 > 0) || m < 1e-9) throw ValidationError("target transition is not driven by '" + drive_node + "'");
  double isolation = std::numeric_limits<double>::infinity();
  std::string competitor;
  for (std::size_t c : comp)
    for (std::size_t s = 0; s < f.dimension(); ++s) {
      if ((c == ti && s == tf) || E(s) <= E(c) || N(s, c) < 0.01 * m) continue;
      const double d = std::abs(E(s) - E(c) - f0);
      if (d < isolation) {
        isolation = d;
        competitor = f.labels[c] + "->" + f.labels[s];
      }
    }
  if (isolation < opt.min_isolation)
    throw ValidationError("no isolated transition: " + competitor + " lies " + fmt("%.3f", isolation * 1e3) +
                          " MHz from the target");
  cal.log.push_back("target " + target.first + "->" + target.second + fmt(" at %.6f GHz, |n| = %.4f", f0, m));
  cal.log.push_back("nearest competitor " + competitor + fmt(" at %.2f MHz", isolation * 1e3));

  PulseSegment seg{drive_node, Channel::ChargeDrive, opt.envelope, 0.0, f0, 0.0, 0.0, opt.duration,
                   opt.envelope == Envelope::CosineFlatTop ? opt.duration / 4 : 0.0};
  const double amp0 = 1.0 / (m * seg.area());

  auto schedule_for = [&](double freq, double amp) {
    PulseSchedule s;
    s.total_duration = opt.duration;
    PulseSegment g = seg;
    g.frequency = freq;
    g.amplitude = amp;
    s.segments.push_back(g);
    return s;
  };
  const Eigen::Index k = static_cast<Eigen::Index>(f.dimension());
  Eigen::MatrixXcd init1 = Eigen::MatrixXcd::Zero(k, 1);
  init1(static_cast<Eigen::Index>(ti), 0) = 1.0;
  Eigen::MatrixXcd init4 = Eigen::MatrixXcd::Zero(k, 4);
  for (int i = 0; i < 4; ++i) init4(static_cast<Eigen::Index>(comp[i]), i) = 1.0;

  PropagationOptions popt = opt.propagation;
  auto single = [&](double freq, double amp) {
    ++cal.evaluations;
    return propagate_states(model, schedule_for(freq, amp), init1, popt);
  };
  auto gate = [&](double freq, double amp) {
    ++cal.evaluations;
    const Eigen::MatrixXcd out = propagate_states(model, schedule_for(freq, amp), init4, popt);
    Eigen::Matrix4cd u;
    for (int r = 0; r < 4; ++r) u.row(r) = out.row(static_cast<Eigen::Index>(comp[r]));
    return gate_metrics(u);
  };

  double freq = f0, amp = amp0;

  // (ii a) golden-section on frequency, minimizing population lost from the initial state.
  auto golden = [&]() {
    double a = freq - opt.frequency_window, b = freq + opt.frequency_window;
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    auto loss = [&](double fr) { return 1.0 - std::norm(single(fr, amp)(static_cast<Eigen::Index>(ti), 0)); };
    double f1 = loss(x1), f2 = loss(x2);
    for (int it = 2; it < opt.budget && b - a > 1e-5; ++it) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - r * (b - a);
        f1 = loss(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + r * (b - a);
        f2 = loss(x2);
      }
    }
    freq = 0.5 * (a + b);
  };

  // (ii b) amplitude bisection on the sign of the target-state amplitude across the 2 pi return.
  auto amplitude_bisect = [&]() {
    const cd ref = single(freq, 0.5 * amp)(static_cast<Eigen::Index>(tf), 0);
    if (std::abs(ref) < 1e-6) throw NumericalError("calibration: no population transfer at the half-area pulse");
    auto sgn = [&](double a) { return (single(freq, a)(static_cast<Eigen::Index>(tf), 0) * std::conj(ref)).real(); };
    double lo = 0.85 * amp, hi = 1.15 * amp;
    double slo = sgn(lo), shi = sgn(hi);
    int evals = 2;
    while (slo * shi > 0 && evals < opt.budget) {
      if (slo > 0) {
        lo = hi;
        slo = shi;
        hi *= 1.1;
        shi = sgn(hi);
      } else {
        hi = lo;
        shi = slo;
        lo *= 0.9;
        slo = sgn(lo);
      }
      ++evals;
    }
    if (slo * shi > 0) throw NumericalError("calibration: could not bracket the 2 pi amplitude");
    const double scale = std::max(std::abs(slo), std::abs(shi));
    amp = illinois(sgn, lo, hi, slo, shi, 1e-10 * hi, 1e-9 * scale, opt.budget, evals).first;
  };

  // (iii) frequency fine-tune so the conditional phase reaches pi.
  auto phase_tune = [&]() {
    auto g = [&](double fr) { return wrap_pi(gate(fr, amp).conditional_phase - kPi); };
    double a = freq, ga = g(a);
    if (std::abs(ga) <= 0.1 * opt.phase_tolerance) return ga;
    // Secant steps from a finite-difference slope until the root is bracketed or hit.
    double b = a + 2e-5, gb = g(b);
    int evals = 2;
    while (ga * gb > 0 && evals < opt.budget) {
      double next = b - gb * (b - a) / (gb - ga);
      if (!std::isfinite(next) || std::abs(next - freq) > opt.frequency_window)
        throw NumericalError("calibration: conditional phase left the frequency window");
      a = b;
      ga = gb;
      b = next;
      gb = g(b);
      ++evals;
      if (std::abs(gb) <= 0.1 * opt.phase_tolerance) {
        freq = b;
        return gb;
      }
    }
    if (ga * gb > 0) throw NumericalError("calibration: could not bracket the pi conditional phase");
    const auto [c, gc] = illinois(g, a, b, ga, gb, 1e-10, 0.1 * opt.phase_tolerance, opt.budget, evals);
    freq = c;
    return gc;
  };

  auto rounds = [&](const char* tag) {
    double err = 0.0;
    for (int r = 0; r < opt.rounds; ++r) {
      const double prev_amp = amp;
      amplitude_bisect();
      err = phase_tune();
      cal.log.push_back(std::string(tag) + fmt(" round: f = %.7f GHz, amp = %.7f, phase error = %.2e rad", freq, amp, err));
      if (std::abs(err) <= opt.phase_tolerance && std::abs(amp - prev_amp) < 1e-5 * amp) break;
    }
    return err;
  };

  if (opt.rwa_presearch && popt.frame == Frame::Lab) {
    popt.frame = Frame::Rwa;
    golden();
    rounds("rwa");
    popt.frame = Frame::Lab;
  } else {
    golden();
  }
  cal.log.push_back(fmt("frequency search: f = %.7f GHz (%.3f MHz from the spectral value)", freq, (freq - f0) * 1e3));
  const double err = rounds(popt.frame == Frame::Lab ? "lab" : "rwa");
  if (std::abs(err) > opt.phase_tolerance)
    throw NumericalError("calibration did not converge: conditional phase error " + fmt("%.3e", err) + " rad");

  cal.frequency = freq;
  cal.amplitude = amp;
  cal.schedule = schedule_for(freq, amp);

  // (iv) single-qubit phases from repeated application of the full propagator.
  ++cal.evaluations;
  const Eigen::MatrixXcd full = propagate_states(model, cal.schedule, Eigen::MatrixXcd::Identity(k, k), popt);
  Eigen::Matrix4cd u;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      u(r, c) = full(static_cast<Eigen::Index>(comp[r]), static_cast<Eigen::Index>(comp[c]));
  std::vector<double> counts, ph1, ph2;
  Eigen::MatrixXcd power = Eigen::MatrixXcd::Identity(k, k);
  for (int rep = 1; rep <= opt.repetitions; ++rep) {
    power = full * power;
    const auto amp_of = [&](int i) {
      return power(static_cast<Eigen::Index>(comp[i]), static_cast<Eigen::Index>(comp[i]));
    };
    counts.push_back(rep);
    ph1.push_back(std::arg(amp_of(2) * std::conj(amp_of(0))));
    ph2.push_back(std::arg(amp_of(1) * std::conj(amp_of(0))));
  }
  cal.phase_corrections = {fit_repeated_phase(counts, ph1).slope, fit_repeated_phase(counts, ph2).slope};
  cal.result = gate_metrics(u, cal.phase_corrections);
  cal.result.final_amplitudes = full;
  cal.log.push_back(fmt("fidelity %.7f, leakage %.2e, conditional phase %.6f", cal.result.fidelity,
                        cal.result.leakage, cal.result.conditional_phase));
  return cal;
}

nlohmann::json CzCalibration::to_json() const {
  return {{"schedule", schedule.to_json()},
          {"frequency", frequency},
          {"amplitude", amplitude},
          {"phase_corrections", {phase_corrections[0], phase_corrections[1]}},
          {"evaluations", evaluations},
          {"gate", result.to_json()},
          {"log", log}};
}

double detuning_phase_error(double delta, double rabi) {
  if (!(rabi > 0)) throw ValidationError("rabi rate must be positive");
  const double cos_theta = delta / std::hypot(delta, rabi);
  const double phi_g = kPi * (1.0 - cos_theta);
  return std::abs(phi_g - kPi);
}

double SpectatorReport::max_phase_error() const {
  double m = 0.0;
  for (const auto& r : rows) m = std::max(m, r.phase_error);
  return m;
}

nlohmann::json SpectatorReport::to_json() const {
  nlohmann::json j{{"gate_time_ns", gate_time}, {"rabi_ghz", rabi}, {"rows", nlohmann::json::array()}};
  for (const auto& r : rows)
    j["rows"].push_back({{"state", std::string(1, r.state)},
                         {"frequency_ghz", r.frequency},
                         {"shift_khz", r.shift * 1e6},
                         {"phase_error_rad", r.phase_error}});
  return j;
}

SpectatorReport spectator_phase_report(const DeviceConfig& config, const std::pair<std::string, std::string>& active_pair,
                                       const std::string& spectator,
                                       const std::pair<std::string, std::string>& drive_states,
                                       const std::string& states, const FluxPoint& coupler_fluxes, double gate_time,
                                       const EpsilonMaxOptions& opt) {
  if (!(gate_time > 0)) throw ValidationError("gate time must be positive");
  std::string all = states;
  if (all.find('g') == std::string::npos) all.insert(all.begin(), 'g');
  const auto sf = spectator_frequencies(config.with_flux(coupler_fluxes), active_pair, spectator, drive_states,
                                        std::nullopt, all, opt);
  SpectatorReport rep;
  rep.gate_time = gate_time;
  rep.rabi = 1.0 / gate_time;
  const double ref = sf.frequency.at('g');
  for (char s : states) {
    SpectatorRow row;
    row.state = s;
    row.frequency = sf.frequency.at(s);
    row.shift = row.frequency - ref;
    row.phase_error = detuning_phase_error(row.shift, rep.rabi);
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace ftf
