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

#include "ftf/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <set>
#include <thread>

#include "ftf/errors.hpp"

namespace ftf {

namespace {

bool is_coupler(const OperatorSet& ops, std::size_t k) { return ops.elements[k].kind == BasisKind::TransmonCharge; }

Eigen::VectorXcd dressed_column(const Subsystem& sys, std::size_t node, std::size_t state) {
  return sys.eig.vectors.adjoint() * (sys.ops.charge_ops[node] * sys.eig.vectors.col(static_cast<Eigen::Index>(state)));
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

// Re-throws the active exception with context, keeping its category.
[[noreturn]] void rethrow_with_context(std::exception_ptr ep, const std::string& context) {
  try {
    std::rethrow_exception(ep);
  } catch (const AmbiguityError& e) {
    throw AmbiguityError(context + e.what());
  } catch (const DimensionError& e) {
    throw DimensionError(context + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(context + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(context + e.what());
  } catch (const std::exception& e) {
    throw NumericalError(context + e.what());
  }
}

void check_axis(const std::vector<double>& axis) {
  if (axis.empty()) throw ValidationError("sweep axis is empty");
  for (std::size_t i = 1; i < axis.size(); ++i)
    if (!(axis[i] > axis[i - 1])) throw ValidationError("axis not increasing");
}

}  // namespace

const Transition& TransitionTable::find(const std::string& final_state) const {
  for (const auto& t : transitions)
    if (t.final_state == final_state) return t;
  throw ValidationError("no transition to '" + final_state + "'");
}

TransitionTable transition_table(const Subsystem& sys, const std::string& from_label, int max_step) {
  const auto& spec = sys.spectrum;
  const std::size_t i = spec.index(from_label);
  const double ei = spec.energies(static_cast<Eigen::Index>(i));
  std::vector<Eigen::VectorXcd> cols;
  for (std::size_t k = 0; k < sys.ops.nodes.size(); ++k) cols.push_back(dressed_column(sys, k, i));

  TransitionTable table;
  for (std::size_t f = 0; f < spec.size(); ++f) {
    const std::string& lf = spec.labels[f];
    int changed = 0, step = 0;
    for (std::size_t c = 0; c < lf.size(); ++c)
      if (lf[c] != from_label[c]) {
        ++changed;
        step = level_from_letter(lf[c]) - level_from_letter(from_label[c]);
      }
    if (changed != 1 || step < 1 || step > max_step) continue;
    Transition t;
    t.initial = from_label;
    t.final_state = lf;
    t.frequency = spec.energies(static_cast<Eigen::Index>(f)) - ei;
    for (std::size_t k = 0; k < sys.ops.nodes.size(); ++k)
      t.matrix_element[sys.ops.nodes[k]] = std::abs(cols[k](static_cast<Eigen::Index>(f)));
    table.transitions.push_back(std::move(t));
  }
  std::sort(table.transitions.begin(), table.transitions.end(),
            [](const Transition& a, const Transition& b) { return a.frequency < b.frequency; });
  return table;
}

std::vector<std::string> chain_between(const DeviceConfig& config, const std::vector<std::string>& names) {
  std::size_t lo = config.nodes().size(), hi = 0;
  for (const auto& n : names) {
    const std::size_t i = config.index_of(n);
    lo = std::min(lo, i);
    hi = std::max(hi, i);
  }
  std::vector<std::string> out;
  for (std::size_t i = lo; i <= hi; ++i) out.push_back(config.nodes()[i].name);
  return out;
}

double min_detuning(double target, const std::vector<double>& others) {
  double best = std::numeric_limits<double>::infinity();
  for (double f : others) best = std::min(best, std::abs(f - target));
  return best;
}

DeltaMinResult delta_min_detail(const Subsystem& sys, const std::pair<std::string, std::string>& target,
                                const DeltaMinOptions& opt) {
  const auto& spec = sys.spectrum;
  const std::size_t ti = spec.resolved_index(target.first);
  const std::size_t tf = spec.resolved_index(target.second);

  std::size_t drive = sys.ops.nodes.size();
  if (!opt.drive_node.empty()) {
    drive = sys.ops.node_index(opt.drive_node);
  } else {
    for (std::size_t k = 0; k < sys.ops.nodes.size() && drive == sys.ops.nodes.size(); ++k)
      if (is_coupler(sys.ops, k)) drive = k;
    if (drive == sys.ops.nodes.size()) drive = 0;
  }
  const Eigen::MatrixXcd nd = sys.dressed_charge(sys.ops.nodes[drive]);

  DeltaMinResult r;
  r.target_frequency = spec.energies(static_cast<Eigen::Index>(tf)) - spec.energies(static_cast<Eigen::Index>(ti));
  r.target_matrix_element = std::abs(nd(static_cast<Eigen::Index>(tf), static_cast<Eigen::Index>(ti)));
  r.delta_min = std::numeric_limits<double>::infinity();

  // Target initial state plus its one-level neighbours.
  std::vector<std::size_t> inits{ti};
  const std::string& l0 = target.first;
  for (std::size_t c = 0; c < l0.size(); ++c)
    for (int d : {-1, 1}) {
      const int lv = level_from_letter(l0[c]) + d;
      if (lv < 0 || lv >= sys.ops.levels[c]) continue;
      std::string n = l0;
      n[c] = level_letter(lv)[0];
      if (spec.has(n)) inits.push_back(spec.index(n));
    }
  const int max_count = excitation_count(target.second) + 1;
  const double threshold = opt.min_relative_strength * r.target_matrix_element;

  for (std::size_t i : inits) {
    const double ei = spec.energies(static_cast<Eigen::Index>(i));
    for (std::size_t f = 0; f < spec.size(); ++f) {
      if (i == ti && f == tf) continue;
      const double ef = spec.energies(static_cast<Eigen::Index>(f));
      if (ef <= ei || excitation_count(spec.labels[f]) > max_count) continue;
      if (std::abs(nd(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(i))) < threshold) continue;
      const double det = std::abs((ef - ei) - r.target_frequency);
      if (det < r.delta_min) {
        r.delta_min = det;
        r.competitor_initial = spec.labels[i];
        r.competitor_final = spec.labels[f];
        r.competitor_frequency = ef - ei;
      }
    }
  }
  return r;
}

double delta_min(const DeviceConfig& config, const std::pair<std::string, std::string>& active_pair,
                 const std::pair<std::string, std::string>& target, double flux, const DeltaMinOptions& opt) {
  const auto chain = chain_between(config, {active_pair.first, active_pair.second});
  FluxPoint fp;
  for (const auto& n : chain)
    if (!config.node(n).is_fluxonium()) fp[n] = flux;
  const Subsystem sys = solve_subsystem(config.with_flux(fp), chain, opt.levels);
  return delta_min_detail(sys, target, opt).delta_min;
}

std::string compose_label(const std::vector<std::string>& chain, const std::map<std::string, char>& letters) {
  std::string s;
  for (const auto& n : chain) {
    auto it = letters.find(n);
    s += it == letters.end() ? 'g' : it->second;
  }
  return s;
}

SpectatorFrequencies spectator_frequencies(const DeviceConfig& config,
                                           const std::pair<std::string, std::string>& active_pair,
                                           const std::string& spectator,
                                           const std::pair<std::string, std::string>& drive_states,
                                           std::optional<double> spectator_coupler_flux, const std::string& states,
                                           const EpsilonMaxOptions& opt) {
  const auto active = chain_between(config, {active_pair.first, active_pair.second});
  const auto chain = chain_between(config, {active_pair.first, active_pair.second, spectator});
  if (std::find(active.begin(), active.end(), spectator) != active.end())
    throw ValidationError("spectator '" + spectator + "' lies inside the active chain");
  if (drive_states.first.size() != active.size() || drive_states.second.size() != active.size())
    throw ValidationError("drive-state labels must have one letter per active-chain node");
  if (states.empty()) throw ValidationError("no spectator states requested");

  FluxPoint fp;
  LevelMap levels = opt.levels;
  for (const auto& n : chain) {
    const bool in_active = std::find(active.begin(), active.end(), n) != active.end();
    if (spectator_coupler_flux && !in_active && n != spectator && !config.node(n).is_fluxonium())
      fp[n] = *spectator_coupler_flux;
    if (!levels.count(n)) levels[n] = config.node(n).is_fluxonium() ? 5 : 4;
  }
  const OperatorSet ops = build_composite(config.with_flux(fp), chain, levels);

  auto label_for = [&](const std::string& drive, char k) {
    std::map<std::string, char> letters;
    for (std::size_t i = 0; i < active.size(); ++i) letters[active[i]] = drive[i];
    letters[spectator] = k;
    return compose_label(chain, letters);
  };
  double cutoff = 0.0;
  for (const auto& drive : {drive_states.first, drive_states.second})
    for (char k : states) {
      const std::string l = label_for(drive, k);
      std::vector<int> d;
      for (char c : l) d.push_back(level_from_letter(c));
      for (std::size_t i = 0; i < d.size(); ++i)
        if (d[i] >= ops.levels[i]) throw ValidationError("label '" + l + "' exceeds the kept levels");
      cutoff = std::max(cutoff, ops.bare_energy(ops.product_index(d)));
    }
  const EigenSystem eig = diagonalize(ops, count_bare_states_below(ops, cutoff + opt.energy_margin));
  const SpectrumResult spec = label_states(ops, eig);

  SpectatorFrequencies r;
  for (char k : states) {
    const std::size_t ia = spec.resolved_index(label_for(drive_states.first, k));
    const std::size_t ib = spec.resolved_index(label_for(drive_states.second, k));
    r.frequency[k] = spec.energies(static_cast<Eigen::Index>(ib)) - spec.energies(static_cast<Eigen::Index>(ia));
    r.min_overlap = std::min({r.min_overlap, spec.overlaps[ia], spec.overlaps[ib]});
  }
  return r;
}

EpsilonMaxResult epsilon_max_detail(const DeviceConfig& config, const std::pair<std::string, std::string>& active_pair,
                                    const std::string& spectator,
                                    const std::pair<std::string, std::string>& drive_states,
                                    double spectator_coupler_flux, const EpsilonMaxOptions& opt) {
  const auto sf = spectator_frequencies(config, active_pair, spectator, drive_states, spectator_coupler_flux, "gef", opt);
  EpsilonMaxResult r;
  r.frequency = sf.frequency;
  r.min_overlap = sf.min_overlap;
  for (const auto& [i, fi] : r.frequency)
    for (const auto& [j, fj] : r.frequency) r.epsilon_max = std::max(r.epsilon_max, std::abs(fi - fj));
  return r;
}

double epsilon_max(const DeviceConfig& config, const std::pair<std::string, std::string>& active_pair,
                   const std::string& spectator, const std::pair<std::string, std::string>& drive_states,
                   double spectator_coupler_flux, const EpsilonMaxOptions& opt) {
  return epsilon_max_detail(config, active_pair, spectator, drive_states, spectator_coupler_flux, opt).epsilon_max;
}

double static_zz(const DeviceConfig& config, const std::pair<std::string, std::string>& qubit_pair,
                 const FluxPoint& flux_point, const LevelMap& levels) {
  if (qubit_pair.first == qubit_pair.second) throw ValidationError("static_zz needs two distinct qubits");
  const auto chain = chain_between(config, {qubit_pair.first, qubit_pair.second});
  const Subsystem sys = solve_subsystem(config.with_flux(flux_point), chain, levels);
  const std::string& a = chain.front();
  const std::string& b = chain.back();
  auto e = [&](char x, char y) {
    return sys.spectrum.energies(
        static_cast<Eigen::Index>(sys.spectrum.resolved_index(compose_label(chain, {{a, x}, {b, y}}))));
  };
  return (e('e', 'e') + e('g', 'g')) - (e('e', 'g') + e('g', 'e'));
}

std::string SweepResult::to_csv() const {
  std::string s = "flux," + metric + "\n";
  for (std::size_t i = 0; i < axis.size(); ++i) s += format_double(axis[i]) + "," + format_double(values[i]) + "\n";
  return s;
}

nlohmann::json SweepResult::to_json() const {
  return {{"metric", metric}, {"subsystem", subsystem}, {"axis", axis}, {"values", values}};
}

std::vector<double> make_axis(double start, double stop, double step) {
  if (!(step > 0)) throw ValidationError("sweep step must be positive");
  if (!(stop >= start)) throw ValidationError("axis not increasing");
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> axis(n);
  for (std::size_t i = 0; i < n; ++i) axis[i] = start + static_cast<double>(i) * step;
  return axis;
}

SweepResult flux_sweep(const std::string& metric_name, const std::function<double(double)>& metric,
                       const std::vector<double>& axis, int threads, const std::string& subsystem) {
  check_axis(axis);
  SweepResult r{metric_name, subsystem, axis, std::vector<double>(axis.size())};
  std::vector<std::exception_ptr> errors(axis.size());
  const auto workers = static_cast<std::size_t>(std::clamp(threads, 1, static_cast<int>(axis.size())));
  auto run = [&](std::size_t w) {
    for (std::size_t i = w; i < axis.size(); i += workers) {
      try {
        r.values[i] = metric(axis[i]);
        if (!std::isfinite(r.values[i])) throw NumericalError("metric not finite");
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
  }
  for (std::size_t i = 0; i < axis.size(); ++i)
    if (errors[i]) rethrow_with_context(errors[i], "sweep point " + std::to_string(i) + " (flux " +
                                                       format_double(axis[i]) + "): ");
  return r;
}

SweepResult tracked_sweep(const std::string& metric_name, const DeviceConfig& config,
                          const std::vector<std::string>& subsystem, const LevelMap& levels, const std::string& node,
                          const std::vector<double>& axis, const std::function<double(const Subsystem&)>& metric) {
  check_axis(axis);
  SweepResult r{metric_name, node, axis, std::vector<double>(axis.size())};
  Subsystem prev;
  for (std::size_t i = 0; i < axis.size(); ++i) {
    try {
      Subsystem cur;
      cur.ops = build_composite(config.with_flux({{node, axis[i]}}), subsystem, levels);
      cur.eig = diagonalize(cur.ops);
      cur.spectrum = i == 0 ? label_states(cur.ops, cur.eig) : track_labels(prev.ops, prev.eig, prev.spectrum, cur.ops, cur.eig);
      r.values[i] = metric(cur);
      prev = std::move(cur);
    } catch (...) {
      rethrow_with_context(std::current_exception(),
                           "sweep point " + std::to_string(i) + " (flux " + format_double(axis[i]) + "): ");
    }
  }
  return r;
}

}  // namespace ftf
