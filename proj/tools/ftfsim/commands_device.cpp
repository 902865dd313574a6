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

// Subcommands backed by the device model: spectra, selectivity metrics, pulse dynamics, open-system runs.

#include <memory>
#include <sstream>

#include "ftf/dynamics.hpp"
#include "ftf/errors.hpp"
#include "ftf/open_system.hpp"
#include "ftf/spectral.hpp"
#include "run.hpp"

namespace ftfsim {

namespace {

std::vector<std::string> parse_nodes(const std::string& text) {
  auto v = split(text, ',');
  for (const auto& s : v)
    if (s.empty()) throw ftf::ValidationError("empty node name in '" + text + "'");
  return v;
}

void check_sweep_node(const ftf::DeviceConfig& cfg, const std::vector<std::string>& chain, const std::string& node) {
  if (!cfg.has_node(node)) throw ftf::ValidationError("sweep node '" + node + "' not in config");
  if (cfg.node(node).is_fluxonium()) throw ftf::ValidationError("sweep node '" + node + "' is not a coupler");
  if (!chain.empty() && std::find(chain.begin(), chain.end(), node) == chain.end())
    throw ftf::ValidationError("sweep node '" + node + "' is not between the pair");
}

void write_sweep(Run& run, const std::string& stem, const ftf::SweepResult& s) {
  run.write(stem + ".csv", s.to_csv());
  run.write_json(stem + ".json", s.to_json());
}

ftf::Envelope parse_envelope(const std::string& s) {
  if (s == "square") return ftf::Envelope::Square;
  if (s == "cosine") return ftf::Envelope::Cosine;
  if (s == "flat-top") return ftf::Envelope::CosineFlatTop;
  throw ftf::ValidationError("unknown envelope '" + s + "'");
}

ftf::Frame parse_frame(const std::string& s) {
  if (s == "lab") return ftf::Frame::Lab;
  if (s == "rwa") return ftf::Frame::Rwa;
  throw ftf::ValidationError("unknown frame '" + s + "'");
}

struct SubsystemOpts {
  std::string subsystem = "Q2,C23,Q3";
  std::string levels;
  int n_states = 0;
};

void add_subsystem(CLI::App* sub, SubsystemOpts& o) {
  sub->add_option("--subsystem", o.subsystem, "Comma-separated contiguous nodes")->capture_default_str();
  sub->add_option("--levels", o.levels, "Kept levels per node, e.g. Q2=5,C23=4");
  sub->add_option("--n-states", o.n_states, "Dressed states kept (0 = all)")->capture_default_str();
}

}  // namespace

void register_device_commands(CLI::App& app, CommonOptions& common, std::function<void(Run&)>& action) {
  {
    auto* sub = app.add_subcommand("spectrum", "Dressed spectrum with bare-state labels");
    add_common(sub, common);
    auto o = std::make_shared<SubsystemOpts>();
    add_subsystem(sub, *o);
    sub->callback([&action, o] {
      action = [o](Run& run) {
        const auto sys = run.stage("diagonalize", [&] {
          return ftf::solve_subsystem(run.config(), parse_nodes(o->subsystem), parse_levels(o->levels), o->n_states);
        });
        const auto& s = sys.spectrum;
        std::string csv = "index,label,energy_ghz,overlap,ambiguous\n";
        for (std::size_t i = 0; i < s.size(); ++i)
          csv += std::to_string(i) + "," + s.labels[i] + "," + num(s.energies(static_cast<Eigen::Index>(i))) + "," +
                 num(s.overlaps[i]) + "," + (s.ambiguous[i] ? "1" : "0") + "\n";
        run.write_json("spectrum.json", ftf::to_json(s));
        run.write("spectrum.csv", csv);
      };
    });
  }
  {
    auto* sub = app.add_subcommand("transitions", "Single-node transitions out of a dressed state");
    add_common(sub, common);
    auto o = std::make_shared<SubsystemOpts>();
    auto from = std::make_shared<std::string>("ggg");
    auto step = std::make_shared<int>(1);
    add_subsystem(sub, *o);
    sub->add_option("--from", *from, "Initial state label")->capture_default_str();
    sub->add_option("--max-step", *step, "Largest level change on the raised node")->capture_default_str();
    sub->callback([&action, o, from, step] {
      action = [o, from, step](Run& run) {
        const auto sys = ftf::solve_subsystem(run.config(), parse_nodes(o->subsystem), parse_levels(o->levels), o->n_states);
        const auto table = run.stage("transitions", [&] { return ftf::transition_table(sys, *from, *step); });
        std::string csv = "initial,final,frequency_ghz";
        for (const auto& n : sys.ops.nodes) csv += ",n_" + n;
        csv += "\n";
        nlohmann::json j = nlohmann::json::array();
        for (const auto& t : table.transitions) {
          csv += t.initial + "," + t.final_state + "," + num(t.frequency);
          for (const auto& n : sys.ops.nodes) csv += "," + num(t.matrix_element.at(n));
          csv += "\n";
          j.push_back({{"initial", t.initial}, {"final", t.final_state}, {"frequency_ghz", t.frequency},
                       {"matrix_element", t.matrix_element}});
        }
        run.write_json("transitions.json", {{"from", *from}, {"transitions", j}});
        run.write("transitions.csv", csv);
      };
    });
  }
  {
    struct Opts {
      std::string pair = "Q1,Q2", target = "ggg,geg", levels, drive, sweep;
      double flux = 0.5, min_strength = 0.01;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("delta-min", "Detuning to the nearest competing transition");
    add_common(sub, common);
    sub->add_option("--pair", o->pair, "Active qubit pair")->capture_default_str();
    sub->add_option("--target", o->target, "Target transition initial,final")->capture_default_str();
    sub->add_option("--coupler-flux", o->flux, "Flux on the couplers between the pair")->capture_default_str();
    sub->add_option("--sweep", o->sweep, "Coupler flux sweep NODE=start:stop:step");
    sub->add_option("--levels", o->levels, "Kept levels per node");
    sub->add_option("--drive", o->drive, "Driven node (default: the coupler)");
    sub->add_option("--min-strength", o->min_strength, "Ignore competitors weaker than this fraction of the target")
        ->capture_default_str();
    sub->callback([&action, o] {
      action = [o](Run& run) {
        const auto& cfg = run.config();
        const auto pair = parse_pair(o->pair);
        const auto target = parse_pair(o->target);
        ftf::DeltaMinOptions opt{parse_levels(o->levels), o->drive, o->min_strength};
        const auto chain = ftf::chain_between(cfg, {pair.first, pair.second});
        if (!o->sweep.empty()) {
          const Sweep sw = parse_sweep(o->sweep);
          check_sweep_node(cfg, chain, sw.node);
          const auto res = run.stage("sweep", [&] {
            return ftf::flux_sweep(
                "delta_min_ghz", [&](double x) { return ftf::delta_min(cfg, pair, target, x, opt); }, sw.axis,
                run.threads(), o->pair);
          });
          write_sweep(run, "delta_min", res);
          return;
        }
        ftf::FluxPoint fp;
        for (const auto& n : chain)
          if (!cfg.node(n).is_fluxonium()) fp[n] = o->flux;
        const auto sys = ftf::solve_subsystem(cfg.with_flux(fp), chain, opt.levels);
        const auto d = run.stage("delta-min", [&] { return ftf::delta_min_detail(sys, target, opt); });
        run.write_json("delta_min.json", {{"pair", o->pair},
                                          {"target", {target.first, target.second}},
                                          {"coupler_flux", o->flux},
                                          {"delta_min_ghz", d.delta_min},
                                          {"target_frequency_ghz", d.target_frequency},
                                          {"target_matrix_element", d.target_matrix_element},
                                          {"competitor", {d.competitor_initial, d.competitor_final}},
                                          {"competitor_frequency_ghz", d.competitor_frequency}});
      };
    });
  }
  {
    struct Opts {
      std::string pair = "Q1,Q2", spectator = "Q3", drive = "ggg,geg", levels, sweep;
      double off_flux = 0.0;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("epsilon-max", "Largest spectator-dependent shift of the gate transition");
    add_common(sub, common);
    sub->add_option("--pair", o->pair, "Active qubit pair")->capture_default_str();
    sub->add_option("--spectator", o->spectator, "Spectator qubit")->capture_default_str();
    sub->add_option("--drive", o->drive, "Gate transition over the active chain, initial,final")->capture_default_str();
    sub->add_option("--spectator-flux", o->off_flux, "Flux of the coupler to the spectator")->capture_default_str();
    sub->add_option("--sweep", o->sweep, "Spectator-coupler flux sweep NODE=start:stop:step");
    sub->add_option("--levels", o->levels, "Kept levels per node (default 5 per qubit, 4 per coupler)");
    sub->callback([&action, o] {
      action = [o](Run& run) {
        const auto& cfg = run.config();
        const auto pair = parse_pair(o->pair);
        const auto drive = parse_pair(o->drive);
        ftf::EpsilonMaxOptions opt;
        opt.levels = parse_levels(o->levels);
        if (!o->sweep.empty()) {
          const Sweep sw = parse_sweep(o->sweep);
          check_sweep_node(cfg, {}, sw.node);
          const auto res = run.stage("sweep", [&] {
            return ftf::flux_sweep(
                "epsilon_max_ghz",
                [&](double x) { return ftf::epsilon_max(cfg, pair, o->spectator, drive, x, opt); }, sw.axis,
                run.threads(), o->pair + "+" + o->spectator);
          });
          write_sweep(run, "epsilon_max", res);
          return;
        }
        const auto r = run.stage("epsilon-max", [&] {
          return ftf::epsilon_max_detail(cfg, pair, o->spectator, drive, o->off_flux, opt);
        });
        nlohmann::json f;
        for (const auto& [k, v] : r.frequency) f[std::string(1, k)] = v;
        run.write_json("epsilon_max.json", {{"pair", o->pair},
                                            {"spectator", o->spectator},
                                            {"spectator_flux", o->off_flux},
                                            {"epsilon_max_ghz", r.epsilon_max},
                                            {"frequency_ghz", f},
                                            {"min_overlap", r.min_overlap}});
      };
    });
  }
  {
    struct Opts {
      std::string pair = "Q1,Q2", levels, sweep;
      bool ramsey = false;
      double ramsey_time = 20000.0;
      int ramsey_points = 41;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("zz", "Static ZZ between two qubits");
    add_common(sub, common);
    sub->add_option("--pair", o->pair, "Qubit pair")->capture_default_str();
    sub->add_option("--levels", o->levels, "Kept levels per node");
    sub->add_option("--sweep", o->sweep, "Coupler flux sweep NODE=start:stop:step");
    sub->add_flag("--ramsey", o->ramsey, "Cross-check with a time-domain conditional Ramsey");
    sub->add_option("--ramsey-time", o->ramsey_time, "Ramsey window, ns")->capture_default_str();
    sub->add_option("--ramsey-points", o->ramsey_points, "Ramsey samples")->capture_default_str();
    sub->callback([&action, o] {
      action = [o](Run& run) {
        const auto& cfg = run.config();
        const auto pair = parse_pair(o->pair);
        const auto levels = parse_levels(o->levels);
        const auto chain = ftf::chain_between(cfg, {pair.first, pair.second});
        if (!o->sweep.empty()) {
          const Sweep sw = parse_sweep(o->sweep);
          check_sweep_node(cfg, {}, sw.node);
          const auto res = run.stage("sweep", [&] {
            return ftf::flux_sweep(
                "zeta_ghz",
                [&](double x) {
                  ftf::FluxPoint fp = cfg.flux_point();
                  fp[sw.node] = x;
                  return ftf::static_zz(cfg, pair, fp, levels);
                },
                sw.axis, run.threads(), o->pair);
          });
          write_sweep(run, "zz", res);
          return;
        }
        const double zeta = run.stage("eigen", [&] { return ftf::static_zz(cfg, pair, cfg.flux_point(), levels); });
        nlohmann::json j{{"pair", o->pair}, {"flux_point", cfg.flux_point()}, {"zeta_ghz", zeta}, {"zeta_khz", zeta * 1e6}};
        if (o->ramsey) {
          if (o->ramsey_points < 3 || !(o->ramsey_time > 0)) throw ftf::ValidationError("bad Ramsey grid");
          std::vector<double> times;
          for (int i = 0; i < o->ramsey_points; ++i) times.push_back(o->ramsey_time * i / (o->ramsey_points - 1));
          const auto r = run.stage("ramsey", [&] {
            ftf::DrivenModel model(cfg, chain, levels);
            return ftf::conditional_ramsey_zz(model, pair.second, pair.first, times);
          });
          j["ramsey"] = r.to_json();
          // g_zz = omega(control g) - omega(control e) = -zeta.
          j["ramsey_minus_eigen_khz"] = (-r.g_zz - zeta) * 1e6;
        }
        run.write_json("zz.json", j);
      };
    });
  }
  {
    struct Opts {
      SubsystemOpts sys;
      std::string drive = "C23", initial = "egg", freq, amp, envelope = "square", frame = "lab";
      double duration = 60.0;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("chevron", "Population left in the initial state over drive frequency and amplitude");
    add_common(sub, common);
    add_subsystem(sub, o->sys);
    sub->add_option("--drive", o->drive, "Driven node")->capture_default_str();
    sub->add_option("--initial", o->initial, "Initial state label")->capture_default_str();
    sub->add_option("--freq", o->freq, "Frequencies, GHz (start:stop:step or list)")->required();
    sub->add_option("--amp", o->amp, "Amplitudes, GHz per unit charge (start:stop:step or list)")->required();
    sub->add_option("--duration", o->duration, "Pulse length, ns")->capture_default_str();
    sub->add_option("--envelope", o->envelope, "square | cosine | flat-top")->capture_default_str();
    sub->add_option("--frame", o->frame, "lab | rwa")->capture_default_str();
    sub->callback([&action, o] {
      action = [o](Run& run) {
        const auto freqs = parse_axis(o->freq);
        const auto amps = parse_axis(o->amp);
        ftf::PropagationOptions popt;
        popt.frame = parse_frame(o->frame);
        const auto env = parse_envelope(o->envelope);
        const auto pop = run.stage("scan", [&] {
          ftf::DrivenModel model(run.config(), parse_nodes(o->sys.subsystem), parse_levels(o->sys.levels),
                                 o->sys.n_states);
          return ftf::chevron_scan(model, o->drive, freqs, amps, o->duration, o->initial, env, popt, run.threads());
        });
        std::string csv = "frequency_ghz,amplitude,population\n";
        for (std::size_t i = 0; i < freqs.size(); ++i)
          for (std::size_t k = 0; k < amps.size(); ++k)
            csv += num(freqs[i]) + "," + num(amps[k]) + "," +
                   num(pop(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k))) + "\n";
        run.write("chevron.csv", csv);
      };
    });
  }
  {
    struct Opts {
      SubsystemOpts sys{"Q2,C23,Q3", "Q2=5,C23=4,Q3=5", 48};
      std::string drive = "C23", target = "egg,eeg", envelope = "cosine";
      double duration = 60.0;
      bool no_presearch = false;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("calibrate-cz", "Calibrate a microwave-activated CZ (use --flux to set the coupler ON)");
    add_common(sub, common);
    add_subsystem(sub, o->sys);
    sub->add_option("--drive", o->drive, "Driven node")->capture_default_str();
    sub->add_option("--target", o->target, "Driven transition initial,final")->capture_default_str();
    sub->add_option("--duration", o->duration, "Drive length, ns")->capture_default_str();
    sub->add_option("--envelope", o->envelope, "square | cosine | flat-top")->capture_default_str();
    sub->add_flag("--no-presearch", o->no_presearch, "Skip the rotating-frame presearch");
    sub->callback([&action, o] {
      action = [o](Run& run) {
        const auto chain = parse_nodes(o->sys.subsystem);
        ftf::CzCalibrationOptions opt;
        opt.duration = o->duration;
        opt.envelope = parse_envelope(o->envelope);
        opt.rwa_presearch = !o->no_presearch;
        const auto cal = run.stage("calibrate", [&] {
          ftf::DrivenModel model(run.config(), chain, parse_levels(o->sys.levels), o->sys.n_states);
          return ftf::calibrate_cz(model, o->drive, parse_pair(o->target), ftf::computational_labels(chain), opt);
        });
        run.write_json("cz.json", cal.to_json());
        run.write_json("schedule.json", cal.schedule.to_json());
      };
    });
  }
  {
    struct Opts {
      std::string pair = "Q1,Q2", spectator = "Q3", states = "ef", levels;
      std::vector<std::string> drives;
      double gate_time = 120.0;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("spectator-report", "Spectator shifts and geometric phase errors");
    add_common(sub, common);
    sub->add_option("--pair", o->pair, "Active qubit pair")->capture_default_str();
    sub->add_option("--spectator", o->spectator, "Spectator qubit")->capture_default_str();
    sub->add_option("--drive", o->drives, "Gate transition initial,final (repeatable; default ggg,geg)");
    sub->add_option("--states", o->states, "Spectator states relative to g")->capture_default_str();
    sub->add_option("--gate-time", o->gate_time, "Cyclic pulse length, ns")->capture_default_str();
    sub->add_option("--levels", o->levels, "Kept levels per node");
    sub->callback([&action, o] {
      action = [o](Run& run) {
        const auto& cfg = run.config();
        ftf::EpsilonMaxOptions opt;
        opt.levels = parse_levels(o->levels);
        std::vector<std::string> drives = o->drives.empty() ? std::vector<std::string>{"ggg,geg"} : o->drives;
        nlohmann::json rows = nlohmann::json::array();
        double worst = 0.0;
        std::string csv = "initial,final,state,frequency_ghz,shift_khz,phase_error_rad\n";
        for (const auto& d : drives) {
          const auto dp = parse_pair(d);
          const auto rep = run.stage("report " + d, [&] {
            return ftf::spectator_phase_report(cfg, parse_pair(o->pair), o->spectator, dp, o->states, {}, o->gate_time,
                                               opt);
          });
          worst = std::max(worst, rep.max_phase_error());
          nlohmann::json j = rep.to_json();
          j["drive"] = {dp.first, dp.second};
          rows.push_back(j);
          for (const auto& r : rep.rows)
            csv += dp.first + "," + dp.second + "," + std::string(1, r.state) + "," + num(r.frequency) + "," +
                   num(r.shift * 1e6) + "," + num(r.phase_error) + "\n";
        }
        run.write_json("spectator.json", {{"pair", o->pair},
                                          {"spectator", o->spectator},
                                          {"flux_point", cfg.flux_point()},
                                          {"max_phase_error_rad", worst},
                                          {"transitions", rows}});
        run.write("spectator.csv", csv);
      };
    });
  }
  {
    struct Opts {
      double g = 0.01, kappa_c = 0.2, kappa_t = 0.01;
      int points = 300;
      double t_max = 0.0;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("cond-t1", "Conditional-T1 estimate of residual XX coupling");
    add_common(sub, common);
    sub->add_option("--g", o->g, "Injected exchange, angular 1/us")->capture_default_str();
    sub->add_option("--kappa-c", o->kappa_c, "Control relaxation, 1/us")->capture_default_str();
    sub->add_option("--kappa-t", o->kappa_t, "Target relaxation, 1/us")->capture_default_str();
    sub->add_option("--points", o->points, "Time samples")->capture_default_str();
    sub->add_option("--t-max", o->t_max, "Window, us (0: three weak-coupling decay times)")->capture_default_str();
    sub->callback([&action, o] {
      action = [o](Run& run) {
        if (o->points < 10) throw ftf::ValidationError("need at least 10 time samples");
        std::vector<double> times;
        if (o->t_max > 0)
          for (int i = 0; i < o->points; ++i) times.push_back(o->t_max * i / (o->points - 1));
        const auto r = run.stage("lindblad", [&] {
          return ftf::simulate_conditional_t1(o->g, o->kappa_c, o->kappa_t, times);
        });
        std::string csv = "time_us,target_e_control_g,both_e\n";
        for (std::size_t i = 0; i < r.times.size(); ++i)
          csv += num(r.times[i]) + "," + num(r.target_g[i]) + "," + num(r.target_e[i]) + "\n";
        nlohmann::json j = r.to_json();
        j["injected_g"] = o->g;
        j["formula_rate"] = ftf::effective_target_rate(o->g, o->kappa_c, o->kappa_t);
        run.write_json("cond_t1.json", j);
        run.write("cond_t1.csv", csv);
      };
    });
  }
}

}  // namespace ftfsim
