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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "ftf/benchmarking.hpp"
#include "ftf/circuit.hpp"
#include "ftf/dynamics.hpp"
#include "ftf/hamiltonian.hpp"
#include "ftf/mitigation.hpp"
#include "ftf/open_system.hpp"
#include "ftf/spectral.hpp"
#include "oracles.hpp"

using namespace ftf;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

DeviceConfig unit_config() { return load_config(std::string(FTF_SOURCE_DIR) + "/configs/unit.cfg"); }

// ---- 1. spectral bands
Outcome spectral_bands() {
  const auto cfg = unit_config();
  Outcome o{true, ""};
  for (const auto& n : cfg.nodes()) {
    if (n.is_fluxonium()) {
      auto p = n.fluxonium();
      p.flux_ext = 0.5;
      const auto s = fluxonium_hamiltonian(p);
      const bool ok = s.f_ge() >= 0.1 && s.f_ge() <= 0.5 && s.f_ef() >= 3.9 && s.f_ef() <= 5.1;
      o.pass = o.pass && ok;
      o.detail += n.name + " f_ge=" + fmt("%.1f", s.f_ge() * 1e3) + "MHz f_ef=" + fmt("%.3f", s.f_ef()) + "GHz; ";
    } else {
      auto p = n.coupler();
      p.flux_ext = 0.0;
      const auto s = transmon_hamiltonian(p);
      o.pass = o.pass && s.f_ge() > 8.0;
      o.detail += n.name + " f_ge(0)=" + fmt("%.3f", s.f_ge()) + "GHz; ";
    }
  }
  return o;
}

// ---- 2. oscillator vs flux-grid basis, both checked against a finite-difference reference
Outcome cross_basis() {
  const auto cfg = unit_config();
  double worst = 0.0, worst_ref = 0.0;
  for (const auto& n : cfg.nodes()) {
    if (!n.is_fluxonium()) continue;
    for (double flux : {0.0, 0.25, 0.5}) {
      auto p = n.fluxonium();
      p.flux_ext = flux;
      const auto a = fluxonium_hamiltonian(p, ElementBasis::oscillator());
      const auto b = fluxonium_hamiltonian(p, ElementBasis::flux_grid());
      for (int k = 0; k < 6; ++k) {
        const double ea = a.ground_energy + a.energies(k), eb = b.ground_energy + b.energies(k);
        worst = std::max(worst, std::abs(ea - eb) / std::abs(eb));
      }
      if (n.name == "Q2") {
        const auto ref = oracle::fluxonium_reference(p.e_c, p.e_j, p.e_l, flux, 6);
        for (int k = 0; k < 6; ++k)
          worst_ref = std::max(worst_ref, std::abs(a.ground_energy + a.energies(k) - ref[k]) / std::abs(ref[k]));
      }
    }
  }
  return {worst <= 1e-6 && worst_ref <= 1e-6,
          "max relative difference " + fmt("%.2e", worst) + " between bases, " + fmt("%.2e", worst_ref) +
              " against the finite-difference reference"};
}

// ---- 3. delta_min at the operating point
Outcome delta_min_magnitude() {
  const double d = delta_min(unit_config(), {"Q1", "Q2"}, {"ggg", "geg"}, 0.5);
  return {d >= 0.03 && d <= 0.3, "Delta_min(Q1,Q2; ggg->geg, C12=0.5) = " + fmt("%.2f", d * 1e3) + " MHz"};
}

// ---- 4. epsilon_max suppression
Outcome epsilon_suppression() {
  const auto cfg = unit_config().with_flux({{"C12", 0.5}});
  double off = 0.0;
  for (double f : make_axis(0.0, 0.2, 0.05)) off = std::max(off, epsilon_max(cfg, {"Q1", "Q2"}, "Q3", {"ggg", "geg"}, f));
  const double on = epsilon_max(cfg, {"Q1", "Q2"}, "Q3", {"ggg", "geg"}, 0.5);
  return {off <= 1e-3 && on / off >= 10.0,
          "OFF max " + fmt("%.1f", off * 1e6) + " kHz, ON " + fmt("%.1f", on * 1e6) + " kHz, ratio " + fmt("%.1f", on / off)};
}

// ---- 5. static ZZ and the time-domain cross-check
Outcome static_zz_check() {
  const auto cfg = unit_config().with_flux({{"C12", 0.0}, {"C23", 0.0}});
  const double z12 = static_zz(cfg, {"Q1", "Q2"}, {});
  const double z23 = static_zz(cfg, {"Q2", "Q3"}, {});
  const LevelMap lv{{"Q2", 6}, {"C23", 5}, {"Q3", 6}};
  const double z = static_zz(cfg, {"Q2", "Q3"}, {}, lv);
  const DrivenModel model(cfg, {"Q2", "C23", "Q3"}, lv);
  std::vector<double> t;
  for (int i = 0; i <= 40; ++i) t.push_back(500.0 * i);
  const auto r = conditional_ramsey_zz(model, "Q3", "Q2", t);
  const double diff = std::abs(-r.g_zz - z);
  return {std::abs(z12) <= 5e-6 && std::abs(z23) <= 5e-6 && diff <= 1e-7,
          "zeta(Q1,Q2) = " + fmt("%.3f", z12 * 1e6) + " kHz, zeta(Q2,Q3) = " + fmt("%.3f", z23 * 1e6) +
              " kHz, Ramsey - eigen = " + fmt("%.2e", diff * 1e6) + " kHz"};
}

// ---- 6. CZ calibration
Outcome cz_calibration() {
  const std::vector<std::string> chain{"Q2", "C23", "Q3"};
  const DrivenModel model(unit_config().with_flux({{"C23", 0.5}}), chain, {{"Q2", 5}, {"C23", 4}, {"Q3", 5}}, 48);
  const auto cal = calibrate_cz(model, "C23", {"egg", "eeg"}, computational_labels(chain));
  const auto& g = cal.result;
  const double dphi = std::abs(g.conditional_phase - M_PI);
  return {g.fidelity >= 0.999 && g.leakage <= 5e-4 && dphi <= 1e-3,
          "F = " + fmt("%.7f", g.fidelity) + ", leakage " + fmt("%.2e", g.leakage) + ", |phi - pi| = " + fmt("%.2e", dphi) +
              " rad, f = " + fmt("%.6f", cal.frequency) + " GHz"};
}

// ---- 7. geometric phase against two-level propagation
Outcome geometric_phase() {
  double worst = 0.0;
  const double rabi = 1.0 / 120.0;
  for (int i = 0; i <= 20; ++i) {
    const double delta = (-0.5 + 0.05 * i) * rabi;
    worst = std::max(worst, std::abs(detuning_phase_error(delta, rabi) - oracle::cyclic_geometric_phase_error(delta, rabi)));
  }
  return {worst <= 1e-6, "max |closed form - propagation| = " + fmt("%.2e", worst) + " rad over 21 points"};
}

// ---- 8. spectator phase errors with the spectator coupler OFF
Outcome spectator_phase() {
  const auto cfg = unit_config().with_flux({{"C12", 0.5}, {"C23", 0.0}});
  double worst = 0.0;
  std::string detail;
  for (auto d : std::vector<std::pair<std::string, std::string>>{{"ggg", "geg"}, {"egg", "eeg"}, {"gge", "gee"}, {"ege", "eee"}}) {
    const auto rep = spectator_phase_report(cfg, {"Q1", "Q2"}, "Q3", d, "ef", {});
    worst = std::max(worst, rep.max_phase_error());
    detail += d.first + "->" + d.second + " " + fmt("%.4f", rep.max_phase_error()) + " rad; ";
  }
  return {worst <= 0.005, detail + "max " + fmt("%.4f", worst) + " rad"};
}

// ---- 9. XX extraction roundtrip
Outcome xx_roundtrip() {
  const double kc = 0.2, kt = 0.01;
  std::vector<double> err;
  std::string detail;
  bool ok = true;
  for (double ratio : {0.3, 0.1, 0.03}) {
    const double g = ratio * (kc + kt);
    const auto sim = simulate_conditional_t1(g, kc, kt, {});
    const double rec = sim.estimate.g_xx / g;
    err.push_back(effective_rate_error(g, kc, kt));
    if (ratio <= 0.1) ok = ok && std::abs(rec - 1.0) <= 0.1;
    detail += "ratio " + fmt("%.2f", ratio) + ": g_rec/g = " + fmt("%.4f", rec) + ", rate error " + fmt("%.4f", err.back()) + "; ";
  }
  ok = ok && err[0] > err[1] && err[1] > err[2];
  return {ok, detail};
}

// ---- 10. GHZ parity and fidelity
Outcome ghz_parity() {
  bool ok = true;
  std::string detail;
  for (int n = 2; n <= 10; ++n) ok = ok && parity_experiment(compile_ghz(n), {}, phase_grid(n)).dominant_order == n;
  detail += ok ? "ideal dominant order = n for n = 2..10; " : "ideal dominant order wrong; ";
  const double fsq = 0.9999, fcz = 0.99;
  const auto noise = NoiseModel::from_fidelities(fsq, fcz);
  const std::size_t shots = 100000;
  double worst = 0.0;
  for (int n = 2; n <= 10; ++n) {
    const auto prep = compile_ghz(n);
    const auto rec = simulate(prep, noise, shots, split_seed(100, n));
    const auto counts = rec.counts();
    const double pg = double(counts.front()) / shots, pe = double(counts.back()) / shots;
    const auto par = parity_experiment_sampled(prep, noise, phase_grid(n), shots, split_seed(200, n), false);
    const double f = ghz_fidelity(pg, pe, par.a_n);
    const double th = theory_fidelity(n, std::vector<double>(n, fsq), std::vector<double>(n - 1, fcz));
    worst = std::max(worst, std::abs(f / th - 1.0));
    if (n == 10) detail += "F10 = " + fmt("%.4f", f) + " vs theory " + fmt("%.4f", th) + "; ";
  }
  ok = ok && worst <= 0.02;
  detail += "max |F/theory - 1| = " + fmt("%.4f", worst) + "; ";
  // Initialization errors add lower harmonics; pre-selection removes them.
  const int n = 6;
  NoiseModel init;
  init.init_excited.assign(n, 0.1);
  auto stray = [&](const ParityResult& r) {
    double m = 0.0;
    for (int k = 1; k < n; ++k) m = std::max(m, r.amplitude(k));
    return m / r.a_n;
  };
  const double raw = stray(parity_experiment_sampled(compile_ghz(n), init, phase_grid(n), shots, 300, false));
  const double pre = stray(parity_experiment_sampled(compile_ghz(n), init, phase_grid(n), shots, 300, true));
  ok = ok && pre <= 0.02 && raw > 0.1;
  detail += "stray/A_n at n=6, eps=0.1: " + fmt("%.3f", raw) + " raw, " + fmt("%.4f", pre) + " pre-selected";
  return {ok, detail};
}

// ---- 11. RB and XEB estimators
Outcome rb_xeb() {
  // Clifford-level depolarizing with binomial shot noise; the exact decay is 1 - p.
  const double p = 0.01;
  const std::vector<int> lengths{1, 2, 4, 8, 16, 32, 64, 128, 256};
  int within = 0;
  double zsum = 0.0;
  const int seeds = 50;
  for (int s = 0; s < seeds; ++s) {
    const auto seqs = generate_rb(1, lengths, 10, split_seed(1000, s));
    std::mt19937_64 rng(split_seed(2000, s));
    std::vector<double> x, y;
    for (const auto& q : seqs) {
      const double exact = rb_survival_depolarizing(q, 1, p);
      std::binomial_distribution<int> bin(500, exact);
      x.push_back(q.length);
      y.push_back(bin(rng) / 500.0);
    }
    const auto fit = fit_rb(x, y, 1);
    const double z = (fit.p - (1.0 - p)) / fit.p_error;
    zsum += z;
    if (std::abs(z) <= 3.0) ++within;
  }
  const double zmean = zsum / seeds;
  bool ok = within >= 48 && std::abs(zmean) * std::sqrt(double(seeds)) <= 3.0;
  std::string detail = std::to_string(within) + "/50 within 3 sigma, mean z " + fmt("%.3f", zmean) + "; ";
  // Noiseless RCS on four qubits: XEB equals 1 up to sampling error.
  double worst_z = 0.0;
  for (int c = 0; c < 10; ++c) {
    const auto circ = generate_rcs(4, {{0, 1}, {2, 3}}, 8, split_seed(3000, c));
    const Eigen::VectorXd ideal = probabilities(run_statevector(circ));
    const auto rec = simulate(circ, {}, 100000, split_seed(4000, c));
    const double f = xeb_fidelity(rec.distribution(), ideal);
    worst_z = std::max(worst_z, std::abs(f - 1.0) / oracle::xeb_sampling_sigma(ideal, 100000));
  }
  ok = ok && worst_z <= 3.0;
  detail += "noiseless XEB max |F-1|/sigma " + fmt("%.2f", worst_z) + "; ";
  const bool epc_ok = epc(2, 0.987) == 0.75 * (1 - 0.987) && epc(1, 0.99) == 0.5 * (1 - 0.99) &&
                      std::abs(epc(2, 0.987) - 0.00975) < 1e-15;
  ok = ok && epc_ok;
  detail += epc_ok ? "EPC spot values exact" : "EPC spot values wrong";
  return {ok, detail};
}

// ---- 12. readout unfolding
Outcome unfolding() {
  const int n = 4;
  const std::size_t shots = 100000;
  const auto model = ConfusionModel::symmetric(n, 0.05, 0.05);
  double worst = 0.0;
  bool valid = true;
  for (int s = 0; s < 5; ++s) {
    const auto circ = generate_rcs(n, {{0, 1}, {2, 3}}, 3, split_seed(5000, s));
    const auto clean = simulate(circ, NoiseModel::from_fidelities(0.999, 0.99), shots, split_seed(6000, s));
    const auto noisy = apply_confusion(clean, model, split_seed(7000, s));
    const auto u = unfold(noisy.distribution(), model);
    worst = std::max(worst, total_variation(u.probabilities, clean.distribution()));
    valid = valid && u.probabilities.minCoeff() >= 0.0 && std::abs(u.probabilities.sum() - 1.0) < 1e-12;
  }
  // Tiny samples push the naive inverse negative; the unfolded vector must stay valid.
  for (int s = 0; s < 20; ++s) {
    const auto clean = simulate(compile_ghz(n), {}, 30, split_seed(8000, s));
    const auto u = unfold(apply_confusion(clean, model, split_seed(9000, s)).distribution(), model, 10000, 1e-10);
    valid = valid && u.probabilities.minCoeff() >= 0.0 && std::abs(u.probabilities.sum() - 1.0) < 1e-12;
  }
  return {worst <= 0.01 && valid,
          "max TV " + fmt("%.4f", worst) + " over 5 distributions; " + (valid ? "all outputs valid" : "invalid output")};
}

// ---- 13. CLI determinism
int run_cli(const std::string& args) {
  const std::string cmd = std::string(FTF_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> read_outputs(const fs::path& dir) {
  std::map<std::string, std::string> m;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().filename() == "manifest.json") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    m[fs::relative(e.path(), dir).string()] = os.str();
  }
  return m;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("ftf_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::string cfg = "--config " + std::string(FTF_SOURCE_DIR) + "/configs/unit.cfg";
  const std::vector<std::string> commands{
      "spectrum " + cfg + " --subsystem Q2,C23,Q3 --levels Q2=4,C23=3,Q3=4 --flux C23=0.5",
      "ghz " + cfg + " --n 8 --shots 50000 --seed 5 --noise default,init=0.02",
      "parity " + cfg + " --n 5 --shots 2000 --seed 6 --preselect --noise default,init=0.05",
      "rb " + cfg + " --qubits 2 --lengths 1,4,16 --per-length 4 --shots 200 --seed 7 --interleave cz",
      "xeb " + cfg + " --depths 1,2,4 --circuits 3 --shots 2000 --seed 8",
      "mitigate --distribution 0.5,0,0,0,0,0,0,0.5 --p-ge 0.03 --p-eg 0.06 --corrupt",
      "cond-t1 --g 0.02 --kappa-c 0.2 --kappa-t 0.01"};
  bool ok = true;
  std::string detail;
  std::size_t files = 0;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    std::map<std::string, std::string> outs[2];
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = root / (std::to_string(i) + "_" + std::to_string(rep));
      if (run_cli(commands[i] + " --out " + out.string()) != 0) {
        ok = false;
        detail += "command failed: " + commands[i].substr(0, commands[i].find(' ')) + "; ";
      }
      outs[rep] = read_outputs(out);
    }
    if (outs[0] != outs[1] || outs[0].empty()) {
      ok = false;
      detail += "outputs differ: " + commands[i].substr(0, commands[i].find(' ')) + "; ";
    }
    files += outs[0].size();
  }
  fs::remove_all(root);
  return {ok, detail + std::to_string(commands.size()) + " commands, " + std::to_string(files) + " output files compared"};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "spectral bands", 10, spectral_bands},
      {2, "cross-basis oracle", 30, cross_basis},
      {3, "Delta_min magnitude", 120, delta_min_magnitude},
      {4, "epsilon_max suppression", 120, epsilon_suppression},
      {5, "static ZZ", 120, static_zz_check},
      {6, "CZ calibration", 600, cz_calibration},
      {7, "geometric phase model", 5, geometric_phase},
      {8, "spectator phase error", 120, spectator_phase},
      {9, "XX extraction roundtrip", 120, xx_roundtrip},
      {10, "GHZ and parity", 600, ghz_parity},
      {11, "RB and XEB estimators", 300, rb_xeb},
      {12, "readout unfolding", 60, unfolding},
      {13, "CLI determinism", 600, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = dt <= c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("%s %2d %s: %s%s (%.1f s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                in_time ? "" : " [over time budget]", dt);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
