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

// Subcommands on the gate-level simulator: GHZ, parity, benchmarking, readout mitigation.

#include <cmath>
#include <memory>

#include "ftf/benchmarking.hpp"
#include "ftf/errors.hpp"
#include "ftf/mitigation.hpp"
#include "ftf/record.hpp"
#include "run.hpp"

namespace ftfsim {

namespace {

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Fidelities implied by a depolarizing-only model.
std::pair<double, double> implied_fidelities(const ftf::NoiseModel& m) {
  return {1.0 - m.single_qubit / 2.0, 1.0 - 3.0 * m.two_qubit / 4.0};
}

std::vector<std::pair<int, int>> default_pairs(int qubits) {
  std::vector<std::pair<int, int>> p;
  for (int q = 0; q + 1 < qubits; q += 2) p.emplace_back(q, q + 1);
  return p;
}

Eigen::VectorXd measured_distribution(const ftf::Circuit& c, const ftf::NoiseModel& noise, std::size_t shots,
                                      std::uint64_t seed) {
  if (shots == 0) return ftf::probabilities(ftf::run_density(c, noise));
  return ftf::simulate(c, noise, shots, seed).distribution();
}

}  // namespace

void register_circuit_commands(CLI::App& app, CommonOptions& common, std::function<void(Run&)>& action) {
  {
    struct Opts {
      int n = 4, chain = 0, offset = 0;
      std::string noise = "default";
      std::size_t shots = 10000;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("ghz", "Prepare GHZ(n) and sample Z-basis shots");
    add_common(sub, common);
    sub->add_option("--n", o->n, "GHZ size")->capture_default_str();
    sub->add_option("--chain", o->chain, "Chain length (default n)");
    sub->add_option("--offset", o->offset, "First chain qubit used")->capture_default_str();
    sub->add_option("--noise", o->noise, "default | none | config, then key=value (fsq, fcz, p1, p2, init, amp, phase)")
        ->capture_default_str();
    sub->add_option("--shots", o->shots, "Shots")->capture_default_str();
    sub->callback([&action, o] {
      action = [o](Run& run) {
        const ftf::Circuit c = ftf::compile_ghz(o->n, o->chain, o->offset);
        const auto noise = parse_noise(o->noise, c.qubits, run);
        const auto rec = run.stage("simulate", [&] {
          return ftf::simulate(c, noise, o->shots, run.seed(), noise.init_noise());
        });
        const auto [fsq, fcz] = implied_fidelities(noise);
        const auto counts = rec.counts();
        const double shots = static_cast<double>(rec.shots());
        nlohmann::json j{{"n", o->n},
                         {"circuit", c.to_json()},
                         {"cz_depth", c.cz_layers()},
                         {"central_qubit", ftf::ghz_central_qubit(o->n)},
                         {"record", rec.summary()},
                         {"p_all_g", static_cast<double>(counts.front()) / shots},
                         {"p_all_e", static_cast<double>(counts.back()) / shots}};
        if (o->chain <= o->n && o->offset == 0)
          j["theory_fidelity"] = ftf::theory_fidelity(o->n, std::vector<double>(static_cast<std::size_t>(o->n), fsq),
                                                      std::vector<double>(static_cast<std::size_t>(o->n - 1), fcz));
        run.write_binary("ghz_record.bin", ftf::encode_record(rec));
        run.write_json("ghz.json", j);
      };
    });
  }
  {
    struct Opts {
      int n = 4, points = 0;
      std::string noise = "default";
      std::size_t shots = 0;
      bool preselect = false;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("parity", "GHZ parity oscillation, harmonic fit and fidelity");
    add_common(sub, common);
    sub->add_option("--n", o->n, "GHZ size")->capture_default_str();
    sub->add_option("--points", o->points, "Phase points (default max(8n, 16))")->capture_default_str();
    sub->add_option("--noise", o->noise, "Noise specification, as for ghz")->capture_default_str();
    sub->add_option("--shots", o->shots, "Shots per phase (0: exact probabilities)")->capture_default_str();
    sub->add_flag("--preselect", o->preselect, "Drop shots whose M1 outcome is not all-g");
    sub->callback([&action, o] {
      action = [o](Run& run) {
        const ftf::Circuit prep = ftf::compile_ghz(o->n);
        const auto noise = parse_noise(o->noise, o->n, run);
        const auto grid = ftf::phase_grid(o->n, o->points);
        if (o->preselect && o->shots == 0) throw ftf::ValidationError("--preselect needs --shots > 0");
        const auto res = run.stage("parity", [&] {
          return o->shots == 0 ? ftf::parity_experiment(prep, noise, grid)
                               : ftf::parity_experiment_sampled(prep, noise, grid, o->shots, run.seed(), o->preselect);
        });
        // Populations from the preparation alone.
        Eigen::VectorXd pop;
        run.stage("populations", [&] {
          if (o->shots == 0) {
            pop = ftf::probabilities(ftf::run_density(prep, noise));
          } else {
            auto rec = ftf::simulate(prep, noise, o->shots, ftf::split_seed(run.seed(), grid.size()), noise.init_noise());
            if (o->preselect) rec = ftf::preselect(rec).record;
            pop = rec.distribution();
          }
          return 0;
        });
        const double pg = pop(0), pe = pop(pop.size() - 1);
        const auto [fsq, fcz] = implied_fidelities(noise);
        nlohmann::json j = res.to_json();
        j["p_all_g"] = pg;
        j["p_all_e"] = pe;
        j["fidelity"] = ftf::ghz_fidelity(pg, pe, std::clamp(res.a_n, 0.0, 1.0));
        j["theory_fidelity"] = ftf::theory_fidelity(o->n, std::vector<double>(static_cast<std::size_t>(o->n), fsq),
                                                    std::vector<double>(static_cast<std::size_t>(o->n - 1), fcz));
        run.write_json("parity.json", j);
        run.write("parity.csv", res.to_csv());
      };
    });
  }
  {
    struct Opts {
      int qubits = 1, per_length = 20;
      std::string lengths, noise = "default", interleave = "none";
      std::size_t shots = 0;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("rb", "Randomized benchmarking (optionally interleaved)");
    add_common(sub, common);
    sub->add_option("--qubits", o->qubits, "1 or 2")->capture_default_str()->check(CLI::Range(1, 2));
    sub->add_option("--lengths", o->lengths, "Sequence lengths (default powers of two)");
    sub->add_option("--per-length", o->per_length, "Random sequences per length")->capture_default_str();
    sub->add_option("--noise", o->noise, "Noise specification, as for ghz")->capture_default_str();
    sub->add_option("--shots", o->shots, "Shots per sequence (0: exact)")->capture_default_str();
    sub->add_option("--interleave", o->interleave, "none | cz")->capture_default_str();
    sub->callback([&action, o] {
      action = [o](Run& run) {
        std::vector<int> lengths = o->lengths.empty()
                                       ? (o->qubits == 1 ? std::vector<int>{1, 2, 4, 8, 16, 32, 64, 128, 256}
                                                         : std::vector<int>{1, 2, 4, 8, 16, 32, 64})
                                       : parse_ints(o->lengths);
        const auto noise = parse_noise(o->noise, o->qubits, run);
        std::optional<std::size_t> inter;
        if (o->interleave == "cz") {
          if (o->qubits != 2) throw ftf::ValidationError("CZ interleaving needs --qubits 2");
          Eigen::MatrixXcd cz = Eigen::MatrixXcd::Identity(4, 4);
          cz(3, 3) = -1;
          inter = ftf::CliffordGroup::get(2).index_of(cz);
        } else if (o->interleave != "none") {
          throw ftf::ValidationError("unknown interleave gate '" + o->interleave + "'");
        }
        std::string csv = "kind,length,sequence,survival\n";
        auto measure = [&](const std::string& kind, std::optional<std::size_t> g, std::uint64_t stream) {
          const auto seqs = ftf::generate_rb(o->qubits, lengths, o->per_length, ftf::split_seed(run.seed(), stream), g);
          std::vector<double> x, y;
          for (std::size_t i = 0; i < seqs.size(); ++i) {
            const double s = ftf::rb_survival(seqs[i], noise, o->shots, ftf::split_seed(run.seed(), 1000 + stream * seqs.size() + i));
            x.push_back(seqs[i].length);
            y.push_back(s);
            csv += kind + "," + std::to_string(seqs[i].length) + "," + std::to_string(i) + "," + num(s) + "\n";
          }
          return ftf::fit_rb(x, y, o->qubits);
        };
        const auto ref = run.stage("reference", [&] { return measure("reference", std::nullopt, 0); });
        nlohmann::json j{{"qubits", o->qubits}, {"lengths", lengths}, {"reference", ref.to_json()}};
        if (inter) {
          const auto il = run.stage("interleaved", [&] { return measure("interleaved", inter, 1); });
          const auto [f, err] = ftf::interleaved_fidelity(ref, il);
          j["interleaved"] = il.to_json();
          j["gate_fidelity"] = f;
          j["gate_fidelity_error"] = err;
        }
        run.write_json("rb.json", j);
        run.write("rb.csv", csv);
      };
    });
  }
  {
    struct Opts {
      int qubits = 4, cycles = 10;
      std::string noise = "default";
      std::size_t shots = 100000;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("rcs", "Sample one random circuit");
    add_common(sub, common);
    sub->add_option("--qubits", o->qubits, "Chain length")->capture_default_str();
    sub->add_option("--cycles", o->cycles, "Cycles")->capture_default_str();
    sub->add_option("--noise", o->noise, "Noise specification, as for ghz")->capture_default_str();
    sub->add_option("--shots", o->shots, "Shots")->capture_default_str();
    sub->callback([&action, o] {
      action = [o](Run& run) {
        const auto c = ftf::generate_rcs(o->qubits, default_pairs(o->qubits), o->cycles, run.seed());
        const auto noise = parse_noise(o->noise, o->qubits, run);
        const auto ideal = ftf::probabilities(ftf::run_statevector(c));
        const auto rec = run.stage("simulate", [&] { return ftf::simulate(c, noise, o->shots, ftf::split_seed(run.seed(), 1)); });
        const double f = ftf::xeb_fidelity(rec.distribution(), ideal);
        run.write_binary("rcs_record.bin", ftf::encode_record(rec));
        run.write_json("rcs.json", {{"circuit", c.to_json()}, {"ideal", to_vector(ideal)}, {"xeb_fidelity", f}});
      };
    });
  }
  {
    struct Opts {
      int qubits = 4, circuits = 10;
      std::string depths = "1,2,4,6,8,12", noise = "default";
      std::size_t shots = 10000;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("xeb", "Cross-entropy benchmarking over circuit depth");
    add_common(sub, common);
    sub->add_option("--qubits", o->qubits, "Chain length")->capture_default_str();
    sub->add_option("--depths", o->depths, "Cycle counts")->capture_default_str();
    sub->add_option("--circuits", o->circuits, "Random circuits per depth")->capture_default_str();
    sub->add_option("--noise", o->noise, "Noise specification, as for ghz")->capture_default_str();
    sub->add_option("--shots", o->shots, "Shots per circuit (0: exact)")->capture_default_str();
    sub->callback([&action, o] {
      action = [o](Run& run) {
        const auto depths = parse_ints(o->depths);
        const auto noise = parse_noise(o->noise, o->qubits, run);
        if (o->circuits < 1) throw ftf::ValidationError("need at least one circuit per depth");
        std::vector<double> x, fid;
        std::string csv = "depth,xeb_fidelity\n";
        run.stage("sample", [&] {
          for (std::size_t d = 0; d < depths.size(); ++d) {
            std::vector<Eigen::VectorXd> meas, ideal;
            for (int k = 0; k < o->circuits; ++k) {
              const std::uint64_t idx = d * static_cast<std::uint64_t>(o->circuits) + static_cast<std::uint64_t>(k);
              const auto c = ftf::generate_rcs(o->qubits, default_pairs(o->qubits), depths[d],
                                               ftf::split_seed(run.seed(), 2 * idx));
              ideal.push_back(ftf::probabilities(ftf::run_statevector(c)));
              meas.push_back(measured_distribution(c, noise, o->shots, ftf::split_seed(run.seed(), 2 * idx + 1)));
            }
            x.push_back(depths[d]);
            fid.push_back(ftf::xeb_fidelity(meas, ideal));
            csv += std::to_string(depths[d]) + "," + num(fid.back()) + "\n";
          }
          return 0;
        });
        nlohmann::json j{{"qubits", o->qubits}, {"depths", depths}, {"fidelity", fid}};
        std::vector<double> lx, ly;
        for (std::size_t i = 0; i < x.size(); ++i)
          if (fid[i] > 0) lx.push_back(x[i]), ly.push_back(std::log(fid[i]));
        if (lx.size() >= 3) {
          const auto line = ftf::fit_line(lx, ly);
          Eigen::VectorXd init(2);
          init << std::exp(line.intercept), std::exp(line.slope);
          const auto fit = ftf::nonlinear_fit([](const Eigen::VectorXd& p, double d) { return p(0) * std::pow(p(1), d); },
                                              x, fid, init, {"A", "p"});
          j["fit"] = fit.to_json();
          j["epc"] = ftf::epc(o->qubits, fit.value("p"));
          j["cycle_fidelity"] = 1.0 - ftf::epc(o->qubits, fit.value("p"));
        }
        run.write_json("xeb.json", j);
        run.write("xeb.csv", csv);
      };
    });
  }
  {
    struct Opts {
      std::string record, distribution, qubit_names;
      double p_ge = -1, p_eg = -1;
      bool corrupt = false, preselect = false, corrupt_m1 = true;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("mitigate", "Pre-selection and maximum-likelihood readout unfolding");
    add_common(sub, common);
    sub->add_option("--record", o->record, "Measurement record file");
    sub->add_option("--distribution", o->distribution, "Measured probabilities, comma-separated");
    sub->add_option("--p-ge", o->p_ge, "P(read e | g) on every qubit");
    sub->add_option("--p-eg", o->p_eg, "P(read g | e) on every qubit");
    sub->add_option("--qubits", o->qubit_names, "Config qubits whose readout block defines the model");
    sub->add_flag("--corrupt", o->corrupt, "Apply the confusion model first (synthetic data)");
    sub->add_flag("--preselect", o->preselect, "Keep only shots with all-g M1");
    sub->callback([&action, o] {
      action = [o](Run& run) {
        if (o->record.empty() == o->distribution.empty())
          throw ftf::ValidationError("give exactly one of --record and --distribution");
        ftf::MeasurementRecord rec;
        Eigen::VectorXd dist;
        int qubits = 0;
        if (!o->record.empty()) {
          rec = ftf::read_record(o->record);
          qubits = rec.qubits;
        } else {
          const auto v = parse_doubles(o->distribution);
          dist = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
          while ((std::size_t{1} << qubits) < v.size()) ++qubits;
          if ((std::size_t{1} << qubits) != v.size()) throw ftf::DimensionError("distribution length must be 2^n");
        }
        ftf::ConfusionModel model;
        if (!o->qubit_names.empty()) {
          model = ftf::ConfusionModel::from_config(run.config(), split(o->qubit_names, ','));
        } else if (o->p_ge >= 0 && o->p_eg >= 0) {
          model = ftf::ConfusionModel::symmetric(qubits, o->p_ge, o->p_eg);
        } else {
          throw ftf::ValidationError("give --qubits (config readout) or both --p-ge and --p-eg");
        }
        if (model.qubits() != qubits) throw ftf::DimensionError("confusion model and data differ in qubit count");
        nlohmann::json j{{"qubits", qubits}, {"model", model.to_json()}};
        if (!o->record.empty()) {
          if (o->corrupt) {
            const auto clean = o->preselect ? ftf::preselect(rec).record : rec;
            j["truth"] = to_vector(clean.distribution());
            rec = ftf::apply_confusion(rec, model, run.seed(), o->corrupt_m1);
          }
          if (o->preselect) {
            const auto ps = ftf::preselect(rec);
            rec = ps.record;
            j["retention"] = ps.retention;
            j["kept"] = ps.kept;
          }
          if (o->corrupt || o->preselect) run.write_binary("mitigated_record.bin", ftf::encode_record(rec));
          if (rec.shots() == 0) throw ftf::ValidationError("no shots left to unfold");
          j["shots"] = rec.shots();
          dist = rec.distribution();
        } else {
          if (o->preselect) throw ftf::ValidationError("--preselect needs a record with M1 outcomes");
          if (o->corrupt) {
            j["truth"] = to_vector(dist);
            dist = ftf::apply_confusion(dist, model);
          }
        }
        const auto unf = run.stage("unfold", [&] { return ftf::unfold(dist, model); });
        j["measured"] = to_vector(dist);
        j["unfolded"] = unf.to_json();
        j["naive_inverse"] = to_vector(ftf::naive_inverse(dist, model));
        if (j.contains("truth")) {
          const auto t = j["truth"].get<std::vector<double>>();
          j["tv_to_truth"] = ftf::total_variation(
              unf.probabilities, Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size())));
        }
        run.write_json("mitigate.json", j);
      };
    });
  }
}

}  // namespace ftfsim
