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

#include "run.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <thread>

#include "ftf/errors.hpp"
#include "ftf/spectral.hpp"

namespace ftfsim {

namespace fs = std::filesystem;

namespace {

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

double to_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw ftf::ValidationError("cannot read " + what + " from '" + s + "'");
  return v;
}

std::pair<std::string, std::string> split_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ftf::ValidationError("expected NAME=VALUE, got '" + text + "'");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

}  // namespace

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::pair<std::string, std::string> parse_pair(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 2 || parts[0].empty() || parts[1].empty())
    throw ftf::ValidationError("expected A,B, got '" + text + "'");
  return {parts[0], parts[1]};
}

ftf::LevelMap parse_levels(const std::string& text) {
  ftf::LevelMap m;
  if (text.empty()) return m;
  for (const auto& item : split(text, ',')) {
    const auto [k, v] = split_assignment(item);
    const double d = to_double(v, "level count");
    if (d < 2 || d != std::floor(d)) throw ftf::ValidationError("level count for " + k + " must be an integer >= 2");
    m[k] = static_cast<int>(d);
  }
  return m;
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> v;
  for (const auto& s : split(text, ',')) v.push_back(to_double(s, "number"));
  return v;
}

std::vector<int> parse_ints(const std::string& text) {
  std::vector<int> v;
  for (double d : parse_doubles(text)) {
    if (d != std::floor(d)) throw ftf::ValidationError("expected integers in '" + text + "'");
    v.push_back(static_cast<int>(d));
  }
  return v;
}

std::vector<double> parse_axis(const std::string& text) {
  if (text.find(':') == std::string::npos) return parse_doubles(text);
  const auto p = split(text, ':');
  if (p.size() != 3) throw ftf::ValidationError("expected start:stop:step, got '" + text + "'");
  return ftf::make_axis(to_double(p[0], "start"), to_double(p[1], "stop"), to_double(p[2], "step"));
}

Sweep parse_sweep(const std::string& text) {
  const auto [node, range] = split_assignment(text);
  if (range.find(':') == std::string::npos) throw ftf::ValidationError("sweep needs name=start:stop:step");
  return {node, parse_axis(range)};
}

ftf::NoiseModel parse_noise(const std::string& text, int qubits, Run& run) {
  double fsq = 0.9999, fcz = 0.99, init = 0.0, amp = 0.0, phase = 0.0;
  double p1 = -1.0, p2 = -1.0;  // negative: derived from fsq/fcz
  for (const auto& tok : split(text, ',')) {
    if (tok.empty()) continue;
    if (tok.find('=') == std::string::npos) {
      if (tok == "default") {
        fsq = 0.9999;
        fcz = 0.99;
      } else if (tok == "none") {
        fsq = fcz = 1.0;
        p1 = p2 = -1.0;
      } else if (tok == "config") {
        const auto& gn = run.config().gate_noise();
        if (!gn) throw ftf::ValidationError("config has no gate_noise block");
        p1 = gn->single_qubit;
        p2 = gn->cz;
        init = gn->init_excited;
      } else {
        throw ftf::ValidationError("unknown noise preset '" + tok + "'");
      }
      continue;
    }
    const auto [k, v] = split_assignment(tok);
    const double d = to_double(v, "noise parameter " + k);
    if (k == "fsq") fsq = d, p1 = -1.0;
    else if (k == "fcz") fcz = d, p2 = -1.0;
    else if (k == "p1") p1 = d;
    else if (k == "p2") p2 = d;
    else if (k == "init") init = d;
    else if (k == "amp") amp = d;
    else if (k == "phase") phase = d;
    else throw ftf::ValidationError("unknown noise key '" + k + "'");
  }
  ftf::NoiseModel m = ftf::NoiseModel::from_fidelities(fsq, fcz, init, qubits);
  if (p1 >= 0) m.single_qubit = p1;
  if (p2 >= 0) m.two_qubit = p2;
  m.amplitude_damping = amp;
  m.phase_damping = phase;
  m.validate(qubits);
  return m;
}

void add_common(CLI::App* app, CommonOptions& c) {
  app->add_option("--config", c.config, "Device config file (JSON)");
  app->add_option("--flux", c.flux, "Flux override NODE=VALUE (repeatable)");
  app->add_option("--set", c.set, "Parameter override NODE.FIELD=VALUE (repeatable)");
  app->add_option("--seed", c.seed, "Random seed (recorded in the manifest)");
  app->add_option("--out", c.out, "Output directory (default $FTF_OUTPUT_DIR, else ./ftf_out)");
  app->add_option("--threads", c.threads, "Worker threads (default: available cores)")->check(CLI::NonNegativeNumber);
}

Run::Run(std::string command, std::vector<std::string> arguments, const CommonOptions& common)
    : command_(std::move(command)), arguments_(std::move(arguments)), common_(common), started_(utc_now()) {
  if (!common_.out.empty()) {
    dir_ = common_.out;
  } else if (const char* env = std::getenv("FTF_OUTPUT_DIR"); env && *env) {
    dir_ = env;
  } else {
    dir_ = "ftf_out";
  }
  threads_ = common_.threads > 0 ? common_.threads : std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw ftf::ValidationError("cannot create output directory " + dir_.string() + ": " + ec.message());
  write_manifest("running");
}

const ftf::DeviceConfig& Run::config() {
  if (config_) return *config_;
  if (common_.config.empty()) throw ftf::ValidationError("this command needs --config");
  std::ifstream in(common_.config);
  if (!in) throw ftf::ValidationError("cannot open config " + common_.config);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ftf::ParseError(common_.config + ": " + e.what());
  }
  for (const auto& s : common_.set) {
    const auto [path, value] = split_assignment(s);
    const auto dot = path.find('.');
    if (dot == std::string::npos) throw ftf::ValidationError("--set expects NODE.FIELD=VALUE");
    const std::string node = path.substr(0, dot), field = path.substr(dot + 1);
    bool found = false;
    for (auto& n : doc.at("nodes"))
      if (n.value("name", "") == node) {
        n[field] = to_double(value, field);
        found = true;
      }
    if (!found) throw ftf::ValidationError("--set: unknown node '" + node + "'");
  }
  ftf::DeviceConfig cfg = ftf::parse_config(doc);
  ftf::FluxPoint fp;
  for (const auto& f : common_.flux) {
    const auto [node, value] = split_assignment(f);
    if (!cfg.has_node(node)) throw ftf::ValidationError("--flux: unknown node '" + node + "'");
    fp[node] = to_double(value, "flux");
  }
  config_ = cfg.with_flux(fp);
  return *config_;
}

void Run::write(const std::string& name, const std::string& content) {
  const fs::path p = dir_ / name;
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw ftf::ValidationError("cannot write " + p.string());
  outputs_.push_back(name);
}

void Run::write_json(const std::string& name, const nlohmann::json& j) { write(name, j.dump(2) + "\n"); }

void Run::write_manifest(const std::string& status, const nlohmann::json& error) {
  nlohmann::json m;
  m["tool"] = "ftfsim";
  m["version"] = FTF_VERSION;
  m["command"] = command_;
  m["arguments"] = arguments_;
  m["config"] = common_.config;
  m["overrides"] = {{"flux", common_.flux}, {"set", common_.set}};
  m["seed"] = common_.seed;
  m["output_dir"] = dir_.string();
  m["threads"] = threads_;
  m["started_utc"] = started_;
  m["status"] = status;
  m["outputs"] = outputs_;
  m["timings_s"] = nlohmann::json::array();
  for (const auto& [name, s] : timings_) m["timings_s"].push_back({{"stage", name}, {"seconds", s}});
  if (!error.is_null()) m["error"] = error;
  std::ofstream out(dir_ / "manifest.json", std::ios::trunc);
  out << m.dump(2) << "\n";
}

void Run::finish() { write_manifest("ok"); }

void Run::fail(const std::string& kind, const std::string& message) {
  write_manifest("failed", {{"kind", kind}, {"message", message}});
}

}  // namespace ftfsim
