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


#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ftf/circuit.hpp"
#include "ftf/device.hpp"
#include "ftf/hamiltonian.hpp"

namespace ftfsim {

// Flags shared by every subcommand.
struct CommonOptions {
  std::string config;
  std::vector<std::string> flux;  // NODE=VALUE
  std::vector<std::string> set;   // NODE.FIELD=VALUE
  std::uint64_t seed = 0;
  std::string out;
  int threads = 0;
};

// One invocation: output directory, manifest and stage timings.
class Run {
 public:
  Run(std::string command, std::vector<std::string> arguments, const CommonOptions& common);

  const ftf::DeviceConfig& config();
  bool has_config() const { return !common_.config.empty(); }
  std::uint64_t seed() const { return common_.seed; }
  int threads() const { return threads_; }
  const std::filesystem::path& dir() const { return dir_; }

  template <class F>
  auto stage(const std::string& name, F&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    struct Record {
      Run* run;
      std::string name;
      std::chrono::steady_clock::time_point t0;
      ~Record() { run->timings_.emplace_back(name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()); }
    } rec{this, name, t0};
    return fn();
  }

  void write(const std::string& name, const std::string& content);
  void write_json(const std::string& name, const nlohmann::json& j);
  void write_binary(const std::string& name, const std::string& bytes) { write(name, bytes); }
  void finish();
  void fail(const std::string& kind, const std::string& message);

 private:
  void write_manifest(const std::string& status, const nlohmann::json& error = nullptr);

  std::string command_;
  std::vector<std::string> arguments_;
  CommonOptions common_;
  std::filesystem::path dir_;
  int threads_ = 1;
  std::string started_;
  std::optional<ftf::DeviceConfig> config_;
  std::vector<std::string> outputs_;
  std::vector<std::pair<std::string, double>> timings_;
};

void add_common(CLI::App* app, CommonOptions& common);

// name=start:stop:step
struct Sweep {
  std::string node;
  std::vector<double> axis;
};
Sweep parse_sweep(const std::string& text);
std::vector<std::string> split(const std::string& text, char sep);
std::pair<std::string, std::string> parse_pair(const std::string& text);
ftf::LevelMap parse_levels(const std::string& text);
std::vector<double> parse_doubles(const std::string& text);
std::vector<int> parse_ints(const std::string& text);
// start:stop:step or a comma list.
std::vector<double> parse_axis(const std::string& text);
// default | none | config, optionally followed by key=value overrides (fsq, fcz, p1, p2, init, amp, phase).
ftf::NoiseModel parse_noise(const std::string& text, int qubits, Run& run);
std::string num(double v);

void register_device_commands(CLI::App& app, CommonOptions& common, std::function<void(Run&)>& action);
void register_circuit_commands(CLI::App& app, CommonOptions& common, std::function<void(Run&)>& action);

}  // namespace ftfsim
