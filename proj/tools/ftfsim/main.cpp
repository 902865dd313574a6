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

#include <iostream>
#include <string>
#include <vector>

#include "ftf/errors.hpp"
#include "run.hpp"

namespace {

constexpr int kUsage = 2;
constexpr int kValidation = 3;
constexpr int kNumerical = 4;

int report(const std::string& kind, const std::string& message, int code, ftfsim::Run* run) {
  nlohmann::json e{{"error", kind}, {"message", message}, {"exit_code", code}};
  std::cerr << e.dump() << "\n";
  if (run) run->fail(kind, message);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ftfsim: fluxonium-transmon-fluxonium device and circuit simulator"};
  app.set_version_flag("--version", FTF_VERSION);
  app.require_subcommand(1);
  ftfsim::CommonOptions common;
  std::function<void(ftfsim::Run&)> action;
  ftfsim::register_device_commands(app, common, action);
  ftfsim::register_circuit_commands(app, common, action);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return report("usage", e.what(), kUsage, nullptr);
  }

  const std::string command = app.get_subcommands().front()->get_name();
  std::vector<std::string> arguments(argv + 1, argv + argc);
  std::unique_ptr<ftfsim::Run> run;
  try {
    run = std::make_unique<ftfsim::Run>(command, arguments, common);
    action(*run);
    run->finish();
    return 0;
  } catch (const ftf::ParseError& e) {
    return report("parse", e.what(), kValidation, run.get());
  } catch (const ftf::DimensionError& e) {
    return report("dimension", e.what(), kValidation, run.get());
  } catch (const ftf::ValidationError& e) {
    return report("validation", e.what(), kValidation, run.get());
  } catch (const ftf::AmbiguityError& e) {
    return report("ambiguity", e.what(), kNumerical, run.get());
  } catch (const ftf::NumericalError& e) {
    return report("numerical", e.what(), kNumerical, run.get());
  } catch (const nlohmann::json::exception& e) {
    return report("parse", e.what(), kValidation, run.get());
  } catch (const std::exception& e) {
    return report("internal", e.what(), kNumerical, run.get());
  }
}
