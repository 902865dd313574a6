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

#include <string>

#include "ftf/device.hpp"

namespace testing_util {

inline std::string unit_config_path() { return std::string(FTF_SOURCE_DIR) + "/configs/unit.cfg"; }
inline ftf::DeviceConfig unit_config() { return ftf::load_config(unit_config_path()); }

// Two fluxonia with one direct coupling.
inline ftf::DeviceConfig fluxonium_pair(double j) {
  return ftf::parse_config_text(R"({"nodes": [
    {"name": "A", "kind": "fluxonium", "e_c": 1.2, "e_j": 4.3, "e_l": 0.6, "flux_ext": 0.5},
    {"name": "B", "kind": "fluxonium", "e_c": 1.1, "e_j": 4.6, "e_l": 0.62, "flux_ext": 0.5}],
    "couplings": [{"a": "A", "b": "B", "j": )" + std::to_string(j) + "}]}");
}

}  // namespace testing_util
