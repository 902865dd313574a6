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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace ftf {

// Outcome words put qubit 0 in the most significant of the n bits; bit value 1 means |e>.
// File layout (little-endian):
//   8 bytes  magic "FTFREC1\0"
//   u32      format version (1)
//   u32      qubits n
//   u64      shots
//   u64      seed
//   u8       has_m1
//   u8       preselected
//   u16      basis string length L, then L bytes of basis string
//   shots rows of ceil(n/8) bytes each holding the M2 word, followed by the M1 word when has_m1
struct MeasurementRecord {
  int qubits = 0;
  std::uint64_t seed = 0;
  std::string basis = "z";
  bool preselected = false;
  std::vector<std::uint64_t> m2;
  std::vector<std::uint64_t> m1;  // empty or one per shot

  std::size_t shots() const { return m2.size(); }
  bool has_m1() const { return !m1.empty(); }
  void validate() const;

  std::vector<std::uint64_t> counts() const;  // 2^n bins
  Eigen::VectorXd distribution() const;
  // Mean of (-1)^(number of e) over shots.
  double parity() const;
  nlohmann::json summary() const;

  bool operator==(const MeasurementRecord&) const = default;
};

inline constexpr std::uint32_t kRecordVersion = 1;

void write_record(const MeasurementRecord& r, const std::filesystem::path& path);
MeasurementRecord read_record(const std::filesystem::path& path);
std::string encode_record(const MeasurementRecord& r);
MeasurementRecord decode_record(const std::string& bytes);

// Bit of qubit q in an n-qubit outcome word.
inline int outcome_bit(std::uint64_t word, int n, int q) { return static_cast<int>((word >> (n - 1 - q)) & 1U); }

}  // namespace ftf
