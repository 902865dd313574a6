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

#include <gtest/gtest.h>

#include <filesystem>

#include "ftf/errors.hpp"
#include "ftf/record.hpp"

using namespace ftf;

namespace {

MeasurementRecord sample_record(int n, bool m1) {
  MeasurementRecord r;
  r.qubits = n;
  r.seed = 42;
  for (std::uint64_t s = 0; s < 37; ++s) {
    r.m2.push_back((s * 2654435761u) & ((std::uint64_t{1} << n) - 1));
    if (m1) r.m1.push_back(s % 5 == 0 ? 1 : 0);
  }
  return r;
}

}  // namespace

TEST(Record, EncodeDecodeRoundTrip) {
  for (int n : {1, 4, 9, 17}) {
    for (bool m1 : {false, true}) {
      const auto r = sample_record(n, m1);
      EXPECT_EQ(decode_record(encode_record(r)), r);
    }
  }
}

TEST(Record, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "ftf_record_test.bin";
  const auto r = sample_record(5, true);
  write_record(r, path);
  EXPECT_EQ(read_record(path), r);
  std::filesystem::remove(path);
}

TEST(Record, LayoutHeader) {
  const auto bytes = encode_record(sample_record(10, false));
  EXPECT_EQ(bytes.substr(0, 7), "FTFREC1");
  // header: 8 magic + 4 version + 4 n + 8 shots + 8 seed + 1 + 1 + 2 + basis, then 2 bytes per row
  EXPECT_EQ(bytes.size(), 8u + 4 + 4 + 8 + 8 + 1 + 1 + 2 + 1 + 37u * 2);
}

TEST(Record, RejectsCorruptData) {
  auto bytes = encode_record(sample_record(3, false));
  EXPECT_THROW(decode_record(bytes.substr(0, bytes.size() - 1)), ParseError);
  bytes[0] = 'X';
  EXPECT_THROW(decode_record(bytes), ParseError);
}

TEST(Record, CountsAndParity) {
  MeasurementRecord r;
  r.qubits = 2;
  r.m2 = {0, 3, 1, 2};
  const auto c = r.counts();
  EXPECT_EQ(c, (std::vector<std::uint64_t>{1, 1, 1, 1}));
  EXPECT_DOUBLE_EQ(r.parity(), 0.0);
  r.m2 = {0, 3};
  EXPECT_DOUBLE_EQ(r.parity(), 1.0);
  EXPECT_EQ(outcome_bit(0b10, 2, 0), 1);
  EXPECT_EQ(outcome_bit(0b10, 2, 1), 0);
}
