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

#include "ftf/record.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "ftf/errors.hpp"

namespace ftf {

namespace {

constexpr char kMagic[8] = {'F', 'T', 'F', 'R', 'E', 'C', '1', '\0'};

template <class T>
void put(std::string& out, T v, int bytes = sizeof(T)) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(const std::string& s) : s_(s) {}
  std::uint64_t get(int bytes) {
    if (pos_ + static_cast<std::size_t>(bytes) > s_.size()) throw ParseError("record truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s_[pos_++])) << (8 * i);
    return v;
  }
  std::string take(std::size_t n) {
    if (pos_ + n > s_.size()) throw ParseError("record truncated");
    std::string r = s_.substr(pos_, n);
    pos_ += n;
    return r;
  }
  bool done() const { return pos_ == s_.size(); }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

void MeasurementRecord::validate() const {
  if (qubits < 1 || qubits > 64) throw ValidationError("record qubit count must be in [1, 64]");
  if (!m1.empty() && m1.size() != m2.size()) throw ValidationError("M1 and M2 shot counts differ");
  if (basis.size() > 0xFFFF) throw ValidationError("basis string too long");
  const std::uint64_t limit = qubits == 64 ? ~0ULL : (1ULL << qubits) - 1;
  for (auto w : m2)
    if (w > limit) throw ValidationError("outcome word exceeds the qubit count");
  for (auto w : m1)
    if (w > limit) throw ValidationError("outcome word exceeds the qubit count");
}

std::vector<std::uint64_t> MeasurementRecord::counts() const {
  if (qubits > 24) throw DimensionError("histogram needs n <= 24");
  std::vector<std::uint64_t> c(std::size_t{1} << qubits, 0);
  for (auto w : m2) ++c[w];
  return c;
}

Eigen::VectorXd MeasurementRecord::distribution() const {
  if (m2.empty()) throw ValidationError("record has no shots");
  const auto c = counts();
  Eigen::VectorXd p(static_cast<Eigen::Index>(c.size()));
  for (std::size_t i = 0; i < c.size(); ++i) p(static_cast<Eigen::Index>(i)) = double(c[i]) / double(m2.size());
  return p;
}

double MeasurementRecord::parity() const {
  if (m2.empty()) throw ValidationError("record has no shots");
  long long s = 0;
  for (auto w : m2) s += (std::popcount(w) & 1) ? -1 : 1;
  return double(s) / double(m2.size());
}

nlohmann::json MeasurementRecord::summary() const {
  return {{"qubits", qubits}, {"shots", shots()},         {"seed", seed},
          {"basis", basis},   {"preselected", preselected}, {"has_m1", has_m1()}};
}

std::string encode_record(const MeasurementRecord& r) {
  r.validate();
  std::string out(kMagic, kMagic + 8);
  put<std::uint32_t>(out, kRecordVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(r.qubits));
  put<std::uint64_t>(out, r.shots());
  put<std::uint64_t>(out, r.seed);
  put<std::uint8_t>(out, r.has_m1() ? 1 : 0);
  put<std::uint8_t>(out, r.preselected ? 1 : 0);
  put<std::uint16_t>(out, static_cast<std::uint16_t>(r.basis.size()));
  out += r.basis;
  const int width = (r.qubits + 7) / 8;
  out.reserve(out.size() + r.shots() * static_cast<std::size_t>(width) * (r.has_m1() ? 2 : 1));
  for (std::size_t s = 0; s < r.shots(); ++s) {
    put(out, r.m2[s], width);
    if (r.has_m1()) put(out, r.m1[s], width);
  }
  return out;
}

MeasurementRecord decode_record(const std::string& bytes) {
  Reader in(bytes);
  if (in.take(8) != std::string(kMagic, 8)) throw ParseError("not a measurement record (bad magic)");
  const auto version = in.get(4);
  if (version != kRecordVersion) throw ParseError("unsupported record version " + std::to_string(version));
  MeasurementRecord r;
  r.qubits = static_cast<int>(in.get(4));
  if (r.qubits < 1 || r.qubits > 64) throw ParseError("record qubit count out of range");
  const auto shots = in.get(8);
  r.seed = in.get(8);
  const bool has_m1 = in.get(1) != 0;
  r.preselected = in.get(1) != 0;
  r.basis = in.take(in.get(2));
  const int width = (r.qubits + 7) / 8;
  const std::uint64_t row = static_cast<std::uint64_t>(width) * (has_m1 ? 2 : 1);
  if (shots > (bytes.size() / std::max<std::uint64_t>(row, 1)) + 1) throw ParseError("record truncated");
  r.m2.reserve(shots);
  if (has_m1) r.m1.reserve(shots);
  for (std::uint64_t s = 0; s < shots; ++s) {
    r.m2.push_back(in.get(width));
    if (has_m1) r.m1.push_back(in.get(width));
  }
  if (!in.done()) throw ParseError("trailing bytes after record");
  try {
    r.validate();
  } catch (const ValidationError& e) {
    throw ParseError(std::string("record: ") + e.what());
  }
  return r;
}

void write_record(const MeasurementRecord& r, const std::filesystem::path& path) {
  const std::string bytes = encode_record(r);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open '" + path.string() + "' for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw ValidationError("write failed for '" + path.string() + "'");
}

MeasurementRecord read_record(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open '" + path.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_record(bytes);
}

}  // namespace ftf
