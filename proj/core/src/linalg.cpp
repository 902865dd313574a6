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

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include "linalg.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ftf/errors.hpp"

namespace ftf::detail {

void hermitian_lowest(const Eigen::MatrixXcd& a, int count, Eigen::VectorXd& values, Eigen::MatrixXcd& vectors) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  if (a.cols() != n) throw ValidationError("hermitian_lowest: matrix not square");
  if (count <= 0 || count > n) count = n;
  Eigen::MatrixXcd work = a;  // zheevr destroys its input
  Eigen::VectorXd w(n);
  Eigen::MatrixXcd z(n, count);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(count));
  lapack_int m = 0;
  const double abstol = 2.0 * LAPACKE_dlamch('S');
  const lapack_int info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, work.data(), n, 0.0, 0.0, 1, count,
                                         abstol, &m, w.data(), z.data(), n, isuppz.data());
  if (info != 0 || m != count)
    throw NumericalError("zheevr failed (info " + std::to_string(info) + ", found " + std::to_string(m) + ")");
  values = w.head(count);
  vectors = std::move(z);
}

// Eigenvalues from dsbevx without vectors, then one banded inverse iteration per kept value. Asking dsbevx for
// vectors forms the full n x n reduction matrix, which costs O(n^3).
void banded_lowest(const std::vector<Eigen::VectorXd>& bands, int count, Eigen::VectorXd& values,
                   Eigen::MatrixXd& vectors) {
  const lapack_int kd = static_cast<lapack_int>(bands.size()) - 1;
  const lapack_int n = static_cast<lapack_int>(bands.at(0).size());
  const lapack_int ldab = kd + 1;
  std::vector<double> ab(static_cast<std::size_t>(ldab) * n, 0.0);
  for (lapack_int k = 0; k <= kd; ++k)
    for (lapack_int j = 0; j + k < n; ++j) ab[static_cast<std::size_t>(k + j * ldab)] = bands[k][j];
  Eigen::VectorXd w(n);
  std::vector<lapack_int> ifail(n);
  lapack_int m = 0;
  const double abstol = 2.0 * LAPACKE_dlamch('S');
  lapack_int info = LAPACKE_dsbevx(LAPACK_COL_MAJOR, 'N', 'I', 'L', n, kd, ab.data(), ldab, nullptr, n, 0.0, 0.0, 1,
                                   count, abstol, &m, w.data(), nullptr, n, ifail.data());
  if (info != 0 || m != count) throw NumericalError("dsbevx failed (info " + std::to_string(info) + ")");
  values = w.head(count);

  // General band storage for dgbsv: kl = ku = kd, plus kd rows of fill-in.
  const lapack_int ldg = 3 * kd + 1;
  double scale = 0.0;
  for (const auto& b : bands) scale = std::max(scale, b.cwiseAbs().maxCoeff());
  vectors.resize(n, count);
  std::vector<double> g(static_cast<std::size_t>(ldg) * n);
  std::vector<lapack_int> piv(n);
  for (int c = 0; c < count; ++c) {
    // Offsetting the shift keeps the factorization nonsingular without slowing convergence noticeably.
    const double shift = values(c) - 1e-12 * scale;
    std::fill(g.begin(), g.end(), 0.0);
    for (lapack_int j = 0; j < n; ++j)
      for (lapack_int k = 0; k <= kd; ++k) {
        const double v = bands[k][j] - (k == 0 ? shift : 0.0);
        if (j + k < n) g[static_cast<std::size_t>(2 * kd + k + j * ldg)] = v;        // below diagonal, column j
        if (k > 0 && j + k < n) g[static_cast<std::size_t>(2 * kd - k + (j + k) * ldg)] = v;  // above, column j+k
      }
    info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n, n, kd, kd, g.data(), ldg, piv.data());
    if (info < 0) throw NumericalError("dgbtrf failed (info " + std::to_string(info) + ")");
    Eigen::VectorXd x(n);
    for (lapack_int i = 0; i < n; ++i) x(i) = 1.0 + 0.1 * std::sin(0.37 * i + c);
    for (int it = 0; it < 4; ++it) {
      info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n, kd, kd, 1, g.data(), ldg, piv.data(), x.data(), n);
      if (info != 0) throw NumericalError("dgbtrs failed (info " + std::to_string(info) + ")");
      for (int prev = 0; prev < c; ++prev) x -= vectors.col(prev).dot(x) * vectors.col(prev);
      x.normalize();
    }
    vectors.col(c) = x;
  }
}

}  // namespace ftf::detail
