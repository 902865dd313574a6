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

// Thin LAPACK wrappers. Private to the core library.

#include <complex>

#include <Eigen/Dense>

namespace ftf::detail {

// Lowest `count` eigenpairs of a Hermitian matrix (ascending). Only the lower triangle is read.
void hermitian_lowest(const Eigen::MatrixXcd& a, int count, Eigen::VectorXd& values, Eigen::MatrixXcd& vectors);

// Lowest `count` eigenpairs of a real symmetric band matrix given by its diagonals:
// bands[k][i] = A(i + k, i), k = 0..kd.
void banded_lowest(const std::vector<Eigen::VectorXd>& bands, int count, Eigen::VectorXd& values,
                   Eigen::MatrixXd& vectors);

}  // namespace ftf::detail
