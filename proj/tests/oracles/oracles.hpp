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


// Reference computations used only by tests. None of these call into the library's solvers.

#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// k lowest eigenvalues of a symmetric tridiagonal matrix by Sturm-sequence bisection.
std::vector<double> sturm_lowest(const std::vector<double>& diag, const std::vector<double>& off, int k);

// Fluxonium 4 Ec n^2 + El phi^2 / 2 - Ej cos(phi - 2 pi flux) on [-6 pi, 6 pi] with a 3-point
// Laplacian at `points` interior nodes. Absolute energies.
std::vector<double> fluxonium_fd(double ec, double ej, double el, double flux, int points, int k);

// Richardson extrapolation of fluxonium_fd over points = 2000, 4000, 8000 (h, h/2, h/4), removing h^2 and h^4.
std::vector<double> fluxonium_reference(double ec, double ej, double el, double flux, int k);

// Transmon with both junctions kept: 4 Ec n^2 - Ej1 cos(phi - pi flux) - Ej2 cos(phi + pi flux),
// charge basis |n| <= cutoff, solved with Eigen's Hermitian solver. Absolute energies.
std::vector<double> two_junction_transmon(double ec, double ej1, double ej2, double flux, int cutoff, int k);

// |phi_geo - pi| after one generalized Rabi period of H = (delta/2) sz + (rabi/2) sx, frequencies in GHz,
// with phase = -2 pi E t. Fixed-step RK4 on the Schroedinger equation; dynamic phase by Simpson's rule.
double cyclic_geometric_phase_error(double delta, double rabi, int steps = 20000);

// Explicit Kronecker product of per-qubit 2x2 matrices, qubit 0 most significant.
Eigen::MatrixXd kron_all(const std::vector<Eigen::Matrix2d>& factors);

// Standard error of the single-circuit linear XEB from finite sampling of the ideal distribution.
double xeb_sampling_sigma(const Eigen::VectorXd& ideal, double shots);

}  // namespace oracle
