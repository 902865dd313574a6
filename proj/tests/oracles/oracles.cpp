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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace oracle {

namespace {

constexpr double kPi = std::numbers::pi;

// Number of eigenvalues strictly below x.
int sturm_count(const std::vector<double>& d, const std::vector<double>& e, double x) {
  int count = 0;
  double q = d[0] - x;
  if (q < 0) ++count;
  for (std::size_t i = 1; i < d.size(); ++i) {
    if (q == 0) q = 1e-300;
    q = d[i] - x - e[i - 1] * e[i - 1] / q;
    if (q < 0) ++count;
  }
  return count;
}

}  // namespace

std::vector<double> sturm_lowest(const std::vector<double>& diag, const std::vector<double>& off, int k) {
  double lo = diag[0], hi = diag[0];
  for (std::size_t i = 0; i < diag.size(); ++i) {
    const double r = (i > 0 ? std::abs(off[i - 1]) : 0.0) + (i + 1 < diag.size() ? std::abs(off[i]) : 0.0);
    lo = std::min(lo, diag[i] - r);
    hi = std::max(hi, diag[i] + r);
  }
  std::vector<double> out;
  for (int j = 0; j < k; ++j) {
    double a = lo, b = hi;
    for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
      const double m = 0.5 * (a + b);
      if (sturm_count(diag, off, m) > j) b = m;
      else a = m;
    }
    out.push_back(0.5 * (a + b));
  }
  return out;
}

std::vector<double> fluxonium_fd(double ec, double ej, double el, double flux, int points, int k) {
  const double l = 6.0 * kPi;
  const double h = 2.0 * l / (points + 1);
  std::vector<double> d(static_cast<std::size_t>(points)), e(static_cast<std::size_t>(points - 1), -4.0 * ec / (h * h));
  for (int i = 0; i < points; ++i) {
    const double phi = -l + (i + 1) * h;
    d[static_cast<std::size_t>(i)] = 8.0 * ec / (h * h) + 0.5 * el * phi * phi - ej * std::cos(phi - 2.0 * kPi * flux);
  }
  return sturm_lowest(d, e, k);
}

std::vector<double> fluxonium_reference(double ec, double ej, double el, double flux, int k) {
  // Interior points N - 1 keep h exactly halving: h = 12 pi / N.
  const auto e1 = fluxonium_fd(ec, ej, el, flux, 1999, k);
  const auto e2 = fluxonium_fd(ec, ej, el, flux, 3999, k);
  const auto e3 = fluxonium_fd(ec, ej, el, flux, 7999, k);
  std::vector<double> out;
  for (int i = 0; i < k; ++i) {
    const auto s = static_cast<std::size_t>(i);
    const double r1 = (4.0 * e2[s] - e1[s]) / 3.0;
    const double r2 = (4.0 * e3[s] - e2[s]) / 3.0;
    out.push_back((16.0 * r2 - r1) / 15.0);
  }
  return out;
}

std::vector<double> two_junction_transmon(double ec, double ej1, double ej2, double flux, int cutoff, int k) {
  const int dim = 2 * cutoff + 1;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  // cos(phi + a) = (e^{i(phi+a)} + e^{-i(phi+a)})/2, and e^{i phi}|n> = |n+1>.
  const std::complex<double> up =
      -0.5 * (ej1 * std::exp(std::complex<double>(0, -kPi * flux)) + ej2 * std::exp(std::complex<double>(0, kPi * flux)));
  for (int i = 0; i < dim; ++i) {
    const double n = i - cutoff;
    h(i, i) = 4.0 * ec * n * n;
    if (i + 1 < dim) {
      h(i + 1, i) = up;
      h(i, i + 1) = std::conj(up);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().data(), es.eigenvalues().data() + k};
}

double cyclic_geometric_phase_error(double delta, double rabi, int steps) {
  using C = std::complex<double>;
  const double w = std::hypot(delta, rabi);
  const double period = 1.0 / w;
  Eigen::Matrix2cd hm;
  hm << 0.5 * delta, 0.5 * rabi, 0.5 * rabi, -0.5 * delta;
  const Eigen::Matrix2cd gen = C(0, -2.0 * kPi) * hm;
  Eigen::Vector2cd psi(1.0, 0.0);
  const double dt = period / steps;
  std::vector<double> energy;
  energy.push_back((psi.adjoint() * hm * psi)(0).real());
  for (int s = 0; s < steps; ++s) {
    const Eigen::Vector2cd k1 = gen * psi;
    const Eigen::Vector2cd k2 = gen * (psi + 0.5 * dt * k1);
    const Eigen::Vector2cd k3 = gen * (psi + 0.5 * dt * k2);
    const Eigen::Vector2cd k4 = gen * (psi + dt * k3);
    psi += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    energy.push_back((psi.adjoint() * hm * psi)(0).real() / psi.squaredNorm());
  }
  double integral = 0.0;  // Simpson; steps is even
  for (int s = 0; s <= steps; ++s) {
    const double wgt = (s == 0 || s == steps) ? 1.0 : (s % 2 ? 4.0 : 2.0);
    integral += wgt * energy[static_cast<std::size_t>(s)];
  }
  integral *= dt / 3.0;
  const double total = std::arg(psi(0));
  const double dynamic = -2.0 * kPi * integral;
  double geo = std::remainder(total - dynamic, 2.0 * kPi);
  if (geo < 0) geo += 2.0 * kPi;
  return std::abs(geo - kPi);
}

Eigen::MatrixXd kron_all(const std::vector<Eigen::Matrix2d>& factors) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Ones(1, 1);
  for (const auto& f : factors) {
    Eigen::MatrixXd next(m.rows() * 2, m.cols() * 2);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) next.block(2 * i, 2 * j, 2, 2) = m(i, j) * f;
    m = next;
  }
  return m;
}

double xeb_sampling_sigma(const Eigen::VectorXd& ideal, double shots) {
  const double u = 1.0 / static_cast<double>(ideal.size());
  const double e = ideal.squaredNorm();
  const double third = ideal.array().cube().sum();
  return std::sqrt(std::max(0.0, third - e * e) / shots) / (e - u);
}

}  // namespace oracle
