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

#include "ftf/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "ftf/errors.hpp"

namespace ftf {

namespace {

struct Residuals {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  const ScalarModel* model = nullptr;
  const std::vector<double>* x = nullptr;
  const std::vector<double>* y = nullptr;
  int n_params = 0;

  int inputs() const { return n_params; }
  int values() const { return static_cast<int>(x->size()); }
  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& f) const {
    for (std::size_t i = 0; i < x->size(); ++i) f(static_cast<Eigen::Index>(i)) = (*model)(p, (*x)[i]) - (*y)[i];
    return 0;
  }
};

}  // namespace

double FitReport::value(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return values(static_cast<Eigen::Index>(i));
  throw ValidationError("fit has no parameter '" + name + "'");
}

double FitReport::error(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return errors(static_cast<Eigen::Index>(i));
  throw ValidationError("fit has no parameter '" + name + "'");
}

nlohmann::json FitReport::to_json() const {
  nlohmann::json j;
  for (std::size_t i = 0; i < names.size(); ++i)
    j["parameters"][names[i]] = {{"value", values(static_cast<Eigen::Index>(i))},
                                 {"error", errors(static_cast<Eigen::Index>(i))}};
  j["residual_sum_squares"] = residual_sum_squares;
  return j;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("fit_line needs >= 2 paired samples");
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = x[i];
    a(i, 1) = 1.0;
    b(i) = y[i];
  }
  const Eigen::Vector2d c = a.colPivHouseholderQr().solve(b);
  LineFit r{c(0), c(1)};
  if (n > 2) {
    const double s2 = (a * c - b).squaredNorm() / static_cast<double>(n - 2);
    const Eigen::Matrix2d cov = s2 * (a.transpose() * a).inverse();
    r.slope_error = std::sqrt(cov(0, 0));
    r.intercept_error = std::sqrt(cov(1, 1));
  }
  return r;
}

FitReport nonlinear_fit(const ScalarModel& model, const std::vector<double>& x, const std::vector<double>& y,
                        const Eigen::VectorXd& initial, std::vector<std::string> names, int max_evaluations) {
  if (x.size() != y.size()) throw ValidationError("nonlinear_fit: x and y differ in length");
  if (x.size() < static_cast<std::size_t>(initial.size())) throw ValidationError("nonlinear_fit: too few samples");
  Residuals r;
  r.model = &model;
  r.x = &x;
  r.y = &y;
  r.n_params = static_cast<int>(initial.size());
  Eigen::NumericalDiff<Residuals> diff(r);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Residuals>> lm(diff);
  lm.parameters.ftol = 1e-15;
  lm.parameters.xtol = 1e-15;
  lm.parameters.maxfev = max_evaluations;
  Eigen::VectorXd p = initial;
  const auto status = lm.minimize(p);
  if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters ||
      status == Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation || !p.allFinite())
    throw NumericalError("nonlinear fit did not converge (status " + std::to_string(static_cast<int>(status)) + ")");

  FitReport rep;
  rep.names = std::move(names);
  rep.values = p;
  rep.evaluations = static_cast<int>(lm.nfev);
  Eigen::VectorXd f(static_cast<Eigen::Index>(x.size()));
  r(p, f);
  rep.residual_sum_squares = f.squaredNorm();
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(x.size()), p.size());
  diff.df(p, jac);
  const auto dof = static_cast<double>(x.size()) - static_cast<double>(p.size());
  const double s2 = dof > 0 ? rep.residual_sum_squares / dof : 0.0;
  rep.covariance = s2 * (jac.transpose() * jac).completeOrthogonalDecomposition().pseudoInverse();
  rep.errors = rep.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  return rep;
}

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size() || t.size() < 4) throw ValidationError("fit_decay needs >= 4 paired samples");
  // Log-linear seed on the baseline-subtracted signal.
  const double base = *std::min_element(y.begin(), y.end());
  const double top = *std::max_element(y.begin(), y.end());
  const double floor_v = base - 1e-3 * std::max(top - base, 1e-12);
  std::vector<double> tx, ly;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double v = y[i] - floor_v;
    if (v > 0.05 * (top - floor_v)) {
      tx.push_back(t[i]);
      ly.push_back(std::log(v));
    }
  }
  double rate0 = 1.0 / std::max(t.back() - t.front(), 1e-12);
  if (tx.size() >= 2) rate0 = std::max(-fit_line(tx, ly).slope, 1e-12);
  Eigen::Vector3d p0(y.front() - base, rate0, base);

  const ScalarModel m = [](const Eigen::VectorXd& p, double x) { return p(0) * std::exp(-p(1) * x) + p(2); };
  const FitReport rep = nonlinear_fit(m, t, y, p0, {"amplitude", "rate", "offset"});
  DecayFit d;
  d.amplitude = rep.values(0);
  d.rate = rep.values(1);
  d.offset = rep.values(2);
  d.covariance = rep.covariance;
  if (!(d.rate > 0)) throw NumericalError("decay fit returned a non-positive rate");
  return d;
}

nlohmann::json DecayFit::to_json() const {
  return {{"rate", rate}, {"rate_error", rate_error()}, {"amplitude", amplitude}, {"offset", offset}};
}

std::vector<double> unwrap_phase(const std::vector<double>& phase) {
  std::vector<double> out(phase);
  for (std::size_t i = 1; i < out.size(); ++i) {
    double d = out[i] - out[i - 1];
    d -= 2.0 * std::numbers::pi * std::round(d / (2.0 * std::numbers::pi));
    out[i] = out[i - 1] + d;
  }
  return out;
}

}  // namespace ftf
