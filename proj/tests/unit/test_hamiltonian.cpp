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

#include <cmath>

#include "ftf/errors.hpp"
#include "ftf/hamiltonian.hpp"
#include "oracles.hpp"
#include "util.hpp"

using namespace ftf;

namespace {

FluxoniumParams fx(double ec, double ej, double el, double flux) {
  FluxoniumParams p;
  p.e_c = ec;
  p.e_j = ej;
  p.e_l = el;
  p.flux_ext = flux;
  return p;
}

TransmonCouplerParams tc(double ec, double ej1, double ej2, double flux) {
  TransmonCouplerParams p;
  p.e_c = ec;
  p.e_j1 = ej1;
  p.e_j2 = ej2;
  p.flux_ext = flux;
  return p;
}

// Weight of a bare product label in dressed state k.
double weight(const Subsystem& s, const std::string& label, Eigen::Index k) {
  std::vector<int> d;
  for (char c : label) d.push_back(level_from_letter(c));
  return std::norm(s.eig.vectors(s.ops.product_index(d), k));
}

}  // namespace

TEST(Fluxonium, HarmonicLimit) {
  const auto s = fluxonium_hamiltonian(fx(1.0, 0.0, 0.5, 0.5));
  EXPECT_NEAR(s.f_ge(), 2.0, 1e-9);
  EXPECT_NEAR(s.f_ef(), 2.0, 1e-9);
}

TEST(Fluxonium, FluxSymmetry) {
  for (double d : {0.03, 0.11, 0.27}) {
    const auto a = fluxonium_hamiltonian(fx(1.17, 4.2, 0.6, 0.5 + d));
    const auto b = fluxonium_hamiltonian(fx(1.17, 4.2, 0.6, 0.5 - d));
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(a.energies(k), b.energies(k), 1e-9);
  }
}

TEST(Fluxonium, MatchesFiniteDifferenceReference) {
  for (double flux : {0.5, 0.4, 0.0}) {
    const auto s = fluxonium_hamiltonian(fx(1.3, 4.0, 0.55, flux));
    const auto ref = oracle::fluxonium_reference(1.3, 4.0, 0.55, flux, 4);
    for (int k = 1; k < 4; ++k) EXPECT_NEAR(s.energies(k), ref[k] - ref[0], 1e-6) << "flux " << flux << " level " << k;
    EXPECT_NEAR(s.ground_energy, ref[0], 1e-6);
  }
}

TEST(Fluxonium, BasesAgree) {
  const auto a = fluxonium_hamiltonian(fx(1.17, 4.2, 0.6, 0.5), ElementBasis::oscillator());
  const auto b = fluxonium_hamiltonian(fx(1.17, 4.2, 0.6, 0.5), ElementBasis::flux_grid());
  for (int k = 1; k < 6; ++k) EXPECT_NEAR(a.energies(k), b.energies(k), 1e-6);
}

TEST(Fluxonium, RejectsBadParameters) {
  EXPECT_THROW(fluxonium_hamiltonian(fx(0.0, 4.0, 0.5, 0.5)), ValidationError);
  EXPECT_THROW(fluxonium_hamiltonian(fx(1.0, -1.0, 0.5, 0.5)), ValidationError);
  EXPECT_THROW(fluxonium_hamiltonian(fx(1.0, 4.0, 0.5, 0.5), ElementBasis::charge()), ValidationError);
}

TEST(Transmon, EffectiveJosephsonEnergy) {
  EXPECT_NEAR(transmon_ej_eff(tc(0.2, 17, 28, 0.0)), 45.0, 1e-12);
  EXPECT_NEAR(transmon_ej_eff(tc(0.2, 17, 28, 0.5)), 11.0, 1e-12);
  // At a generic flux the two-junction problem is the single junction with E_J,eff up to a phase shift.
  const double ej = transmon_ej_eff(tc(0.2, 17, 28, 0.25));
  EXPECT_NEAR(ej, std::hypot(45.0 * std::cos(M_PI / 4), 11.0 * std::sin(M_PI / 4)), 1e-12);
  for (double flux : {0.0, 0.17, 0.25, 0.5}) {
    const auto s = transmon_hamiltonian(tc(0.21, 17, 28, flux));
    const auto ref = oracle::two_junction_transmon(0.21, 17, 28, flux, 40, 4);
    for (int k = 1; k < 4; ++k) EXPECT_NEAR(s.energies(k), ref[k] - ref[0], 1e-9) << "flux " << flux;
  }
}

TEST(Transmon, CouplerSitsAboveQubits) {
  const auto c = testing_util::unit_config();
  const auto s = transmon_hamiltonian(c.node("C12").coupler());
  EXPECT_GT(s.f_ge(), 8.0);
}

TEST(Transmon, AsymptoticFrequency) {
  for (double ratio : {50.0, 100.0, 200.0}) {
    const double ec = 0.2, ej = ratio * ec;
    const auto s = transmon_hamiltonian(tc(ec, ej / 2, ej / 2, 0.0));
    const double approx = std::sqrt(8 * ej * ec) - ec;
    EXPECT_NEAR(s.f_ge() / approx, 1.0, 0.01) << ratio;
  }
}

TEST(Transmon, FrequencyFallsTowardHalfFlux) {
  double prev = 1e9;
  for (int i = 0; i <= 20; ++i) {
    const double f = transmon_hamiltonian(tc(0.21, 17, 28, 0.025 * i)).f_ge();
    EXPECT_LT(f, prev);
    prev = f;
  }
}

TEST(Composite, UncoupledEnergiesAreSums) {
  const auto cfg = testing_util::fluxonium_pair(0.0);
  const auto sys = solve_subsystem(cfg, {"A", "B"}, {{"A", 4}, {"B", 4}});
  const auto a = fluxonium_hamiltonian(cfg.node("A").fluxonium());
  const auto b = fluxonium_hamiltonian(cfg.node("B").fluxonium());
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const std::string label = level_letter(i) + level_letter(j);
      EXPECT_NEAR(sys.energy(label), a.energies(i) + b.energies(j), 1e-12) << label;
      EXPECT_NEAR(sys.spectrum.overlaps[sys.spectrum.index(label)], 1.0, 1e-12);
    }
}

TEST(Composite, HamiltonianIsHermitian) {
  const auto c = testing_util::unit_config();
  const auto ops = build_composite(c, {"Q2", "C23", "Q3"}, {{"Q2", 4}, {"C23", 3}, {"Q3", 4}});
  EXPECT_EQ(ops.dimension(), 48);
  EXPECT_LT((ops.hamiltonian - ops.hamiltonian.adjoint()).norm(), 1e-13);
}

TEST(Composite, RejectsBadSubsystems) {
  const auto c = testing_util::unit_config();
  EXPECT_THROW(build_composite(c, {}), ValidationError);
  EXPECT_THROW(build_composite(c, {"Q2", "Q2"}), ValidationError);
  EXPECT_THROW(build_composite(c, {"Q9"}), ValidationError);
  EXPECT_THROW(build_composite(c, {"Q2"}, {{"Q2", 1}}), ValidationError);
  EXPECT_THROW(build_composite(c, {"Q1", "C12", "Q2", "C23", "Q3"}, {{"Q1", 8}, {"C12", 8}, {"Q2", 8}, {"C23", 8}, {"Q3", 8}}),
               DimensionError);
}

TEST(Labels, OffPointComputationalStatesAreBareLike) {
  const auto c = testing_util::unit_config().with_flux({{"C12", 0.1}, {"C23", 0.1}});
  const auto s = solve_subsystem(c, {"Q1", "C12", "Q2", "C23", "Q3"},
                                 {{"Q1", 4}, {"C12", 3}, {"Q2", 4}, {"C23", 3}, {"Q3", 4}}, 60);
  for (const char* l : {"ggggg", "egggg", "ggegg", "gggge", "egegg", "ggege", "eggge", "egege"}) {
    const auto i = s.spectrum.resolved_index(l);
    EXPECT_GT(s.spectrum.overlaps[i], 0.99) << l;
  }
}

TEST(Labels, ConsistentUnderNodeReordering) {
  const auto c = testing_util::unit_config().with_flux({{"C23", 0.3}});
  const auto a = solve_subsystem(c, {"Q2", "C23", "Q3"}, {{"Q2", 4}, {"C23", 3}, {"Q3", 4}});
  const auto b = solve_subsystem(c, {"Q3", "C23", "Q2"}, {{"Q2", 4}, {"C23", 3}, {"Q3", 4}});
  for (Eigen::Index k = 0; k < a.spectrum.energies.size(); ++k) EXPECT_NEAR(a.spectrum.energies(k), b.spectrum.energies(k), 1e-9);
  for (std::size_t k = 0; k < a.spectrum.size(); ++k) {
    const std::string l = a.spectrum.labels[k];
    const std::string r(l.rbegin(), l.rend());
    if (a.spectrum.ambiguous[k]) continue;
    EXPECT_NEAR(a.energy(l), b.energy(r), 1e-9) << l;
  }
}

TEST(Labels, AmbiguousAtEngineeredAnticrossing) {
  // Lower C23 so its g->e frequency crosses Q2's e->f transition, then bisect to the equal-mixing point.
  auto doc = to_json(testing_util::unit_config());
  for (auto& n : doc["nodes"])
    if (n["name"] == "C23") {
      n["e_j1"] = 12.0;
      n["e_j2"] = 20.0;
    }
  const auto base = parse_config(doc);
  const LevelMap lv{{"Q2", 4}, {"C23", 3}, {"Q3", 3}};
  // Composition of the lower of the two states sharing fgg and eeg; flips sign across the crossing.
  auto mixing = [&](double flux) {
    const auto s = solve_subsystem(base.with_flux({{"C23", flux}}), {"Q2", "C23", "Q3"}, lv);
    for (Eigen::Index k = 0; k < s.eig.vectors.cols(); ++k) {
      const double wf = weight(s, "fgg", k), we = weight(s, "eeg", k);
      if (wf + we > 0.3) return wf - we;
    }
    return 0.0;
  };
  double lo = 0.0, hi = 0.5;
  const double flo = mixing(lo);
  ASSERT_LT(flo * mixing(hi), 0.0) << "no crossing in range";
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mixing(mid) * flo > 0) lo = mid;
    else hi = mid;
  }
  const auto s = solve_subsystem(base.with_flux({{"C23", 0.5 * (lo + hi)}}), {"Q2", "C23", "Q3"}, lv);
  int flagged = 0;
  for (std::size_t k = 0; k < s.spectrum.size(); ++k)
    if (s.spectrum.ambiguous[k] && (s.spectrum.labels[k] == "fgg" || s.spectrum.labels[k] == "eeg")) ++flagged;
  EXPECT_GE(flagged, 1);
  EXPECT_THROW(
      {
        s.spectrum.resolved_index("fgg");
        s.spectrum.resolved_index("eeg");
      },
      AmbiguityError);
}

TEST(Labels, TruncationConvergence) {
  const auto c = testing_util::unit_config().with_flux({{"C23", 0.5}});
  auto f = [&](int q, int cp, const char* a, const char* b) {
    const auto s = solve_subsystem(c, {"Q2", "C23", "Q3"}, {{"Q2", q}, {"C23", cp}, {"Q3", q}});
    return s.energy(b) - s.energy(a);
  };
  for (auto [a, b] : std::vector<std::pair<const char*, const char*>>{{"ggg", "egg"}, {"ggg", "gge"}, {"egg", "eeg"}}) {
    const double lo = f(6, 5, a, b), hi = f(8, 7, a, b);
    EXPECT_LT(std::abs(hi - lo), 5e-4) << a << "->" << b;
  }
}

TEST(Labels, LetterRoundTrip) {
  for (int l = 0; l < 10; ++l) EXPECT_EQ(level_from_letter(level_letter(l)[0]), l);
  EXPECT_EQ(level_letter(0), "g");
  EXPECT_EQ(level_letter(2), "f");
  EXPECT_EQ(excitation_count("efg"), 3);
  EXPECT_THROW(level_from_letter('?'), ValidationError);
}
