// Copyright 2026 The cnash Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "cnash/verification.hpp"
#include "fixtures.hpp"

namespace cnash {
namespace {

using testing::kernel_of;
using testing::preset_problem;
using testing::solve_preset;

TEST(Exploitability, TrivialEquilibriumAndPerturbation) {
  const auto p = preset_problem("trivial_power");
  const auto r = solve_preset(p);
  EXPECT_LT(exploitability(r, p.model, p.cost, p.mu), 1e-8);
  std::vector<double> sq(513);
  for (std::size_t j = 0; j <= 512; ++j) sq[j] = std::pow(j / 512.0, 2);
  const TransportMap1D T(sq);
  const auto nu = pushforward_map_1d(T, p.mu);
  EXPECT_GT(exploitability(nu, T, p.model, p.cost), 1e-3);
}

TEST(Exploitability, NonNegativeOnRandomInputs) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto p = preset_problem("fig3", 128);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> v(129);
    for (auto& x : v) x = u(rng);
    std::sort(v.begin(), v.end());
    const TransportMap1D T(v);
    EXPECT_GE(exploitability(pushforward_map_1d(T, p.mu), T, p.model, p.cost), -1e-12);
  }
}

TEST(Exploitability, GaugeInvariance) {
  const auto p = preset_problem("fig3");
  auto r = solve_preset(p);
  const auto before = certify(r, p);
  for (double& v : r.potentials.phi) v += 0.37;
  for (double& v : r.potentials.phi_c) v -= 0.37;
  const auto after = certify(r, p);
  EXPECT_EQ(before.exploitability, after.exploitability);
  EXPECT_NEAR(before.duality_gap, after.duality_gap, 1e-12);
  EXPECT_NEAR(before.pair_violation, after.pair_violation, 1e-12);
}

TEST(Complementarity, TrivialSlacksVanish) {
  const auto p = preset_problem("trivial_power");
  const auto r = solve_preset(p);
  const auto rep = complementarity_report(r.nu, p.model, p.cost, p.mu, 1.0);
  for (double s : rep.slack) EXPECT_NEAR(s, 0.0, 1e-10);
  EXPECT_TRUE(rep.passed);
}

TEST(Complementarity, Fig3EqualityOnSupport) {
  const auto p = preset_problem("fig3");
  const auto r = solve_preset(p);
  const auto rep = complementarity_report(r.nu, p.model, p.cost, p.mu, 1.0);
  EXPECT_TRUE(rep.passed);
  EXPECT_LT(rep.max_violation, 1e-6);
  EXPECT_GE(rep.min_slack_off_support, -1e-6);
  EXPECT_NEAR(rep.lambda, *r.lambda, 1e-9);
}

TEST(Complementarity, NonEquilibriumFails) {
  const auto p = preset_problem("trivial_power");
  std::vector<double> half(512, 0.0);
  std::fill(half.begin(), half.begin() + 256, 2.0);
  const auto rep = complementarity_report(GridMeasure1D(half), p.model, p.cost, p.mu, 1.0);
  EXPECT_FALSE(rep.passed);
}

// Both diagnostics accept converged results and reject early iterates.
TEST(Complementarity, AgreesWithExploitability) {
  for (const char* name : {"fig3", "fig3_nonsym", "trivial_power", "monotone"}) {
    const auto p = preset_problem(name);
    const auto r = solve_preset(p);
    const bool comp = complementarity_report(r.nu, p.model, p.cost, p.mu, 1.0).passed;
    EXPECT_TRUE(comp) << name;
    EXPECT_TRUE(r.exploitability < 1e-6) << name;
    SolverOptions early;
    early.max_iter = 2;
    const auto e = solve_preset(p, early);
    if (wasserstein1(e.nu, r.nu) < 1e-3) continue;
    const bool comp_e = complementarity_report(e.nu, p.model, p.cost, p.mu, 1.0).passed;
    EXPECT_FALSE(comp_e) << name;
    EXPECT_FALSE(e.exploitability < 1e-6) << name;
  }
}

TEST(Purity, Examples) {
  const auto p = preset_problem("fig3");
  const auto r = solve_preset(p);
  EXPECT_TRUE(purity_check(r));
  bool has_flat = false;
  for (double v : r.nu.density()) has_flat = has_flat || v == 0.0;
  EXPECT_TRUE(has_flat);
  const std::vector<double> down{0.0, 0.5, 0.4, 1.0};
  EXPECT_FALSE(purity_check(std::span<const double>(down)));
}

TEST(Certify, PresetScenariosPass) {
  for (const char* name : {"fig2", "fig3", "fig3_nonsym", "trivial_log", "trivial_power"}) {
    const auto p = preset_problem(name);
    const auto r = solve_preset(p);
    const auto c = certify(r, p);
    EXPECT_TRUE(c.passed) << name;
    EXPECT_LE(c.pair_violation, 1e-8) << name;
    EXPECT_LT(std::abs(c.duality_gap), 1e-6) << name;
    EXPECT_LT(c.mass_error, 1e-8) << name;
  }
}

TEST(Certify, UnconvergedFails) {
  const auto p = preset_problem("fig3_nonsym");
  SolverOptions opt;
  opt.max_iter = 3;
  const auto r = solve_preset(p, opt);
  EXPECT_FALSE(r.converged);
  EXPECT_FALSE(certify(r, p).passed);
}

TEST(Uniqueness, Examples) {
  const auto trivial = preset_problem("trivial_power");
  std::vector<double> half(512, 0.0);
  std::fill(half.begin(), half.begin() + 256, 2.0);
  const auto rep = uniqueness_probe(trivial, {GridMeasure1D::uniform(512), GridMeasure1D(half)});
  EXPECT_LT(rep.max_w1, 1e-6);
  EXPECT_EQ(rep.label, "certified");

  const auto fig2 = preset_problem("fig2");
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  std::vector<GridMeasure1D> starts;
  for (int s = 0; s < 3; ++s) {
    std::vector<double> d(512);
    for (auto& v : d) v = u(rng);
    starts.push_back(GridMeasure1D::normalized(d));
  }
  const auto r2 = uniqueness_probe(fig2, starts);
  EXPECT_TRUE(r2.conclusive);
  EXPECT_LT(r2.max_w1, 1e-5);

  const auto fig3 = preset_problem("fig3", 128);
  const auto r3 = uniqueness_probe(fig3, {GridMeasure1D::uniform(128), GridMeasure1D::uniform(128)});
  EXPECT_LE(r3.margin, 0.0);
  EXPECT_EQ(r3.label, "exploratory");
  EXPECT_THROW(uniqueness_probe(fig3, {GridMeasure1D::uniform(128)}), std::invalid_argument);
}

TEST(SolveFrom, RejectsUnsupportedModels) {
  auto p = preset_problem("fig3");
  p.model.v0 = QuadraticPotential<1>{{1.0}, {0.5}};
  EXPECT_THROW(solve_preset(p), PreconditionError);
  p.model.congestion.reset();
  EXPECT_THROW(solve_preset(p), PreconditionError);
}

TEST(ExploitabilityBound, ClosedFormIsZero) {
  ExternalityModel<1> m;
  m.v0 = QuadraticPotential<1>{{0.5}, {0.0}};
  const auto mu = DiscreteMeasure<1>::uniform_lattice(256);
  const auto r = iterate_best_reply(m, mu, mu, 1e-12, 10);
  EXPECT_LT(exploitability_bound(r, m, mu, 1.0), 1e-20);
  EXPECT_EQ(exploitability_bound(r, m, mu, -2.0), INFINITY);
}

}  // namespace
}  // namespace cnash
