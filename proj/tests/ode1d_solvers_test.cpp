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
#include <vector>

#include <gtest/gtest.h>

#include "cnash/ode1d_solvers.hpp"
#include "fixtures.hpp"

namespace cnash {
namespace {

using testing::kernel_of;
using testing::preset_problem;
using testing::solve_preset;

TEST(Algo1Integrand, QuadraticIdentityIsOne) {
  const auto mu = GridMeasure1D::uniform(64);
  const auto I = algo1_integrand(TransportMap1D::identity(64), CostModel::quadratic(), nullptr, mu);
  for (double v : I.scaled) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(Algo1Integrand, BilinearIsGaussian) {
  const auto mu = GridMeasure1D::uniform(128);
  const auto I = algo1_integrand(TransportMap1D::identity(128), CostModel::bilinear(-1.0), nullptr, mu);
  for (std::size_t j = 0; j <= 128; ++j) {
    const double x = mu.node(j);
    EXPECT_NEAR(I.scaled[j] * std::exp(I.shift), std::exp(-x * x / 2), 1e-14);
  }
}

TEST(Algo1Integrand, Fig2RefinementAtMidpoint) {
  const auto p = preset_problem("fig2", 512);
  const auto q = preset_problem("fig2", 1024);
  const auto a = algo1_integrand(TransportMap1D::identity(512), p.cost, kernel_of(p), p.mu);
  const auto b = algo1_integrand(TransportMap1D::identity(1024), q.cost, kernel_of(q), q.mu);
  const double va = a.scaled[256] * std::exp(a.shift);
  const double vb = b.scaled[512] * std::exp(b.shift);
  EXPECT_GT(va, 0.0);
  EXPECT_TRUE(std::isfinite(va));
  EXPECT_NEAR(va, vb, 1e-6);
}

TEST(Algo1Step, TrivialFixedPoint) {
  const auto mu = GridMeasure1D::uniform(64);
  const Algo1State s{TransportMap1D::identity(64), 1.0, 0, {}};
  const auto next = algo1_step(s, CostModel::quadratic(), nullptr, mu);
  EXPECT_NEAR(next.C, 1.0, 1e-15);
  for (std::size_t j = 0; j <= 64; ++j) EXPECT_NEAR(next.T[j], s.T[j], 1e-15);
  EXPECT_EQ(next.k, 1);
}

TEST(Algo1Step, Fig2PreservesEndpointsAndMonotonicity) {
  const auto p = preset_problem("fig2");
  Algo1State s{TransportMap1D::identity(512), 1.0, 0, {}};
  for (int k = 0; k < 10; ++k) {
    const auto I = algo1_integrand(s.T, p.cost, kernel_of(p), p.mu);
    double total = 0.0;
    for (std::size_t j = 1; j < I.scaled.size(); ++j) total += 0.5 * (I.scaled[j - 1] + I.scaled[j]) / 512;
    double unit = 0.0;
    for (std::size_t j = 1; j < I.scaled.size(); ++j) {
      unit += 0.5 * (I.scaled[j - 1] + I.scaled[j]) / total / 512;
    }
    EXPECT_NEAR(unit, 1.0, 1e-10);
    s = algo1_step(s, p.cost, kernel_of(p), p.mu);
    EXPECT_GT(s.C, 0.0);
    EXPECT_EQ(s.T[0], 0.0);
    EXPECT_EQ(s.T[512], 1.0);
    for (std::size_t j = 1; j <= 512; ++j) EXPECT_GT(s.T[j], s.T[j - 1]);
  }
}

TEST(Algo1Solve, TrivialAndPreconditions) {
  const auto p = preset_problem("trivial_log");
  const auto r = solve_preset(p);
  EXPECT_TRUE(r.converged);
  for (std::size_t j = 0; j <= 512; ++j) EXPECT_NEAR(r.map[j], r.map.node(j), 1e-12);
  EXPECT_LT(r.exploitability, 1e-8);
  EXPECT_THROW(algo1_solve(CostModel::bilinear(1.0), nullptr, p.mu), PreconditionError);
  SolverOptions bad;
  bad.damping = 1.5;
  EXPECT_THROW(algo1_solve(p.cost, nullptr, p.mu, bad), std::invalid_argument);
}

TEST(Algo1Solve, Fig2InadaAndDampingIndependence) {
  const auto p = preset_problem("fig2");
  const auto r = solve_preset(p);
  ASSERT_TRUE(r.converged);
  for (double v : r.nu.density()) EXPECT_GT(v, 0.0);
  SolverOptions half;
  half.damping = 0.5;
  const auto h = solve_preset(p, half);
  ASSERT_TRUE(h.converged);
  for (std::size_t j = 0; j <= 512; ++j) EXPECT_NEAR(r.map[j], h.map[j], 1e-8);
}

TEST(LambdaSolve, Examples) {
  const std::vector<double> zero(100, 0.0);
  EXPECT_NEAR(lambda_solve(zero, 1.0), 1.0, 1e-12);
  EXPECT_NEAR(lambda_solve(zero, 2.0), 1.0, 1e-12);
  std::vector<double> y(400);
  for (std::size_t j = 0; j < y.size(); ++j) y[j] = (j + 0.5) / y.size();
  const double lam = lambda_solve(y, 1.0);
  EXPECT_NEAR(lam, 1.5, 1e-12);
  EXPECT_THROW(lambda_solve({}, 1.0), std::invalid_argument);
  EXPECT_THROW(lambda_solve(zero, 0.5), std::invalid_argument);
}

TEST(LambdaSolve, MassIsIncreasingAndProfileNormalized) {
  std::vector<double> y(400);
  for (std::size_t j = 0; j < y.size(); ++j) y[j] = (j + 0.5) / y.size();
  const double lam = lambda_solve(y, 2.0);
  const auto mass = [&](double l) {
    double s = 0.0;
    for (double v : detail::power_profile(y, l, 2.0)) s += v / y.size();
    return s;
  };
  EXPECT_NEAR(mass(lam), 1.0, 1e-12);
  EXPECT_LT(mass(lam - 1e-6), mass(lam));
  EXPECT_GT(mass(lam + 1e-6), mass(lam));
  // (lambda - y)_+^(1/2) against its closed-form integral.
  const double exact = 2.0 / 3 * (std::pow(lam, 1.5) - std::pow(std::max(lam - 1, 0.0), 1.5));
  EXPECT_NEAR(exact, 1.0, 1e-5);
}

TEST(Algo2Step, TrivialFixedPoint) {
  const auto mu = GridMeasure1D::uniform(64);
  const Algo2State s{GridMeasure1D::uniform(64), 0.0, {}, {}, 0, {}};
  const auto next = algo2_step(s, CostModel::quadratic(), nullptr, mu, 1.0);
  EXPECT_NEAR(next.lambda, 1.0, 1e-12);
  for (std::size_t m = 0; m < next.S.size(); ++m) EXPECT_NEAR(next.S[m], m / 128.0, 1e-14);
  for (double v : next.phi_c) EXPECT_NEAR(v, 0.0, 1e-14);
  for (double v : next.nu.density()) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(Algo2Step, Fig3StepsStayValid) {
  const auto p = preset_problem("fig3");
  Algo2State s{GridMeasure1D::uniform(512), 0.0, {}, {}, 0, {}};
  for (int k = 0; k < 20; ++k) {
    s = algo2_step(s, p.cost, kernel_of(p), p.mu, 1.0, 0.5);
    EXPECT_NEAR(s.nu.mass(), 1.0, 1e-10);
    for (double v : s.nu.density()) EXPECT_GE(v, 0.0);
  }
}

TEST(Algo2Solve, Trivial) {
  const auto p = preset_problem("trivial_power");
  const auto r = solve_preset(p);
  EXPECT_TRUE(r.converged);
  for (double v : r.nu.density()) EXPECT_NEAR(v, 1.0, 1e-10);
  EXPECT_LT(r.exploitability, 1e-8);
  EXPECT_THROW(algo2_solve(p.cost, nullptr, p.mu, 0.5), PreconditionError);
}

TEST(Algo2Solve, PresetScenarios) {
  for (const char* name : {"fig3", "fig3_nonsym"}) {
    const auto p = preset_problem(name);
    const auto r = solve_preset(p);
    ASSERT_TRUE(r.converged) << name;
    EXPECT_LT(r.exploitability, 1e-6) << name;
    EXPECT_TRUE(r.lambda.has_value());
  }
}

TEST(Potentials, EnvelopeConsistency) {
  for (const char* name : {"fig2", "fig3", "fig3_nonsym"}) {
    const auto p = preset_problem(name, 256);
    const auto r = solve_preset(p);
    const auto nodes = uniform_nodes(256);
    for (std::size_t i = 0; i <= 256; ++i) {
      double best = INFINITY;
      for (std::size_t j = 0; j <= 256; ++j) {
        best = std::min(best, p.cost(nodes[i], nodes[j]) - r.potentials.phi_c[j]);
      }
      EXPECT_NEAR(r.potentials.phi[i], best, 1e-6) << name << " node " << i;
    }
  }
}

TEST(Refinement, Fig3StableUnderGridDoubling) {
  const auto a = solve_preset(preset_problem("fig3", 512));
  const auto b = solve_preset(preset_problem("fig3", 1024));
  ASSERT_TRUE(a.converged && b.converged);
  EXPECT_LT(wasserstein1(a.nu, b.nu), 4.0 / 512);
}

}  // namespace
}  // namespace cnash
