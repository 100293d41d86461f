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

// A posteriori checks of a computed equilibrium. Nothing here trusts the
// solver: each residual is recomputed from nu, the map and the model.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cnash/best_reply.hpp"
#include "cnash/cost.hpp"
#include "cnash/game_model.hpp"
#include "cnash/measures.hpp"
#include "cnash/ode1d_solvers.hpp"
#include "cnash/result.hpp"
#include "cnash/transport.hpp"

namespace cnash {

inline constexpr double kCertificationThreshold = 1e-6;

namespace detail {

// Smallest x with T(x) >= y for a non-decreasing piecewise-linear map.
inline double map_inverse(const TransportMap1D& T, double y) {
  const auto v = T.values();
  const auto it = std::lower_bound(v.begin(), v.end(), y);
  if (it == v.begin()) return 0.0;
  if (it == v.end()) return 1.0;
  const std::size_t j = static_cast<std::size_t>(it - v.begin());
  const double lo = v[j - 1], hi = v[j];
  const double t = hi > lo ? (y - lo) / (hi - lo) : 0.0;
  return T.node(j - 1) + std::clamp(t, 0.0, 1.0) * (T.node(j) - T.node(j - 1));
}

}  // namespace detail

// Integrated gap between the cost each type pays and its best grid response.
// The integral over types is written on the action side through x = S(y),
// S the inverse of the map, so every action cell j contributes
//   nu_j h [c(S_j, y_j) + V_j - min_k (c(S_j, y_k) + V_k)]
// with y at cell midpoints. Cells with nu <= kDensityFloor are skipped under
// log congestion (V = -inf there).
inline double exploitability(const GridMeasure1D& nu, const TransportMap1D& map,
                             const Model1D& model, const CostModel& cost) {
  const std::size_t n = nu.n_cells();
  const double h = nu.cell_width();
  const std::vector<double> V = externality_on_cells(model, nu);
  const bool log_congestion = model.congestion && model.congestion->is_log();
  std::vector<double> gap(n, 0.0);
  detail::parallel_for(n, [&](std::size_t j) {
    if (nu[j] <= kDensityFloor) return;
    const double s = detail::map_inverse(map, nu.midpoint(j));
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      if (log_congestion && nu[k] <= kDensityFloor) continue;
      best = std::min(best, cost(s, nu.midpoint(k)) + V[k]);
    }
    gap[j] = nu[j] * h * (cost(s, nu.midpoint(j)) + V[j] - best);
  });
  double total = 0.0;
  for (double g : gap) total += g;
  return total;
}

inline double exploitability(const EquilibriumResult& r, const Model1D& model,
                             const CostModel& cost, const GridMeasure1D& mu) {
  if (mu.n_cells() != r.map.n_cells()) {
    throw std::invalid_argument("exploitability: mu and map grids differ");
  }
  return exploitability(r.nu, r.map, model, cost);
}

// Particle equilibria with quadratic cost: the gap of type x is at most
// |y + grad V[nu](y) - x|^2 / (2 (1 + lambda)) when y -> 1/2|y - x|^2 + V[nu](y)
// is (1 + lambda)-strongly convex. Returns the mu-average of that bound.
template <std::size_t Dim>
double exploitability_bound(const BestReplyResult<Dim>& r,
                            const ExternalityModel<Dim>& model,
                            const DiscreteMeasure<Dim>& mu, double lambda) {
  if (!(1.0 + lambda > 0.0)) {
    return std::numeric_limits<double>::infinity();
  }
  const GradientField<Dim> field(model, r.nu);
  double total = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const auto g = field.gradient(r.actions[i]);
    double sq = 0.0;
    for (std::size_t d = 0; d < Dim; ++d) {
      const double v = r.actions[i][d] + g[d] - mu.atom(i)[d];
      sq += v * v;
    }
    total += mu.weight(i) * sq / (2.0 * (1.0 + lambda));
  }
  return total;
}

struct ComplementarityReport {
  double lambda = 0.0;      // level that normalizes (lambda - g)_+^(1/alpha)
  double lambda_fit = 0.0;  // mean of nu^alpha + g over the support
  std::vector<double> slack;  // nu^alpha + phi^c + I - lambda per cell
  double max_violation = 0.0;  // max |slack| on {nu > floor}
  double min_slack_off_support = 0.0;
  bool lambda_consistent = true;
  bool passed = false;
};

// Equality nu^alpha + phi^c + I[nu] = lambda on the support, >= lambda off it.
inline ComplementarityReport complementarity_report(
    const GridMeasure1D& nu, const Model1D& model, const CostModel& cost,
    const GridMeasure1D& mu, double alpha,
    double threshold = kCertificationThreshold) {
  const std::size_t n = nu.n_cells();
  const auto pot = half_grid_potential(mu, nu, cost);
  std::vector<double> g(n);
  std::vector<double> inter;
  if (model.kernel) inter = interaction_on_cells(kernel_matrix(*model.kernel, n), nu);
  for (std::size_t j = 0; j < n; ++j) {
    g[j] = pot.at_midpoint(j) + (model.kernel ? inter[j] : 0.0);
    if (model.v0) g[j] += model.v0->value({nu.midpoint(j)});
  }
  ComplementarityReport rep;
  rep.lambda = lambda_solve(g, alpha);
  rep.slack.resize(n);
  double fit = 0.0;
  std::size_t on = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double na = alpha == 1.0 ? nu[j] : std::pow(nu[j], alpha);
    if (nu[j] > kDensityFloor) {
      fit += na + g[j];
      ++on;
    }
  }
  rep.lambda_fit = on ? fit / static_cast<double>(on) : rep.lambda;
  rep.min_slack_off_support = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    const double na = alpha == 1.0 ? nu[j] : std::pow(nu[j], alpha);
    rep.slack[j] = na + g[j] - rep.lambda;
    if (nu[j] > kDensityFloor) {
      rep.max_violation = std::max(rep.max_violation, std::abs(rep.slack[j]));
    } else {
      rep.min_slack_off_support = std::min(rep.min_slack_off_support, rep.slack[j]);
    }
  }
  rep.lambda_consistent = std::abs(rep.lambda - rep.lambda_fit) < threshold;
  rep.passed = rep.max_violation < threshold &&
               !(rep.min_slack_off_support < -threshold) && rep.lambda_consistent;
  return rep;
}

// Single-valued and non-decreasing at every node.
inline bool purity_check(const TransportMap1D& map) {
  const auto v = map.values();
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (!std::isfinite(v[j])) return false;
    if (j > 0 && v[j] < v[j - 1]) return false;
  }
  return true;
}

inline bool purity_check(std::span<const double> values) {
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (!std::isfinite(values[j])) return false;
    if (j > 0 && values[j] < values[j - 1]) return false;
  }
  return true;
}

inline bool purity_check(const EquilibriumResult& r) { return purity_check(r.map); }

// transport cost - int phi dmu - int phi^c dnu; both potentials are
// piecewise linear on their node grids, the measures piecewise constant.
inline double duality_gap(const EquilibriumResult& r, const CostModel& cost,
                          const GridMeasure1D& mu) {
  const auto integrate = [](const std::vector<double>& f, const GridMeasure1D& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.n_cells(); ++i) {
      s += m.cell_mass(i) * 0.5 * (f[i] + f[i + 1]);
    }
    return s;
  };
  return transport_cost(r.map, mu, cost) - integrate(r.potentials.phi, mu) -
         integrate(r.potentials.phi_c, r.nu);
}

struct Problem1D {
  CostModel cost;
  Model1D model;
  GridMeasure1D mu = GridMeasure1D::uniform();
};

// Recomputes every residual and decides pass/fail against threshold.
inline Certification certify(const EquilibriumResult& r, const Problem1D& p,
                             double threshold = kCertificationThreshold) {
  Certification c;
  c.threshold = threshold;
  c.exploitability = exploitability(r, p.model, p.cost, p.mu);
  c.duality_gap = duality_gap(r, p.cost, p.mu);
  c.pair_violation = r.potentials.max_violation(p.cost);
  c.mass_error = std::abs(r.nu.mass() - 1.0);
  c.monotone_map = purity_check(r);
  bool ok = r.converged && c.exploitability < threshold &&
            std::abs(c.duality_gap) < threshold && c.pair_violation <= 1e-8 &&
            c.mass_error < 1e-8 && c.monotone_map;
  if (p.model.congestion && !p.model.congestion->is_log()) {
    const auto rep = complementarity_report(r.nu, p.model, p.cost, p.mu,
                                            p.model.congestion->alpha(), threshold);
    c.complementarity_violation = rep.max_violation;
    c.complementarity_min_slack = rep.min_slack_off_support;
    ok = ok && rep.passed;
  }
  c.passed = ok;
  return c;
}

enum class Solver1D { kAlgo1, kAlgo2 };

// Runs the solver matching the congestion variant from a start density
// (algo1 starts from the monotone map of mu onto it).
inline EquilibriumResult solve_from(const Problem1D& p, const GridMeasure1D& start,
                                    const SolverOptions& opt = {}) {
  if (!p.model.congestion) {
    throw PreconditionError("solve_from: a congestion term is required");
  }
  const InteractionKernel<1>* k = p.model.kernel ? &*p.model.kernel : nullptr;
  if (p.model.v0) {
    throw PreconditionError("solve_from: V0 is only supported by best reply");
  }
  EquilibriumResult r;
  if (p.model.congestion->is_log()) {
    r = algo1_solve(p.cost, k, p.mu, opt, monotone_map(p.mu, start));
  } else {
    r = algo2_solve(p.cost, k, p.mu, p.model.congestion->alpha(), opt, start);
  }
  r.exploitability = exploitability(r, p.model, p.cost, p.mu);
  return r;
}

struct UniquenessReport {
  double max_w1 = 0.0;
  bool conclusive = true;   // every start converged
  bool certified = false;   // monotonicity margin > 0
  double margin = 0.0;
  std::string label;        // "certified", "exploratory" or "inconclusive"
};

// Max pairwise W1 between the second marginals reached from each start.
// A positive margin turns agreement into a uniqueness statement; without it
// the number is exploratory.
inline UniquenessReport uniqueness_probe(const Problem1D& p,
                                         const std::vector<GridMeasure1D>& starts,
                                         const SolverOptions& opt = {}) {
  if (starts.size() < 2) {
    throw std::invalid_argument("uniqueness_probe: need at least two starts");
  }
  UniquenessReport rep;
  rep.margin = p.model.kernel ? monotonicity_margin(*p.model.kernel) : 1.0;
  rep.certified = rep.margin > 0.0;
  std::vector<GridMeasure1D> finals;
  for (const auto& s : starts) {
    const auto r = solve_from(p, s, opt);
    rep.conclusive = rep.conclusive && r.converged;
    finals.push_back(r.nu);
  }
  for (std::size_t a = 0; a < finals.size(); ++a) {
    for (std::size_t b = a + 1; b < finals.size(); ++b) {
      rep.max_w1 = std::max(rep.max_w1, wasserstein1(finals[a], finals[b]));
    }
  }
  rep.label = !rep.conclusive ? "inconclusive" : rep.certified ? "certified" : "exploratory";
  return rep;
}

}  // namespace cnash
