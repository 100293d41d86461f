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

// Fixed-point solvers for one-dimensional equilibria with congestion and a
// cost satisfying d2c/dxdy < 0, so that equilibria are pure and carried by
// the monotone map.
//
// Logarithmic congestion (algo1). Along the monotone map T the equilibrium
// condition becomes an integro-differential equation for T,
//
//   T'(x) = C mu(x) exp(-int_0^x d_x c(s, T(s)) ds + c(x, T(x))
//                       + int phi(T(x), T(y)) dmu(y)),
//
// with T(0) = 0 and T(1) = 1. C is fixed by the right endpoint. The solver
// freezes T inside the exponent, normalizes and integrates.
//
// Power congestion f(t) = t^alpha (algo2). The density solves
//
//   nu(y) = (lambda - phi^c(y) - I[nu](y))_+^(1/alpha),
//
// where phi^c(y) = int_0^y d_y c(S(s), s) ds along S = F_mu^{-1} o F_nu and
// lambda normalizes the mass. The solver freezes the right-hand side in nu.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cnash/cost.hpp"
#include "cnash/detail/common.hpp"
#include "cnash/game_model.hpp"
#include "cnash/measures.hpp"
#include "cnash/result.hpp"
#include "cnash/transport.hpp"

namespace cnash {

inline constexpr double kDensityFloor = 1e-14;

struct Algo1State {
  TransportMap1D T;
  double C = 1.0;
  int k = 0;
  std::vector<double> step_history;
};

struct Algo2State {
  GridMeasure1D nu;
  double lambda = 0.0;
  std::vector<double> S;      // F_mu^{-1} o F_nu on the half grid
  std::vector<double> phi_c;  // phi^c on the half grid
  int k = 0;
  std::vector<double> step_history;
};

struct SolverOptions {
  double tol = 1e-11;
  int max_iter = 2000;
  std::optional<double> damping;  // algo1 default 1, algo2 default 0.5
};

// mu(x_j) exp(e_j - shift) at every node, with shift = max_j e_j.
struct Algo1Integrand {
  std::vector<double> scaled;
  double shift = 0.0;
};

inline Algo1Integrand algo1_integrand(const TransportMap1D& T,
                                      const CostModel& cost,
                                      const InteractionKernel<1>* kernel,
                                      const GridMeasure1D& mu) {
  const std::size_t n = mu.n_cells();
  if (T.n_cells() != n) {
    throw std::invalid_argument("algo1_integrand: map and mu grids differ");
  }
  const double h = mu.cell_width();
  std::vector<double> dcdx(n + 1);
  for (std::size_t j = 0; j <= n; ++j) dcdx[j] = cost.dcdx(mu.node(j), T[j]);
  const std::vector<double> A = detail::cumulative_trapezoid(dcdx, h);
  std::vector<double> e(n + 1);
  std::vector<double> tmid;
  if (kernel) {
    tmid.resize(n);
    for (std::size_t i = 0; i < n; ++i) tmid[i] = 0.5 * (T[i] + T[i + 1]);
  }
  detail::parallel_for(n + 1, [&](std::size_t j) {
    double b = 0.0;
    if (kernel) {
      for (std::size_t i = 0; i < n; ++i) {
        if (mu[i] != 0.0) b += kernel->phi({T[j]}, {tmid[i]}) * mu[i];
      }
      b *= kernel->eps * h;
    }
    e[j] = -A[j] + cost.c(mu.node(j), T[j]) + b;
  });
  Algo1Integrand out;
  out.shift = *std::max_element(e.begin(), e.end());
  out.scaled.resize(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    out.scaled[j] = mu.node_density(j) * std::exp(e[j] - out.shift);
  }
  return out;
}

namespace detail {

inline double trapezoid(const std::vector<double>& f, double h) {
  double s = 0.0;
  for (std::size_t j = 1; j < f.size(); ++j) s += 0.5 * h * (f[j - 1] + f[j]);
  return s;
}

// T_{k+1} before damping, with the normalization C_k.
inline std::pair<std::vector<double>, double> algo1_raw(
    const TransportMap1D& T, const CostModel& cost,
    const InteractionKernel<1>* kernel, const GridMeasure1D& mu) {
  const auto integrand = algo1_integrand(T, cost, kernel, mu);
  const double h = mu.cell_width();
  const double total = trapezoid(integrand.scaled, h);
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw NumericError("algo1: integrand has no mass");
  }
  std::vector<double> S(integrand.scaled.size());
  for (std::size_t j = 0; j < S.size(); ++j) S[j] = integrand.scaled[j] / total;
  std::vector<double> next = cumulative_trapezoid(S, h);
  next.front() = 0.0;
  next.back() = 1.0;
  for (std::size_t j = 1; j < next.size(); ++j) {
    next[j] = std::clamp(next[j], next[j - 1], 1.0);
  }
  // C relative to the unshifted exponent.
  const double C = std::exp(-integrand.shift) / total;
  return {std::move(next), C};
}

}  // namespace detail

inline Algo1State algo1_step(const Algo1State& state, const CostModel& cost,
                             const InteractionKernel<1>* kernel,
                             const GridMeasure1D& mu, double damping = 1.0) {
  auto [raw, C] = detail::algo1_raw(state.T, cost, kernel, mu);
  double step = 0.0;
  for (std::size_t j = 0; j < raw.size(); ++j) {
    const double v = (1.0 - damping) * state.T[j] + damping * raw[j];
    step = std::max(step, std::abs(v - state.T[j]));
    raw[j] = v;
  }
  Algo1State next{TransportMap1D(std::move(raw)), C, state.k + 1,
                  state.step_history};
  next.step_history.push_back(step);
  return next;
}

namespace detail {

// min_y c(x, y) - psi(y) on the node grid.
inline std::vector<double> c_transform_x(const std::vector<double>& psi,
                                         const CostModel& cost) {
  const std::size_t n = psi.size() - 1;
  const auto nodes = uniform_nodes(n);
  std::vector<double> phi(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j <= n; ++j) {
      best = std::min(best, cost(nodes[i], nodes[j]) - psi[j]);
    }
    phi[i] = best;
  }
  return phi;
}

}  // namespace detail

// Kantorovich potential pair for the monotone map T on the node grids:
// phi from the envelope identity, phi^c as its grid c-transform, then phi
// replaced by phi^cc so each potential is the c-transform of the other.
inline PotentialPair envelope_potentials(const TransportMap1D& T,
                                         const CostModel& cost) {
  const std::size_t n = T.n_cells();
  std::vector<double> dcdx(n + 1);
  for (std::size_t j = 0; j <= n; ++j) dcdx[j] = cost.dcdx(T.node(j), T[j]);
  PotentialPair p;
  p.phi_c = c_transform(detail::cumulative_trapezoid(dcdx, 1.0 / static_cast<double>(n)), cost);
  p.phi = detail::c_transform_x(p.phi_c, cost);
  return p;
}

namespace detail {

inline std::string format_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace detail

// nu(T(x)) = mu(x) / T'(x) at the nodes, interpolated in y onto the
// cell midpoints of the Y grid and normalized. Nodes with T' = 0 carry no
// information and are skipped.
inline GridMeasure1D density_from_map(const TransportMap1D& T,
                                      const std::vector<double>& Tprime,
                                      const GridMeasure1D& mu) {
  const std::size_t n = mu.n_cells();
  std::vector<double> ys, vs;
  for (std::size_t j = 0; j <= n; ++j) {
    if (!(Tprime[j] > 0.0)) continue;
    if (!ys.empty() && T[j] <= ys.back()) continue;
    ys.push_back(T[j]);
    vs.push_back(mu.node_density(j) / Tprime[j]);
  }
  if (ys.size() < 2) {
    throw NumericError("density_from_map: map is degenerate");
  }
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = mu.midpoint(i);
    const auto it = std::upper_bound(ys.begin(), ys.end(), y);
    if (it == ys.begin()) {
      d[i] = vs.front();
    } else if (it == ys.end()) {
      d[i] = vs.back();
    } else {
      // Cubic through the four surrounding samples; linear near the ends or
      // if the cubic would go negative.
      const std::size_t k = static_cast<std::size_t>(it - ys.begin());
      const double t = (y - ys[k - 1]) / (ys[k] - ys[k - 1]);
      const double linear = vs[k - 1] + t * (vs[k] - vs[k - 1]);
      d[i] = linear;
      if (k >= 2 && k + 1 < ys.size()) {
        double cubic = 0.0;
        for (std::size_t a = k - 2; a <= k + 1; ++a) {
          double w = vs[a];
          for (std::size_t b = k - 2; b <= k + 1; ++b) {
            if (b != a) w *= (y - ys[b]) / (ys[a] - ys[b]);
          }
          cubic += w;
        }
        if (cubic > 0.0) d[i] = cubic;
      }
    }
  }
  return GridMeasure1D::normalized(std::move(d));
}

inline EquilibriumResult algo1_solve(const CostModel& cost,
                                     const InteractionKernel<1>* kernel,
                                     const GridMeasure1D& mu,
                                     const SolverOptions& opt = {},
                                     std::optional<TransportMap1D> T0 = std::nullopt) {
  if (!check_spence_mirrlees(cost, std::min<std::size_t>(mu.n_cells(), 512))) {
    throw PreconditionError(
        "algo1: cost fails d2c/dxdy < 0; equilibria need not be pure");
  }
  const double omega = opt.damping.value_or(1.0);
  if (!(omega > 0.0 && omega <= 1.0)) {
    throw std::invalid_argument("algo1: damping must lie in (0, 1]");
  }
  Algo1State state{T0 ? *T0 : TransportMap1D::identity(mu.n_cells()), 1.0, 0, {}};
  if (state.T.n_cells() != mu.n_cells()) {
    throw std::invalid_argument("algo1: initial map grid differs from mu");
  }
  EquilibriumResult r;
  r.solver = "algo1";
  r.damping = omega;
  while (state.k < opt.max_iter) {
    state = algo1_step(state, cost, kernel, mu, omega);
    if (!std::isfinite(state.step_history.back())) {
      throw NumericError("algo1: non-finite step at iteration " +
                         std::to_string(state.k));
    }
    if (state.step_history.back() < opt.tol) {
      r.converged = true;
      break;
    }
  }
  if (!r.converged) {
    r.log.push_back("algo1: no convergence after " + std::to_string(state.k) +
                    " iterations, last step " +
                    detail::format_double(state.step_history.back()));
  }
  r.iterations = state.k;
  r.trace = state.step_history;
  {
    const auto integrand = algo1_integrand(state.T, cost, kernel, mu);
    const double total = detail::trapezoid(integrand.scaled, mu.cell_width());
    std::vector<double> Tprime(integrand.scaled.size());
    for (std::size_t j = 0; j < Tprime.size(); ++j) {
      Tprime[j] = integrand.scaled[j] / total;
    }
    r.nu = density_from_map(state.T, Tprime, mu);
  }
  r.potentials = envelope_potentials(state.T, cost);
  r.map = std::move(state.T);
  return r;
}

// The unique lambda with sum_j h (lambda - g_j)_+^(1/alpha) = 1 on n cells.
inline double lambda_solve(const std::vector<double>& g, double alpha) {
  if (g.empty()) throw std::invalid_argument("lambda_solve: empty input");
  if (!(alpha >= 1.0)) throw std::invalid_argument("lambda_solve: alpha >= 1");
  for (double v : g) {
    if (!std::isfinite(v)) throw std::invalid_argument("lambda_solve: g not finite");
  }
  const double h = 1.0 / static_cast<double>(g.size());
  const auto [gmin_it, gmax_it] = std::minmax_element(g.begin(), g.end());
  const double gmin = *gmin_it;
  const double range = *gmax_it - gmin;
  const double inv = 1.0 / alpha;
  const auto mass = [&](double lambda) {
    double s = 0.0;
    for (double v : g) {
      if (lambda > v) s += alpha == 1.0 ? lambda - v : std::pow(lambda - v, inv);
    }
    return s * h;
  };
  double lo = gmin;
  double hi = gmin + std::pow(1.0 + range, alpha) + 1.0;
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    mid = 0.5 * (lo + hi);
    const double m = mass(mid);
    if (std::abs(m - 1.0) < 1e-13) break;
    if (mid == lo || mid == hi) break;
    (m < 1.0 ? lo : hi) = mid;
  }
  return mid;
}

// F_mu^{-1} o F_nu and phi^c on the half grid s_m = m h / 2, m = 0..2n.
// phi^c(0) = 0; the running integral uses the trapezoid rule with step h / 2.
struct HalfGridPotential {
  std::vector<double> S;
  std::vector<double> phi_c;

  double at_node(std::size_t j) const { return phi_c[2 * j]; }
  double at_midpoint(std::size_t j) const { return phi_c[2 * j + 1]; }
};

inline HalfGridPotential half_grid_potential(const GridMeasure1D& mu,
                                             const GridMeasure1D& nu,
                                             const CostModel& cost) {
  const std::size_t n = nu.n_cells();
  const Cdf1D Fmu = cdf(mu);
  const Cdf1D Fnu = cdf(nu);
  HalfGridPotential out;
  out.S.resize(2 * n + 1);
  std::vector<double> dcdy(2 * n + 1);
  for (std::size_t m = 0; m <= 2 * n; ++m) {
    const double p = m % 2 == 0 ? Fnu[m / 2] : 0.5 * (Fnu[m / 2] + Fnu[m / 2 + 1]);
    const double s = static_cast<double>(m) / static_cast<double>(2 * n);
    out.S[m] = quantile(Fmu, std::clamp(p, 0.0, 1.0));
    dcdy[m] = cost.dcdy(out.S[m], s);
  }
  out.phi_c = detail::cumulative_trapezoid(dcdy, 0.5 / static_cast<double>(n));
  return out;
}

namespace detail {

inline std::vector<double> algo2_g(const HalfGridPotential& pot,
                                   const std::vector<double>* kmat,
                                   const GridMeasure1D& nu) {
  const std::size_t n = nu.n_cells();
  std::vector<double> g(n);
  std::vector<double> inter;
  if (kmat) inter = interaction_on_cells(*kmat, nu);
  for (std::size_t j = 0; j < n; ++j) {
    g[j] = pot.at_midpoint(j) + (kmat ? inter[j] : 0.0);
  }
  return g;
}

inline std::vector<double> power_profile(const std::vector<double>& g,
                                         double lambda, double alpha) {
  std::vector<double> d(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double t = lambda - g[j];
    d[j] = t > 0.0 ? (alpha == 1.0 ? t : std::pow(t, 1.0 / alpha)) : 0.0;
  }
  return d;
}

}  // namespace detail

inline Algo2State algo2_step(const Algo2State& state, const CostModel& cost,
                             const InteractionKernel<1>* kernel,
                             const GridMeasure1D& mu, double alpha,
                             double damping = 1.0,
                             const std::vector<double>* kmat = nullptr) {
  std::vector<double> local;
  if (kernel && !kmat) {
    local = kernel_matrix(*kernel, state.nu.n_cells());
    kmat = &local;
  }
  const auto pot = half_grid_potential(mu, state.nu, cost);
  const auto g = detail::algo2_g(pot, kernel ? kmat : nullptr, state.nu);
  const double lambda = lambda_solve(g, alpha);
  const auto fresh = GridMeasure1D::normalized(detail::power_profile(g, lambda, alpha));
  std::vector<double> mixed(fresh.n_cells());
  for (std::size_t j = 0; j < mixed.size(); ++j) {
    mixed[j] = (1.0 - damping) * state.nu[j] + damping * fresh[j];
  }
  Algo2State next{GridMeasure1D::normalized(std::move(mixed)), lambda, pot.S,
                  pot.phi_c, state.k + 1, state.step_history};
  next.step_history.push_back(wasserstein1(state.nu, next.nu));
  return next;
}

// Pair for a power-congestion equilibrium: phi^c on the Y nodes from the
// running integral, phi as its c-transform, then phi^c recomputed as the
// c-transform of phi so the pair is feasible on the whole grid.
inline PotentialPair dual_potentials(const GridMeasure1D& mu,
                                     const GridMeasure1D& nu,
                                     const CostModel& cost) {
  const auto pot = half_grid_potential(mu, nu, cost);
  const std::size_t n = nu.n_cells();
  std::vector<double> psi(n + 1);
  for (std::size_t j = 0; j <= n; ++j) psi[j] = pot.at_node(j);
  std::vector<double> phi = detail::c_transform_x(psi, cost);
  PotentialPair p;
  p.phi_c = c_transform(phi, cost);
  p.phi = std::move(phi);
  return p;
}

inline EquilibriumResult algo2_solve(const CostModel& cost,
                                     const InteractionKernel<1>* kernel,
                                     const GridMeasure1D& mu, double alpha,
                                     const SolverOptions& opt = {},
                                     std::optional<GridMeasure1D> nu0 = std::nullopt) {
  if (!(alpha >= 1.0)) throw PreconditionError("algo2: alpha must be >= 1");
  if (!check_spence_mirrlees(cost, std::min<std::size_t>(mu.n_cells(), 512))) {
    throw PreconditionError(
        "algo2: cost fails d2c/dxdy < 0; equilibria need not be pure");
  }
  double omega = opt.damping.value_or(0.5);
  if (!(omega > 0.0 && omega <= 1.0)) {
    throw std::invalid_argument("algo2: damping must lie in (0, 1]");
  }
  Algo2State state{nu0 ? *nu0 : GridMeasure1D::uniform(mu.n_cells()), 0.0, {}, {}, 0, {}};
  if (state.nu.n_cells() != mu.n_cells()) {
    throw std::invalid_argument("algo2: initial density grid differs from mu");
  }
  std::vector<double> kmat;
  if (kernel) kmat = kernel_matrix(*kernel, mu.n_cells());
  EquilibriumResult r;
  r.solver = "algo2";
  int growth = 0;
  while (state.k < opt.max_iter) {
    state = algo2_step(state, cost, kernel, mu, alpha, omega, kernel ? &kmat : nullptr);
    const auto& h = state.step_history;
    if (!std::isfinite(h.back())) {
      throw NumericError("algo2: non-finite step at iteration " + std::to_string(state.k));
    }
    if (h.back() < opt.tol) {
      r.converged = true;
      break;
    }
    growth = h.size() >= 2 && h.back() > h[h.size() - 2] ? growth + 1 : 0;
    if (growth >= 5) {
      omega *= 0.5;
      growth = 0;
      r.log.push_back("algo2: step grew 5 times in a row at iteration " +
                      std::to_string(state.k) + ", damping halved to " +
                      detail::format_double(omega));
    }
  }
  if (!r.converged) {
    r.log.push_back("algo2: no convergence after " + std::to_string(state.k) +
                    " iterations, last step " +
                    detail::format_double(state.step_history.back()));
  }
  if (r.converged && omega < 1.0) {
    // Undamped image of the converged iterate: same fixed point, but cells
    // the damping left at geometrically small mass become exactly empty.
    state = algo2_step(state, cost, kernel, mu, alpha, 1.0, kernel ? &kmat : nullptr);
  }
  r.damping = omega;
  r.iterations = state.k;
  r.trace = state.step_history;
  r.lambda = state.lambda;
  r.map = monotone_map(mu, state.nu);
  r.potentials = dual_potentials(mu, state.nu, cost);
  r.nu = std::move(state.nu);
  return r;
}

}  // namespace cnash
