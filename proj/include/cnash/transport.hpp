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

// Exact one-dimensional optimal transport.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cnash/cost.hpp"
#include "cnash/measures.hpp"

namespace cnash {

// Non-decreasing map sampled at the n+1 nodes of a uniform grid on [0,1].
class TransportMap1D {
 public:
  explicit TransportMap1D(std::vector<double> values)
      : values_(std::move(values)) {
    if (values_.size() < 2) {
      throw std::invalid_argument("TransportMap1D: need at least two nodes");
    }
    for (std::size_t j = 0; j < values_.size(); ++j) {
      if (!(values_[j] >= -1e-12 && values_[j] <= 1.0 + 1e-12)) {
        std::ostringstream os;
        os << "TransportMap1D: value " << values_[j] << " at node " << j
           << " outside [0,1]";
        throw std::invalid_argument(os.str());
      }
      if (j > 0 && values_[j] < values_[j - 1] - 1e-12) {
        std::ostringstream os;
        os << "TransportMap1D: decreasing at node " << j;
        throw std::invalid_argument(os.str());
      }
    }
  }

  static TransportMap1D identity(std::size_t n_cells) {
    std::vector<double> v(n_cells + 1);
    for (std::size_t j = 0; j <= n_cells; ++j) {
      v[j] = static_cast<double>(j) / static_cast<double>(n_cells);
    }
    return TransportMap1D(std::move(v));
  }

  std::size_t n_cells() const { return values_.size() - 1; }
  double node(std::size_t j) const {
    return static_cast<double>(j) / static_cast<double>(n_cells());
  }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t j) const { return values_[j]; }

  // Piecewise-linear evaluation.
  double operator()(double x) const {
    if (x <= 0.0) return values_.front();
    if (x >= 1.0) return values_.back();
    const double s = x * static_cast<double>(n_cells());
    const std::size_t k = std::min(static_cast<std::size_t>(s), n_cells() - 1);
    const double t = s - static_cast<double>(k);
    return values_[k] + t * (values_[k + 1] - values_[k]);
  }

  friend bool operator==(const TransportMap1D&, const TransportMap1D&) = default;

 private:
  std::vector<double> values_;
};

inline GridMeasure1D pushforward_map_1d(const TransportMap1D& T,
                                        const GridMeasure1D& m,
                                        std::size_t n_target = 0) {
  return pushforward_map_1d(T.values(), m, n_target);
}

// Dual potentials on node grids: phi on the X-grid, phi_c on the Y-grid.
struct PotentialPair {
  std::vector<double> phi;
  std::vector<double> phi_c;

  double x_node(std::size_t i) const {
    return static_cast<double>(i) / static_cast<double>(phi.size() - 1);
  }
  double y_node(std::size_t j) const {
    return static_cast<double>(j) / static_cast<double>(phi_c.size() - 1);
  }

  // max over grid pairs of phi(x) + phi_c(y) - c(x, y); <= 0 when feasible.
  double max_violation(const CostModel& cost) const {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < phi.size(); ++i) {
      const double x = x_node(i);
      for (std::size_t j = 0; j < phi_c.size(); ++j) {
        worst = std::max(worst, phi[i] + phi_c[j] - cost(x, y_node(j)));
      }
    }
    return worst;
  }
};

struct CouplingPlan {
  std::vector<double> source_atoms;
  std::vector<double> source_weights;
  std::vector<double> target_atoms;
  std::vector<double> target_weights;
  // plan[i][j] is the mass sent from source atom i to target atom j.
  std::vector<std::vector<double>> plan;

  double max_marginal_error() const {
    double err = 0.0;
    for (std::size_t i = 0; i < source_weights.size(); ++i) {
      double s = 0.0;
      for (double v : plan[i]) s += v;
      err = std::max(err, std::abs(s - source_weights[i]));
    }
    for (std::size_t j = 0; j < target_weights.size(); ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < plan.size(); ++i) s += plan[i][j];
      err = std::max(err, std::abs(s - target_weights[j]));
    }
    return err;
  }
};

// T = F_nu^{-1} o F_mu at the nodes of mu's grid.
inline TransportMap1D monotone_map(const GridMeasure1D& mu,
                                   const GridMeasure1D& nu) {
  const Cdf1D Fmu = cdf(mu);
  const Cdf1D Fnu = cdf(nu);
  std::vector<double> v(mu.n_cells() + 1);
  // At level 0 the map starts where nu's support starts, not at quantile(0).
  std::size_t first = 0;
  while (first + 1 < nu.n_cells() && nu[first] == 0.0) ++first;
  const double support_lo = nu.node(first);
  for (std::size_t j = 0; j <= mu.n_cells(); ++j) {
    const double p = std::clamp(Fmu[j], 0.0, 1.0);
    v[j] = p > 0.0 ? quantile(Fnu, p) : support_lo;
  }
  for (std::size_t j = 1; j < v.size(); ++j) v[j] = std::max(v[j], v[j - 1]);
  return TransportMap1D(std::move(v));
}

namespace detail {

// CDF as a polyline; repeated abscissae encode jumps. F = 0 before the first
// vertex and F = f.back() after the last.
struct CdfPolyline {
  std::vector<double> x;
  std::vector<double> f;

  double right_limit(double t) const {
    const auto it = std::upper_bound(x.begin(), x.end(), t);
    if (it == x.begin()) return 0.0;
    if (it == x.end()) return f.back();
    const auto k = static_cast<std::size_t>(it - x.begin());
    const double span = x[k] - x[k - 1];
    const double s = span > 0.0 ? (t - x[k - 1]) / span : 0.0;
    return f[k - 1] + s * (f[k] - f[k - 1]);
  }

  double left_limit(double t) const {
    const auto it = std::lower_bound(x.begin(), x.end(), t);
    if (it == x.begin()) return 0.0;
    if (it == x.end()) return f.back();
    const auto k = static_cast<std::size_t>(it - x.begin());
    const double span = x[k] - x[k - 1];
    const double s = span > 0.0 ? (t - x[k - 1]) / span : 1.0;
    return f[k - 1] + s * (f[k] - f[k - 1]);
  }
};

inline CdfPolyline polyline(const GridMeasure1D& m) {
  const Cdf1D F = cdf(m);
  CdfPolyline p;
  for (std::size_t j = 0; j <= m.n_cells(); ++j) {
    p.x.push_back(m.node(j));
    p.f.push_back(F[j]);
  }
  return p;
}

inline CdfPolyline polyline(std::span<const double> values,
                            std::span<const double> weights) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  CdfPolyline p;
  double acc = 0.0;
  for (std::size_t k = 0; k < order.size();) {
    const double v = values[order[k]];
    const double before = acc;
    while (k < order.size() && values[order[k]] == v) acc += weights[order[k++]];
    p.x.push_back(v);
    p.f.push_back(before);
    p.x.push_back(v);
    p.f.push_back(acc);
  }
  return p;
}

inline CdfPolyline polyline(const DiscreteMeasure<1>& m) {
  std::vector<double> v(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) v[i] = m.atom(i)[0];
  return polyline(v, m.weights());
}

// Exact integral of |F1 - F2| over the real line.
inline double l1_between(const CdfPolyline& a, const CdfPolyline& b) {
  std::vector<double> pts;
  pts.reserve(a.x.size() + b.x.size());
  pts.insert(pts.end(), a.x.begin(), a.x.end());
  pts.insert(pts.end(), b.x.begin(), b.x.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double len = pts[k + 1] - pts[k];
    const double d0 = a.right_limit(pts[k]) - b.right_limit(pts[k]);
    const double d1 = a.left_limit(pts[k + 1]) - b.left_limit(pts[k + 1]);
    if ((d0 >= 0.0 && d1 >= 0.0) || (d0 <= 0.0 && d1 <= 0.0)) {
      total += 0.5 * (std::abs(d0) + std::abs(d1)) * len;
    } else {
      total += 0.5 * (d0 * d0 + d1 * d1) / (std::abs(d0) + std::abs(d1)) * len;
    }
  }
  return total;
}

}  // namespace detail

// W1 through the identity W1 = integral of |F1 - F2|; exact for the
// piecewise-linear grid CDFs and step particle CDFs, on any pair of grids.
inline double wasserstein1(const GridMeasure1D& a, const GridMeasure1D& b) {
  return detail::l1_between(detail::polyline(a), detail::polyline(b));
}
inline double wasserstein1(const DiscreteMeasure<1>& a,
                           const DiscreteMeasure<1>& b) {
  return detail::l1_between(detail::polyline(a), detail::polyline(b));
}
inline double wasserstein1(const DiscreteMeasure<1>& a, const GridMeasure1D& b) {
  return detail::l1_between(detail::polyline(a), detail::polyline(b));
}
inline double wasserstein1(const GridMeasure1D& a, const DiscreteMeasure<1>& b) {
  return wasserstein1(b, a);
}

// W1 between weighted samples on the real line (no domain restriction).
inline double wasserstein1_samples(std::span<const double> a,
                                   std::span<const double> wa,
                                   std::span<const double> b,
                                   std::span<const double> wb) {
  return detail::l1_between(detail::polyline(a, wa), detail::polyline(b, wb));
}

// Integral of c(x, T(x)) dmu(x), three-point Gauss-Legendre on each cell.
inline double transport_cost(const TransportMap1D& T, const GridMeasure1D& mu,
                             const CostModel& cost) {
  if (T.n_cells() != mu.n_cells()) {
    throw std::invalid_argument("transport_cost: map and measure grids differ");
  }
  static constexpr double kNodes[3] = {-0.7745966692414834, 0.0,
                                       0.7745966692414834};
  static constexpr double kWeights[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const double h = mu.cell_width();
  double total = 0.0;
  for (std::size_t i = 0; i < mu.n_cells(); ++i) {
    if (mu[i] == 0.0) continue;
    double cell = 0.0;
    for (int q = 0; q < 3; ++q) {
      const double t = 0.5 * (1.0 + kNodes[q]);
      const double x = mu.node(i) + t * h;
      const double y = T[i] + t * (T[i + 1] - T[i]);
      cell += 0.5 * kWeights[q] * cost(x, y);
    }
    total += mu[i] * h * cell;
  }
  return total;
}

inline double transport_cost(const CouplingPlan& p, const CostModel& cost) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.plan.size(); ++i) {
    for (std::size_t j = 0; j < p.plan[i].size(); ++j) {
      if (p.plan[i][j] != 0.0) {
        total += p.plan[i][j] * cost(p.source_atoms[i], p.target_atoms[j]);
      }
    }
  }
  return total;
}

// phi^c(y_j) = min_i c(x_i, y_j) - phi(x_i) by exhaustive grid scan.
inline std::vector<double> c_transform(std::span<const double> phi,
                                       std::span<const double> x_nodes,
                                       std::span<const double> y_nodes,
                                       const CostModel& cost) {
  std::vector<double> out(y_nodes.size());
  for (std::size_t j = 0; j < y_nodes.size(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x_nodes.size(); ++i) {
      best = std::min(best, cost(x_nodes[i], y_nodes[j]) - phi[i]);
    }
    out[j] = best;
  }
  return out;
}

inline std::vector<double> uniform_nodes(std::size_t n_cells) {
  std::vector<double> v(n_cells + 1);
  for (std::size_t j = 0; j <= n_cells; ++j) {
    v[j] = static_cast<double>(j) / static_cast<double>(n_cells);
  }
  return v;
}

// Same-resolution node grids on both sides.
inline std::vector<double> c_transform(std::span<const double> phi,
                                       const CostModel& cost) {
  const auto nodes = uniform_nodes(phi.size() - 1);
  return c_transform(phi, nodes, nodes, cost);
}

// North-west corner coupling of the sorted atoms: the monotone plan.
inline CouplingPlan monotone_plan(const DiscreteMeasure<1>& mu,
                                  const DiscreteMeasure<1>& nu) {
  auto sorted = [](const DiscreteMeasure<1>& m) {
    std::vector<std::size_t> order(m.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return m.atom(a)[0] < m.atom(b)[0];
    });
    return order;
  };
  CouplingPlan p;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    p.source_atoms.push_back(mu.atom(i)[0]);
    p.source_weights.push_back(mu.weight(i));
  }
  for (std::size_t j = 0; j < nu.size(); ++j) {
    p.target_atoms.push_back(nu.atom(j)[0]);
    p.target_weights.push_back(nu.weight(j));
  }
  p.plan.assign(mu.size(), std::vector<double>(nu.size(), 0.0));
  const auto rows = sorted(mu);
  const auto cols = sorted(nu);
  std::size_t r = 0, c = 0;
  double left_r = mu.weight(rows[0]);
  double left_c = nu.weight(cols[0]);
  while (r < rows.size() && c < cols.size()) {
    const double m = std::min(left_r, left_c);
    p.plan[rows[r]][cols[c]] += m;
    left_r -= m;
    left_c -= m;
    const bool last_r = r + 1 == rows.size();
    const bool last_c = c + 1 == cols.size();
    if (left_r <= left_c && !last_r) {
      ++r;
      left_r = mu.weight(rows[r]);
    } else if (!last_c) {
      ++c;
      left_c = nu.weight(cols[c]);
    } else if (!last_r) {
      ++r;
      left_r = mu.weight(rows[r]);
    } else {
      break;
    }
  }
  return p;
}

inline constexpr std::size_t kOracleMaxAtoms = 8;

namespace detail {

// Successive shortest paths on the bipartite transportation network with
// real capacities; exact up to rounding.
inline std::vector<std::vector<double>> min_cost_transport(
    const std::vector<double>& a, const std::vector<double>& b,
    const std::vector<std::vector<double>>& cost) {
  const std::size_t m = a.size(), n = b.size();
  std::vector<std::vector<double>> flow(m, std::vector<double>(n, 0.0));
  std::vector<double> supply = a, demand = b;
  const double inf = std::numeric_limits<double>::infinity();
  // Nodes: 0..m-1 sources, m..m+n-1 targets. Super source/sink implicit.
  for (int guard = 0; guard < 1000; ++guard) {
    double remaining = 0.0;
    for (double s : supply) remaining += s;
    if (remaining <= 1e-15) break;
    // Bellman-Ford from all sources with supply left.
    std::vector<double> dist(m + n, inf);
    std::vector<long> prev(m + n, -1);
    for (std::size_t i = 0; i < m; ++i) {
      if (supply[i] > 1e-15) dist[i] = 0.0;
    }
    for (std::size_t it = 0; it < m + n; ++it) {
      bool changed = false;
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (dist[i] < inf && dist[i] + cost[i][j] < dist[m + j] - 1e-15) {
            dist[m + j] = dist[i] + cost[i][j];
            prev[m + j] = static_cast<long>(i);
            changed = true;
          }
          if (flow[i][j] > 1e-15 && dist[m + j] < inf &&
              dist[m + j] - cost[i][j] < dist[i] - 1e-15) {
            dist[i] = dist[m + j] - cost[i][j];
            prev[i] = static_cast<long>(m + j);
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    long best = -1;
    for (std::size_t j = 0; j < n; ++j) {
      if (demand[j] > 1e-15 && dist[m + j] < inf &&
          (best < 0 || dist[m + j] < dist[static_cast<std::size_t>(best)])) {
        best = static_cast<long>(m + j);
      }
    }
    if (best < 0) break;
    // Bottleneck along the path.
    double amount = demand[static_cast<std::size_t>(best) - m];
    long v = best;
    while (prev[static_cast<std::size_t>(v)] >= 0) {
      const auto u = static_cast<std::size_t>(prev[static_cast<std::size_t>(v)]);
      if (u >= m) {  // backward arc target u -> source v
        amount = std::min(amount, flow[static_cast<std::size_t>(v)][u - m]);
      }
      v = static_cast<long>(u);
    }
    amount = std::min(amount, supply[static_cast<std::size_t>(v)]);
    const auto origin = static_cast<std::size_t>(v);
    v = best;
    while (prev[static_cast<std::size_t>(v)] >= 0) {
      const auto u = static_cast<std::size_t>(prev[static_cast<std::size_t>(v)]);
      if (u < m) {
        flow[u][static_cast<std::size_t>(v) - m] += amount;
      } else {
        flow[static_cast<std::size_t>(v)][u - m] -= amount;
      }
      v = static_cast<long>(u);
    }
    supply[origin] -= amount;
    demand[static_cast<std::size_t>(best) - m] -= amount;
  }
  return flow;
}

}  // namespace detail

// Exact optimal coupling for small instances. Equal counts with equal weights
// are solved by enumerating all permutation matchings (Birkhoff vertices);
// other instances by successive shortest paths.
inline std::pair<CouplingPlan, double> discrete_ot_oracle(
    const DiscreteMeasure<1>& mu, const DiscreteMeasure<1>& nu,
    const CostModel& cost) {
  if (mu.size() > kOracleMaxAtoms || nu.size() > kOracleMaxAtoms) {
    std::ostringstream os;
    os << "discrete_ot_oracle: at most " << kOracleMaxAtoms
       << " atoms per side, got " << mu.size() << " and " << nu.size();
    throw std::length_error(os.str());
  }
  CouplingPlan p;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    p.source_atoms.push_back(mu.atom(i)[0]);
    p.source_weights.push_back(mu.weight(i));
  }
  for (std::size_t j = 0; j < nu.size(); ++j) {
    p.target_atoms.push_back(nu.atom(j)[0]);
    p.target_weights.push_back(nu.weight(j));
  }
  std::vector<std::vector<double>> c(mu.size(), std::vector<double>(nu.size()));
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t j = 0; j < nu.size(); ++j) {
      c[i][j] = cost(p.source_atoms[i], p.target_atoms[j]);
    }
  }
  auto all_equal = [](const std::vector<double>& w) {
    return std::all_of(w.begin(), w.end(),
                       [&](double v) { return v == w.front(); });
  };
  if (mu.size() == nu.size() && all_equal(p.source_weights) &&
      all_equal(p.target_weights)) {
    const std::size_t n = mu.size();
    std::vector<std::size_t> perm(n), best_perm;
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    double best = std::numeric_limits<double>::infinity();
    do {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += c[i][perm[i]];
      if (s < best) {
        best = s;
        best_perm = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    p.plan.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) p.plan[i][best_perm[i]] = mu.weight(i);
  } else {
    p.plan = detail::min_cost_transport(p.source_weights, p.target_weights, c);
  }
  const double value = transport_cost(p, cost);
  return {std::move(p), value};
}

}  // namespace cnash
