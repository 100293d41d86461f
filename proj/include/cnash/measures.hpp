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

// Probability measures on [0,1] and [0,1]^2.
//
// GridMeasure1D carries a piecewise-constant density on n uniform cells; its
// CDF is the piecewise-linear interpolant of the cumulative cell masses, so
// cdf() and quantile() are exact mutual inverses wherever the density is
// positive. DiscreteMeasure holds weighted atoms and is the particle carrier
// used by the best-reply route.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cnash/detail/common.hpp"

namespace cnash {

inline constexpr std::size_t kDefaultCells = 512;
inline constexpr double kMassTolerance = 1e-10;
inline constexpr double kAtomMassTolerance = 1e-12;

class GridMeasure1D {
 public:
  // Takes a density that already integrates to one (within 1e-10).
  explicit GridMeasure1D(std::vector<double> density)
      : density_(std::move(density)) {
    if (density_.empty()) {
      throw std::invalid_argument("GridMeasure1D: n_cells must be positive");
    }
    double mass = 0.0;
    for (std::size_t i = 0; i < density_.size(); ++i) {
      const double d = density_[i];
      if (!std::isfinite(d) || d < 0.0) {
        std::ostringstream os;
        os << "GridMeasure1D: density[" << i << "] = " << d
           << " is negative or not finite";
        throw std::invalid_argument(os.str());
      }
      mass += d;
    }
    mass /= static_cast<double>(density_.size());
    if (std::abs(mass - 1.0) > kMassTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "GridMeasure1D: mass " << mass << " differs from 1";
      throw std::invalid_argument(os.str());
    }
  }

  // Rescales a non-negative density to unit mass.
  static GridMeasure1D normalized(std::vector<double> density) {
    if (density.empty()) {
      throw std::invalid_argument("GridMeasure1D: n_cells must be positive");
    }
    double mass = 0.0;
    for (double d : density) mass += d;
    mass /= static_cast<double>(density.size());
    if (!(mass > 0.0) || !std::isfinite(mass)) {
      throw std::invalid_argument("GridMeasure1D: density has no mass");
    }
    for (double& d : density) d /= mass;
    return GridMeasure1D(std::move(density));
  }

  static GridMeasure1D uniform(std::size_t n_cells = kDefaultCells) {
    return GridMeasure1D(std::vector<double>(n_cells, 1.0));
  }

  // Samples f at cell midpoints and normalizes.
  static GridMeasure1D from_function(std::size_t n_cells,
                                     const std::function<double(double)>& f) {
    std::vector<double> d(n_cells);
    for (std::size_t i = 0; i < n_cells; ++i) {
      d[i] = f((static_cast<double>(i) + 0.5) / static_cast<double>(n_cells));
    }
    return normalized(std::move(d));
  }

  std::size_t n_cells() const { return density_.size(); }
  double cell_width() const { return 1.0 / static_cast<double>(n_cells()); }
  double node(std::size_t j) const {
    return static_cast<double>(j) / static_cast<double>(n_cells());
  }
  double midpoint(std::size_t i) const {
    return (static_cast<double>(i) + 0.5) / static_cast<double>(n_cells());
  }
  double operator[](std::size_t i) const { return density_[i]; }
  std::span<const double> density() const { return density_; }
  double cell_mass(std::size_t i) const { return density_[i] * cell_width(); }

  double mass() const {
    return std::accumulate(density_.begin(), density_.end(), 0.0) *
           cell_width();
  }
  double sup() const {
    return *std::max_element(density_.begin(), density_.end());
  }

  // Cell index containing y (right endpoint belongs to the last cell).
  std::size_t cell_of(double y) const {
    const double n = static_cast<double>(n_cells());
    const double k = std::floor(std::clamp(y, 0.0, 1.0) * n);
    return std::min(static_cast<std::size_t>(k), n_cells() - 1);
  }

  // Density value at a grid node: mean of the adjacent cells.
  double node_density(std::size_t j) const {
    if (j == 0) return density_.front();
    if (j >= n_cells()) return density_.back();
    return 0.5 * (density_[j - 1] + density_[j]);
  }

  friend bool operator==(const GridMeasure1D&, const GridMeasure1D&) = default;

 private:
  std::vector<double> density_;
};

// Piecewise-linear CDF on the uniform node grid of a GridMeasure1D.
class Cdf1D {
 public:
  explicit Cdf1D(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() < 2) {
      throw std::invalid_argument("Cdf1D: need at least two nodes");
    }
    values_.front() = 0.0;
    values_.back() = 1.0;
    for (std::size_t j = 1; j < values_.size(); ++j) {
      if (values_[j] < values_[j - 1]) {
        throw std::invalid_argument("Cdf1D: values must be non-decreasing");
      }
    }
  }

  std::size_t n_cells() const { return values_.size() - 1; }
  double node(std::size_t j) const {
    return static_cast<double>(j) / static_cast<double>(n_cells());
  }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t j) const { return values_[j]; }

  double operator()(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double s = x * static_cast<double>(n_cells());
    const std::size_t k =
        std::min(static_cast<std::size_t>(s), n_cells() - 1);
    const double t = s - static_cast<double>(k);
    return values_[k] + t * (values_[k + 1] - values_[k]);
  }

 private:
  std::vector<double> values_;
};

inline Cdf1D cdf(const GridMeasure1D& m) {
  std::vector<double> v(m.n_cells() + 1, 0.0);
  const double h = m.cell_width();
  for (std::size_t i = 0; i < m.n_cells(); ++i) {
    v[i + 1] = std::min(1.0, v[i] + m[i] * h);
  }
  return Cdf1D(std::move(v));
}

// Generalized inverse inf{x : F(x) >= p}, linear inside cells.
inline double quantile(const Cdf1D& F, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    std::ostringstream os;
    os << "quantile: p = " << p << " outside [0,1]";
    throw std::domain_error(os.str());
  }
  const auto v = F.values();
  const auto it = std::lower_bound(v.begin(), v.end(), p);
  const auto j = static_cast<std::size_t>(it - v.begin());
  if (j == 0) return 0.0;
  const double lo = v[j - 1];
  const double hi = v[j];
  const double t = (p - lo) / (hi - lo);
  return F.node(j - 1) + std::clamp(t, 0.0, 1.0) * (F.node(j) - F.node(j - 1));
}

// Deposits the mass of each source cell uniformly over [T(x_i), T(x_{i+1})]
// and re-bins onto a uniform grid of n_target cells (conservative remap).
// map_values are the map at the n+1 source nodes.
inline GridMeasure1D pushforward_map_1d(std::span<const double> map_values,
                                        const GridMeasure1D& m,
                                        std::size_t n_target = 0) {
  if (map_values.size() != m.n_cells() + 1) {
    throw std::invalid_argument(
        "pushforward_map_1d: map must have n_cells + 1 node values");
  }
  if (n_target == 0) n_target = m.n_cells();
  const double nt = static_cast<double>(n_target);
  std::vector<double> mass(n_target, 0.0);
  for (std::size_t i = 0; i < m.n_cells(); ++i) {
    const double w = m.cell_mass(i);
    if (w == 0.0) continue;
    double a = std::clamp(map_values[i], 0.0, 1.0) * nt;
    double b = std::clamp(map_values[i + 1], 0.0, 1.0) * nt;
    if (a > b) std::swap(a, b);
    if (b - a < 1e-13) {
      const auto k = std::min(static_cast<std::size_t>(a), n_target - 1);
      mass[k] += w;
      continue;
    }
    const double per_unit = w / (b - a);
    auto k = std::min(static_cast<std::size_t>(a), n_target - 1);
    for (; k < n_target; ++k) {
      const double lo = std::max(a, static_cast<double>(k));
      const double hi = std::min(b, static_cast<double>(k + 1));
      if (hi > lo) mass[k] += per_unit * (hi - lo);
      if (static_cast<double>(k + 1) >= b) break;
    }
  }
  double total = 0.0;
  for (double v : mass) total += v;
  std::vector<double> density(n_target);
  for (std::size_t k = 0; k < n_target; ++k) density[k] = mass[k] / total * nt;
  return GridMeasure1D(std::move(density));
}

template <std::size_t Dim>
class DiscreteMeasure {
  static_assert(Dim == 1 || Dim == 2, "dimension must be 1 or 2");

 public:
  DiscreteMeasure(std::vector<Point<Dim>> atoms, std::vector<double> weights)
      : atoms_(std::move(atoms)), weights_(std::move(weights)) {
    if (atoms_.size() != weights_.size() || atoms_.empty()) {
      throw std::invalid_argument(
          "DiscreteMeasure: need the same positive number of atoms and "
          "weights");
    }
    // Compensated sum: many equal weights would otherwise drift past 1e-12.
    double total = 0.0, carry = 0.0;
    for (double w : weights_) {
      if (!(w >= 0.0) || !std::isfinite(w)) {
        throw std::invalid_argument("DiscreteMeasure: negative weight");
      }
      const double y = w - carry;
      const double t = total + y;
      carry = (t - total) - y;
      total = t;
    }
    if (std::abs(total - 1.0) > kAtomMassTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "DiscreteMeasure: weights sum to " << total;
      throw std::invalid_argument(os.str());
    }
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (!inside(atoms_[i])) {
        throw std::range_error(out_of_domain_message(i, atoms_[i]));
      }
    }
  }

  static DiscreteMeasure equal_weights(std::vector<Point<Dim>> atoms) {
    const std::size_t n = atoms.size();
    return DiscreteMeasure(std::move(atoms),
                           std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  // Uniform measure on [0,1]^Dim as a midpoint lattice. In 2D n_atoms must
  // be a perfect square.
  static DiscreteMeasure uniform_lattice(std::size_t n_atoms) {
    std::vector<Point<Dim>> atoms;
    if constexpr (Dim == 1) {
      for (std::size_t i = 0; i < n_atoms; ++i) {
        atoms.push_back({(static_cast<double>(i) + 0.5) /
                         static_cast<double>(n_atoms)});
      }
    } else {
      const auto k = static_cast<std::size_t>(
          std::llround(std::sqrt(static_cast<double>(n_atoms))));
      if (k * k != n_atoms) {
        throw std::invalid_argument(
            "uniform_lattice: 2D atom count must be a perfect square");
      }
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
          atoms.push_back({(static_cast<double>(i) + 0.5) / static_cast<double>(k),
                           (static_cast<double>(j) + 0.5) / static_cast<double>(k)});
        }
      }
    }
    return equal_weights(std::move(atoms));
  }

  // One atom per cell midpoint, weighted by the cell mass.
  static DiscreteMeasure from_grid(const GridMeasure1D& m)
    requires(Dim == 1)
  {
    std::vector<Point<1>> atoms;
    std::vector<double> weights;
    double total = 0.0;
    for (std::size_t i = 0; i < m.n_cells(); ++i) total += m.cell_mass(i);
    for (std::size_t i = 0; i < m.n_cells(); ++i) {
      atoms.push_back({m.midpoint(i)});
      weights.push_back(m.cell_mass(i) / total);
    }
    return DiscreteMeasure(std::move(atoms), std::move(weights));
  }

  static constexpr std::size_t dim() { return Dim; }
  std::size_t size() const { return atoms_.size(); }
  const std::vector<Point<Dim>>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }
  const Point<Dim>& atom(std::size_t i) const { return atoms_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }

  static bool inside(const Point<Dim>& p) {
    for (double v : p) {
      if (!(v >= -1e-12 && v <= 1.0 + 1e-12)) return false;
    }
    return true;
  }

  static std::string out_of_domain_message(std::size_t i, const Point<Dim>& p) {
    std::ostringstream os;
    os.precision(17);
    os << "atom " << i << " at (";
    for (std::size_t k = 0; k < Dim; ++k) os << (k ? ", " : "") << p[k];
    os << ") lies outside [0,1]^" << Dim;
    return os.str();
  }

 private:
  std::vector<Point<Dim>> atoms_;
  std::vector<double> weights_;
};

// Maps every atom through f; weights are unchanged.
template <std::size_t Dim, typename Fn>
DiscreteMeasure<Dim> pushforward_particles(Fn&& f,
                                           const DiscreteMeasure<Dim>& m) {
  std::vector<Point<Dim>> out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    out[i] = f(m.atom(i));
    if (!DiscreteMeasure<Dim>::inside(out[i])) {
      throw std::range_error("pushforward_particles: image of " +
                             DiscreteMeasure<Dim>::out_of_domain_message(i, out[i]));
    }
  }
  return DiscreteMeasure<Dim>(std::move(out), m.weights());
}

// Histogram of a 1D particle measure on n uniform cells.
inline GridMeasure1D bin_particles(const DiscreteMeasure<1>& m,
                                   std::size_t n_cells) {
  std::vector<double> d(n_cells, 0.0);
  const double n = static_cast<double>(n_cells);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double k = std::floor(std::clamp(m.atom(i)[0], 0.0, 1.0) * n);
    d[std::min(static_cast<std::size_t>(k), n_cells - 1)] += m.weight(i) * n;
  }
  return GridMeasure1D::normalized(std::move(d));
}

// Row-major bins x bins density of a 2D particle measure; entry
// [i * bins + j] covers cell i along the first axis and j along the second.
inline std::vector<double> bin_particles_2d(const DiscreteMeasure<2>& m,
                                            std::size_t bins) {
  std::vector<double> d(bins * bins, 0.0);
  const double n = static_cast<double>(bins);
  for (std::size_t a = 0; a < m.size(); ++a) {
    const auto& p = m.atom(a);
    const auto i = std::min(
        static_cast<std::size_t>(std::floor(std::clamp(p[0], 0.0, 1.0) * n)),
        bins - 1);
    const auto j = std::min(
        static_cast<std::size_t>(std::floor(std::clamp(p[1], 0.0, 1.0) * n)),
        bins - 1);
    d[i * bins + j] += m.weight(a) * n * n;
  }
  return d;
}

}  // namespace cnash
