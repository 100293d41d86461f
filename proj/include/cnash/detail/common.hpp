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

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace cnash {

inline constexpr const char* kVersion = "0.1.0";

template <std::size_t Dim>
using Point = std::array<double, Dim>;

template <std::size_t Dim>
using Matrix = std::array<std::array<double, Dim>, Dim>;

// A required structural assumption of an operation does not hold.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// An iterative numeric procedure failed; the message carries diagnostics.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <std::size_t Dim>
double norm(const Point<Dim>& p) {
  double s = 0.0;
  for (double v : p) s += v * v;
  return std::sqrt(s);
}

template <std::size_t Dim>
double distance(const Point<Dim>& a, const Point<Dim>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < Dim; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

template <std::size_t Dim>
Matrix<Dim> zero_matrix() {
  Matrix<Dim> m{};
  for (auto& row : m) row.fill(0.0);
  return m;
}

// Spectral norm of a symmetric matrix (closed form for Dim <= 2).
template <std::size_t Dim>
double symmetric_norm(const Matrix<Dim>& m) {
  if constexpr (Dim == 1) {
    return std::abs(m[0][0]);
  } else {
    static_assert(Dim == 2, "only 1D and 2D are supported");
    const double tr = 0.5 * (m[0][0] + m[1][1]);
    const double diff = 0.5 * (m[0][0] - m[1][1]);
    const double off = 0.5 * (m[0][1] + m[1][0]);
    const double rad = std::sqrt(diff * diff + off * off);
    return std::max(std::abs(tr + rad), std::abs(tr - rad));
  }
}

template <std::size_t Dim>
double min_eigenvalue(const Matrix<Dim>& m) {
  if constexpr (Dim == 1) {
    return m[0][0];
  } else {
    const double tr = 0.5 * (m[0][0] + m[1][1]);
    const double diff = 0.5 * (m[0][0] - m[1][1]);
    const double off = 0.5 * (m[0][1] + m[1][0]);
    return tr - std::sqrt(diff * diff + off * off);
  }
}

// Solves m * x = r for Dim <= 2. Returns false when m is singular.
template <std::size_t Dim>
bool solve_linear(const Matrix<Dim>& m, const Point<Dim>& r, Point<Dim>& x) {
  if constexpr (Dim == 1) {
    if (m[0][0] == 0.0) return false;
    x[0] = r[0] / m[0][0];
    return true;
  } else {
    const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if (det == 0.0 || !std::isfinite(det)) return false;
    x[0] = (m[1][1] * r[0] - m[0][1] * r[1]) / det;
    x[1] = (m[0][0] * r[1] - m[1][0] * r[0]) / det;
    return true;
  }
}

// Composite trapezoid running integral on a uniform grid with spacing h.
inline std::vector<double> cumulative_trapezoid(const std::vector<double>& f,
                                                double h) {
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t j = 1; j < f.size(); ++j) {
    out[j] = out[j - 1] + 0.5 * h * (f[j - 1] + f[j]);
  }
  return out;
}

// Runs fn(i) for i in [0, n) over a fixed partition of hardware threads.
// Each index is written by exactly one thread, so output order never depends
// on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(hw, (n + 255) / 256);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, w, &fn, &errors] {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace detail
}  // namespace cnash
