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

// Cost structure of a separable game: an agent of type x choosing action y
// against the action distribution nu pays c(x, y) + V[nu](y), where
//
//   V[nu](y) = f(nu(y)) + eps * integral phi(y, z) dnu(z) + V0(y).
//
// Every piece is optional. Integrals against grid measures use the cell
// midpoint rule, the same quadrature as the measures themselves, so the
// discrete first-variation identities hold exactly up to O(t).

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cnash/cost.hpp"
#include "cnash/detail/common.hpp"
#include "cnash/measures.hpp"
#include "cnash/transport.hpp"

namespace cnash {

class CongestionSpec {
 public:
  enum class Variant { kLog, kPower };

  static CongestionSpec log() { return CongestionSpec(Variant::kLog, 0.0); }
  static CongestionSpec power(double alpha) {
    if (!(alpha >= 1.0)) {
      throw std::invalid_argument("power congestion needs alpha >= 1");
    }
    return CongestionSpec(Variant::kPower, alpha);
  }

  Variant variant() const { return variant_; }
  bool is_log() const { return variant_ == Variant::kLog; }
  double alpha() const { return alpha_; }

  // f(0) = -inf for the log variant.
  double f(double t) const {
    if (is_log()) {
      return t > 0.0 ? std::log(t) : -std::numeric_limits<double>::infinity();
    }
    return std::pow(t, alpha_);
  }

  // Antiderivative used by the energy: t log t - t, or t^(a+1) / (a+1).
  double primitive(double t) const {
    if (is_log()) return t > 0.0 ? t * std::log(t) - t : 0.0;
    return std::pow(t, alpha_ + 1.0) / (alpha_ + 1.0);
  }

  std::string describe() const {
    if (is_log()) return "log";
    std::ostringstream os;
    os.precision(17);
    os << "power " << alpha_;
    return os.str();
  }

  friend bool operator==(const CongestionSpec&, const CongestionSpec&) = default;

 private:
  CongestionSpec(Variant v, double alpha) : variant_(v), alpha_(alpha) {}
  Variant variant_;
  double alpha_;
};

// Parameters of the built-in kernel a * |b*y - c*z - d|^q (Euclidean norm in
// 2D, where d must be zero).
struct KernelSpec {
  double a = 0.0;
  double b = 1.0;
  double c = 1.0;
  double d = 0.0;
  double q = 2.0;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

// Pairwise interaction phi(y, z) with scale eps. The stored callables are the
// unscaled kernel; eps multiplies every integral.
template <std::size_t Dim>
struct InteractionKernel {
  using P = Point<Dim>;

  std::function<double(const P&, const P&)> phi;
  std::function<P(const P&, const P&)> grad_y;
  std::function<Matrix<Dim>(const P&, const P&)> hess_y;
  // Norm of the mixed derivative D_z grad_y phi, the Lipschitz modulus of
  // grad_y phi(y, .) at (y, z).
  std::function<double(const P&, const P&)> cross_norm;
  double eps = 1.0;
  bool symmetric = false;
  std::optional<KernelSpec> spec;

  double operator()(const P& y, const P& z) const { return phi(y, z); }

  static InteractionKernel abs_power(const KernelSpec& s, double eps) {
    if (!(s.q >= 1.0)) {
      throw std::invalid_argument("kernel exponent q must be >= 1");
    }
    if (Dim == 2 && s.d != 0.0) {
      throw std::invalid_argument("2D kernels do not take an offset d");
    }
    InteractionKernel k;
    k.spec = s;
    k.eps = eps;
    k.symmetric = (s.b == s.c && s.d == 0.0) || s.b == -s.c || s.a == 0.0;
    const auto u_of = [s](const P& y, const P& z) {
      P u;
      for (std::size_t i = 0; i < Dim; ++i) u[i] = s.b * y[i] - s.c * z[i] - s.d;
      return u;
    };
    k.phi = [s, u_of](const P& y, const P& z) {
      return s.a * std::pow(detail::norm<Dim>(u_of(y, z)), s.q);
    };
    k.grad_y = [s, u_of](const P& y, const P& z) {
      const P u = u_of(y, z);
      const double r = detail::norm<Dim>(u);
      P g{};
      if (r == 0.0) return g;
      const double scale = s.a * s.q * s.b * std::pow(r, s.q - 2.0);
      for (std::size_t i = 0; i < Dim; ++i) g[i] = scale * u[i];
      return g;
    };
    k.hess_y = [s, u_of](const P& y, const P& z) {
      const P u = u_of(y, z);
      const double r = detail::norm<Dim>(u);
      Matrix<Dim> h = detail::zero_matrix<Dim>();
      const double ab2 = s.a * s.q * s.b * s.b;
      if (r == 0.0) {
        if (s.q == 2.0) {
          for (std::size_t i = 0; i < Dim; ++i) h[i][i] = ab2;
        } else if (s.q < 2.0) {
          for (std::size_t i = 0; i < Dim; ++i) {
            h[i][i] = std::numeric_limits<double>::infinity();
          }
        }
        return h;
      }
      const double rq2 = std::pow(r, s.q - 2.0);
      if constexpr (Dim == 1) {
        h[0][0] = ab2 * (s.q - 1.0) * rq2;
      } else {
        const double rq4 = rq2 / (r * r);
        for (std::size_t i = 0; i < Dim; ++i) {
          for (std::size_t j = 0; j < Dim; ++j) {
            h[i][j] = ab2 * ((i == j ? rq2 : 0.0) + (s.q - 2.0) * rq4 * u[i] * u[j]);
          }
        }
      }
      return h;
    };
    const auto hess = k.hess_y;
    k.cross_norm = [s, hess](const P& y, const P& z) {
      if (s.b == 0.0) return 0.0;
      return std::abs(s.c / s.b) * detail::symmetric_norm<Dim>(hess(y, z));
    };
    return k;
  }

  static InteractionKernel zero() {
    InteractionKernel k = abs_power(KernelSpec{0.0, 1.0, 1.0, 0.0, 2.0}, 0.0);
    k.symmetric = true;
    return k;
  }
};

// V0(y) = sum_i a_i (y_i - c_i)^2 with a_i > 0.
template <std::size_t Dim>
struct QuadraticPotential {
  Point<Dim> a{};
  Point<Dim> center{};

  double value(const Point<Dim>& y) const {
    double v = 0.0;
    for (std::size_t i = 0; i < Dim; ++i) {
      v += a[i] * (y[i] - center[i]) * (y[i] - center[i]);
    }
    return v;
  }
  Point<Dim> gradient(const Point<Dim>& y) const {
    Point<Dim> g;
    for (std::size_t i = 0; i < Dim; ++i) g[i] = 2.0 * a[i] * (y[i] - center[i]);
    return g;
  }
  Matrix<Dim> hessian() const {
    Matrix<Dim> h = detail::zero_matrix<Dim>();
    for (std::size_t i = 0; i < Dim; ++i) h[i][i] = 2.0 * a[i];
    return h;
  }
  double lambda0() const {
    double m = std::numeric_limits<double>::infinity();
    for (double v : a) m = std::min(m, 2.0 * v);
    return m;
  }
  double Lambda0() const {
    double m = 0.0;
    for (double v : a) m = std::max(m, 2.0 * v);
    return m;
  }

  friend bool operator==(const QuadraticPotential&,
                         const QuadraticPotential&) = default;
};

template <std::size_t Dim>
struct ExternalityModel {
  std::optional<CongestionSpec> congestion;
  std::optional<InteractionKernel<Dim>> kernel;
  std::optional<QuadraticPotential<Dim>> v0;
};

using Model1D = ExternalityModel<1>;

// eps * integral phi(y, z) dnu(z), midpoint rule.
inline double eval_interaction(const InteractionKernel<1>& k,
                               const GridMeasure1D& nu, double y) {
  double s = 0.0;
  for (std::size_t i = 0; i < nu.n_cells(); ++i) {
    if (nu[i] != 0.0) s += k.phi({y}, {nu.midpoint(i)}) * nu.cell_mass(i);
  }
  return k.eps * s;
}

template <std::size_t Dim>
double eval_interaction(const InteractionKernel<Dim>& k,
                        const DiscreteMeasure<Dim>& nu, const Point<Dim>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    s += nu.weight(i) * k.phi(y, nu.atom(i));
  }
  return k.eps * s;
}

// eps * phi(y_j, y_i) on cell midpoints, row-major n x n.
inline std::vector<double> kernel_matrix(const InteractionKernel<1>& k,
                                         std::size_t n) {
  std::vector<double> m(n * n);
  const double nd = static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double y = (static_cast<double>(j) + 0.5) / nd;
    for (std::size_t i = 0; i < n; ++i) {
      m[j * n + i] = k.eps * k.phi({y}, {(static_cast<double>(i) + 0.5) / nd});
    }
  }
  return m;
}

// Interaction term on every cell midpoint given a precomputed kernel matrix.
inline std::vector<double> interaction_on_cells(const std::vector<double>& kmat,
                                                const GridMeasure1D& nu) {
  const std::size_t n = nu.n_cells();
  const double h = nu.cell_width();
  std::vector<double> out(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    const double* row = &kmat[j * n];
    for (std::size_t i = 0; i < n; ++i) s += row[i] * nu[i];
    out[j] = s * h;
  }
  return out;
}

// V[nu] on every cell midpoint. Log congestion on an empty cell gives -inf.
inline std::vector<double> externality_on_cells(const Model1D& model,
                                                const GridMeasure1D& nu) {
  const std::size_t n = nu.n_cells();
  std::vector<double> v(n, 0.0);
  if (model.kernel) {
    v = interaction_on_cells(kernel_matrix(*model.kernel, n), nu);
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (model.congestion) v[j] += model.congestion->f(nu[j]);
    if (model.v0) v[j] += model.v0->value({nu.midpoint(j)});
  }
  return v;
}

// V[nu] at the midpoint of cell j.
inline double eval_V(const Model1D& model, const GridMeasure1D& nu,
                     std::size_t j) {
  const double y = nu.midpoint(j);
  double v = 0.0;
  if (model.congestion) v += model.congestion->f(nu[j]);
  if (model.kernel) v += eval_interaction(*model.kernel, nu, y);
  if (model.v0) v += model.v0->value({y});
  return v;
}

// E[nu] = sum F(nu_j) h + (eps/2) sum sum phi_jk nu_j nu_k h^2 + sum V0 nu_j h.
inline double energy(const Model1D& model, const GridMeasure1D& nu) {
  if (model.kernel && !model.kernel->symmetric) {
    throw PreconditionError(
        "energy: the interaction kernel is not symmetric, so V has no "
        "potential");
  }
  const std::size_t n = nu.n_cells();
  const double h = nu.cell_width();
  double e = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (model.congestion) e += model.congestion->primitive(nu[j]) * h;
    if (model.v0) e += model.v0->value({nu.midpoint(j)}) * nu[j] * h;
  }
  if (model.kernel) {
    const auto inter = interaction_on_cells(kernel_matrix(*model.kernel, n), nu);
    for (std::size_t j = 0; j < n; ++j) e += 0.5 * inter[j] * nu[j] * h;
  }
  return e;
}

// J_mu[nu] = W_c(mu, nu) + E[nu], W_c through the monotone map.
inline double total_cost_J(const Model1D& model, const CostModel& cost,
                           const GridMeasure1D& mu, const GridMeasure1D& nu) {
  return transport_cost(monotone_map(mu, nu), mu, cost) + energy(model, nu);
}

// 1 - eps^2 * integral of phi^2 over [0,1]^2 (midpoint rule on n x n cells).
// Positive values certify strict monotonicity of nu -> nu + eps * I[nu].
inline double monotonicity_margin(const InteractionKernel<1>& k,
                                  std::size_t n = 4096) {
  const double nd = static_cast<double>(n);
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double y = (static_cast<double>(j) + 0.5) / nd;
    double row = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = k.phi({y}, {(static_cast<double>(i) + 0.5) / nd});
      row += v * v;
    }
    s += row;
  }
  return 1.0 - k.eps * k.eps * s / (nd * nd);
}

// True iff the centered difference of dcdx in y is below -1e-12 at every
// pair of nodes of an n-cell grid.
inline bool check_spence_mirrlees(const CostModel& cost, std::size_t n = 512) {
  const double h = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = static_cast<double>(i) * h;
    for (std::size_t j = 0; j <= n; ++j) {
      const double y = static_cast<double>(j) * h;
      const double lo = std::max(0.0, y - h);
      const double hi = std::min(1.0, y + h);
      const double mixed = (cost.dcdx(x, hi) - cost.dcdx(x, lo)) / (hi - lo);
      if (!(mixed < -1e-12)) return false;
    }
  }
  return true;
}

}  // namespace cnash
