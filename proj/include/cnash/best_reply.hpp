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

// Best-reply dynamics for the quadratic transport cost |x - y|^2 / 2.
//
// Against a prior nu every type x plays y = (id + grad V[nu])^{-1}(x), so the
// induced action distribution is T(nu) = (id + grad V[nu])^{-1} # mu. The
// operator is realized on particles: each atom of mu is inverted
// independently, which makes the pushforward exact up to the inversion
// tolerance. When V0 is strongly convex and eps is small, T is a W1
// contraction and its iterates converge to the unique equilibrium.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cnash/detail/common.hpp"
#include "cnash/game_model.hpp"
#include "cnash/measures.hpp"
#include "cnash/transport.hpp"

namespace cnash {

template <std::size_t Dim>
struct Box {
  Point<Dim> lo{};
  Point<Dim> hi{};

  static Box unit() {
    Box b;
    b.lo.fill(0.0);
    b.hi.fill(1.0);
    return b;
  }
  double volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < Dim; ++i) v *= std::max(0.0, hi[i] - lo[i]);
    return v;
  }
  bool contains(const Point<Dim>& p, double slack = 0.0) const {
    for (std::size_t i = 0; i < Dim; ++i) {
      if (p[i] < lo[i] - slack || p[i] > hi[i] + slack) return false;
    }
    return true;
  }
  // s points per axis, endpoints included, row-major.
  std::vector<Point<Dim>> lattice(std::size_t s) const {
    std::vector<Point<Dim>> pts;
    const auto coord = [&](std::size_t axis, std::size_t k) {
      const double t = s > 1 ? static_cast<double>(k) / static_cast<double>(s - 1) : 0.5;
      return lo[axis] + t * (hi[axis] - lo[axis]);
    };
    if constexpr (Dim == 1) {
      for (std::size_t k = 0; k < s; ++k) pts.push_back({coord(0, k)});
    } else {
      for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = 0; j < s; ++j) pts.push_back({coord(0, i), coord(1, j)});
      }
    }
    return pts;
  }

  friend bool operator==(const Box&, const Box&) = default;
};

// grad V[nu] and its Hessian for a fixed particle measure nu. Even-integer
// power kernels are summed through moments of nu, so one evaluation costs
// O(1) instead of O(#atoms); other kernels fall back to direct summation.
template <std::size_t Dim>
class GradientField {
 public:
  GradientField(const ExternalityModel<Dim>& model, const DiscreteMeasure<Dim>& nu)
      : model_(model), nu_(nu) {
    if (model.congestion) {
      throw PreconditionError(
          "best reply needs a smooth externality; congestion terms are handled "
          "by the one-dimensional fixed-point solvers (algo1 / algo2)");
    }
    if (!model.kernel || model.kernel->eps == 0.0 ||
        (model.kernel->spec && model.kernel->spec->a == 0.0)) {
      mode_ = Mode::kNone;
      return;
    }
    const auto& k = *model.kernel;
    if (k.spec) {
      spec_ = *k.spec;
      const double q = spec_.q;
      const bool even = q == std::round(q) && static_cast<int>(q) % 2 == 0;
      if constexpr (Dim == 1) {
        if (even && q <= 8.0) {
          mode_ = Mode::kPoly1D;
          const int qi = static_cast<int>(q);
          moments_.assign(static_cast<std::size_t>(qi), 0.0);
          for (std::size_t a = 0; a < nu.size(); ++a) {
            double zk = 1.0;
            for (int p = 0; p < qi; ++p) {
              moments_[static_cast<std::size_t>(p)] += nu.weight(a) * zk;
              zk *= nu.atom(a)[0];
            }
          }
          return;
        }
      } else {
        if (even && (q == 2.0 || q == 4.0)) {
          mode_ = q == 2.0 ? Mode::kPoly2DQ2 : Mode::kPoly2DQ4;
          for (std::size_t a = 0; a < nu.size(); ++a) {
            const double w = nu.weight(a);
            const Point<2> z{spec_.c * nu.atom(a)[0], spec_.c * nu.atom(a)[1]};
            const double z2 = z[0] * z[0] + z[1] * z[1];
            m0_ += w;
            for (int i = 0; i < 2; ++i) {
              m1_[i] += w * z[i];
              t3_[i] += w * z2 * z[i];
              for (int j = 0; j < 2; ++j) m2_[i][j] += w * z[i] * z[j];
            }
            s2_ += w * z2;
          }
          return;
        }
      }
    }
    mode_ = Mode::kDirect;
  }

  Point<Dim> gradient(const Point<Dim>& y) const {
    Point<Dim> g{};
    if (model_.v0) g = model_.v0->gradient(y);
    if (mode_ == Mode::kNone) return g;
    const double eps = model_.kernel->eps;
    const Point<Dim> gi = interaction_gradient(y);
    for (std::size_t i = 0; i < Dim; ++i) g[i] += eps * gi[i];
    return g;
  }

  Matrix<Dim> hessian(const Point<Dim>& y) const {
    Matrix<Dim> h = model_.v0 ? model_.v0->hessian() : detail::zero_matrix<Dim>();
    if (mode_ == Mode::kNone) return h;
    const double eps = model_.kernel->eps;
    const Matrix<Dim> hi = interaction_hessian(y);
    for (std::size_t i = 0; i < Dim; ++i) {
      for (std::size_t j = 0; j < Dim; ++j) h[i][j] += eps * hi[i][j];
    }
    return h;
  }

 private:
  enum class Mode { kNone, kPoly1D, kPoly2DQ2, kPoly2DQ4, kDirect };

  static double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  }

  // sum_k C(n,k) A^(n-k) (-c)^k m_k
  double poly_sum(double A, int n) const {
    double s = 0.0;
    double mc = 1.0;
    for (int k = 0; k <= n; ++k) {
      s += binomial(n, k) * std::pow(A, n - k) * mc * moments_[static_cast<std::size_t>(k)];
      mc *= -spec_.c;
    }
    return s;
  }

  Point<Dim> interaction_gradient(const Point<Dim>& y) const {
    Point<Dim> g{};
    if constexpr (Dim == 1) {
      if (mode_ == Mode::kPoly1D) {
        const int q = static_cast<int>(spec_.q);
        g[0] = spec_.a * spec_.q * spec_.b * poly_sum(spec_.b * y[0] - spec_.d, q - 1);
        return g;
      }
    } else {
      const Point<2> Y{spec_.b * y[0], spec_.b * y[1]};
      if (mode_ == Mode::kPoly2DQ2) {
        for (int i = 0; i < 2; ++i) {
          g[i] = 2.0 * spec_.a * spec_.b * (Y[i] * m0_ - m1_[i]);
        }
        return g;
      }
      if (mode_ == Mode::kPoly2DQ4) {
        const double y2 = Y[0] * Y[0] + Y[1] * Y[1];
        const double ym1 = Y[0] * m1_[0] + Y[1] * m1_[1];
        for (int i = 0; i < 2; ++i) {
          const double m2y = m2_[i][0] * Y[0] + m2_[i][1] * Y[1];
          const double G = m0_ * y2 * Y[i] - y2 * m1_[i] - 2.0 * ym1 * Y[i] +
                           2.0 * m2y + s2_ * Y[i] - t3_[i];
          g[i] = 4.0 * spec_.a * spec_.b * G;
        }
        return g;
      }
    }
    const auto& k = *model_.kernel;
    for (std::size_t a = 0; a < nu_.size(); ++a) {
      const Point<Dim> ga = k.grad_y(y, nu_.atom(a));
      for (std::size_t i = 0; i < Dim; ++i) g[i] += nu_.weight(a) * ga[i];
    }
    return g;
  }

  Matrix<Dim> interaction_hessian(const Point<Dim>& y) const {
    Matrix<Dim> h = detail::zero_matrix<Dim>();
    if constexpr (Dim == 1) {
      if (mode_ == Mode::kPoly1D) {
        const int q = static_cast<int>(spec_.q);
        h[0][0] = spec_.a * spec_.q * (spec_.q - 1.0) * spec_.b * spec_.b *
                  poly_sum(spec_.b * y[0] - spec_.d, q - 2);
        return h;
      }
    } else {
      const Point<2> Y{spec_.b * y[0], spec_.b * y[1]};
      const double ab2 = spec_.a * spec_.b * spec_.b;
      if (mode_ == Mode::kPoly2DQ2) {
        h[0][0] = h[1][1] = 2.0 * ab2 * m0_;
        return h;
      }
      if (mode_ == Mode::kPoly2DQ4) {
        const double y2 = Y[0] * Y[0] + Y[1] * Y[1];
        const double ym1 = Y[0] * m1_[0] + Y[1] * m1_[1];
        for (int i = 0; i < 2; ++i) {
          for (int j = 0; j < 2; ++j) {
            const double id = i == j ? 1.0 : 0.0;
            const double dg = m0_ * (y2 * id + 2.0 * Y[i] * Y[j]) -
                              2.0 * m1_[i] * Y[j] - 2.0 * ym1 * id -
                              2.0 * Y[i] * m1_[j] + 2.0 * m2_[i][j] + s2_ * id;
            h[i][j] = 4.0 * ab2 * dg;
          }
        }
        return h;
      }
    }
    const auto& k = *model_.kernel;
    for (std::size_t a = 0; a < nu_.size(); ++a) {
      const Matrix<Dim> ha = k.hess_y(y, nu_.atom(a));
      for (std::size_t i = 0; i < Dim; ++i) {
        for (std::size_t j = 0; j < Dim; ++j) h[i][j] += nu_.weight(a) * ha[i][j];
      }
    }
    return h;
  }

  const ExternalityModel<Dim>& model_;
  const DiscreteMeasure<Dim>& nu_;
  Mode mode_ = Mode::kNone;
  KernelSpec spec_{};
  std::vector<double> moments_;
  double m0_ = 0.0;
  double s2_ = 0.0;
  Point<2> m1_{};
  Point<2> t3_{};
  Matrix<2> m2_{};
};

// grad V[nu](y) = grad V0(y) + eps * sum_i w_i grad_y phi(y, z_i).
template <std::size_t Dim>
Point<Dim> grad_V(const ExternalityModel<Dim>& model, const DiscreteMeasure<Dim>& nu,
                  const Point<Dim>& y) {
  return GradientField<Dim>(model, nu).gradient(y);
}

template <std::size_t Dim>
struct Inversion {
  Point<Dim> y{};
  double residual = 0.0;
  int iterations = 0;
  bool boundary_hit = false;
};

inline constexpr double kInversionTolerance = 1e-12;
inline constexpr int kInversionMaxSteps = 100;

// Solves y + grad V[nu](y) = x by damped Newton; falls back to bisection (1D)
// or gradient descent on 1/2 |y - x|^2 + V[nu](y) (2D).
template <std::size_t Dim>
Inversion<Dim> invert_id_plus_gradV(const GradientField<Dim>& field,
                                    const Point<Dim>& x) {
  const auto residual_of = [&](const Point<Dim>& y) {
    const Point<Dim> g = field.gradient(y);
    Point<Dim> r;
    for (std::size_t i = 0; i < Dim; ++i) r[i] = y[i] + g[i] - x[i];
    return r;
  };
  Inversion<Dim> out;
  Point<Dim> y = x;
  for (auto& v : y) v = std::clamp(v, 0.0, 1.0);
  Point<Dim> r = residual_of(y);
  double rn = detail::norm<Dim>(r);
  int step = 0;
  bool newton_ok = true;
  for (; step < kInversionMaxSteps && rn >= kInversionTolerance; ++step) {
    Matrix<Dim> J = field.hessian(y);
    for (std::size_t i = 0; i < Dim; ++i) J[i][i] += 1.0;
    Point<Dim> delta;
    if (!detail::solve_linear<Dim>(J, r, delta)) {
      newton_ok = false;
      break;
    }
    double scale = 1.0;
    Point<Dim> trial;
    Point<Dim> rt;
    double rtn = 0.0;
    for (int halving = 0; halving < 40; ++halving) {
      for (std::size_t i = 0; i < Dim; ++i) trial[i] = y[i] - scale * delta[i];
      rt = residual_of(trial);
      rtn = detail::norm<Dim>(rt);
      if (rtn < rn || rtn < kInversionTolerance) break;
      scale *= 0.5;
    }
    if (!(rtn < rn) && !(rtn < kInversionTolerance)) {
      newton_ok = false;
      break;
    }
    y = trial;
    r = rt;
    rn = rtn;
  }
  if (!newton_ok || rn >= kInversionTolerance) {
    if constexpr (Dim == 1) {
      // y + g(y) - x is increasing when 1 + D^2 V > 0.
      double lo = -1.0, hi = 2.0;
      if (residual_of({lo})[0] > 0.0 || residual_of({hi})[0] < 0.0) {
        std::ostringstream os;
        os.precision(17);
        os << "invert_id_plus_gradV: no sign change on [-1, 2] for x = " << x[0];
        throw NumericError(os.str());
      }
      for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double rm = residual_of({mid})[0];
        if (rm == 0.0) {
          lo = hi = mid;
          break;
        }
        (rm < 0.0 ? lo : hi) = mid;
      }
      y = {0.5 * (lo + hi)};
      r = residual_of(y);
      rn = detail::norm<Dim>(r);
      step += 200;
    } else {
      double tau = 0.5;
      for (int it = 0; it < 20000 && rn >= kInversionTolerance; ++it) {
        Point<Dim> trial;
        for (std::size_t i = 0; i < Dim; ++i) trial[i] = y[i] - tau * r[i];
        const Point<Dim> rt = residual_of(trial);
        const double rtn = detail::norm<Dim>(rt);
        if (rtn < rn) {
          y = trial;
          r = rt;
          rn = rtn;
          tau = std::min(1.0, tau * 1.2);
        } else {
          tau *= 0.5;
          if (tau < 1e-16) break;
        }
        ++step;
      }
    }
    // Bisection stalls at the rounding floor of the residual; accept it if
    // the bracket has collapsed.
    if (rn >= kInversionTolerance && !(Dim == 1 && rn < 1e-10)) {
      std::ostringstream os;
      os.precision(17);
      os << "invert_id_plus_gradV: residual " << rn << " after " << step
         << " steps at x = (";
      for (std::size_t i = 0; i < Dim; ++i) os << (i ? ", " : "") << x[i];
      os << "), last y = (";
      for (std::size_t i = 0; i < Dim; ++i) os << (i ? ", " : "") << y[i];
      os << ")";
      throw NumericError(os.str());
    }
  }
  out.y = y;
  out.residual = rn;
  out.iterations = step;
  for (double v : y) {
    if (v <= 0.0 || v >= 1.0) out.boundary_hit = true;
  }
  return out;
}

template <std::size_t Dim>
Inversion<Dim> invert_id_plus_gradV(const ExternalityModel<Dim>& model,
                                    const DiscreteMeasure<Dim>& nu,
                                    const Point<Dim>& x) {
  return invert_id_plus_gradV(GradientField<Dim>(model, nu), x);
}

template <std::size_t Dim>
struct BestReplyImage {
  DiscreteMeasure<Dim> nu;
  std::vector<Point<Dim>> actions;  // one per atom of mu, same order
  std::size_t boundary_hits = 0;
  double max_residual = 0.0;
};

// Every atom of mu is inverted independently (parallel, order preserving).
template <std::size_t Dim>
BestReplyImage<Dim> apply_best_reply(const ExternalityModel<Dim>& model,
                                     const DiscreteMeasure<Dim>& mu,
                                     const DiscreteMeasure<Dim>& nu) {
  const GradientField<Dim> field(model, nu);
  std::vector<Inversion<Dim>> inv(mu.size());
  detail::parallel_for(mu.size(), [&](std::size_t i) {
    inv[i] = invert_id_plus_gradV(field, mu.atom(i));
  });
  std::vector<Point<Dim>> actions(mu.size());
  std::size_t hits = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    actions[i] = inv[i].y;
    hits += inv[i].boundary_hit ? 1 : 0;
    worst = std::max(worst, inv[i].residual);
  }
  std::size_t k = 0;
  auto image = pushforward_particles<Dim>(
      [&](const Point<Dim>&) { return actions[k++]; }, mu);
  return {std::move(image), std::move(actions), hits, worst};
}

// T(nu) = (id + grad V[nu])^{-1} # mu.
template <std::size_t Dim>
DiscreteMeasure<Dim> best_reply_operator(const ExternalityModel<Dim>& model,
                                         const DiscreteMeasure<Dim>& mu,
                                         const DiscreteMeasure<Dim>& nu) {
  return apply_best_reply(model, mu, nu).nu;
}

inline constexpr std::size_t kSlicedDirections = 64;
inline constexpr std::uint64_t kSlicedSeed = 0x5eed5eedULL;

// Unit directions for the sliced distance, fixed by kSlicedSeed.
inline const std::vector<Point<2>>& sliced_directions() {
  static const std::vector<Point<2>> dirs = [] {
    std::mt19937_64 rng(kSlicedSeed);
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    std::vector<Point<2>> d(kSlicedDirections);
    for (auto& v : d) {
      const double t = angle(rng);
      v = {std::cos(t), std::sin(t)};
    }
    return d;
  }();
  return dirs;
}

namespace detail {

inline std::vector<double> projections(const DiscreteMeasure<2>& m,
                                       const Point<2>& dir) {
  std::vector<double> p(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    p[i] = m.atom(i)[0] * dir[0] + m.atom(i)[1] * dir[1];
  }
  return p;
}

}  // namespace detail

// Mean over the fixed directions of the W1 distance between projections.
// A metric surrogate for W1 in 2D; in 1D this is exact W1.
template <std::size_t Dim>
double sliced_w1(const DiscreteMeasure<Dim>& a, const DiscreteMeasure<Dim>& b) {
  if constexpr (Dim == 1) {
    return wasserstein1(a, b);
  } else {
    double s = 0.0;
    for (const auto& dir : sliced_directions()) {
      const auto pa = detail::projections(a, dir);
      const auto pb = detail::projections(b, dir);
      s += wasserstein1_samples(pa, a.weights(), pb, b.weights());
    }
    return s / static_cast<double>(kSlicedDirections);
  }
}

// Largest projected W1 over the fixed directions. Projections are
// 1-Lipschitz, so this is a lower bound on W1.
template <std::size_t Dim>
double max_sliced_w1(const DiscreteMeasure<Dim>& a, const DiscreteMeasure<Dim>& b) {
  if constexpr (Dim == 1) {
    return wasserstein1(a, b);
  } else {
    double best = 0.0;
    for (const auto& dir : sliced_directions()) {
      const auto pa = detail::projections(a, dir);
      const auto pb = detail::projections(b, dir);
      best = std::max(best, wasserstein1_samples(pa, a.weights(), pb, b.weights()));
    }
    return best;
  }
}

template <std::size_t Dim>
struct BestReplyState {
  DiscreteMeasure<Dim> nu;
  int iteration = 0;
  std::vector<double> w1_history;
};

template <std::size_t Dim>
struct BestReplyResult {
  DiscreteMeasure<Dim> nu;          // final iterate T(nu_k)
  std::vector<Point<Dim>> actions;  // x_i -> (id + grad V[nu_k])^{-1}(x_i)
  std::vector<double> w1_history;
  bool converged = false;
  int iterations = 0;
  std::size_t boundary_hits = 0;
  double max_inversion_residual = 0.0;
};

// Iterates nu_{k+1} = T(nu_k) until the step distance drops below tol: exact
// W1 in 1D, sliced W1 (kSlicedDirections fixed directions) in 2D.
template <std::size_t Dim>
BestReplyResult<Dim> iterate_best_reply(const ExternalityModel<Dim>& model,
                                        const DiscreteMeasure<Dim>& mu,
                                        const DiscreteMeasure<Dim>& nu0,
                                        double tol, int max_iter) {
  BestReplyState<Dim> state{nu0, 0, {}};
  BestReplyResult<Dim> out{nu0, {}, {}, false, 0, 0, 0.0};
  while (state.iteration < max_iter) {
    auto image = apply_best_reply(model, mu, state.nu);
    const double step = sliced_w1(state.nu, image.nu);
    state.w1_history.push_back(step);
    ++state.iteration;
    out.actions = std::move(image.actions);
    out.boundary_hits = image.boundary_hits;
    out.max_inversion_residual = image.max_residual;
    state.nu = std::move(image.nu);
    if (step < tol) {
      out.converged = true;
      break;
    }
  }
  out.nu = std::move(state.nu);
  out.w1_history = std::move(state.w1_history);
  out.iterations = state.iteration;
  return out;
}

// sup over y, z in the box lattice of ||D2_y phi(y, z)||, unscaled by eps.
template <std::size_t Dim>
double kernel_hessian_sup(const InteractionKernel<Dim>& k, const Box<Dim>& box,
                          std::size_t samples = 17) {
  const auto pts = box.lattice(samples);
  double hsup = 0.0;
  for (const auto& y : pts) {
    for (const auto& z : pts) {
      hsup = std::max(hsup, detail::symmetric_norm<Dim>(k.hess_y(y, z)));
    }
  }
  return hsup;
}

// Lower bound on the Hessian of V[nu] over the box, for any prior in it.
template <std::size_t Dim>
double convexity_lower_bound(const ExternalityModel<Dim>& model, const Box<Dim>& box,
                             std::size_t samples = 17) {
  const double lambda0 = model.v0 ? model.v0->lambda0() : 0.0;
  if (!model.kernel || model.kernel->eps == 0.0) return lambda0;
  return lambda0 - model.kernel->eps * kernel_hessian_sup(*model.kernel, box, samples);
}

struct ContractionCertificate {
  double lambda = 0.0;
  double M = 0.0;
  double C = 0.0;
  double mu_sup = 0.0;
  double ratio = 0.0;
  bool certified = false;
  double kernel_hessian_sup = 0.0;
};

inline constexpr std::size_t kCertificateSamples = 17;

// Contraction certificate on the action box Y:
//   lambda = lambda0 - eps * sup ||D2_y phi||,
//   M      = (1 + Lambda0 + eps * sup ||D2_y phi||)^d,
//   C      = eps * integral over Y of sup_z ||D_z grad_y phi(y, z)|| dy,
//   ratio  = M * C * mu_sup / (1 + lambda), certified iff ratio < 1.
// Suprema are sampled on a lattice of the box.
template <std::size_t Dim>
ContractionCertificate contraction_certificate(const ExternalityModel<Dim>& model,
                                               double mu_sup,
                                               const Box<Dim>& action_box = Box<Dim>::unit(),
                                               std::size_t samples = kCertificateSamples) {
  if (!model.v0) {
    throw PreconditionError(
        "contraction_certificate: V0 with Hessian bounds lambda0, Lambda0 is "
        "required");
  }
  if (model.congestion) {
    throw PreconditionError("contraction_certificate: congestion is not smooth");
  }
  const double lambda0 = model.v0->lambda0();
  const double Lambda0 = model.v0->Lambda0();
  double eps = 0.0, hsup = 0.0, cross_integral = 0.0;
  if (model.kernel && model.kernel->eps != 0.0) {
    const auto& k = *model.kernel;
    eps = k.eps;
    const auto pts = action_box.lattice(samples);
    hsup = kernel_hessian_sup(k, action_box, samples);
    // Midpoint rule over y; sup over the z lattice.
    Box<Dim> inner = action_box;
    const double cells = static_cast<double>(samples);
    for (std::size_t i = 0; i < Dim; ++i) {
      const double w = (action_box.hi[i] - action_box.lo[i]) / cells;
      inner.lo[i] += 0.5 * w;
      inner.hi[i] -= 0.5 * w;
    }
    const auto mids = inner.lattice(samples);
    double acc = 0.0;
    for (const auto& y : mids) {
      double sup = 0.0;
      for (const auto& z : pts) sup = std::max(sup, k.cross_norm(y, z));
      acc += sup;
    }
    cross_integral = acc / static_cast<double>(mids.size()) * action_box.volume();
  }
  ContractionCertificate cert;
  cert.kernel_hessian_sup = hsup;
  cert.lambda = lambda0 - eps * hsup;
  cert.M = std::pow(1.0 + Lambda0 + eps * hsup, static_cast<double>(Dim));
  cert.C = eps * cross_integral;
  cert.mu_sup = mu_sup;
  if (1.0 + cert.lambda > 0.0) {
    cert.ratio = cert.M * cert.C * mu_sup / (1.0 + cert.lambda);
    cert.certified = cert.ratio < 1.0;
  } else {
    cert.ratio = std::numeric_limits<double>::infinity();
    cert.certified = false;
  }
  return cert;
}

// Shrinks [0,1]^d to a box B such that, for every type in type_box and every
// prior supported in B, the first-order condition places the best reply in B.
// Needs the quadratic V0; the kernel gradient is bounded by sampling.
template <std::size_t Dim>
Box<Dim> invariant_action_box(const ExternalityModel<Dim>& model,
                              const Box<Dim>& type_box = Box<Dim>::unit(),
                              std::size_t samples = kCertificateSamples) {
  if (!model.v0) {
    throw PreconditionError("invariant_action_box: V0 is required");
  }
  Box<Dim> box = Box<Dim>::unit();
  for (int it = 0; it < 200; ++it) {
    Point<Dim> gsup{};
    if (model.kernel && model.kernel->eps != 0.0) {
      const auto pts = box.lattice(samples);
      for (const auto& y : pts) {
        for (const auto& z : pts) {
          const auto g = model.kernel->grad_y(y, z);
          for (std::size_t i = 0; i < Dim; ++i) gsup[i] = std::max(gsup[i], std::abs(g[i]));
        }
      }
    }
    Box<Dim> next = box;
    double change = 0.0;
    for (std::size_t i = 0; i < Dim; ++i) {
      const double a2 = 2.0 * model.v0->a[i];
      const double pull = a2 * model.v0->center[i];
      const double slack = model.kernel ? model.kernel->eps * gsup[i] : 0.0;
      const double lo = (type_box.lo[i] + pull - slack) / (1.0 + a2);
      const double hi = (type_box.hi[i] + pull + slack) / (1.0 + a2);
      next.lo[i] = std::max(box.lo[i], lo);
      next.hi[i] = std::min(box.hi[i], hi);
      change = std::max({change, next.lo[i] - box.lo[i], box.hi[i] - next.hi[i]});
    }
    box = next;
    if (change < 1e-12) break;
  }
  return box;
}

namespace detail {

template <std::size_t Dim>
DiscreteMeasure<Dim> random_cloud(std::mt19937_64& rng, const Box<Dim>& box,
                                  std::size_t n) {
  // Mixture of a few Gaussian-like bumps, clipped to the box.
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t bumps = 1 + static_cast<std::size_t>(unit(rng) * 3.0);
  std::vector<Point<Dim>> centers(bumps);
  std::vector<double> widths(bumps);
  for (std::size_t b = 0; b < bumps; ++b) {
    for (std::size_t i = 0; i < Dim; ++i) {
      centers[b][i] = box.lo[i] + unit(rng) * (box.hi[i] - box.lo[i]);
    }
    widths[b] = 0.05 + 0.25 * unit(rng);
  }
  std::vector<Point<Dim>> atoms(n);
  for (auto& p : atoms) {
    const auto b = static_cast<std::size_t>(unit(rng) * static_cast<double>(bumps)) % bumps;
    for (std::size_t i = 0; i < Dim; ++i) {
      const double span = box.hi[i] - box.lo[i];
      p[i] = std::clamp(centers[b][i] + widths[b] * span * gauss(rng), box.lo[i], box.hi[i]);
    }
  }
  return DiscreteMeasure<Dim>::equal_weights(std::move(atoms));
}

}  // namespace detail

// Largest observed W1(T nu1, T nu2) / W1(nu1, nu2) over seeded random pairs
// of priors in action_box. In 2D the numerator is the same-type coupling
// bound and the denominator the max-sliced lower bound, so the estimate can
// only overstate the true ratio.
template <std::size_t Dim>
double empirical_contraction(const ExternalityModel<Dim>& model,
                             const DiscreteMeasure<Dim>& mu, int trials,
                             std::uint64_t seed,
                             const Box<Dim>& action_box = Box<Dim>::unit(),
                             std::size_t prior_atoms = 400) {
  if (trials < 1) throw std::invalid_argument("empirical_contraction: trials >= 1");
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    double denom = 0.0;
    DiscreteMeasure<Dim> nu1 = detail::random_cloud<Dim>(rng, action_box, prior_atoms);
    DiscreteMeasure<Dim> nu2 = nu1;
    for (int attempt = 0; attempt < 100 && denom <= 0.0; ++attempt) {
      nu1 = detail::random_cloud<Dim>(rng, action_box, prior_atoms);
      nu2 = detail::random_cloud<Dim>(rng, action_box, prior_atoms);
      denom = max_sliced_w1(nu1, nu2);
    }
    if (denom <= 0.0) continue;
    const auto a = apply_best_reply(model, mu, nu1);
    const auto b = apply_best_reply(model, mu, nu2);
    double num = 0.0;
    if constexpr (Dim == 1) {
      num = wasserstein1(a.nu, b.nu);
    } else {
      for (std::size_t i = 0; i < mu.size(); ++i) {
        num += mu.weight(i) * detail::distance<Dim>(a.actions[i], b.actions[i]);
      }
    }
    worst = std::max(worst, num / denom);
  }
  return worst;
}

}  // namespace cnash
