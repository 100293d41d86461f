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


// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cnash/runner.hpp"

namespace {

using namespace cnash;
namespace fs = std::filesystem;

// Pinned tolerances.
constexpr double kTrivialExploitability = 1e-8;
constexpr double kTrivialSeconds = 1.0;
constexpr std::size_t kClosedFormAtoms = 4096;
constexpr int kClosedFormIterations = 2;
constexpr int kContractionPairs = 20;
constexpr double kContractionSlack = 0.05;
constexpr double kFig1Seconds = 10.0;
constexpr std::size_t kFig1Atoms = 10000;
constexpr double kUniquenessW1 = 1e-5;
constexpr double kPresetExploitability = 1e-6;
constexpr double kMassError = 1e-8;
constexpr double kPresetSeconds = 10.0;
constexpr int kOracleInstances = 50;
constexpr double kOracleTolerance = 1e-12;
constexpr double kPairViolation = 1e-8;
constexpr double kDualityGap = 1e-6;
constexpr double kDerivativeRelError = 1e-5;
constexpr int kDerivativePoints = 100;
constexpr double kFirstVariationRelError = 1e-3;
constexpr double kFirstVariationStep = 1e-4;
constexpr int kPerturbations = 100;
constexpr double kPerturbationL1 = 1e-3;
constexpr double kVariationalSlack = 1e-8;
constexpr double kRefinementW1 = 4.0 / 512;
constexpr std::size_t kCells = 512;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Problem1D problem(const std::string& preset, std::size_t n = kCells) {
  ScenarioConfig c = parse_scenario(preset);
  c.n_cells = n;
  return {build_cost(c.cost), build_model<1>(c), grid_mu(c)};
}

EquilibriumResult solve(const Problem1D& p, const GridMeasure1D* start = nullptr) {
  return solve_from(p, start ? *start : GridMeasure1D::uniform(p.mu.n_cells()));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

GridMeasure1D random_density(std::mt19937_64& rng, std::size_t n, double floor) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> d(n);
  for (auto& v : d) v = floor + u(rng);
  return GridMeasure1D::normalized(d);
}

void trivial_fixed_points(Outcome& o) {
  auto t0 = std::chrono::steady_clock::now();
  const auto lp = problem("trivial_log");
  const auto lr = solve(lp);
  const double lt = seconds_since(t0);
  double map_err = 0.0;
  for (std::size_t j = 0; j <= kCells; ++j) map_err = std::max(map_err, std::abs(lr.map[j] - lr.map.node(j)));
  t0 = std::chrono::steady_clock::now();
  const auto pp = problem("trivial_power");
  const auto pr = solve(pp);
  const double pt = seconds_since(t0);
  double nu_err = 0.0;
  for (double v : pr.nu.density()) nu_err = std::max(nu_err, std::abs(v - 1.0));
  o.detail << "algo1 |T-id|=" << map_err << " expl=" << lr.exploitability << " t=" << lt
           << "s; algo2 |nu-1|=" << nu_err << " expl=" << pr.exploitability << " t=" << pt << "s";
  o.require(lr.converged && pr.converged, "converged");
  o.require(map_err < 1e-10, "T = id");
  o.require(nu_err < 1e-10, "nu uniform");
  o.require(lr.exploitability < kTrivialExploitability && pr.exploitability < kTrivialExploitability,
            "exploitability");
  o.require(lt < kTrivialSeconds && pt < kTrivialSeconds, "runtime");
}

void closed_form_best_reply(Outcome& o) {
  ExternalityModel<1> m;
  m.v0 = QuadraticPotential<1>{{0.5}, {0.0}};  // lambda0 = 1
  const auto mu = DiscreteMeasure<1>::uniform_lattice(kClosedFormAtoms);
  const auto r = iterate_best_reply(m, mu, mu, 1e-12, 50);
  const double w1 = wasserstein1(r.nu, GridMeasure1D({2.0, 0.0}));
  const double bound = 2.0 / std::sqrt(static_cast<double>(kClosedFormAtoms));
  o.detail << "iterations=" << r.iterations << " W1=" << w1 << " bound=" << bound;
  o.require(r.converged && r.iterations <= kClosedFormIterations, "iterations");
  o.require(w1 < bound, "W1");
}

void contraction(Outcome& o) {
  ExternalityModel<2> m;
  m.kernel = InteractionKernel<2>::abs_power({1, 1, 1, 0, 4}, 0.1);
  m.v0 = QuadraticPotential<2>{{1.0, 1.0}, {0.6, 0.7}};
  const auto t0 = std::chrono::steady_clock::now();
  const auto mu = DiscreteMeasure<2>::uniform_lattice(kFig1Atoms);
  const auto box = invariant_action_box(m);
  const auto cert = contraction_certificate(m, 1.0, box);
  const double emp = empirical_contraction(m, mu, kContractionPairs, 2024, box);
  const auto r = iterate_best_reply(m, mu, mu, 1e-10, 200);
  const double t = seconds_since(t0);
  bool geometric = r.w1_history.size() >= 2;
  double worst_rate = 0.0;
  for (std::size_t k = 1; k < r.w1_history.size(); ++k) {
    if (r.w1_history[k - 1] < 1e-13) break;
    const double rate = r.w1_history[k] / r.w1_history[k - 1];
    worst_rate = std::max(worst_rate, rate);
    geometric = geometric && rate < 1.0;
  }
  o.detail << "ratio=" << cert.ratio << " empirical=" << emp << " iterations=" << r.iterations
           << " worst step rate=" << worst_rate << " t=" << t << "s";
  o.require(cert.certified && cert.ratio < 1.0, "certificate");
  o.require(emp <= cert.ratio + kContractionSlack, "empirical <= ratio + 0.05");
  o.require(r.converged && geometric, "geometric decay");
  o.require(t < kFig1Seconds, "runtime");
}

void uniqueness(Outcome& o) {
  const auto p = problem("monotone");
  std::mt19937_64 rng(5);
  std::vector<GridMeasure1D> starts{GridMeasure1D::uniform(kCells), random_density(rng, kCells, 0.0),
                                    GridMeasure1D::from_function(kCells, [](double y) { return 0.1 + y * y; })};
  const auto rep = uniqueness_probe(p, starts);
  o.detail << "margin=" << rep.margin << " max W1=" << rep.max_w1 << " label=" << rep.label;
  o.require(rep.margin > 0.0, "margin > 0");
  o.require(rep.conclusive, "all starts converged");
  o.require(rep.max_w1 < kUniquenessW1, "pairwise W1");
}

void preset_anchors(Outcome& o) {
  for (const char* name : {"fig2", "fig3", "fig3_nonsym"}) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto p = problem(name);
    const auto r = solve(p);
    const double t = seconds_since(t0);
    const double mass = std::abs(r.nu.mass() - 1.0);
    o.detail << name << ": expl=" << r.exploitability << " mass err=" << mass << " t=" << t << "s; ";
    o.require(r.converged, std::string(name) + " converged");
    o.require(r.exploitability < kPresetExploitability, std::string(name) + " exploitability");
    o.require(mass < kMassError, std::string(name) + " mass");
    o.require(purity_check(r), std::string(name) + " monotone map");
    o.require(t < kPresetSeconds, std::string(name) + " runtime");
    if (std::string(name) == "fig2") {
      double lo = INFINITY;
      for (double v : r.nu.density()) lo = std::min(lo, v);
      o.detail << "fig2 min nu=" << lo << "; ";
      o.require(lo > 0.0, "fig2 nu > 0");
    }
  }
}

void oracle_equivalence(Outcome& o) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_w1 = 0.0, worst_cost = 0.0;
  const auto abs_cost = CostModel::power(1.0);
  const auto quad = CostModel::quadratic();
  for (int t = 0; t < kOracleInstances; ++t) {
    const std::size_t n = 1 + static_cast<std::size_t>(t) % kOracleMaxAtoms;
    std::vector<Point<1>> a(n), b(n);
    for (auto& p : a) p = {u(rng)};
    for (auto& p : b) p = {u(rng)};
    const auto ma = DiscreteMeasure<1>::equal_weights(a);
    const auto mb = DiscreteMeasure<1>::equal_weights(b);
    worst_w1 = std::max(worst_w1, std::abs(wasserstein1(ma, mb) - discrete_ot_oracle(ma, mb, abs_cost).second));
    worst_cost = std::max(worst_cost, std::abs(transport_cost(monotone_plan(ma, mb), quad) -
                                               discrete_ot_oracle(ma, mb, quad).second));
  }
  o.detail << "max |W1 - oracle|=" << worst_w1 << " max |cost - oracle|=" << worst_cost;
  o.require(worst_w1 <= kOracleTolerance, "W1");
  o.require(worst_cost <= kOracleTolerance, "transport cost");
}

void duality(Outcome& o) {
  double worst_pair = -INFINITY, worst_gap = 0.0, worst_comp = 0.0;
  for (const char* name : {"fig2", "fig3", "fig3_nonsym", "trivial_log", "trivial_power", "monotone",
                           "symmetric"}) {
    const auto p = problem(name);
    const auto r = solve(p);
    if (!r.converged) {
      o.require(false, std::string(name) + " converged");
      continue;
    }
    const auto c = certify(r, p);
    worst_pair = std::max(worst_pair, c.pair_violation);
    worst_gap = std::max(worst_gap, std::abs(c.duality_gap));
    o.require(c.pair_violation <= kPairViolation, std::string(name) + " pair");
    o.require(std::abs(c.duality_gap) < kDualityGap, std::string(name) + " gap");
    if (!p.model.congestion->is_log()) {
      const auto rep = complementarity_report(r.nu, p.model, p.cost, p.mu, p.model.congestion->alpha());
      worst_comp = std::max(worst_comp, rep.max_violation);
      o.require(rep.passed, std::string(name) + " complementarity");
    }
  }
  o.detail << "max(phi+phi^c-c)=" << worst_pair << " max|gap|=" << worst_gap
           << " max complementarity violation=" << worst_comp;
}

void derivatives(Outcome& o) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double h = 1e-5;
  double worst = 0.0;
  for (const auto& c : {CostModel::quadratic(), CostModel::power(2.2), CostModel::power(4.0),
                        CostModel::bilinear(-1.0)}) {
    for (int k = 0; k < kDerivativePoints; ++k) {
      const double x = u(rng), y = u(rng);
      const double fx = (c(x + h, y) - c(x - h, y)) / (2 * h);
      const double fy = (c(x, y + h) - c(x, y - h)) / (2 * h);
      worst = std::max(worst, std::abs(c.dcdx(x, y) - fx) / std::max(std::abs(fx), 1e-3));
      worst = std::max(worst, std::abs(c.dcdy(x, y) - fy) / std::max(std::abs(fy), 1e-3));
    }
  }
  Model1D m;
  m.congestion = CongestionSpec::power(1.0);
  m.kernel = InteractionKernel<1>::abs_power({1, 1, 1, 0, 2}, 1.0);
  double worst_fv = 0.0;
  for (int k = 0; k < 20; ++k) {
    const auto nu = random_density(rng, 256, 0.05), rho = random_density(rng, 256, 0.05);
    std::vector<double> mix(256);
    for (std::size_t j = 0; j < 256; ++j) mix[j] = (1 - kFirstVariationStep) * nu[j] + kFirstVariationStep * rho[j];
    const double fd = (energy(m, GridMeasure1D::normalized(mix)) - energy(m, nu)) / kFirstVariationStep;
    const auto V = externality_on_cells(m, nu);
    double exact = 0.0;
    for (std::size_t j = 0; j < 256; ++j) exact += V[j] * (rho[j] - nu[j]) / 256.0;
    worst_fv = std::max(worst_fv, std::abs(fd - exact) / std::abs(exact));
  }
  o.detail << "max derivative rel err=" << worst << " max first-variation rel err=" << worst_fv;
  o.require(worst < kDerivativeRelError, "cost derivatives");
  o.require(worst_fv < kFirstVariationRelError, "first variation");
}

void variational(Outcome& o) {
  const auto p = problem("symmetric");
  const auto r = solve(p);
  o.require(r.converged, "converged");
  const double j_star = total_cost_J(p.model, p.cost, p.mu, r.nu);
  std::mt19937_64 rng(9);
  double worst = INFINITY;
  for (int k = 0; k < kPerturbations; ++k) {
    const auto rho = random_density(rng, kCells, 0.0);
    double l1 = 0.0;
    for (std::size_t j = 0; j < kCells; ++j) l1 += std::abs(rho[j] - r.nu[j]) / kCells;
    const double t = kPerturbationL1 / l1;
    std::vector<double> d(kCells);
    for (std::size_t j = 0; j < kCells; ++j) d[j] = r.nu[j] + t * (rho[j] - r.nu[j]);
    const double j_pert = total_cost_J(p.model, p.cost, p.mu, GridMeasure1D::normalized(d));
    worst = std::min(worst, j_pert - j_star);
  }
  o.detail << "J*=" << j_star << " min(J_perturbed - J*)=" << worst;
  o.require(worst >= -kVariationalSlack, "J* <= J_perturbed + 1e-8");
}

void grid_stability(Outcome& o) {
  const auto a = solve(problem("fig2", 512));
  const auto b = solve(problem("fig2", 1024));
  const double w1 = wasserstein1(a.nu, b.nu);
  o.detail << "W1(N=512, N=1024)=" << w1;
  o.require(a.converged && b.converged, "converged");
  o.require(w1 < kRefinementW1, "refinement");
  const auto dir = fs::temp_directory_path() / "cnash_acceptance_rerun";
  bool identical = true;
  for (const char* name : {"fig2", "fig1"}) {
    auto c = parse_scenario(name);
    c.out_dir = dir.string();
    if (c.dimension == 2) c.n_atoms = 2500;
    const auto x = run_scenario(c);
    const std::string first = slurp(x.json_path) + slurp(x.density_csv) + slurp(x.map_csv) + slurp(x.trace_csv);
    const auto y = run_scenario(c);
    const std::string second = slurp(y.json_path) + slurp(y.density_csv) + slurp(y.map_csv) + slurp(y.trace_csv);
    identical = identical && first == second && !first.empty();
  }
  fs::remove_all(dir);
  o.detail << " byte-identical reruns=" << (identical ? "yes" : "no");
  o.require(identical, "byte-identical reruns");
}

}  // namespace

int main() {
  struct Criterion {
    const char* title;
    std::function<void(Outcome&)> run;
  };
  const std::vector<Criterion> criteria = {
      {"trivial fixed points", trivial_fixed_points},
      {"closed-form best reply", closed_form_best_reply},
      {"contraction certificate", contraction},
      {"uniqueness under monotonicity", uniqueness},
      {"preset regression anchors", preset_anchors},
      {"OT oracle equivalence", oracle_equivalence},
      {"duality and complementarity", duality},
      {"derivative and first-variation checks", derivatives},
      {"variational consistency", variational},
      {"grid stability and determinism", grid_stability},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i].run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    failed += o.pass ? 0 : 1;
    std::printf("criterion %2zu %s: %s  %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].title,
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
