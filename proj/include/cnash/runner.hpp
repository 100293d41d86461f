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

// Scenario execution and artifacts. A run writes <name>.json plus
// <name>_density.csv, <name>_map.csv and <name>_trace.csv into out_dir. All
// numbers are printed in shortest round-trip form, so reruns with the same
// config are byte-identical.

#pragma once

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "cnash/best_reply.hpp"
#include "cnash/scenario.hpp"
#include "cnash/verification.hpp"

namespace cnash {

enum ExitCode : int {
  kExitCertified = 0,
  kExitUsage = 1,
  kExitUncertified = 2,
  kExitNotConverged = 3,
};

struct RunArtifacts {
  int exit_code = kExitUsage;
  std::filesystem::path json_path;
  std::filesystem::path density_csv;
  std::filesystem::path map_csv;
  std::filesystem::path trace_csv;
  nlohmann::json result;
};

namespace detail {

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& header) : out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << header << "\n";
  }
  void row(std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
      if (!first) out_ << ',';
      out_ << fmt(v);
      first = false;
    }
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

inline double json_number(double v) {
  return std::isfinite(v) ? v : (v > 0 ? std::numeric_limits<double>::max()
                                       : std::numeric_limits<double>::lowest());
}

inline nlohmann::json certification_json(const Certification& c) {
  nlohmann::json j = {
      {"passed", c.passed},
      {"threshold", c.threshold},
      {"exploitability", c.exploitability},
      {"duality_gap", c.duality_gap},
      {"pair_violation", c.pair_violation},
      {"mass_error", c.mass_error},
      {"monotone_map", c.monotone_map},
  };
  if (c.complementarity_violation) {
    j["complementarity_violation"] = *c.complementarity_violation;
    j["complementarity_min_slack"] = json_number(*c.complementarity_min_slack);
  }
  return j;
}

inline nlohmann::json base_json(const ScenarioConfig& c) {
  return {
      {"version", kVersion},
      {"name", c.name},
      {"dimension", c.dimension},
      {"solver", solver_name(c.solver)},
      {"seed", c.seed},
      {"config", emit_scenario(c)},
  };
}

inline int exit_code_for(bool converged, bool certified) {
  if (!converged) return kExitNotConverged;
  return certified ? kExitCertified : kExitUncertified;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(1) << "\n";
}

inline RunArtifacts prepare_paths(const ScenarioConfig& c) {
  std::filesystem::create_directories(c.out_dir);
  const std::filesystem::path dir(c.out_dir);
  RunArtifacts a;
  a.json_path = dir / (c.name + ".json");
  a.density_csv = dir / (c.name + "_density.csv");
  a.map_csv = dir / (c.name + "_map.csv");
  a.trace_csv = dir / (c.name + "_trace.csv");
  return a;
}

inline void write_trace(const std::filesystem::path& path, const std::vector<double>& trace) {
  CsvWriter w(path, "iter,step");
  for (std::size_t k = 0; k < trace.size(); ++k) {
    w.row({static_cast<double>(k + 1), trace[k]});
  }
}

inline Problem1D problem_1d(const ScenarioConfig& c) {
  return {build_cost(c.cost), build_model<1>(c), grid_mu(c)};
}

inline RunArtifacts run_grid(const ScenarioConfig& c) {
  const Problem1D p = problem_1d(c);
  GridMeasure1D start = GridMeasure1D::uniform(c.n_cells);
  if (c.init.kind == MuSpec::Kind::kDensity) start = table_density(c.init.values, c.n_cells);
  if (c.init.kind == MuSpec::Kind::kAtoms) start = p.mu;
  SolverOptions opt{c.tol, c.max_iter, c.damping};
  const EquilibriumResult r = solve_from(p, start, opt);
  const Certification cert = certify(r, p);

  RunArtifacts a = prepare_paths(c);
  nlohmann::json j = base_json(c);
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["damping"] = r.damping;
  j["log"] = r.log;
  j["n_cells"] = c.n_cells;
  j["nu"] = std::vector<double>(r.nu.density().begin(), r.nu.density().end());
  j["map"] = std::vector<double>(r.map.values().begin(), r.map.values().end());
  j["potentials"] = {{"phi", r.potentials.phi}, {"phi_c", r.potentials.phi_c}};
  if (r.lambda) j["lambda"] = *r.lambda;
  j["exploitability"] = cert.exploitability;
  j["certification"] = certification_json(cert);
  j["trace"] = r.trace;
  j["selection"] = "left-continuous generalized inverse on flat CDF segments";
  write_json(a.json_path, j);

  {
    CsvWriter w(a.density_csv, "y,nu");
    for (std::size_t i = 0; i < r.nu.n_cells(); ++i) w.row({r.nu.midpoint(i), r.nu[i]});
  }
  {
    CsvWriter w(a.map_csv, "x,T");
    for (std::size_t i = 0; i <= r.map.n_cells(); ++i) w.row({r.map.node(i), r.map[i]});
  }
  write_trace(a.trace_csv, r.trace);
  a.exit_code = exit_code_for(r.converged, cert.passed);
  a.result = std::move(j);
  return a;
}

template <std::size_t Dim>
DiscreteMeasure<Dim> particle_start(const ScenarioConfig& c, const DiscreteMeasure<Dim>& mu) {
  if (c.init.kind == MuSpec::Kind::kAtoms) return mu;
  if constexpr (Dim == 1) {
    if (c.init.kind == MuSpec::Kind::kDensity) {
      ScenarioConfig tmp = c;
      tmp.mu = c.init;
      return particle_mu<1>(tmp);
    }
  }
  return DiscreteMeasure<Dim>::uniform_lattice(mu.size());
}

// L-infinity norm of mu's density: table maximum for density tables, 1 for
// the uniform law, infinite for atoms.
inline double mu_sup(const ScenarioConfig& c) {
  if (c.mu.kind == MuSpec::Kind::kAtoms) return std::numeric_limits<double>::infinity();
  if (c.mu.kind == MuSpec::Kind::kDensity) return table_density(c.mu.values, c.mu.values.size()).sup();
  return 1.0;
}

template <std::size_t Dim>
struct ParticleCheck {
  double exploitability = 0.0;
  double lambda = 0.0;
  double mass_error = 0.0;
  bool passed = false;
};

template <std::size_t Dim>
ParticleCheck<Dim> check_particles(const ScenarioConfig& c, const BestReplyResult<Dim>& r,
                                   const DiscreteMeasure<Dim>& mu,
                                   const ExternalityModel<Dim>& model,
                                   const Box<Dim>& box, bool certificate_ok) {
  ParticleCheck<Dim> out;
  out.lambda = convexity_lower_bound(model, box);
  out.exploitability = exploitability_bound(r, model, mu, out.lambda);
  double mass = 0.0;
  for (double w : r.nu.weights()) mass += w;
  out.mass_error = std::abs(mass - 1.0);
  out.passed = r.converged && r.boundary_hits == 0 &&
               out.exploitability < kCertificationThreshold && out.mass_error < 1e-8 &&
               certificate_ok;
  (void)c;
  return out;
}

template <std::size_t Dim>
RunArtifacts run_particles(const ScenarioConfig& c) {
  const auto mu = particle_mu<Dim>(c);
  const auto model = build_model<Dim>(c);
  const auto nu0 = particle_start<Dim>(c, mu);
  Box<Dim> box = Box<Dim>::unit();
  std::optional<ContractionCertificate> cert;
  if (model.v0) {
    if (c.auto_action_box) box = invariant_action_box(model);
    cert = contraction_certificate(model, mu_sup(c), box);
  }
  const auto r = iterate_best_reply(model, mu, nu0, c.tol, c.max_iter);
  const auto chk = check_particles(c, r, mu, model, box, !cert || cert->certified);

  RunArtifacts a = prepare_paths(c);
  nlohmann::json j = base_json(c);
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["trace"] = r.w1_history;
  j["step_metric"] = Dim == 1 ? "W1" : "sliced W1, 64 fixed directions";
  j["boundary_hits"] = r.boundary_hits;
  j["max_inversion_residual"] = r.max_inversion_residual;
  j["exploitability"] = chk.exploitability;
  j["action_box"] = {{"lo", std::vector<double>(box.lo.begin(), box.lo.end())},
                     {"hi", std::vector<double>(box.hi.begin(), box.hi.end())}};
  if (cert) {
    j["contraction_certificate"] = {
        {"lambda", cert->lambda}, {"M", cert->M},           {"C", cert->C},
        {"mu_sup", json_number(cert->mu_sup)},             {"ratio", json_number(cert->ratio)},
        {"certified", cert->certified},
    };
  }
  j["certification"] = {
      {"passed", chk.passed},
      {"threshold", kCertificationThreshold},
      {"exploitability", chk.exploitability},
      {"convexity_lower_bound", chk.lambda},
      {"mass_error", chk.mass_error},
  };
  nlohmann::json actions = nlohmann::json::array();
  for (const auto& y : r.actions) actions.push_back(std::vector<double>(y.begin(), y.end()));
  j["actions"] = std::move(actions);

  {
    if constexpr (Dim == 1) {
      const auto binned = bin_particles(r.nu, c.bins);
      j["nu"] = std::vector<double>(binned.density().begin(), binned.density().end());
      CsvWriter w(a.density_csv, "y,nu");
      for (std::size_t i = 0; i < binned.n_cells(); ++i) w.row({binned.midpoint(i), binned[i]});
    } else {
      const auto binned = bin_particles_2d(r.nu, c.bins);
      j["nu"] = binned;
      CsvWriter w(a.density_csv, "y1,y2,nu");
      const double b = static_cast<double>(c.bins);
      for (std::size_t i = 0; i < c.bins; ++i) {
        for (std::size_t k = 0; k < c.bins; ++k) {
          w.row({(static_cast<double>(i) + 0.5) / b, (static_cast<double>(k) + 0.5) / b,
                 binned[i * c.bins + k]});
        }
      }
    }
    j["bins"] = c.bins;
  }
  {
    if constexpr (Dim == 1) {
      CsvWriter w(a.map_csv, "x,T");
      for (std::size_t i = 0; i < mu.size(); ++i) w.row({mu.atom(i)[0], r.actions[i][0]});
    } else {
      CsvWriter w(a.map_csv, "x1,x2,T1,T2");
      for (std::size_t i = 0; i < mu.size(); ++i) {
        w.row({mu.atom(i)[0], mu.atom(i)[1], r.actions[i][0], r.actions[i][1]});
      }
    }
  }
  write_trace(a.trace_csv, r.w1_history);
  write_json(a.json_path, j);
  a.exit_code = exit_code_for(r.converged, chk.passed);
  a.result = std::move(j);
  return a;
}

}  // namespace detail

// Solves the scenario and writes its artifacts; returns the exit status.
inline RunArtifacts run_scenario(const ScenarioConfig& c) {
  if (c.solver != SolverKind::kBestReply) return detail::run_grid(c);
  if (c.dimension == 2) return detail::run_particles<2>(c);
  return detail::run_particles<1>(c);
}

inline nlohmann::json load_result(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return nlohmann::json::parse(in);
}

struct VerifyReport {
  int exit_code = kExitUsage;
  nlohmann::json certification;
};

namespace detail {

template <std::size_t Dim>
BestReplyResult<Dim> particles_from_json(const nlohmann::json& j,
                                         const DiscreteMeasure<Dim>& mu) {
  const auto& acts = j.at("actions");
  if (acts.size() != mu.size()) {
    throw std::runtime_error("verify: action count differs from the scenario's mu");
  }
  std::vector<Point<Dim>> actions(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const auto v = acts[i].get<std::vector<double>>();
    if (v.size() != Dim) throw std::runtime_error("verify: action has wrong dimension");
    for (std::size_t d = 0; d < Dim; ++d) actions[i][d] = v[d];
  }
  std::size_t k = 0;
  auto nu = pushforward_particles<Dim>([&](const Point<Dim>&) { return actions[k++]; }, mu);
  BestReplyResult<Dim> r{std::move(nu), std::move(actions), {}, j.at("converged").get<bool>(),
                         j.at("iterations").get<int>(), j.at("boundary_hits").get<std::size_t>(),
                         0.0};
  return r;
}

template <std::size_t Dim>
VerifyReport verify_particles(const ScenarioConfig& c, const nlohmann::json& j) {
  const auto mu = particle_mu<Dim>(c);
  const auto model = build_model<Dim>(c);
  const auto r = particles_from_json<Dim>(j, mu);
  Box<Dim> box = Box<Dim>::unit();
  bool cert_ok = true;
  if (model.v0) {
    if (c.auto_action_box) box = invariant_action_box(model);
    cert_ok = contraction_certificate(model, mu_sup(c), box).certified;
  }
  const auto chk = check_particles(c, r, mu, model, box, cert_ok);
  VerifyReport rep;
  rep.certification = {
      {"passed", chk.passed},
      {"threshold", kCertificationThreshold},
      {"exploitability", chk.exploitability},
      {"convexity_lower_bound", chk.lambda},
      {"mass_error", chk.mass_error},
  };
  rep.exit_code = exit_code_for(r.converged, chk.passed);
  return rep;
}

}  // namespace detail

// Recomputes the certification block of a stored result from its own data.
inline VerifyReport verify_result(const nlohmann::json& j) {
  const ScenarioConfig c = parse_scenario(j.at("config").get<std::string>());
  if (c.solver == SolverKind::kBestReply) {
    return c.dimension == 2 ? detail::verify_particles<2>(c, j)
                            : detail::verify_particles<1>(c, j);
  }
  const Problem1D p = detail::problem_1d(c);
  EquilibriumResult r;
  r.solver = j.at("solver").get<std::string>();
  r.nu = GridMeasure1D(j.at("nu").get<std::vector<double>>());
  r.map = TransportMap1D(j.at("map").get<std::vector<double>>());
  r.potentials.phi = j.at("potentials").at("phi").get<std::vector<double>>();
  r.potentials.phi_c = j.at("potentials").at("phi_c").get<std::vector<double>>();
  r.converged = j.at("converged").get<bool>();
  if (r.nu.n_cells() != p.mu.n_cells() || r.map.n_cells() != p.mu.n_cells()) {
    throw std::runtime_error("verify: stored grids differ from the scenario's n_cells");
  }
  const Certification cert = certify(r, p);
  return {detail::exit_code_for(r.converged, cert.passed), detail::certification_json(cert)};
}

struct CompareReport {
  std::vector<std::string> names;
  std::vector<std::vector<double>> w1;  // pairwise distances
  double max_w1 = 0.0;
  std::string metric;
};

// Pairwise distances between the action marginals of stored results: exact
// W1 in 1D (grid or particles), sliced W1 between particle clouds in 2D.
inline CompareReport compare_runs(const std::vector<nlohmann::json>& results,
                                  const std::vector<std::string>& names) {
  if (results.size() < 2) throw std::invalid_argument("compare: need at least two results");
  const int dim = results.front().at("dimension").get<int>();
  for (const auto& r : results) {
    if (r.at("dimension").get<int>() != dim) {
      throw std::invalid_argument("compare: results have different dimensions");
    }
  }
  CompareReport rep;
  rep.names = names;
  const std::size_t n = results.size();
  rep.w1.assign(n, std::vector<double>(n, 0.0));
  if (dim == 1) {
    rep.metric = "W1";
    // Grid results as densities, particle results as atoms.
    std::vector<std::optional<GridMeasure1D>> grids(n);
    std::vector<std::optional<DiscreteMeasure<1>>> clouds(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& r = results[i];
      if (r.contains("actions")) {
        std::vector<Point<1>> atoms;
        for (const auto& a : r.at("actions")) atoms.push_back({a.at(0).get<double>()});
        clouds[i] = DiscreteMeasure<1>::equal_weights(std::move(atoms));
      } else {
        grids[i] = GridMeasure1D(r.at("nu").get<std::vector<double>>());
      }
    }
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        double d = 0.0;
        if (grids[a] && grids[b]) d = wasserstein1(*grids[a], *grids[b]);
        else if (clouds[a] && clouds[b]) d = wasserstein1(*clouds[a], *clouds[b]);
        else if (clouds[a]) d = wasserstein1(*clouds[a], *grids[b]);
        else d = wasserstein1(*grids[a], *clouds[b]);
        rep.w1[a][b] = rep.w1[b][a] = d;
        rep.max_w1 = std::max(rep.max_w1, d);
      }
    }
  } else {
    rep.metric = "sliced W1";
    std::vector<DiscreteMeasure<2>> clouds;
    for (const auto& r : results) {
      std::vector<Point<2>> atoms;
      for (const auto& a : r.at("actions")) atoms.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
      clouds.push_back(DiscreteMeasure<2>::equal_weights(std::move(atoms)));
    }
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        const double d = sliced_w1(clouds[a], clouds[b]);
        rep.w1[a][b] = rep.w1[b][a] = d;
        rep.max_w1 = std::max(rep.max_w1, d);
      }
    }
  }
  return rep;
}

}  // namespace cnash
