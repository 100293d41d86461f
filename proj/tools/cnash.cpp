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

// cnash: solve, verify and compare Cournot-Nash equilibria from scenario files.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cnash/runner.hpp"

namespace {

std::string read_source(const std::string& arg) {
  if (cnash::preset_texts().count(arg)) return arg;
  std::ifstream in(arg);
  if (!in) throw std::runtime_error("no preset or readable file named '" + arg + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct Overrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<double> damping;
  std::optional<std::size_t> grid;

  void apply(cnash::ScenarioConfig& c) const {
    if (out_dir) c.out_dir = *out_dir;
    if (seed) c.seed = *seed;
    if (tol) c.tol = *tol;
    if (max_iter) c.max_iter = *max_iter;
    if (damping) c.damping = *damping;
    if (grid) c.n_cells = *grid;
  }
};

int cmd_solve(const std::string& source, const Overrides& ov) {
  cnash::ScenarioConfig c = cnash::parse_scenario(read_source(source));
  ov.apply(c);
  const auto a = cnash::run_scenario(c);
  const auto& cert = a.result.at("certification");
  std::cout << c.name << ": converged=" << (a.result.at("converged").get<bool>() ? "yes" : "no")
            << " iterations=" << a.result.at("iterations").get<int>()
            << " exploitability=" << cert.at("exploitability").get<double>()
            << " certified=" << (cert.at("passed").get<bool>() ? "yes" : "no") << "\n";
  if (a.result.contains("contraction_certificate")) {
    const auto& cc = a.result.at("contraction_certificate");
    std::cout << "  contraction ratio=" << cc.at("ratio").get<double>()
              << " certified=" << (cc.at("certified").get<bool>() ? "yes" : "no") << "\n";
  }
  if (a.result.contains("log")) {
    for (const auto& line : a.result.at("log")) std::cout << "  " << line.get<std::string>() << "\n";
  }
  std::cout << "  wrote " << a.json_path.string() << "\n";
  return a.exit_code;
}

int cmd_verify(const std::string& path) {
  const auto j = cnash::load_result(path);
  const auto rep = cnash::verify_result(j);
  std::cout << rep.certification.dump(1) << "\n";
  return rep.exit_code;
}

int cmd_compare(const std::vector<std::string>& paths) {
  std::vector<nlohmann::json> results;
  for (const auto& p : paths) results.push_back(cnash::load_result(p));
  const auto rep = cnash::compare_runs(results, paths);
  std::cout << "metric: " << rep.metric << "\n";
  for (std::size_t a = 0; a < paths.size(); ++a) {
    for (std::size_t b = a + 1; b < paths.size(); ++b) {
      std::cout << paths[a] << "  " << paths[b] << "  " << rep.w1[a][b] << "\n";
    }
  }
  std::cout << "max: " << rep.max_w1 << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cournot-Nash equilibrium solver"};
  app.set_version_flag("--version", cnash::kVersion);
  app.require_subcommand(1);

  Overrides ov;
  std::string source;
  auto* solve = app.add_subcommand("solve", "solve a scenario file or preset");
  solve->add_option("scenario", source, "scenario file or preset name")->required();
  solve->add_option("--out-dir", ov.out_dir, "directory for artifacts");
  solve->add_option("--seed", ov.seed, "random seed");
  solve->add_option("--tol", ov.tol, "stopping tolerance");
  solve->add_option("--max-iter", ov.max_iter, "iteration cap");
  solve->add_option("--damping", ov.damping, "damping in (0, 1]");
  solve->add_option("--grid", ov.grid, "number of grid cells (1D solvers)");

  std::string result_path;
  auto* verify = app.add_subcommand("verify", "recompute the certification of a result");
  verify->add_option("result", result_path, "result JSON")->required()->check(CLI::ExistingFile);

  std::vector<std::string> compare_paths;
  auto* compare = app.add_subcommand("compare", "pairwise distances between results");
  compare->add_option("results", compare_paths, "result JSON files")
      ->required()
      ->expected(2, -1)
      ->check(CLI::ExistingFile);

  auto* presets = app.add_subcommand("presets", "list built-in scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cnash::kExitUsage;
  }

  try {
    if (*solve) return cmd_solve(source, ov);
    if (*verify) return cmd_verify(result_path);
    if (*compare) return cmd_compare(compare_paths);
    if (*presets) {
      for (const auto& [name, text] : cnash::preset_texts()) std::cout << name << "\n";
      return 0;
    }
  } catch (const cnash::ScenarioParseError& e) {
    std::cerr << "invalid scenario:\n" << e.what();
    return cnash::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cnash::kExitUsage;
  }
  return cnash::kExitUsage;
}
