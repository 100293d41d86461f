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


#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "cnash/runner.hpp"

namespace cnash {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("cnash_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CNASH_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Scenario, PresetsRoundTrip) {
  for (const auto& [name, text] : preset_texts()) {
    const auto c = parse_scenario(name);
    EXPECT_EQ(c.name, name);
    EXPECT_EQ(parse_scenario(emit_scenario(c)), c) << name;
    EXPECT_EQ(parse_scenario(text), c) << name;
  }
}

TEST(Scenario, FullConfigRoundTrip) {
  const std::string text =
      "# every field\n"
      "name = custom\n"
      "dimension = 2\n"
      "solver = best_reply\n"
      "mu = atoms 0.1,0.2 0.3,0.4 0.9,0.05\n"
      "cost = quadratic\n"
      "congestion = none\n"
      "kernel = abs_power 0.5 1 1 0 3\n"
      "kernel_eps = 0.25\n"
      "v0 = quadratic 1 2 0.3 0.4\n"
      "init = mu\n"
      "action_box = unit\n"
      "n_atoms = 3\n"
      "tol = 1e-9\n"
      "max_iter = 77\n"
      "damping = 0.75\n"
      "seed = 42\n"
      "bins = 32\n"
      "out_dir = somewhere\n";
  const auto c = parse_scenario(text);
  EXPECT_EQ(c.dimension, 2);
  EXPECT_EQ(c.mu.values.size(), 6u);
  EXPECT_FALSE(c.auto_action_box);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(*c.damping, 0.75);
  EXPECT_EQ(parse_scenario(emit_scenario(c)), c);
}

TEST(Scenario, Fig2PresetValues) {
  const auto c = parse_scenario("fig2");
  EXPECT_EQ(c.solver, SolverKind::kAlgo1);
  EXPECT_EQ(c.cost.kind, CostModel::Kind::kPower);
  EXPECT_EQ(c.cost.param, 2.2);
  ASSERT_TRUE(c.congestion.has_value());
  EXPECT_TRUE(c.congestion->log);
  EXPECT_EQ(*c.kernel, (KernelSpec{2, 1.5, 1, 0, 1.2}));
}

TEST(Scenario, EmptyTextNamesRequiredFields) {
  try {
    parse_scenario("");
    FAIL() << "expected an error";
  } catch (const ScenarioParseError& e) {
    std::string fields;
    for (const auto& err : e.errors()) fields += err.field + " ";
    for (const char* f : {"name", "dimension", "solver", "cost"}) {
      EXPECT_NE(fields.find(f), std::string::npos) << f;
    }
  }
}

TEST(Scenario, IncompatibleSolverRejected) {
  const std::string text =
      "name = x\ndimension = 1\nsolver = algo1\ncost = quadratic\ncongestion = power 1\n";
  EXPECT_THROW(parse_scenario(text), ScenarioParseError);
  const std::string br =
      "name = x\ndimension = 1\nsolver = best_reply\ncost = quadratic\ncongestion = log\n";
  EXPECT_THROW(parse_scenario(br), ScenarioParseError);
}

TEST(Scenario, CollectsAllErrorsWithLines) {
  const std::string text =
      "name = bad\n"
      "dimension = 3\n"
      "solver = algo9\n"
      "cost = power 0.5\n"
      "mystery = 1\n";
  try {
    parse_scenario(text);
    FAIL() << "expected an error";
  } catch (const ScenarioParseError& e) {
    EXPECT_GE(e.errors().size(), 4u);
    for (const auto& err : e.errors()) {
      if (err.field == "dimension") EXPECT_EQ(err.line, 2);
      if (err.field == "solver") EXPECT_EQ(err.line, 3);
    }
  }
}

TEST(Runner, Fig3WritesCertifiedArtifacts) {
  auto c = parse_scenario("fig3");
  c.out_dir = scratch("fig3").string();
  const auto a = run_scenario(c);
  EXPECT_EQ(a.exit_code, kExitCertified);
  for (const auto& p : {a.json_path, a.density_csv, a.map_csv, a.trace_csv}) {
    EXPECT_TRUE(fs::exists(p)) << p;
  }
  const auto j = load_result(a.json_path);
  EXPECT_EQ(parse_scenario(j.at("config").get<std::string>()), c);
  EXPECT_EQ(j.at("seed").get<std::uint64_t>(), c.seed);
  const auto v = verify_result(j);
  EXPECT_EQ(v.exit_code, kExitCertified);
  EXPECT_TRUE(v.certification.at("passed").get<bool>());
  EXPECT_EQ(slurp(a.density_csv).substr(0, 5), "y,nu\n");
}

TEST(Runner, Fig1WritesHeatMap) {
  auto c = parse_scenario("fig1");
  c.out_dir = scratch("fig1").string();
  c.n_atoms = 2500;
  c.bins = 32;
  const auto a = run_scenario(c);
  EXPECT_EQ(a.exit_code, kExitCertified);
  EXPECT_TRUE(a.result.at("converged").get<bool>());
  std::ifstream in(a.density_csv);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 32u * 32u + 1);
  EXPECT_EQ(verify_result(load_result(a.json_path)).exit_code, kExitCertified);
}

TEST(Runner, ExitCodes) {
  auto c = parse_scenario("fig3_nonsym");
  c.out_dir = scratch("codes").string();
  c.max_iter = 2;
  EXPECT_EQ(run_scenario(c).exit_code, kExitNotConverged);
  c.max_iter = 2000;
  c.tol = 1e-2;
  EXPECT_EQ(run_scenario(c).exit_code, kExitUncertified);
}

TEST(Runner, RerunsAreByteIdentical) {
  for (const char* name : {"fig3", "closed_form"}) {
    auto c = parse_scenario(name);
    c.out_dir = scratch(std::string("rerun_") + name).string();
    const auto a = run_scenario(c);
    const std::string first[] = {slurp(a.json_path), slurp(a.density_csv), slurp(a.map_csv),
                                 slurp(a.trace_csv)};
    const auto b = run_scenario(c);
    const std::string second[] = {slurp(b.json_path), slurp(b.density_csv), slurp(b.map_csv),
                                  slurp(b.trace_csv)};
    for (int k = 0; k < 4; ++k) EXPECT_EQ(first[k], second[k]) << name << " artifact " << k;
  }
}

TEST(Runner, CompareIdenticalIsZero) {
  auto c = parse_scenario("trivial_power");
  c.out_dir = scratch("compare").string();
  const auto a = run_scenario(c);
  const auto j = load_result(a.json_path);
  const auto rep = compare_runs({j, j}, {"a", "b"});
  EXPECT_EQ(rep.max_w1, 0.0);
  EXPECT_EQ(rep.metric, "W1");
  auto two = parse_scenario("fig1");
  two.out_dir = c.out_dir;
  two.n_atoms = 400;
  const auto b = run_scenario(two);
  EXPECT_THROW(compare_runs({j, load_result(b.json_path)}, {"a", "b"}), std::invalid_argument);
}

TEST(Cli, VerbsAndExitCodes) {
  const auto dir = scratch("cli");
  EXPECT_EQ(run_cli("presets"), 0);
  EXPECT_EQ(run_cli(""), 1);
  EXPECT_EQ(run_cli("solve"), 1);
  EXPECT_EQ(run_cli("solve no_such_preset"), 1);
  {
    std::ofstream bad(dir / "bad.cfg");
    bad << "name = x\nsolver = algo1\ncost = power 2\ncongestion = power 1\n";
  }
  EXPECT_EQ(run_cli("solve " + (dir / "bad.cfg").string()), 1);
  EXPECT_EQ(run_cli("solve fig3 --out-dir " + dir.string()), 0);
  EXPECT_EQ(run_cli("solve fig3 --grid 256 --out-dir " + (dir / "coarse").string()), 0);
  EXPECT_EQ(run_cli("solve fig3_nonsym --max-iter 2 --out-dir " + dir.string()), 3);
  EXPECT_EQ(run_cli("solve fig3_nonsym --tol 1e-2 --out-dir " + dir.string()), 2);
  EXPECT_EQ(run_cli("verify " + (dir / "fig3.json").string()), 0);
  EXPECT_EQ(run_cli("compare " + (dir / "fig3.json").string() + " " +
                    (dir / "coarse" / "fig3.json").string()),
            0);
  EXPECT_EQ(run_cli("compare " + (dir / "fig3.json").string()), 1);
}

}  // namespace
}  // namespace cnash
