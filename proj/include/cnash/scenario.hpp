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

// Scenario files: one `key = value` per line, `#` starts a comment.
//
//   name        = fig3
//   dimension   = 1                     # 1 or 2
//   solver      = algo2                 # best_reply | algo1 | algo2
//   mu          = uniform               # | density v1 v2 ... | atoms p1 p2 ...
//   cost        = power 4               # quadratic | power p | bilinear k
//   congestion  = power 1               # none | log | power alpha
//   kernel      = abs_power 3 3 2 0.5 2 # none | abs_power a b c d q
//   kernel_eps  = 1
//   v0          = none                  # | quadratic a_1..a_d c_1..c_d
//   init        = uniform               # | mu | density v1 v2 ...
//   action_box  = auto                  # auto | unit
//   n_cells = 512, n_atoms = 4096, tol = 1e-11, max_iter = 2000,
//   damping = auto, seed = 0, bins = 256, out_dir = .
//
// 2D atoms are written x,y. Density tables are piecewise constant on equal
// cells of [0,1] and resampled onto n_cells.

#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "cnash/cost.hpp"
#include "cnash/detail/common.hpp"
#include "cnash/game_model.hpp"
#include "cnash/measures.hpp"

namespace cnash {

enum class SolverKind { kBestReply, kAlgo1, kAlgo2 };

struct MuSpec {
  enum class Kind { kUniform, kDensity, kAtoms };
  Kind kind = Kind::kUniform;
  std::vector<double> values;  // density table or flattened atom coordinates
  friend bool operator==(const MuSpec&, const MuSpec&) = default;
};

struct CostSpec {
  CostModel::Kind kind = CostModel::Kind::kQuadratic;
  double param = 2.0;
  friend bool operator==(const CostSpec&, const CostSpec&) = default;
};

struct CongestionConfig {
  bool log = true;
  double alpha = 1.0;
  friend bool operator==(const CongestionConfig&, const CongestionConfig&) = default;
};

struct V0Config {
  std::vector<double> a;
  std::vector<double> center;
  friend bool operator==(const V0Config&, const V0Config&) = default;
};

struct ScenarioConfig {
  std::string name;
  int dimension = 1;
  SolverKind solver = SolverKind::kAlgo2;
  MuSpec mu;
  CostSpec cost;
  std::optional<CongestionConfig> congestion;
  std::optional<KernelSpec> kernel;
  double kernel_eps = 1.0;
  std::optional<V0Config> v0;
  MuSpec init;  // kUniform, kDensity, or kAtoms meaning "start from mu"
  bool auto_action_box = true;
  std::size_t n_cells = kDefaultCells;
  std::optional<std::size_t> n_atoms;
  double tol = 1e-11;
  int max_iter = 2000;
  std::optional<double> damping;
  std::uint64_t seed = 0;
  std::size_t bins = 256;
  std::string out_dir = ".";

  std::size_t atoms() const {
    return n_atoms.value_or(dimension == 2 ? 10000 : 4096);
  }

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

struct ConfigError {
  int line = 0;  // 0 when the error is not tied to a line
  std::string field;
  std::string message;
};

class ScenarioParseError : public std::runtime_error {
 public:
  explicit ScenarioParseError(std::vector<ConfigError> errors)
      : std::runtime_error(summarize(errors)), errors_(std::move(errors)) {}
  const std::vector<ConfigError>& errors() const { return errors_; }

 private:
  static std::string summarize(const std::vector<ConfigError>& errors) {
    std::ostringstream os;
    for (const auto& e : errors) {
      if (e.line > 0) os << "line " << e.line << ": ";
      os << e.field << ": " << e.message << "\n";
    }
    return os.str();
  }
  std::vector<ConfigError> errors_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream is{std::string(s)};
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) return std::nullopt;
  return v;
}

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
  Int v{};
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) return std::nullopt;
  return v;
}

// Shortest round-trip representation.
inline std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline const char* solver_name(SolverKind s) {
  switch (s) {
    case SolverKind::kBestReply: return "best_reply";
    case SolverKind::kAlgo1: return "algo1";
    case SolverKind::kAlgo2: return "algo2";
  }
  return "?";
}

}  // namespace detail

inline std::string emit_scenario(const ScenarioConfig& c) {
  using detail::fmt;
  std::ostringstream os;
  const auto values = [&](const std::vector<double>& v, std::size_t group) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); i += group) {
      s += ' ';
      for (std::size_t g = 0; g < group; ++g) s += (g ? "," : "") + fmt(v[i + g]);
    }
    return s;
  };
  const auto measure = [&](const MuSpec& m, bool is_init) -> std::string {
    switch (m.kind) {
      case MuSpec::Kind::kUniform: return "uniform";
      case MuSpec::Kind::kDensity: return "density" + values(m.values, 1);
      case MuSpec::Kind::kAtoms:
        if (is_init) return "mu";
        return "atoms" + values(m.values, static_cast<std::size_t>(c.dimension));
    }
    return "";
  };
  os << "name = " << c.name << "\n";
  os << "dimension = " << c.dimension << "\n";
  os << "solver = " << detail::solver_name(c.solver) << "\n";
  os << "mu = " << measure(c.mu, false) << "\n";
  switch (c.cost.kind) {
    case CostModel::Kind::kQuadratic: os << "cost = quadratic\n"; break;
    case CostModel::Kind::kPower: os << "cost = power " << fmt(c.cost.param) << "\n"; break;
    case CostModel::Kind::kBilinear: os << "cost = bilinear " << fmt(c.cost.param) << "\n"; break;
    case CostModel::Kind::kCustom: os << "cost = custom\n"; break;
  }
  if (!c.congestion) {
    os << "congestion = none\n";
  } else if (c.congestion->log) {
    os << "congestion = log\n";
  } else {
    os << "congestion = power " << fmt(c.congestion->alpha) << "\n";
  }
  if (c.kernel) {
    const auto& k = *c.kernel;
    os << "kernel = abs_power " << fmt(k.a) << " " << fmt(k.b) << " " << fmt(k.c)
       << " " << fmt(k.d) << " " << fmt(k.q) << "\n";
  } else {
    os << "kernel = none\n";
  }
  os << "kernel_eps = " << fmt(c.kernel_eps) << "\n";
  if (c.v0) {
    os << "v0 = quadratic";
    for (double a : c.v0->a) os << " " << fmt(a);
    for (double x : c.v0->center) os << " " << fmt(x);
    os << "\n";
  } else {
    os << "v0 = none\n";
  }
  os << "init = " << measure(c.init, true) << "\n";
  os << "action_box = " << (c.auto_action_box ? "auto" : "unit") << "\n";
  os << "n_cells = " << c.n_cells << "\n";
  if (c.n_atoms) os << "n_atoms = " << *c.n_atoms << "\n";
  os << "tol = " << fmt(c.tol) << "\n";
  os << "max_iter = " << c.max_iter << "\n";
  os << "damping = " << (c.damping ? fmt(*c.damping) : std::string("auto")) << "\n";
  os << "seed = " << c.seed << "\n";
  os << "bins = " << c.bins << "\n";
  os << "out_dir = " << c.out_dir << "\n";
  return os.str();
}

// Built-in scenarios, as scenario text.
inline const std::map<std::string, std::string>& preset_texts() {
  static const std::map<std::string, std::string> presets = {
      {"fig1",
       "name = fig1\ndimension = 2\nsolver = best_reply\nmu = uniform\n"
       "cost = quadratic\ncongestion = none\nkernel = abs_power 1 1 1 0 4\n"
       "kernel_eps = 0.1\nv0 = quadratic 1 1 0.6 0.7\ninit = mu\n"
       "n_atoms = 10000\ntol = 1e-10\nmax_iter = 200\n"},
      {"fig2",
       "name = fig2\ndimension = 1\nsolver = algo1\nmu = uniform\n"
       "cost = power 2.2\ncongestion = log\nkernel = abs_power 2 1.5 1 0 1.2\n"
       "kernel_eps = 1\n"},
      {"fig3",
       "name = fig3\ndimension = 1\nsolver = algo2\nmu = uniform\n"
       "cost = power 4\ncongestion = power 1\nkernel = abs_power 3 3 2 0.5 2\n"
       "kernel_eps = 1\n"},
      {"fig3_nonsym",
       "name = fig3_nonsym\ndimension = 1\nsolver = algo2\nmu = uniform\n"
       "cost = power 4\ncongestion = power 1\nkernel = abs_power 10 3 2 0.5 2\n"
       "kernel_eps = 1\n"},
      {"trivial_log",
       "name = trivial_log\ndimension = 1\nsolver = algo1\nmu = uniform\n"
       "cost = quadratic\ncongestion = log\n"},
      {"trivial_power",
       "name = trivial_power\ndimension = 1\nsolver = algo2\nmu = uniform\n"
       "cost = quadratic\ncongestion = power 1\n"},
      {"closed_form",
       "name = closed_form\ndimension = 1\nsolver = best_reply\nmu = uniform\n"
       "cost = quadratic\ncongestion = none\nv0 = quadratic 0.5 0\ninit = mu\n"
       "n_atoms = 4096\ntol = 1e-12\nmax_iter = 50\n"},
      {"monotone",
       "name = monotone\ndimension = 1\nsolver = algo2\n"
       "mu = density 1 2 3 2 1\ncost = power 4\ncongestion = power 1\n"
       "kernel = abs_power 3 3 2 0.5 2\nkernel_eps = 0.05\n"},
      {"symmetric",
       "name = symmetric\ndimension = 1\nsolver = algo2\n"
       "mu = density 2 1 1 2\ncost = quadratic\ncongestion = power 1\n"
       "kernel = abs_power 1 1 1 0 2\nkernel_eps = 1\n"},
  };
  return presets;
}

namespace detail {

inline void check_compatibility(const ScenarioConfig& c, std::vector<ConfigError>& errors) {
  const auto add = [&](std::string field, std::string msg) {
    errors.push_back({0, std::move(field), std::move(msg)});
  };
  switch (c.solver) {
    case SolverKind::kAlgo1:
      if (!c.congestion || !c.congestion->log) {
        add("congestion", "solver algo1 requires congestion = log");
      }
      break;
    case SolverKind::kAlgo2:
      if (!c.congestion || c.congestion->log) {
        add("congestion", "solver algo2 requires congestion = power alpha");
      }
      break;
    case SolverKind::kBestReply:
      if (c.congestion) {
        add("congestion", "solver best_reply requires congestion = none");
      }
      if (c.cost.kind != CostModel::Kind::kQuadratic) {
        add("cost", "solver best_reply requires cost = quadratic");
      }
      if (c.v0) {
        for (double a : c.v0->a) {
          if (!(a > 0.0)) add("v0", "best_reply needs strictly convex V0 (every a_i > 0)");
        }
      }
      break;
  }
  if (c.solver != SolverKind::kBestReply) {
    if (c.dimension != 1) add("dimension", "algo1 and algo2 are one-dimensional");
    if (c.v0) add("v0", "algo1 and algo2 do not take a base potential");
    if (c.mu.kind == MuSpec::Kind::kAtoms) {
      add("mu", "algo1 and algo2 need a grid density for mu");
    }
  } else if (c.mu.kind == MuSpec::Kind::kDensity && c.dimension == 2) {
    add("mu", "density tables are one-dimensional");
  }
  if (c.v0 && (c.v0->a.size() != static_cast<std::size_t>(c.dimension))) {
    add("v0", "quadratic V0 needs dimension coefficients and dimension centers");
  }
  if (c.mu.kind == MuSpec::Kind::kAtoms &&
      c.mu.values.size() % static_cast<std::size_t>(c.dimension) != 0) {
    add("mu", "atom coordinates do not match the dimension");
  }
}

}  // namespace detail

// Parses scenario text, or a preset name. Throws ScenarioParseError listing
// every problem found.
inline ScenarioConfig parse_scenario(std::string_view text) {
  const std::string_view trimmed = detail::trim(text);
  if (const auto it = preset_texts().find(std::string(trimmed));
      it != preset_texts().end()) {
    return parse_scenario(it->second);
  }
  ScenarioConfig c;
  std::vector<ConfigError> errors;
  std::map<std::string, int> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  const auto err = [&](const std::string& field, const std::string& msg) {
    errors.push_back({line_no, field, msg});
  };
  const auto parse_measure = [&](const std::string& field,
                                 const std::vector<std::string>& tok, bool is_init,
                                 MuSpec& out) {
    if (tok.empty()) return err(field, "missing value");
    if (tok[0] == "uniform" && tok.size() == 1) {
      out = {};
      return;
    }
    if (is_init && tok[0] == "mu" && tok.size() == 1) {
      out = {MuSpec::Kind::kAtoms, {}};
      return;
    }
    if (tok[0] == "density" && tok.size() >= 2) {
      MuSpec m{MuSpec::Kind::kDensity, {}};
      for (std::size_t i = 1; i < tok.size(); ++i) {
        const auto v = detail::parse_double(tok[i]);
        if (!v || *v < 0.0) return err(field, "bad density value '" + tok[i] + "'");
        m.values.push_back(*v);
      }
      out = std::move(m);
      return;
    }
    if (!is_init && tok[0] == "atoms" && tok.size() >= 2) {
      MuSpec m{MuSpec::Kind::kAtoms, {}};
      for (std::size_t i = 1; i < tok.size(); ++i) {
        std::string_view rest = tok[i];
        while (!rest.empty()) {
          const auto comma = rest.find(',');
          const auto part = rest.substr(0, comma);
          const auto v = detail::parse_double(part);
          if (!v || *v < 0.0 || *v > 1.0) {
            return err(field, "bad atom coordinate '" + std::string(part) + "'");
          }
          m.values.push_back(*v);
          if (comma == std::string_view::npos) break;
          rest.remove_prefix(comma + 1);
        }
      }
      out = std::move(m);
      return;
    }
    err(field, is_init ? "expected uniform | mu | density v..."
                       : "expected uniform | density v... | atoms p...");
  };

  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      err("syntax", "expected key = value");
      continue;
    }
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string value(detail::trim(line.substr(eq + 1)));
    const auto tok = detail::split_ws(value);
    if (seen.count(key)) {
      err(key, "duplicate key (first on line " + std::to_string(seen[key]) + ")");
      continue;
    }
    seen[key] = line_no;
    const auto number = [&](double& dst) {
      const auto v = detail::parse_double(value);
      if (!v) return err(key, "expected a number, got '" + value + "'");
      dst = *v;
    };
    const auto count = [&](std::size_t& dst) {
      const auto v = detail::parse_int<std::size_t>(value);
      if (!v || *v == 0) return err(key, "expected a positive integer, got '" + value + "'");
      dst = *v;
    };
    if (key == "name") {
      if (value.empty()) err(key, "empty name");
      c.name = value;
    } else if (key == "dimension") {
      if (value == "1" || value == "2") {
        c.dimension = value[0] - '0';
      } else {
        err(key, "must be 1 or 2");
      }
    } else if (key == "solver") {
      if (value == "best_reply") c.solver = SolverKind::kBestReply;
      else if (value == "algo1") c.solver = SolverKind::kAlgo1;
      else if (value == "algo2") c.solver = SolverKind::kAlgo2;
      else err(key, "expected best_reply | algo1 | algo2");
    } else if (key == "mu") {
      parse_measure(key, tok, false, c.mu);
    } else if (key == "init") {
      parse_measure(key, tok, true, c.init);
    } else if (key == "cost") {
      if (tok.size() == 1 && tok[0] == "quadratic") {
        c.cost = {CostModel::Kind::kQuadratic, 2.0};
      } else if (tok.size() == 2 && (tok[0] == "power" || tok[0] == "bilinear")) {
        const auto v = detail::parse_double(tok[1]);
        if (!v) {
          err(key, "bad parameter '" + tok[1] + "'");
        } else if (tok[0] == "power") {
          if (*v < 1.0) err(key, "power exponent must be >= 1");
          c.cost = {CostModel::Kind::kPower, *v};
        } else {
          c.cost = {CostModel::Kind::kBilinear, *v};
        }
      } else {
        err(key, "expected quadratic | power p | bilinear k");
      }
    } else if (key == "congestion") {
      if (tok.size() == 1 && tok[0] == "none") {
        c.congestion.reset();
      } else if (tok.size() == 1 && tok[0] == "log") {
        c.congestion = CongestionConfig{true, 0.0};
      } else if (tok.size() == 2 && tok[0] == "power") {
        const auto v = detail::parse_double(tok[1]);
        if (!v || *v < 1.0) err(key, "power congestion needs alpha >= 1");
        else c.congestion = CongestionConfig{false, *v};
      } else {
        err(key, "expected none | log | power alpha");
      }
    } else if (key == "kernel") {
      if (tok.size() == 1 && tok[0] == "none") {
        c.kernel.reset();
      } else if (tok.size() == 6 && tok[0] == "abs_power") {
        double p[5];
        bool ok = true;
        for (int i = 0; i < 5; ++i) {
          const auto v = detail::parse_double(tok[static_cast<std::size_t>(i) + 1]);
          if (!v) ok = false;
          else p[i] = *v;
        }
        if (!ok) err(key, "abs_power needs five numbers a b c d q");
        else if (p[4] < 1.0) err(key, "abs_power exponent q must be >= 1");
        else c.kernel = KernelSpec{p[0], p[1], p[2], p[3], p[4]};
      } else {
        err(key, "expected none | abs_power a b c d q");
      }
    } else if (key == "kernel_eps") {
      number(c.kernel_eps);
      if (c.kernel_eps < 0.0) err(key, "must be non-negative");
    } else if (key == "v0") {
      if (tok.size() == 1 && tok[0] == "none") {
        c.v0.reset();
      } else if (tok.size() >= 3 && tok[0] == "quadratic" && tok.size() % 2 == 1) {
        V0Config v;
        const std::size_t d = (tok.size() - 1) / 2;
        bool ok = true;
        for (std::size_t i = 1; i < tok.size(); ++i) {
          const auto x = detail::parse_double(tok[i]);
          if (!x) ok = false;
          else (i <= d ? v.a : v.center).push_back(*x);
        }
        if (!ok) err(key, "bad number in quadratic V0");
        else c.v0 = std::move(v);
      } else {
        err(key, "expected none | quadratic a_1..a_d c_1..c_d");
      }
    } else if (key == "action_box") {
      if (value == "auto") c.auto_action_box = true;
      else if (value == "unit") c.auto_action_box = false;
      else err(key, "expected auto | unit");
    } else if (key == "n_cells") {
      count(c.n_cells);
    } else if (key == "n_atoms") {
      std::size_t n = 0;
      count(n);
      if (n) c.n_atoms = n;
    } else if (key == "tol") {
      number(c.tol);
      if (!(c.tol > 0.0)) err(key, "must be positive");
    } else if (key == "max_iter") {
      const auto v = detail::parse_int<int>(value);
      if (!v || *v < 1) err(key, "expected a positive integer");
      else c.max_iter = *v;
    } else if (key == "damping") {
      if (value == "auto") {
        c.damping.reset();
      } else {
        double d = 0.0;
        number(d);
        if (!(d > 0.0 && d <= 1.0)) err(key, "must lie in (0, 1]");
        else c.damping = d;
      }
    } else if (key == "seed") {
      const auto v = detail::parse_int<std::uint64_t>(value);
      if (!v) err(key, "expected a non-negative integer");
      else c.seed = *v;
    } else if (key == "bins") {
      count(c.bins);
    } else if (key == "out_dir") {
      c.out_dir = value;
    } else {
      err(key, "unknown key");
    }
  }
  line_no = 0;
  for (const char* required : {"name", "dimension", "solver", "cost"}) {
    if (!seen.count(required)) err(required, "required field is missing");
  }
  if (seen.count("solver")) detail::check_compatibility(c, errors);
  if (!errors.empty()) throw ScenarioParseError(std::move(errors));
  return c;
}

inline CostModel build_cost(const CostSpec& s) {
  switch (s.kind) {
    case CostModel::Kind::kQuadratic: return CostModel::quadratic();
    case CostModel::Kind::kPower: return CostModel::power(s.param);
    case CostModel::Kind::kBilinear: return CostModel::bilinear(s.param);
    case CostModel::Kind::kCustom: break;
  }
  throw std::invalid_argument("build_cost: custom costs have no scenario form");
}

// Piecewise-constant table on equal cells resampled onto n cells by exact
// cell overlap.
inline GridMeasure1D table_density(const std::vector<double>& table, std::size_t n) {
  const double m = static_cast<double>(table.size());
  const double nd = static_cast<double>(n);
  std::vector<double> d(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = static_cast<double>(i) / nd, b = static_cast<double>(i + 1) / nd;
    double acc = 0.0;
    for (std::size_t k = 0; k < table.size(); ++k) {
      const double lo = std::max(a, static_cast<double>(k) / m);
      const double hi = std::min(b, static_cast<double>(k + 1) / m);
      if (hi > lo) acc += table[k] * (hi - lo);
    }
    d[i] = acc * nd;
  }
  return GridMeasure1D::normalized(std::move(d));
}

inline GridMeasure1D grid_mu(const ScenarioConfig& c) {
  if (c.mu.kind == MuSpec::Kind::kDensity) return table_density(c.mu.values, c.n_cells);
  return GridMeasure1D::uniform(c.n_cells);
}

template <std::size_t Dim>
DiscreteMeasure<Dim> particle_mu(const ScenarioConfig& c) {
  if (c.mu.kind == MuSpec::Kind::kAtoms) {
    std::vector<Point<Dim>> atoms(c.mu.values.size() / Dim);
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      for (std::size_t d = 0; d < Dim; ++d) atoms[i][d] = c.mu.values[i * Dim + d];
    }
    return DiscreteMeasure<Dim>::equal_weights(std::move(atoms));
  }
  if constexpr (Dim == 1) {
    if (c.mu.kind == MuSpec::Kind::kDensity) {
      // Quantile atoms: equal weights at F^{-1}((i + 1/2) / n).
      const auto F = cdf(table_density(c.mu.values, c.n_cells));
      std::vector<Point<1>> atoms(c.atoms());
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        atoms[i] = {quantile(F, (static_cast<double>(i) + 0.5) /
                                    static_cast<double>(atoms.size()))};
      }
      return DiscreteMeasure<1>::equal_weights(std::move(atoms));
    }
  }
  return DiscreteMeasure<Dim>::uniform_lattice(c.atoms());
}

template <std::size_t Dim>
ExternalityModel<Dim> build_model(const ScenarioConfig& c) {
  ExternalityModel<Dim> m;
  if (c.congestion) {
    m.congestion = c.congestion->log ? CongestionSpec::log()
                                     : CongestionSpec::power(c.congestion->alpha);
  }
  if (c.kernel) m.kernel = InteractionKernel<Dim>::abs_power(*c.kernel, c.kernel_eps);
  if (c.v0) {
    QuadraticPotential<Dim> v;
    for (std::size_t d = 0; d < Dim; ++d) {
      v.a[d] = c.v0->a[d];
      v.center[d] = c.v0->center[d];
    }
    m.v0 = v;
  }
  return m;
}

}  // namespace cnash
