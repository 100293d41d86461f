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

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cnash/measures.hpp"
#include "cnash/transport.hpp"

namespace cnash {

// Residuals attached by verification. Thresholds are absolute.
struct Certification {
  double threshold = 1e-6;
  double exploitability = 0.0;
  double duality_gap = 0.0;
  double pair_violation = 0.0;  // max (phi + phi^c - c) over the grid
  double mass_error = 0.0;
  bool monotone_map = false;
  std::optional<double> complementarity_violation;
  std::optional<double> complementarity_min_slack;
  bool passed = false;
};

// One-dimensional equilibrium: nu on the Y grid, the monotone map on the X
// grid, a Kantorovich pair and the convergence trace.
struct EquilibriumResult {
  std::string solver;
  GridMeasure1D nu = GridMeasure1D::uniform(1);
  TransportMap1D map = TransportMap1D::identity(1);
  PotentialPair potentials;
  std::optional<double> lambda;  // normalization level (power congestion)
  bool converged = false;
  int iterations = 0;
  double damping = 1.0;
  std::vector<double> trace;
  std::vector<std::string> log;
  double exploitability = 0.0;
  std::optional<Certification> certification;
};

}  // namespace cnash
