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

#include <string>

#include "cnash/scenario.hpp"
#include "cnash/verification.hpp"

namespace cnash::testing {

inline Problem1D preset_problem(const std::string& name, std::size_t n_cells = 512) {
  ScenarioConfig c = parse_scenario(name);
  c.n_cells = n_cells;
  return Problem1D{build_cost(c.cost), build_model<1>(c), grid_mu(c)};
}

inline const InteractionKernel<1>* kernel_of(const Problem1D& p) {
  return p.model.kernel ? &*p.model.kernel : nullptr;
}

inline EquilibriumResult solve_preset(const Problem1D& p, const SolverOptions& opt = {}) {
  return solve_from(p, GridMeasure1D::uniform(p.mu.n_cells()), opt);
}

}  // namespace cnash::testing
