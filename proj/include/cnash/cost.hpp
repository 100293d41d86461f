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

#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>

namespace cnash {

// Transport cost c(x, y) on [0,1]^2 with its partial derivatives.
struct CostModel {
  enum class Kind { kQuadratic, kPower, kBilinear, kCustom };

  Kind kind = Kind::kCustom;
  double param = 0.0;  // exponent p for kPower, coefficient for kBilinear
  std::function<double(double, double)> c;
  std::function<double(double, double)> dcdx;
  std::function<double(double, double)> dcdy;
  bool smooth = true;

  double operator()(double x, double y) const { return c(x, y); }

  // (x - y)^2 / 2
  static CostModel quadratic() {
    CostModel m;
    m.kind = Kind::kQuadratic;
    m.param = 2.0;
    m.c = [](double x, double y) { return 0.5 * (x - y) * (x - y); };
    m.dcdx = [](double x, double y) { return x - y; };
    m.dcdy = [](double x, double y) { return y - x; };
    return m;
  }

  // |x - y|^p / p, p >= 1.
  static CostModel power(double p) {
    if (!(p >= 1.0)) {
      throw std::invalid_argument("power cost needs exponent p >= 1");
    }
    CostModel m;
    m.kind = Kind::kPower;
    m.param = p;
    m.smooth = p >= 2.0;
    m.c = [p](double x, double y) { return std::pow(std::abs(x - y), p) / p; };
    m.dcdx = [p](double x, double y) {
      const double u = x - y;
      if (u == 0.0) return 0.0;
      return std::copysign(std::pow(std::abs(u), p - 1.0), u);
    };
    m.dcdy = [p](double x, double y) {
      const double u = x - y;
      if (u == 0.0) return 0.0;
      return -std::copysign(std::pow(std::abs(u), p - 1.0), u);
    };
    return m;
  }

  // coef * x * y; coef = -1 gives the Spence-Mirrlees cost -xy.
  static CostModel bilinear(double coef = -1.0) {
    CostModel m;
    m.kind = Kind::kBilinear;
    m.param = coef;
    m.c = [coef](double x, double y) { return coef * x * y; };
    m.dcdx = [coef](double, double y) { return coef * y; };
    m.dcdy = [coef](double x, double) { return coef * x; };
    return m;
  }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind) {
      case Kind::kQuadratic:
        return "quadratic";
      case Kind::kPower:
        os << "power " << param;
        return os.str();
      case Kind::kBilinear:
        os << "bilinear " << param;
        return os.str();
      case Kind::kCustom:
        break;
    }
    return "custom";
  }
};

}  // namespace cnash
