// Copyright 2026 The softarm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "softarm/actuation.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>

namespace softarm::actuation {

Generalized airbag_to_generalized(const Airbags& p) {
  return {-p[0] + p[1] - p[2] + p[3], p[0] + p[1] - p[2] - p[3],
          p[0] + p[1] + p[2] + p[3]};
}

Airbags generalized_to_airbag_unclipped(const Generalized& g) {
  return {(g.z - g.x + g.y) / 4.0, (g.z + g.x + g.y) / 4.0,
          (g.z - g.x - g.y) / 4.0, (g.z + g.x - g.y) / 4.0};
}

Generalized project_spatial(const Generalized& g, double pressure_max,
                            bool* clipped) {
  // Feasible iff |x| + |y| <= min(z, 4 p_max - z).
  Generalized out = g;
  bool changed = false;
  const double z_max = 4.0 * pressure_max;
  if (out.z < 0.0 || out.z > z_max) {
    out.z = std::clamp(out.z, 0.0, z_max);
    changed = true;
  }
  const double budget = std::min(out.z, z_max - out.z);
  const double bend = std::abs(out.x) + std::abs(out.y);
  if (bend > budget) {
    const double scale = bend > 0.0 ? budget / bend : 0.0;
    out.x *= scale;
    out.y *= scale;
    changed = true;
  }
  if (clipped) *clipped = changed;
  return out;
}

Generalized project_planar(const Generalized& g, double pressure_max,
                           bool* clipped) {
  Generalized out{g.x, 0.0, g.z};
  bool changed = g.y != 0.0;
  const double z_max = 2.0 * pressure_max;
  if (out.z < 0.0 || out.z > z_max) {
    out.z = std::clamp(out.z, 0.0, z_max);
    changed = true;
  }
  const double budget = std::min(out.z, z_max - out.z);
  if (std::abs(out.x) > budget) {
    out.x = std::copysign(budget, out.x);
    changed = true;
  }
  if (clipped) *clipped = changed;
  return out;
}

AirbagConversion generalized_to_airbag(const Generalized& g,
                                       double pressure_max) {
  AirbagConversion out;
  const Generalized feasible = project_spatial(g, pressure_max, &out.clipped);
  out.pressures = generalized_to_airbag_unclipped(feasible);
  // Rounding can leave -1e-17 style residue at the boundary.
  for (double& p : out.pressures) p = std::clamp(p, 0.0, pressure_max);
  return out;
}

std::vector<HalfSpace> feasible_halfspaces(double pressure_max, bool planar) {
  const double z_max = (planar ? 2.0 : 4.0) * pressure_max;
  std::vector<HalfSpace> out;
  const std::vector<double> ys = planar ? std::vector<double>{0.0}
                                       : std::vector<double>{-1.0, 1.0};
  for (double sx : {-1.0, 1.0}) {
    for (double sy : ys) {
      out.push_back({{sx, sy, -1.0}, 0.0});
      out.push_back({{sx, sy, 1.0}, z_max});
    }
  }
  return out;
}

std::array<double, 3> project_halfspaces(const std::array<double, 3>& point,
                                         const std::vector<HalfSpace>& halves) {
  std::array<double, 3> x = point;
  std::vector<std::array<double, 3>> inc(halves.size(), {0.0, 0.0, 0.0});
  for (int sweep = 0; sweep < 2000; ++sweep) {
    double moved = 0.0;
    for (std::size_t i = 0; i < halves.size(); ++i) {
      const HalfSpace& h = halves[i];
      std::array<double, 3> y{}, nx{};
      double dot = 0.0, norm2 = 0.0;
      for (int k = 0; k < 3; ++k) {
        y[k] = x[k] + inc[i][k];
        dot += h.a[k] * y[k];
        norm2 += h.a[k] * h.a[k];
      }
      const double t = dot > h.b ? (dot - h.b) / norm2 : 0.0;
      for (int k = 0; k < 3; ++k) {
        nx[k] = y[k] - t * h.a[k];
        inc[i][k] = y[k] - nx[k];
        moved += std::abs(nx[k] - x[k]);
      }
      x = nx;
    }
    if (moved < 1e-15) break;
  }
  return x;
}

Generalized nearest_feasible(const Generalized& g, double pressure_max,
                             bool planar) {
  const auto p = project_halfspaces({g.x, planar ? 0.0 : g.y, g.z},
                                    feasible_halfspaces(pressure_max, planar));
  return {p[0], planar ? 0.0 : p[1], p[2]};
}

Generalized planar_to_generalized(const PlanarPair& p) {
  return {p.right - p.left, 0.0, p.left + p.right};
}

PlanarPair generalized_to_planar(const Generalized& g) {
  return {(g.z - g.x) / 2.0, (g.z + g.x) / 2.0};
}

}  // namespace softarm::actuation
