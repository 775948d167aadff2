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

// Airbag <-> generalized actuation algebra shared by the plant and the
// estimated-Jacobian controller.
//
// Spatial segments carry four airbag groups. Their generalized actuations
//   p_sx = -p1 + p2 - p3 + p4
//   p_sy =  p1 + p2 - p3 - p4
//   p_sz =  p1 + p2 + p3 + p4
// invert uniquely on the manifold p1 + p4 = p2 + p3.
//
// Planar segments carry (p_l, p_r): p_sx = p_r - p_l, p_sz = p_l + p_r.

#pragma once

#include <array>
#include <vector>

namespace softarm::actuation {

struct Generalized {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

using Airbags = std::array<double, 4>;

Generalized airbag_to_generalized(const Airbags& p);

struct AirbagConversion {
  Airbags pressures{};
  bool clipped = false;  // the request left the feasible set and was projected
};

// Projects onto the feasible set (all pressures in [0, pressure_max]) by
// clamping p_sz and shrinking the bend components, so the result always
// satisfies p1 + p4 = p2 + p3.
AirbagConversion generalized_to_airbag(const Generalized& g,
                                       double pressure_max);

// Raw inverse without projection.
Airbags generalized_to_airbag_unclipped(const Generalized& g);

// Feasible-set projection for spatial and planar segments.
Generalized project_spatial(const Generalized& g, double pressure_max,
                            bool* clipped = nullptr);
Generalized project_planar(const Generalized& g, double pressure_max,
                           bool* clipped = nullptr);

// Half-space a . (x, y, z) <= b.
struct HalfSpace {
  std::array<double, 3> a{};
  double b = 0.0;
};

// Faces of the feasible set |p_sx| + |p_sy| <= min(p_sz, z_max - p_sz);
// planar segments drop p_sy.
std::vector<HalfSpace> feasible_halfspaces(double pressure_max, bool planar);

// Euclidean projection onto an intersection of half-spaces (Dykstra).
std::array<double, 3> project_halfspaces(const std::array<double, 3>& point,
                                         const std::vector<HalfSpace>& halves);

// Closest feasible point in the Euclidean metric of (p_sx, p_sy, p_sz).
// Planar segments ignore p_sy.
Generalized nearest_feasible(const Generalized& g, double pressure_max,
                             bool planar);

struct PlanarPair {
  double left = 0.0;
  double right = 0.0;
};

Generalized planar_to_generalized(const PlanarPair& p);
PlanarPair generalized_to_planar(const Generalized& g);

}  // namespace softarm::actuation
