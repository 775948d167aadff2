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


// Closed-form design analysis of a honeycomb soft arm: relative flexibility
// of the planar reachable area, the spring-model load moment, buckling
// limits, the beam bending and torsion relations, and a wall thickness by
// groove depth sweep over an analytic performance surrogate.
//
// Units are N and mm inside; surrogate load moments are reported in N m.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace softarm::design {

struct ArmGeometry {
  double R = 0.0;   // minimum bend radius of the middle line, mm
  double L0 = 0.0;  // original length, mm
  double L1 = 0.0;  // maximum length, mm
  double D = 0.0;   // width, mm

  // Throws SingularGeometry when R <= D / 3 and ConfigError otherwise.
  void validate() const;
  double inner_radius() const { return R - D / 3.0; }
  double outer_radius() const { return R + D / 3.0; }
};

// f = (L1^3 / (R + D/3) - L0^3 / (R - D/3)) / (3 L0^2).
double flexibility(const ArmGeometry& geom);

// Area swept by a line of length L wrapping onto a circle of radius R,
// between the wrapped arc and the tip trajectory; closed form L^3 / (6 R).
double wrap_area(double length, double radius);

// Monte-Carlo counterpart of flexibility(): both swept areas are estimated by
// rejection sampling with common random numbers and combined as
// 2 (S1 - S0) / L0^2. Needs `samples` >= 1e4 and a wrap angle below 2 pi.
double reachable_area_mc(const ArmGeometry& geom, std::size_t samples, std::uint64_t seed);

struct SpringModel {
  double k1 = 1.0, k2 = 1.0, k3 = 1.0;  // N/mm
  double S = 0.0;                       // contact area, mm^2
  double p = 0.0;                       // pressure, MPa
  double a = 0.0;                       // half edge length, mm

  void validate() const;
};

// M = S p a (1 + 2 (k3 - k1) / (k1 + k2 + k3)), N mm.
double load_moment(const SpringModel& model);

// Euler load of a column fixed at one end: pi^2 E I / (2 L)^2.
double euler_critical(double E, double I, double L);

// Critical bending moment for flexural-torsional buckling: pi sqrt(G J Ey Iy) / L.
double flexural_torsional_critical(double G, double J, double Ey, double Iy, double L);

// E I = M rho with exactly one unknown; returns it. rho is infinite for M = 0.
struct BendingQuery {
  std::optional<double> E, I, M, rho;
};
double solve_bending(const BendingQuery& q);

// G J theta = T with exactly one unknown; returns it.
struct TorsionQuery {
  std::optional<double> G, J, theta, T;
};
double solve_torsion(const TorsionQuery& q);

// Analytic stand-in for the FEM runs over wall thickness w and groove depth
// d (both mm):
//   f(w, d) = f0 (1 + cd d) / (1 + cw (w - 2))
//   M(w, d) = m0 (1 - exp(-c1 w)) (1 + c2 (w - 2)^2 d) exp(-c3 d^2)
struct Surrogate {
  double f0 = 0.12;
  double cd = 0.25;
  double cw = 0.45;
  double m0 = 2.0;  // N m
  double c1 = 0.6;
  double c2 = 0.15;
  double c3 = 0.015;

  void validate() const;
  double flexibility(double w, double d) const;
  double load_moment(double w, double d) const;
  // Groove depth in [d_lo, d_hi] maximizing the load moment at wall thickness w.
  double peak_depth(double w, double d_lo, double d_hi) const;
};

struct Surface {
  std::vector<double> w, d;
  Eigen::MatrixXd f;                // rows follow w, columns follow d
  Eigen::MatrixXd m;                // N m
  std::vector<double> argmax_d;     // per w, best grid depth for the load moment
  std::vector<double> peak_d;       // per w, continuous maximizer over the d range
};

// Wall thickness 2 to 4.5 mm by 0.5 and groove depth 0 to 6 mm by 1.
std::vector<double> default_wall_grid();
std::vector<double> default_groove_grid();

Surface sweep(const Surrogate& s, const std::vector<double>& w, const std::vector<double>& d);

struct DesignPoint {
  double w = 0.0, d = 0.0, f = 0.0, m = 0.0;
};

// Grid points with f >= f_min and M >= m_min, row-major over (w, d).
std::vector<DesignPoint> feasible_region(const Surface& s, double f_min, double m_min);

}  // namespace softarm::design
