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


#include "softarm/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <numbers>
#include <random>

#include "softarm/error.hpp"

namespace softarm::design {
namespace {

constexpr double kPi = std::numbers::pi;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be positive");
}

// Line of length L starts along +y from the origin and wraps onto a circle of
// radius R centred at (-R, 0).
struct Wrap {
  double L, R;

  double angle() const { return L / R; }

  bool contains(double x, double y) const {
    const double rx = x + R, ry = y;
    const double r2 = rx * rx + ry * ry;
    if (r2 < R * R) return false;
    const double t = std::sqrt(r2 - R * R);
    double phi = std::atan2(ry, rx) - std::atan2(t, R);
    phi = std::fmod(phi, 2.0 * kPi);
    if (phi < 0.0) phi += 2.0 * kPi;
    return phi <= angle() && t <= L - R * phi;
  }

  // Bounding box of the boundary: initial line, wrapped arc and tip path.
  Eigen::Vector4d box() const {
    double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = L;
    constexpr int kSteps = 4096;
    for (int k = 0; k <= kSteps; ++k) {
      const double phi = angle() * k / kSteps;
      const double cx = -R + R * std::cos(phi), cy = R * std::sin(phi);
      const double free = L - R * phi;
      const double tx = cx - free * std::sin(phi), ty = cy + free * std::cos(phi);
      x0 = std::min({x0, cx, tx});
      x1 = std::max({x1, cx, tx});
      y0 = std::min({y0, cy, ty});
      y1 = std::max({y1, cy, ty});
    }
    // Margin for the sampled boundary.
    const double pad = 1e-3 * L;
    return {x0 - pad, x1 + pad, y0 - pad, y1 + pad};
  }
};

}  // namespace

void ArmGeometry::validate() const {
  require_positive(L0, "original length");
  require_positive(D, "width");
  if (!(L1 >= L0)) throw ConfigError("maximum length must be at least the original length");
  if (!(R > D / 3.0)) throw SingularGeometry("bend radius must exceed a third of the width");
}

double flexibility(const ArmGeometry& g) {
  g.validate();
  return (std::pow(g.L1, 3) / g.outer_radius() - std::pow(g.L0, 3) / g.inner_radius()) /
         (3.0 * g.L0 * g.L0);
}

double wrap_area(double length, double radius) {
  require_positive(length, "wrap length");
  require_positive(radius, "wrap radius");
  return std::pow(length, 3) / (6.0 * radius);
}

double reachable_area_mc(const ArmGeometry& g, std::size_t samples, std::uint64_t seed) {
  g.validate();
  if (samples < 10000) throw ConfigError("Monte-Carlo estimate needs at least 1e4 samples");
  const Wrap outer{g.L1, g.outer_radius()}, inner{g.L0, g.inner_radius()};
  if (outer.angle() >= 2.0 * kPi || inner.angle() >= 2.0 * kPi) {
    throw ConfigError("wrap angle must stay below a full turn");
  }
  const Eigen::Vector4d bo = outer.box(), bi = inner.box();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t hit_outer = 0, hit_inner = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    const double a = u(rng), b = u(rng);
    hit_outer += outer.contains(bo[0] + a * (bo[1] - bo[0]), bo[2] + b * (bo[3] - bo[2]));
    hit_inner += inner.contains(bi[0] + a * (bi[1] - bi[0]), bi[2] + b * (bi[3] - bi[2]));
  }
  const double n = static_cast<double>(samples);
  const double s1 = (bo[1] - bo[0]) * (bo[3] - bo[2]) * hit_outer / n;
  const double s0 = (bi[1] - bi[0]) * (bi[3] - bi[2]) * hit_inner / n;
  return 2.0 * (s1 - s0) / (g.L0 * g.L0);
}

void SpringModel::validate() const {
  if (!(k1 >= 0.0 && k2 >= 0.0 && k3 >= 0.0)) throw ConfigError("spring coefficients must be >= 0");
  if (!(k1 + k2 + k3 > 0.0)) throw ConfigError("spring coefficients must not all be zero");
}

double load_moment(const SpringModel& m) {
  m.validate();
  return m.S * m.p * m.a * (1.0 + 2.0 * (m.k3 - m.k1) / (m.k1 + m.k2 + m.k3));
}

double euler_critical(double E, double I, double L) {
  require_positive(E, "Young's modulus");
  require_positive(I, "second moment");
  require_positive(L, "length");
  return kPi * kPi * E * I / ((2.0 * L) * (2.0 * L));
}

double flexural_torsional_critical(double G, double J, double Ey, double Iy, double L) {
  require_positive(G, "shear modulus");
  require_positive(J, "torsion constant");
  require_positive(Ey, "Young's modulus");
  require_positive(Iy, "second moment");
  require_positive(L, "length");
  return kPi * std::sqrt(G * J * Ey * Iy) / L;
}

namespace {

int unknowns(std::initializer_list<const std::optional<double>*> xs) {
  int n = 0;
  for (const auto* x : xs) n += !x->has_value();
  return n;
}

}  // namespace

double solve_bending(const BendingQuery& q) {
  if (unknowns({&q.E, &q.I, &q.M, &q.rho}) != 1) {
    throw ConfigError("bending relation needs exactly one unknown");
  }
  if (!q.rho) return *q.M == 0.0 ? std::numeric_limits<double>::infinity() : *q.E * *q.I / *q.M;
  if (!q.M) return *q.E * *q.I / *q.rho;
  const double m_rho = *q.M * *q.rho;
  if (!q.E) return m_rho / *q.I;
  return m_rho / *q.E;
}

double solve_torsion(const TorsionQuery& q) {
  if (unknowns({&q.G, &q.J, &q.theta, &q.T}) != 1) {
    throw ConfigError("torsion relation needs exactly one unknown");
  }
  if (!q.theta) return *q.T / (*q.G * *q.J);
  if (!q.T) return *q.G * *q.J * *q.theta;
  const double ratio = *q.T / *q.theta;
  if (!q.G) return ratio / *q.J;
  return ratio / *q.G;
}

void Surrogate::validate() const {
  for (double v : {f0, cd, cw, m0, c1, c2, c3}) require_positive(v, "surrogate constant");
}

double Surrogate::flexibility(double w, double d) const {
  return f0 * (1.0 + cd * d) / (1.0 + cw * (w - 2.0));
}

double Surrogate::load_moment(double w, double d) const {
  return m0 * (1.0 - std::exp(-c1 * w)) * (1.0 + c2 * (w - 2.0) * (w - 2.0) * d) *
         std::exp(-c3 * d * d);
}

double Surrogate::peak_depth(double w, double lo, double hi) const {
  // log M is concave in d, so golden-section search finds the maximizer.
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = load_moment(w, x1), f2 = load_moment(w, x2);
  while (b - a > 1e-10 * std::max(1.0, hi - lo)) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = load_moment(w, x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = load_moment(w, x1);
    }
  }
  const double mid = 0.5 * (a + b);
  // The maximizer may sit on the range boundary.
  double best = mid;
  for (double c : {lo, hi}) {
    if (load_moment(w, c) > load_moment(w, best)) best = c;
  }
  return best;
}

std::vector<double> default_wall_grid() {
  std::vector<double> w;
  for (int i = 0; i <= 5; ++i) w.push_back(2.0 + 0.5 * i);
  return w;
}

std::vector<double> default_groove_grid() {
  std::vector<double> d;
  for (int i = 0; i <= 6; ++i) d.push_back(i);
  return d;
}

Surface sweep(const Surrogate& s, const std::vector<double>& w, const std::vector<double>& d) {
  s.validate();
  if (w.empty() || d.empty()) throw ConfigError("sweep grids must be non-empty");
  Surface out;
  out.w = w;
  out.d = d;
  const auto rows = static_cast<Eigen::Index>(w.size()), cols = static_cast<Eigen::Index>(d.size());
  out.f.resize(rows, cols);
  out.m.resize(rows, cols);
  const auto [d_lo, d_hi] = std::minmax_element(d.begin(), d.end());
  for (Eigen::Index i = 0; i < rows; ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 0; j < cols; ++j) {
      out.f(i, j) = s.flexibility(w[i], d[j]);
      out.m(i, j) = s.load_moment(w[i], d[j]);
      if (out.m(i, j) > out.m(i, best)) best = j;
    }
    out.argmax_d.push_back(d[best]);
    out.peak_d.push_back(s.peak_depth(w[i], *d_lo, *d_hi));
  }
  return out;
}

std::vector<DesignPoint> feasible_region(const Surface& s, double f_min, double m_min) {
  if (s.f.rows() != s.m.rows() || s.f.cols() != s.m.cols() ||
      s.f.rows() != static_cast<Eigen::Index>(s.w.size()) ||
      s.f.cols() != static_cast<Eigen::Index>(s.d.size())) {
    throw DimensionMismatch("surfaces must share one grid");
  }
  std::vector<DesignPoint> out;
  for (Eigen::Index i = 0; i < s.f.rows(); ++i) {
    for (Eigen::Index j = 0; j < s.f.cols(); ++j) {
      if (s.f(i, j) >= f_min && s.m(i, j) >= m_min) {
        out.push_back({s.w[i], s.d[j], s.f(i, j), s.m(i, j)});
      }
    }
  }
  return out;
}

}  // namespace softarm::design
