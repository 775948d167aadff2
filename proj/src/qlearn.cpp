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


#include "softarm/qlearn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "softarm/error.hpp"

namespace softarm::qlearn {
namespace {

using json = nlohmann::json;
using Vec2 = Eigen::Vector2d;

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kEps = 1e-9;
constexpr int kFormatVersion = 1;

double wrap_angle(double a) {
  a = std::remainder(a, kTwoPi);
  return a <= -std::numbers::pi ? a + kTwoPi : a;
}

// Point of the partition plane at radius r and clockwise angle theta.
Vec2 polar_point(double r, double theta) {
  return {-r * std::sin(theta), -r * std::cos(theta)};
}

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm();
}

bool segments_meet(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  return point_segment_distance(a, c, d) <= kEps || point_segment_distance(b, c, d) <= kEps ||
         point_segment_distance(c, a, b) <= kEps || point_segment_distance(d, a, b) <= kEps;
}

// Closed point-in-polygon test (even-odd rule plus boundary distance).
bool in_polygon(const Vec2& p, const Polygon& poly) {
  const std::size_t n = poly.size();
  if (n == 0) return false;
  if (n == 1) return (p - poly[0]).norm() <= kEps;
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if (point_segment_distance(p, a, b) <= kEps) return true;
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x) inside = !inside;
    }
  }
  return n >= 3 && inside;
}

// Angular distance from `a` to the closed interval [lo, hi] on the circle.
double angle_gap(double a, double lo, double hi) {
  const double off = std::abs(std::remainder(a - 0.5 * (lo + hi), kTwoPi));
  return std::max(0.0, off - 0.5 * (hi - lo));
}

struct Cell {
  double r0, r1, t0, t1;
};

bool point_in_cell(const Vec2& p, const Cell& c) {
  const double r = p.norm();
  if (r < c.r0 - kEps || r > c.r1 + kEps) return false;
  if (r <= kEps) return c.r0 <= kEps;
  return angle_gap(clockwise_angle(p), c.t0, c.t1) * r <= kEps;
}

// Whether segment ab touches the arc of radius r spanning [t0, t1].
bool segment_meets_arc(const Vec2& a, const Vec2& b, double r, double t0, double t1) {
  if (r <= 0.0) return false;
  const Vec2 d = b - a;
  const double qa = d.squaredNorm();
  const double qb = 2.0 * a.dot(d);
  const double qc = a.squaredNorm() - r * r;
  if (qa <= 0.0) {
    return std::abs(a.norm() - r) <= kEps && angle_gap(clockwise_angle(a), t0, t1) * r <= kEps;
  }
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0) return false;
  const double sq = std::sqrt(disc);
  for (double t : {(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)}) {
    if (t < -kEps || t > 1.0 + kEps) continue;
    const Vec2 p = a + std::clamp(t, 0.0, 1.0) * d;
    if (angle_gap(clockwise_angle(p), t0, t1) * r <= kEps) return true;
  }
  return false;
}

bool cell_meets(const Cell& c, const Polygon& poly) {
  for (const Vec2& v : poly) {
    if (point_in_cell(v, c)) return true;
  }
  const Vec2 corners[4] = {polar_point(c.r0, c.t0), polar_point(c.r0, c.t1),
                           polar_point(c.r1, c.t0), polar_point(c.r1, c.t1)};
  for (const Vec2& k : corners) {
    if (in_polygon(k, poly)) return true;
  }
  const std::size_t n = poly.size();
  if (n < 2) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    if (n == 2 && i == 1) break;
    if (segments_meet(a, b, corners[0], corners[2]) || segments_meet(a, b, corners[1], corners[3]) ||
        segment_meets_arc(a, b, c.r0, c.t0, c.t1) || segment_meets_arc(a, b, c.r1, c.t0, c.t1)) {
      return true;
    }
  }
  return false;
}

Cell cell_of(const Partition& p, int ring, int sector) {
  return {p.ring_edge(ring), p.ring_edge(ring + 1), p.sector_edge(sector),
          p.sector_edge(sector + 1)};
}

// Distance range [lo, hi] of the polygon from the origin.
std::pair<double, double> radial_range(const Polygon& poly) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const Vec2& v : poly) hi = std::max(hi, v.norm());
  if (in_polygon(Vec2::Zero(), poly)) return {0.0, hi};
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    lo = std::min(lo, point_segment_distance(Vec2::Zero(), poly[i], poly[(i + 1) % n]));
  }
  return {lo, hi};
}

json partition_json(const Partition& p) {
  return {{"rings", p.rings},
          {"sectors", p.sectors},
          {"l_max", p.l_max},
          {"spacing", p.spacing == Spacing::kEven ? "even" : "geometric"},
          {"ratio", p.ratio},
          {"orientation_bins", p.orientation_bins},
          {"orientation_width", p.orientation_width}};
}

Partition partition_from_json(const json& j) {
  Partition p;
  p.rings = j.at("rings").get<int>();
  p.sectors = j.at("sectors").get<int>();
  p.l_max = j.at("l_max").get<double>();
  const std::string spacing = j.at("spacing").get<std::string>();
  if (spacing != "even" && spacing != "geometric") throw ConfigError("unknown ring spacing");
  p.spacing = spacing == "even" ? Spacing::kEven : Spacing::kGeometric;
  p.ratio = j.at("ratio").get<double>();
  p.orientation_bins = j.at("orientation_bins").get<int>();
  p.orientation_width = j.at("orientation_width").get<double>();
  p.validate();
  return p;
}

}  // namespace

void Partition::validate() const {
  if (rings < 1 || sectors < 1) throw ConfigError("partition needs at least one interval");
  if (!(l_max > 0.0)) throw ConfigError("partition radius must be positive");
  if (spacing == Spacing::kGeometric && !(ratio > 1.0)) {
    throw ConfigError("geometric ring ratio must exceed 1");
  }
  if (orientation_bins < 1 || orientation_bins % 2 == 0) {
    throw ConfigError("orientation bins must be a positive odd count");
  }
  if (orientation_bins > 1 && !(orientation_width > 0.0)) {
    throw ConfigError("orientation bin width must be positive");
  }
}

double Partition::ring_edge(int i) const {
  if (i <= 0) return 0.0;
  if (i >= rings) return l_max;
  if (spacing == Spacing::kEven) return l_max * i / rings;
  return l_max * (std::pow(ratio, i) - 1.0) / (std::pow(ratio, rings) - 1.0);
}

double Partition::sector_edge(int j) const {
  if (j <= 0) return 0.0;
  if (j >= sectors) return kTwoPi;
  return kTwoPi * j / sectors;
}

int Partition::id(int ring, int sector, int obin) const {
  if (ring < 0 || ring >= rings || sector < 0 || sector >= sectors || obin < 0 ||
      obin >= orientation_bins) {
    throw OutOfPartition("state index outside the partition");
  }
  return (ring * sectors + sector) * orientation_bins + obin;
}

std::vector<int> Partition::neighbors(int s) const {
  const int i = ring_of(s), j = sector_of(s), o = obin_of(s);
  std::vector<int> out;
  for (int di = -1; di <= 1; ++di) {
    for (int dj = -1; dj <= 1; ++dj) {
      if (di == 0 && dj == 0) continue;
      const int ni = i + di;
      if (ni < 0 || ni >= rings) continue;
      const int nj = ((j + dj) % sectors + sectors) % sectors;
      const int n = id(ni, nj, o);
      if (n != s && std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
    }
  }
  return out;
}

int Partition::orientation_bin(double heading_error) const {
  if (orientation_bins == 1) return 0;
  const int half = orientation_bins / 2;
  const double w = orientation_width;
  const int k = std::min(half, static_cast<int>(std::floor((std::abs(heading_error) + w) / (2.0 * w))));
  return heading_error >= 0.0 ? half + k : half - k;
}

double clockwise_angle(const Eigen::Vector2d& d) {
  if (d.x() == 0.0 && d.y() == 0.0) return 0.0;
  double a = std::atan2(-d.x(), -d.y());
  if (a < 0.0) a += kTwoPi;
  return a >= kTwoPi ? 0.0 : a;
}

State get_state(const pcc::Pose2D& tip, const pcc::Pose2D& target,
                const Partition& p) {
  State s;
  s.d = Vec2(target.x - tip.x, target.y - tip.y);
  s.distance = s.d.norm();
  if (!(s.distance <= p.l_max)) {
    std::ostringstream msg;
    msg << "tip-to-target distance " << s.distance << " mm exceeds l_max " << p.l_max;
    throw OutOfPartition(msg.str());
  }
  s.angle = clockwise_angle(s.d);
  s.heading_error = wrap_angle(target.theta - tip.theta);
  s.ring = p.rings - 1;
  for (int i = 1; i < p.rings; ++i) {
    if (s.distance < p.ring_edge(i)) {
      s.ring = i - 1;
      break;
    }
  }
  s.sector = std::min(p.sectors - 1, static_cast<int>(std::floor(s.angle / (kTwoPi / p.sectors))));
  // Guard the floor against edges that round below the exact multiple.
  while (s.sector + 1 < p.sectors && s.angle >= p.sector_edge(s.sector + 1)) ++s.sector;
  while (s.sector > 0 && s.angle < p.sector_edge(s.sector)) --s.sector;
  s.obin = p.orientation_bin(s.heading_error);
  s.id = p.id(s.ring, s.sector, s.obin);
  return s;
}

std::vector<Action> make_actions(std::size_t segments, bool include_shortening) {
  std::vector<Action> out;
  for (std::size_t i = 0; i < segments; ++i) {
    out.push_back({i, 1, 1});
    out.push_back({i, 1, -1});
    out.push_back({i, -1, 1});
    if (include_shortening) out.push_back({i, -1, -1});
  }
  return out;
}

plant::PressureCommand apply_action(const plant::ArmPlant& plant,
                                    const plant::PressureCommand& cmd,
                                    const Action& action, double increment) {
  if (plant.dims() != plant::Dimensionality::kPlanar) {
    throw ConfigError("Q-learning actions are defined for planar plants");
  }
  if (action.segment >= plant.segments()) throw DimensionMismatch("action segment out of range");
  plant::PressureCommand out = cmd;
  const double pmax = plant.spec(action.segment).pressure_max;
  out.at(action.segment, 0) =
      std::clamp(cmd.at(action.segment, 0) + action.left * increment, 0.0, pmax);
  out.at(action.segment, 1) =
      std::clamp(cmd.at(action.segment, 1) + action.right * increment, 0.0, pmax);
  return out;
}

std::vector<char> usable_actions(const plant::ArmPlant& plant, const plant::PressureCommand& cmd,
                                 const std::vector<Action>& actions, double increment) {
  std::vector<char> out(actions.size(), 0);
  for (std::size_t a = 0; a < actions.size(); ++a) {
    const plant::PressureCommand next = apply_action(plant, cmd, actions[a], increment);
    const std::size_t i = actions[a].segment;
    out[a] = next.at(i, 0) != cmd.at(i, 0) || next.at(i, 1) != cmd.at(i, 1);
  }
  return out;
}

QTable::QTable(Partition p, std::vector<Action> a, double initial)
    : partition(p), actions(std::move(a)) {
  partition.validate();
  if (actions.empty()) throw ConfigError("Q-table needs at least one action");
  q = Eigen::MatrixXd::Constant(partition.states(), static_cast<Eigen::Index>(actions.size()),
                                initial);
  marked.assign(static_cast<std::size_t>(partition.states()), 0);
}

int QTable::greedy(int s) const {
  int best = 0;
  for (Eigen::Index a = 1; a < q.cols(); ++a) {
    if (q(s, a) > q(s, best)) best = static_cast<int>(a);
  }
  return best;
}

int QTable::greedy(int s, const std::vector<char>& usable) const {
  int best = -1;
  for (Eigen::Index a = 0; a < q.cols(); ++a) {
    if (!usable[static_cast<std::size_t>(a)]) continue;
    if (best < 0 || q(s, a) > q(s, best)) best = static_cast<int>(a);
  }
  return best < 0 ? greedy(s) : best;
}

std::vector<int> QTable::policy() const {
  std::vector<int> out(static_cast<std::size_t>(q.rows()));
  for (Eigen::Index s = 0; s < q.rows(); ++s) out[static_cast<std::size_t>(s)] = greedy(static_cast<int>(s));
  return out;
}

std::string QTable::to_json() const {
  json j;
  j["format"] = "softarm-qtable";
  j["version"] = kFormatVersion;
  j["partition"] = partition_json(partition);
  json acts = json::array();
  for (const Action& a : actions) acts.push_back({a.segment, a.left, a.right});
  j["actions"] = acts;
  json rows = json::array();
  for (Eigen::Index s = 0; s < q.rows(); ++s) {
    std::vector<double> row(q.cols());
    for (Eigen::Index a = 0; a < q.cols(); ++a) row[static_cast<std::size_t>(a)] = q(s, a);
    rows.push_back(row);
  }
  j["q"] = rows;
  std::vector<int> marks(marked.begin(), marked.end());
  j["marked"] = marks;
  return j.dump();
}

QTable QTable::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("Q-table is not valid JSON: ") + e.what());
  }
  if (j.value("format", "") != "softarm-qtable" || j.value("version", 0) != kFormatVersion) {
    throw ConfigError("not a supported Q-table file");
  }
  try {
    std::vector<Action> acts;
    for (const auto& a : j.at("actions")) {
      acts.push_back({a.at(0).get<std::size_t>(), a.at(1).get<int>(), a.at(2).get<int>()});
    }
    QTable t(partition_from_json(j.at("partition")), acts);
    const auto& rows = j.at("q");
    const auto& marks = j.at("marked");
    if (rows.size() != static_cast<std::size_t>(t.q.rows()) ||
        marks.size() != static_cast<std::size_t>(t.q.rows())) {
      throw DimensionMismatch("Q-table rows do not match the partition");
    }
    for (std::size_t s = 0; s < rows.size(); ++s) {
      if (rows[s].size() != acts.size()) throw DimensionMismatch("Q-table row width mismatch");
      for (std::size_t a = 0; a < acts.size(); ++a) {
        t.q(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) = rows[s][a].get<double>();
      }
      t.marked[s] = marks[s].get<int>() != 0;
      t.marked_count += t.marked[s];
    }
    return t;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed Q-table: ") + e.what());
  }
}

void QTable::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << to_json() << '\n';
}

QTable QTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

double reward(double distance, double next_distance) { return distance - next_distance; }

double reward(const State& before, const State& after, double orientation_weight) {
  return reward(before.distance, after.distance) +
         orientation_weight * (std::abs(before.heading_error) - std::abs(after.heading_error));
}

void q_update(QTable& t, int s, int a, double r, int s_next, double alpha, double gamma) {
  t.q(s, a) += alpha * (r + gamma * t.max_value(s_next) - t.q(s, a));
}

bool mark_and_propagate(QTable& t, int s) {
  const bool fresh = !t.marked[static_cast<std::size_t>(s)];
  if (fresh) {
    t.marked[static_cast<std::size_t>(s)] = 1;
    ++t.marked_count;
  }
  for (int u : t.partition.neighbors(s)) {
    if (t.marked[static_cast<std::size_t>(u)]) continue;
    Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(t.q.cols());
    int count = 0;
    for (int v : t.partition.neighbors(u)) {
      if (!t.marked[static_cast<std::size_t>(v)]) continue;
      sum += t.q.row(v);
      ++count;
    }
    if (count > 0) t.q.row(u) = sum / count;
  }
  return fresh;
}

Polygon convex_hull(std::vector<Eigen::Vector2d> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  Polygon hull(2 * pts.size());
  std::size_t k = 0;
  for (const Vec2& p : pts) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    const Vec2& p = pts[i];
    while (k >= lower && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

namespace {

// Occupancy grid with a one-cell empty border.
struct Grid {
  int nx = 0, ny = 0;
  std::vector<char> c;
  char& at(int i, int j) { return c[static_cast<std::size_t>(j * nx + i)]; }
  char at(int i, int j) const { return c[static_cast<std::size_t>(j * nx + i)]; }
  bool in(int i, int j) const { return i >= 0 && j >= 0 && i < nx && j < ny; }
};

Grid morph(const Grid& g, int r, bool dilate) {
  Grid out = g;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      bool any = false, all = true;
      for (int dj = -r; dj <= r; ++dj) {
        for (int di = -r; di <= r; ++di) {
          const bool v = g.in(i + di, j + dj) && g.at(i + di, j + dj);
          any = any || v;
          all = all && v;
        }
      }
      out.at(i, j) = dilate ? any : all;
    }
  }
  return out;
}

// Labels 4-connected regions where cells equal `value`, seeded at (i, j).
std::vector<std::pair<int, int>> flood(const Grid& g, int i, int j, char value,
                                       std::vector<char>& seen) {
  std::vector<std::pair<int, int>> out, stack{{i, j}};
  seen[static_cast<std::size_t>(j * g.nx + i)] = 1;
  while (!stack.empty()) {
    const auto [x, y] = stack.back();
    stack.pop_back();
    out.push_back({x, y});
    const int nb[4][2] = {{x + 1, y}, {x - 1, y}, {x, y + 1}, {x, y - 1}};
    for (const auto& n : nb) {
      if (!g.in(n[0], n[1]) || g.at(n[0], n[1]) != value) continue;
      char& s = seen[static_cast<std::size_t>(n[1] * g.nx + n[0])];
      if (s) continue;
      s = 1;
      stack.push_back({n[0], n[1]});
    }
  }
  return out;
}

// Keeps the largest region, fills its holes and removes diagonal pinches.
void regularize(Grid& g) {
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<char> seen(g.c.size(), 0);
    std::vector<std::pair<int, int>> best;
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        if (!g.at(i, j) || seen[static_cast<std::size_t>(j * g.nx + i)]) continue;
        auto region = flood(g, i, j, 1, seen);
        if (region.size() > best.size()) best = std::move(region);
      }
    }
    Grid filled = g;
    std::fill(filled.c.begin(), filled.c.end(), 1);
    for (auto& v : g.c) v = 0;
    for (const auto& [i, j] : best) g.at(i, j) = 1;
    std::vector<char> outside(g.c.size(), 0);
    for (const auto& [i, j] : flood(g, 0, 0, 0, outside)) filled.at(i, j) = 0;
    if (filled.c != g.c) changed = true;
    g = filled;
    for (int j = 0; j + 1 < g.ny; ++j) {
      for (int i = 0; i + 1 < g.nx; ++i) {
        const char a = g.at(i, j), b = g.at(i + 1, j), c = g.at(i, j + 1), d = g.at(i + 1, j + 1);
        if ((a && d && !b && !c) || (b && c && !a && !d)) {
          g.at(i, j) = g.at(i + 1, j) = g.at(i, j + 1) = g.at(i + 1, j + 1) = 1;
          changed = true;
        }
      }
    }
  }
}

void simplify(const Polygon& pts, std::size_t lo, std::size_t hi, double tol,
              std::vector<char>& keep) {
  if (hi <= lo + 1) return;
  double worst = -1.0;
  std::size_t at = lo;
  for (std::size_t k = lo + 1; k < hi; ++k) {
    const double d = point_segment_distance(pts[k], pts[lo], pts[hi % pts.size()]);
    if (d > worst) {
      worst = d;
      at = k;
    }
  }
  if (worst <= tol) return;
  keep[at] = 1;
  simplify(pts, lo, at, tol, keep);
  simplify(pts, at, hi, tol, keep);
}

}  // namespace

Polygon outline(const std::vector<Eigen::Vector2d>& points, double cell, int closing) {
  if (points.empty()) throw ConfigError("outline needs at least one point");
  if (!(cell > 0.0) || closing < 0) throw ConfigError("outline grid must be positive");
  Vec2 lo = points[0], hi = points[0];
  for (const Vec2& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const int pad = closing + 2;
  const Vec2 origin = lo - Vec2::Constant(pad * cell);
  Grid g;
  g.nx = static_cast<int>(std::floor((hi.x() - lo.x()) / cell)) + 2 * pad + 1;
  g.ny = static_cast<int>(std::floor((hi.y() - lo.y()) / cell)) + 2 * pad + 1;
  g.c.assign(static_cast<std::size_t>(g.nx * g.ny), 0);
  for (const Vec2& p : points) {
    g.at(static_cast<int>(std::floor((p.x() - origin.x()) / cell)),
         static_cast<int>(std::floor((p.y() - origin.y()) / cell))) = 1;
  }
  if (closing > 0) g = morph(morph(g, closing, true), closing, false);
  regularize(g);
  // Directed boundary edges with the region on the left; vertex key j * (nx + 1) + i.
  const int w = g.nx + 1;
  std::vector<int> next(static_cast<std::size_t>(w * (g.ny + 1)), -1);
  auto filled = [&](int i, int j) { return g.in(i, j) && g.at(i, j); };
  int start = -1;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (!g.at(i, j)) continue;
      if (!filled(i, j - 1)) next[static_cast<std::size_t>(j * w + i)] = j * w + i + 1;
      if (!filled(i + 1, j)) next[static_cast<std::size_t>(j * w + i + 1)] = (j + 1) * w + i + 1;
      if (!filled(i, j + 1)) next[static_cast<std::size_t>((j + 1) * w + i + 1)] = (j + 1) * w + i;
      if (!filled(i - 1, j)) next[static_cast<std::size_t>((j + 1) * w + i)] = j * w + i;
      if (start < 0) start = j * w + i;
    }
  }
  Polygon loop;
  for (int v = start;;) {
    loop.emplace_back(origin.x() + (v % w) * cell, origin.y() + (v / w) * cell);
    v = next[static_cast<std::size_t>(v)];
    if (v == start || v < 0) break;
  }
  std::vector<char> keep(loop.size(), 0);
  keep[0] = 1;
  simplify(loop, 0, loop.size(), 0.5 * cell, keep);
  Polygon out;
  for (std::size_t k = 0; k < loop.size(); ++k) {
    if (keep[k]) out.push_back(loop[k]);
  }
  return out;
}

bool polygon_contains(const Polygon& polygon, const Eigen::Vector2d& point) {
  return in_polygon(point, polygon);
}

bool cell_meets_polygon(const Partition& p, int ring, int sector, const Polygon& poly) {
  return cell_meets(cell_of(p, ring, sector), poly);
}

Availability refine_states(const Polygon& workspace, const Partition& p, double step) {
  p.validate();
  if (workspace.empty()) throw ConfigError("workspace polygon is empty");
  if (!(step > 0.0)) throw ConfigError("sweep step must be positive");
  std::vector<Vec2> centres;
  const std::size_t n = workspace.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = workspace[i];
    const Vec2& b = workspace[(i + 1) % n];
    const int pieces = std::max(1, static_cast<int>(std::ceil((b - a).norm() / step)));
    for (int k = 0; k < pieces; ++k) centres.push_back(a + (b - a) * (double(k) / pieces));
    if (n == 2 && i == 1) break;
  }
  std::vector<char> cells(static_cast<std::size_t>(p.rings * p.sectors), 0);
  int found = 0;
  Polygon shifted(n);
  for (const Vec2& c : centres) {
    // Tip positions w seen from the target c: D = c - w.
    for (std::size_t k = 0; k < n; ++k) shifted[k] = c - workspace[k];
    const auto [lo, hi] = radial_range(shifted);
    for (int i = 0; i < p.rings; ++i) {
      if (p.ring_edge(i + 1) < lo - kEps || p.ring_edge(i) > hi + kEps) continue;
      for (int j = 0; j < p.sectors; ++j) {
        char& flag = cells[static_cast<std::size_t>(i * p.sectors + j)];
        if (flag) continue;
        if (cell_meets_polygon(p, i, j, shifted)) {
          flag = 1;
          ++found;
        }
      }
    }
    if (found == p.rings * p.sectors) break;
  }
  Availability out;
  out.available.assign(static_cast<std::size_t>(p.states()), 0);
  for (int i = 0; i < p.rings; ++i) {
    for (int j = 0; j < p.sectors; ++j) {
      if (!cells[static_cast<std::size_t>(i * p.sectors + j)]) continue;
      for (int o = 0; o < p.orientation_bins; ++o) {
        out.available[static_cast<std::size_t>(p.id(i, j, o))] = 1;
        ++out.count;
      }
    }
  }
  out.proportion = static_cast<double>(out.count) / p.states();
  return out;
}

Workspace Workspace::sample(const plant::ArmPlant& plant, int count, std::uint64_t seed,
                            int outline_samples, double cell) {
  if (plant.dims() != plant::Dimensionality::kPlanar) {
    throw ConfigError("Q-learning workspace sampling needs a planar plant");
  }
  if (count < 1 || outline_samples < 0) throw ConfigError("workspace sampling needs poses");
  std::mt19937_64 rng(seed);
  auto tip_of = [&](const plant::PressureCommand& cmd) {
    return pcc::forward_2d(plant.planar_config(plant.settle(cmd, {}))).back();
  };
  auto random_tip = [&] {
    plant::PressureCommand cmd = plant.zero_command();
    for (std::size_t i = 0; i < plant.segments(); ++i) {
      std::uniform_real_distribution<double> u(0.0, plant.spec(i).pressure_max);
      cmd.at(i, 0) = u(rng);
      cmd.at(i, 1) = u(rng);
    }
    return tip_of(cmd);
  };
  Workspace ws;
  std::vector<Vec2> pts;
  for (int k = 0; k < count; ++k) {
    ws.poses.push_back(random_tip());
    pts.emplace_back(ws.poses.back().x, ws.poses.back().y);
  }
  for (int k = 0; k < outline_samples; ++k) {
    const pcc::Pose2D t = random_tip();
    pts.emplace_back(t.x, t.y);
  }
  // Channel-bound vertices reach the extremes the random draws miss.
  const std::size_t channels = 2 * plant.segments();
  if (channels <= 12) {
    for (std::size_t mask = 0; mask < (std::size_t{1} << channels); ++mask) {
      plant::PressureCommand cmd = plant.zero_command();
      for (std::size_t c = 0; c < channels; ++c) {
        cmd.at(c / 2, c % 2) = (mask >> c) & 1 ? plant.spec(c / 2).pressure_max : 0.0;
      }
      const pcc::Pose2D t = tip_of(cmd);
      pts.emplace_back(t.x, t.y);
    }
  }
  ws.boundary = outline(pts, cell);
  return ws;
}

const pcc::Pose2D& Workspace::draw(std::mt19937_64& rng) const {
  if (poses.empty()) throw ConfigError("workspace has no poses");
  std::uniform_int_distribution<std::size_t> pick(0, poses.size() - 1);
  return poses[pick(rng)];
}

void TrainParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in (0, 1]");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in [0, 1)");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must be in [0, 1]");
  if (patience < 1) throw ConfigError("patience must be at least 1");
  if (!(marked_target > 0.0 && marked_target <= 1.0)) {
    throw ConfigError("marked proportion target must be in (0, 1]");
  }
  if (!(threshold > 0.0) || !(increment > 0.0)) {
    throw ConfigError("threshold and increment must be positive");
  }
  if (max_outer < 1 || max_steps < 1 || virtual_targets < 0) {
    throw ConfigError("iteration caps must be positive");
  }
}

QLearner::QLearner(Partition partition, std::vector<Action> actions, TrainParams params,
                   std::uint64_t seed)
    : table_(partition, std::move(actions)), params_(params), rng_(seed) {
  params_.validate();
  visited_.assign(static_cast<std::size_t>(table_.partition.states()), 0);
}

double QLearner::marked_proportion() const {
  if (available_.count == 0) return 0.0;
  int marked = 0;
  for (std::size_t s = 0; s < table_.marked.size(); ++s) {
    marked += table_.marked[s] && available_.available[s];
  }
  return static_cast<double>(marked) / available_.count;
}

int QLearner::choose(int s, double epsilon, const plant::ArmPlant& plant,
                     const plant::PressureCommand& cmd) {
  const std::vector<char> usable =
      usable_actions(plant, cmd, table_.actions, params_.increment);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (epsilon > 0.0 && u(rng_) < epsilon) {
    std::vector<int> pool;
    for (std::size_t a = 0; a < usable.size(); ++a) {
      if (usable[a]) pool.push_back(static_cast<int>(a));
    }
    if (pool.empty()) {
      for (std::size_t a = 0; a < usable.size(); ++a) pool.push_back(static_cast<int>(a));
    }
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    return pool[pick(rng_)];
  }
  return table_.greedy(s, usable);
}

namespace {

// Like get_state but folds distances beyond l_max into the outer ring.
State encode(const pcc::Pose2D& tip, const pcc::Pose2D& target, const Partition& p) {
  const Vec2 d(target.x - tip.x, target.y - tip.y);
  const double n = d.norm();
  if (n <= p.l_max) return get_state(tip, target, p);
  const double f = p.l_max / n;
  pcc::Pose2D folded = target;
  folded.x = tip.x + d.x() * f;
  folded.y = tip.y + d.y() * f;
  State s = get_state(tip, folded, p);
  s.d = d;
  s.distance = n;
  return s;
}

bool reached(const State& s, double threshold, double orientation_threshold) {
  return s.distance <= threshold && std::abs(s.heading_error) <= orientation_threshold;
}

}  // namespace

bool QLearner::learn(const pcc::Pose2D& tip, const pcc::Pose2D& next,
                     const pcc::Pose2D& target, int action, bool mark, double alpha) {
  bool fresh = false;
  auto one = [&](const pcc::Pose2D& goal) {
    const State s = encode(tip, goal, table_.partition);
    const State s2 = encode(next, goal, table_.partition);
    q_update(table_, s.id, action, reward(s, s2, params_.orientation_weight), s2.id,
             alpha, params_.gamma);
    visited_[static_cast<std::size_t>(s.id)] = 1;
    if (mark && table_.q(s.id, action) > 0.0) fresh = mark_and_propagate(table_, s.id) || fresh;
  };
  one(target);
  for (const pcc::Pose2D& v : virtual_) one(v);
  return fresh;
}

TrainReport QLearner::train(plant::SimulatedArm& arm, const Workspace& ws) {
  available_ = refine_states(ws.boundary, table_.partition);
  if (params_.virtual_targets > 0 && virtual_.empty()) {
    for (int k = 0; k < params_.virtual_targets; ++k) virtual_.push_back(ws.draw(rng_));
  }
  TrainReport rep;
  pcc::Pose2D tip = arm.observe().planar_tip();
  for (int outer = 1; outer <= params_.max_outer; ++outer) {
    const pcc::Pose2D target = ws.draw(rng_);
    int since = 0, steps = 0;
    bool hit = false;
    while (steps < params_.max_steps) {
      const State s = encode(tip, target, table_.partition);
      if (reached(s, params_.threshold, params_.orientation_threshold)) {
        hit = true;
        break;
      }
      const int a = choose(s.id, params_.epsilon, arm.plant(), arm.command());
      arm.apply(apply_action(arm.plant(), arm.command(), table_.actions[a], params_.increment));
      const pcc::Pose2D next = arm.observe().planar_tip();
      const bool fresh = learn(tip, next, target, a, true, params_.alpha);
      since = fresh ? 0 : since + 1;
      tip = next;
      ++steps;
      if (since >= params_.patience) break;
    }
    rep.total_steps += steps;
    rep.outer_iterations = outer;
    const double prop = marked_proportion();
    rep.curve.push_back({outer, table_.marked_count, prop, steps, hit});
    if (prop > params_.marked_target) {
      rep.converged = true;
      break;
    }
  }
  if (!rep.converged) {
    std::ostringstream msg;
    msg << "marked proportion " << marked_proportion() << " after " << rep.outer_iterations
        << " outer iterations";
    rep.failure = msg.str();
  }
  rep.visited = visited_;
  return rep;
}

Episode QLearner::control(plant::SimulatedArm& arm, const pcc::Pose2D& target,
                          const ControlOptions& opt) {
  if (opt.learn && !(opt.learn_rate >= 0.0 && opt.learn_rate <= 1.0)) {
    throw ConfigError("online learning rate must be in [0, 1]");
  }
  Episode ep;
  pcc::Pose2D tip = arm.observe().planar_tip();
  for (;;) {
    const State s = encode(tip, target, table_.partition);
    ep.distance.push_back(s.distance);
    ep.heading_error.push_back(s.heading_error);
    if (reached(s, opt.threshold, opt.orientation_threshold)) {
      ep.reached = true;
      break;
    }
    if (ep.steps >= opt.max_steps) {
      ep.failure = "step cap reached";
      break;
    }
    const int a = choose(s.id, opt.epsilon, arm.plant(), arm.command());
    ep.actions.push_back(a);
    arm.apply(apply_action(arm.plant(), arm.command(), table_.actions[a], params_.increment));
    const pcc::Pose2D next = arm.observe().planar_tip();
    if (opt.learn) learn(tip, next, target, a, false, opt.learn_rate);
    tip = next;
    ++ep.steps;
  }
  return ep;
}

int q_sweeps(const TabularMdp& mdp, Eigen::MatrixXd& q, double alpha, double gamma,
             double tolerance, int max_sweeps) {
  if (q.rows() != mdp.states || q.cols() != mdp.actions) {
    throw DimensionMismatch("Q matrix does not match the MDP");
  }
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    double change = 0.0;
    for (int s = 0; s < mdp.states; ++s) {
      if (mdp.terminal[static_cast<std::size_t>(s)]) continue;
      for (int a = 0; a < mdp.actions; ++a) {
        const auto k = static_cast<std::size_t>(s * mdp.actions + a);
        const int s2 = mdp.next[k];
        const double old = q(s, a);
        q(s, a) += alpha * (mdp.reward[k] + gamma * q.row(s2).maxCoeff() - old);
        change = std::max(change, std::abs(q(s, a) - old));
      }
    }
    if (change < tolerance) return sweep;
  }
  return max_sweeps;
}

}  // namespace softarm::qlearn
