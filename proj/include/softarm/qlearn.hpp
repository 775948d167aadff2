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


#pragma once

// Tabular Q-learning over a polar partition of the tip-to-target vector.
// The state of a step is the interval pair (ring, sector) containing
// D = target - tip, with the ring from |D| and the sector from the angle
// measured clockwise from the negative y-axis. An optional third axis bins
// the heading error for orientation-aware control.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "softarm/pcc.hpp"
#include "softarm/plant.hpp"

namespace softarm::qlearn {

enum class Spacing { kEven, kGeometric };

struct Partition {
  int rings = 16;
  int sectors = 18;
  double l_max = 480.0;  // mm
  Spacing spacing = Spacing::kEven;
  double ratio = 1.2;  // ring growth factor for geometric spacing
  // Heading-error bins (odd); 1 disables the orientation axis. Interior
  // edges sit at +-w, +-3w, ... for w = orientation_width.
  int orientation_bins = 1;
  double orientation_width = 0.2617993877991494;  // rad (15 degrees)

  void validate() const;
  int states() const { return rings * sectors * orientation_bins; }
  // Ring edge i in [0, rings]; edge 0 is 0 and edge `rings` is l_max.
  double ring_edge(int i) const;
  // Sector edge j in [0, sectors], evenly spaced over [0, 2 pi].
  double sector_edge(int j) const;
  int id(int ring, int sector, int obin = 0) const;
  int ring_of(int id) const { return (id / orientation_bins) / sectors; }
  int sector_of(int id) const { return (id / orientation_bins) % sectors; }
  int obin_of(int id) const { return id % orientation_bins; }
  // 8-neighbourhood on the (ring, sector) grid with wrapping sectors, in the
  // same orientation bin.
  std::vector<int> neighbors(int id) const;
  int orientation_bin(double heading_error) const;
};

// Clockwise angle from the negative y-axis to d, in [0, 2 pi); 0 for d = 0.
double clockwise_angle(const Eigen::Vector2d& d);

struct State {
  Eigen::Vector2d d = Eigen::Vector2d::Zero();  // target - tip
  double distance = 0.0;
  double angle = 0.0;
  double heading_error = 0.0;  // target heading - tip heading, wrapped
  int ring = 0;
  int sector = 0;
  int obin = 0;
  int id = 0;
};

// Throws OutOfPartition when |D| > l_max.
State get_state(const pcc::Pose2D& tip, const pcc::Pose2D& target,
                const Partition& partition);

// One basic motion: inflate (+1) or deflate (-1) each side of a segment.
struct Action {
  std::size_t segment = 0;
  int left = 1;
  int right = 1;
};

// Per segment: elongate, bend towards the right, bend towards the left and,
// when requested, shorten.
std::vector<Action> make_actions(std::size_t segments, bool include_shortening);

// Command after taking `action`, clamped into the channel bounds.
plant::PressureCommand apply_action(const plant::ArmPlant& plant,
                                    const plant::PressureCommand& cmd,
                                    const Action& action, double increment);

// Per action, whether taking it changes `cmd` at all.
std::vector<char> usable_actions(const plant::ArmPlant& plant, const plant::PressureCommand& cmd,
                                 const std::vector<Action>& actions, double increment);

struct QTable {
  Partition partition;
  std::vector<Action> actions;
  Eigen::MatrixXd q;          // states x actions
  std::vector<char> marked;   // per state
  int marked_count = 0;

  QTable() = default;
  QTable(Partition p, std::vector<Action> a, double initial = 0.0);

  // argmax_a Q(s, a) with the lowest index winning ties.
  int greedy(int s) const;
  // Same over the actions flagged in `usable`; falls back to greedy(s) when none is.
  int greedy(int s, const std::vector<char>& usable) const;
  double max_value(int s) const { return q.row(s).maxCoeff(); }
  std::vector<int> policy() const;

  std::string to_json() const;
  static QTable from_json(const std::string& text);
  void save(const std::string& path) const;
  static QTable load(const std::string& path);
};

// |D| - |D'|, plus `weight` * (|phi| - |phi'|) for heading errors.
double reward(double distance, double next_distance);
double reward(const State& before, const State& after, double orientation_weight);

void q_update(QTable& table, int s, int a, double r, int s_next, double alpha,
              double gamma);

// Marks s and gives every unmarked neighbour, per action, the mean of its
// marked neighbours. Returns true when s was not marked before.
bool mark_and_propagate(QTable& table, int s);

using Polygon = std::vector<Eigen::Vector2d>;

// Convex hull in counter-clockwise order (Andrew's monotone chain).
Polygon convex_hull(std::vector<Eigen::Vector2d> points);

// Counter-clockwise outer boundary of the points rasterized on a square grid
// of side `cell`, closed by `closing` cells and simplified to within cell / 2.
// Holes are filled and only the largest connected region is kept.
Polygon outline(const std::vector<Eigen::Vector2d>& points, double cell, int closing = 2);

// Closed point-in-polygon test.
bool polygon_contains(const Polygon& polygon, const Eigen::Vector2d& point);

// Whether the closed cell of (ring, sector) meets the closed polygon.
bool cell_meets_polygon(const Partition& partition, int ring, int sector,
                        const Polygon& polygon);

struct Availability {
  std::vector<char> available;  // per state
  int count = 0;
  double proportion = 0.0;
};

// Moves the partition centre (an imaginary target) along the workspace
// boundary in steps of at most `step` mm and records every cell that meets
// the workspace, seen as tip positions around that target.
Availability refine_states(const Polygon& workspace, const Partition& partition,
                           double step = 2.0);

// Reachable tip poses sampled from settled random commands. `boundary`
// outlines a denser sample that also includes the channel-bound vertices.
struct Workspace {
  std::vector<pcc::Pose2D> poses;
  Polygon boundary;

  static Workspace sample(const plant::ArmPlant& plant, int count, std::uint64_t seed,
                          int outline_samples = 20000, double cell = 5.0);
  const pcc::Pose2D& draw(std::mt19937_64& rng) const;
};

struct TrainParams {
  double alpha = 0.5;
  double gamma = 0.9;
  double epsilon = 0.1;
  int patience = 20;           // steps without a new mark before switching target
  double marked_target = 0.5;  // proportion of available states
  double threshold = 10.0;     // mm
  double orientation_threshold = 1e9;  // rad
  double orientation_weight = 0.0;     // mm per rad in the reward
  double increment = 0.03;     // MPa per action
  int max_outer = 5000;
  int max_steps = 200;         // per target
  // Extra targets updated from every transition (data reuse); 0 disables.
  int virtual_targets = 0;

  void validate() const;
};

struct CurvePoint {
  int outer = 0;
  int marked = 0;
  double proportion = 0.0;
  int steps = 0;
  bool reached = false;
};

struct TrainReport {
  bool converged = false;
  int outer_iterations = 0;
  long total_steps = 0;
  std::vector<CurvePoint> curve;
  std::vector<char> visited;  // per state
  std::string failure;
};

struct ControlOptions {
  double threshold = 10.0;              // mm
  double orientation_threshold = 1e9;   // rad
  double epsilon = 0.0;
  int max_steps = 200;
  bool learn = false;       // keep updating Q without marking (online adaptation)
  double learn_rate = 0.5;  // alpha for online updates, in [0, 1]
};

struct Episode {
  std::vector<double> distance;       // per observation, starting before the first action
  std::vector<double> heading_error;  // rad
  std::vector<int> actions;
  bool reached = false;
  int steps = 0;
  std::string failure;
};

class QLearner {
 public:
  QLearner(Partition partition, std::vector<Action> actions, TrainParams params,
           std::uint64_t seed);

  const QTable& table() const { return table_; }
  QTable& table() { return table_; }
  const TrainParams& params() const { return params_; }
  const Availability& availability() const { return available_; }
  double marked_proportion() const;

  void set_table(QTable table) { table_ = std::move(table); }

  // Training loop over random targets until the marked proportion exceeds
  // the target or the outer-iteration cap is hit.
  TrainReport train(plant::SimulatedArm& arm, const Workspace& workspace);

  // One target episode. With `learn` set, every transition also updates Q.
  Episode control(plant::SimulatedArm& arm, const pcc::Pose2D& target,
                  const ControlOptions& options);

  // Fixes the virtual targets used for data reuse.
  void set_virtual_targets(std::vector<pcc::Pose2D> targets) { virtual_ = std::move(targets); }

 private:
  // Epsilon-greedy over the actions that move the arm.
  int choose(int s, double epsilon, const plant::ArmPlant& plant,
             const plant::PressureCommand& cmd);
  // Updates Q from one transition; returns whether a new state was marked.
  bool learn(const pcc::Pose2D& tip, const pcc::Pose2D& next, const pcc::Pose2D& target,
             int action, bool mark, double alpha);

  QTable table_;
  TrainParams params_;
  std::mt19937_64 rng_;
  Availability available_;
  std::vector<pcc::Pose2D> virtual_;
  std::vector<char> visited_;
};

// Deterministic tabular MDP for checking the update rule.
struct TabularMdp {
  int states = 0;
  int actions = 0;
  std::vector<int> next;        // states x actions
  std::vector<double> reward;   // states x actions
  std::vector<char> terminal;   // per state; Q stays 0 there
};

// Repeated in-place Q-update sweeps over every (s, a) until the largest
// change falls below `tolerance`. Returns the number of sweeps.
int q_sweeps(const TabularMdp& mdp, Eigen::MatrixXd& q, double alpha, double gamma,
             double tolerance, int max_sweeps);

}  // namespace softarm::qlearn
