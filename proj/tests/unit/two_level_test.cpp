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


#include "softarm/two_level.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "softarm/error.hpp"

namespace softarm::twolevel {
namespace {

TEST(FeedbackUpdate, Example) {
  const poseopt::Target2D next =
      feedback_update({10, 10, 0, 0}, {10, 10, 0, 0}, {9, 9, 0}, 1.0);
  EXPECT_DOUBLE_EQ(next.x, 11.0);
  EXPECT_DOUBLE_EQ(next.y, 11.0);
  EXPECT_DOUBLE_EQ(next.theta, 0.0);
}

TEST(FeedbackUpdate, FixedPointWhenObservedMatches) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int i = 0; i < 100; ++i) {
    const poseopt::Target2D q_star{u(rng), u(rng), u(rng) / 100, 0};
    const poseopt::Target2D q{u(rng), u(rng), u(rng) / 100, 0};
    const poseopt::Target2D next = feedback_update(q_star, q, {q.x, q.y, q.theta}, 0.7);
    EXPECT_EQ(next.x, q_star.x);
    EXPECT_EQ(next.y, q_star.y);
    EXPECT_EQ(next.theta, q_star.theta);
  }
}

TEST(PathUpdate, StationaryPathReducesToPointUpdate) {
  const poseopt::Target2D q_star{3, 4, 0.1, 0}, q{5, 6, 0.2, 0};
  const pcc::Pose2D seen{4.5, 7.0, 0.25};
  const poseopt::Target2D a = path_update(q_star, q, q, seen, 1.0);
  const poseopt::Target2D b = feedback_update(q_star, q, seen, 1.0);
  EXPECT_DOUBLE_EQ(a.x, b.x);
  EXPECT_DOUBLE_EQ(a.y, b.y);
  EXPECT_DOUBLE_EQ(a.theta, b.theta);
}

TEST(PathUpdate, TelescopesUnderPerfectTracking) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  std::vector<poseopt::Target2D> path;
  for (int i = 0; i < 20; ++i) path.push_back({u(rng), u(rng), u(rng) / 50, 0});
  // Integer-valued offsets keep the recurrence exact in floating point.
  for (auto& q : path) {
    q.x = std::round(q.x);
    q.y = std::round(q.y);
    q.theta = std::round(q.theta * 8) / 8;
  }
  poseopt::Target2D q_star{1, 2, 0.25, 0};
  const poseopt::Target2D first = q_star;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    q_star = path_update(q_star, path[i], path[i + 1],
                         {path[i].x, path[i].y, path[i].theta}, 1.0);
    EXPECT_EQ(q_star.x - first.x, path[i + 1].x - path[0].x);
    EXPECT_EQ(q_star.y - first.y, path[i + 1].y - path[0].y);
    EXPECT_EQ(q_star.theta - first.theta, path[i + 1].theta - path[0].theta);
  }
}

TEST(FeedbackParams, Validation) {
  FeedbackParams p;
  EXPECT_NO_THROW(p.validate());
  p.alpha = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.beta = 1.5;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.max_iterations = 0;
  EXPECT_THROW(p.validate(), ConfigError);
}

class Closed : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    plant_ = new plant::ArmPlant(plant::ArmPlant::planar_default());
    const net::SegmentDatasets data = net::generate_data(*plant_, 1000, 1);
    bundle_ = new net::NetBundle(
        net::train_bundle(data.history, true, 0.3, {.epochs = 200, .seed = 1}));
    limits_ = new std::vector<poseopt::SegmentLimits>(poseopt::limits_from_plant(*plant_));
  }
  static void TearDownTestSuite() {
    delete plant_;
    delete bundle_;
    delete limits_;
  }

  static ModelController controller() { return ModelController(*bundle_, *limits_, {}, 3); }

  static std::vector<poseopt::Target2D> targets(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<poseopt::Target2D> out;
    for (int t = 0; t < n; ++t) {
      pcc::ConfigurationSpace c;
      for (const auto& l : *limits_) {
        double a, b;
        do {
          a = u(rng);
          b = u(rng);
        } while (std::abs(a) + std::abs(b) > 0.9);
        c.length.push_back(l.l_avg + 0.5 * a * (l.l_max - l.l_min));
        c.curvature.push_back(0.5 * b * (l.k_max - l.k_min));
      }
      const pcc::Pose2D tip = pcc::forward_2d(c).back();
      out.push_back({tip.x, tip.y, tip.theta, 0.0});
    }
    return out;
  }

  static plant::ArmPlant* plant_;
  static net::NetBundle* bundle_;
  static std::vector<poseopt::SegmentLimits>* limits_;
};

plant::ArmPlant* Closed::plant_ = nullptr;
net::NetBundle* Closed::bundle_ = nullptr;
std::vector<poseopt::SegmentLimits>* Closed::limits_ = nullptr;

TEST_F(Closed, StraightTargetGivesSymmetricMidRangeCommand) {
  double height = 0.0;
  for (const auto& l : *limits_) height += l.l_avg;
  ModelController ctrl = controller();
  const plant::PressureCommand cmd =
      ctrl.control_point({0.0, height, 0.0, 0.0}, plant_->planar_config(plant_->rest_state()));
  for (std::size_t i = 0; i < plant_->segments(); ++i) {
    const plant::SegmentSpec& s = plant_->spec(i);
    EXPECT_NEAR(cmd.at(i, 0), cmd.at(i, 1), 0.02) << i;
    // Plant inverse from the rest pose: the settled length must make the
    // memory blend land on the mid length.
    const double settled = ((*limits_)[i].l_avg - s.memory * s.rest_length) / (1.0 - s.memory);
    const double sum = 2.0 * s.pressure_max * (settled - s.rest_length) /
                       (s.max_elongation * s.elong_gain);
    EXPECT_NEAR(cmd.at(i, 0) + cmd.at(i, 1), sum, 0.02) << i;
  }
}

TEST_F(Closed, ErrorWithinToleranceStopsAfterOneIteration) {
  const poseopt::Target2D target = targets(1, 4).front();
  plant::SimulatedArm probe(*plant_);
  ModelController first = controller();
  FeedbackParams once;
  once.max_iterations = 1;
  const Iteration open = feedback_point(probe, first, target, once).iterations.front();

  plant::SimulatedArm arm(*plant_);
  ModelController second = controller();
  FeedbackParams p;
  p.position_tolerance = open.position_error;
  p.rotation_tolerance = open.rotation_error;
  const FeedbackResult r = feedback_point(arm, second, target, p);
  EXPECT_TRUE(r.converged);
  ASSERT_EQ(r.iterations.size(), 1u);
  EXPECT_EQ(r.iterations.front().command.values(), open.command.values());
}

TEST_F(Closed, ClosedLoopBeatsOpenLoopAndImprovesMonotonically) {
  ModelController ctrl = controller();
  plant::SimulatedArm arm(*plant_);
  FeedbackParams p;
  p.position_tolerance = 0.5;
  p.rotation_tolerance = 0.005;
  double open = 0.0, closed = 0.0;
  int better = 0;
  std::vector<std::vector<double>> by_iter(3);
  const auto ts = targets(100, 5);
  for (const auto& t : ts) {
    const FeedbackResult r = feedback_point(arm, ctrl, t, p);
    open += r.open_loop_position_error();
    closed += r.final_position_error();
    better += r.final_position_error() < r.open_loop_position_error() ||
              r.open_loop_position_error() <= p.position_tolerance;
    for (std::size_t k = 0; k < 3; ++k) {
      const std::size_t idx = std::min(k, r.iterations.size() - 1);
      by_iter[k].push_back(r.iterations[idx].position_error);
    }
    EXPECT_LE(static_cast<int>(r.iterations.size()), p.max_iterations);
  }
  EXPECT_LT(closed, 0.2 * open);
  EXPECT_GE(better, 95);
  std::vector<double> med;
  for (auto& v : by_iter) {
    std::sort(v.begin(), v.end());
    med.push_back(v[v.size() / 2]);
  }
  EXPECT_GT(med[0], med[1]);
  EXPECT_GT(med[1], med[2]);
}

TEST_F(Closed, PathTrackingAndCornerSpike) {
  // Dense path along x, then a 90 degree turn upwards.
  const double x0 = -20.0, y0 = 200.0;
  std::vector<poseopt::Target2D> path;
  for (int i = 0; i <= 20; ++i) path.push_back({x0 + 3.0 * i, y0, 0.0, 0.0});
  for (int i = 1; i <= 15; ++i) path.push_back({x0 + 60.0, y0 + 1.0 * i, 0.0, 0.0});
  ModelController ctrl = controller();
  plant::SimulatedArm arm(*plant_);
  const PathResult r = track_path(arm, ctrl, path, {});
  ASSERT_EQ(r.waypoints.size(), path.size());

  ModelController open_ctrl = controller();
  plant::SimulatedArm open_arm(*plant_);
  double open = 0.0;
  for (const auto& q : path) {
    FeedbackParams once;
    once.max_iterations = 1;
    open += feedback_point(open_arm, open_ctrl, q, once).open_loop_position_error();
  }
  open /= static_cast<double>(path.size());
  EXPECT_LT(r.mean_position_error(), open);

  double straight = 0.0;
  for (int i = 3; i < 20; ++i) straight += r.waypoints[i].position_error;
  straight /= 17.0;
  EXPECT_GT(r.waypoints[21].position_error, straight);
  EXPECT_THROW(track_path(arm, ctrl, {path.front()}, {}), ConfigError);
}

}  // namespace
}  // namespace softarm::twolevel
