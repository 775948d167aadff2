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

#include <cmath>

#include "softarm/error.hpp"

namespace softarm::twolevel {

void FeedbackParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in [0, 1]");
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (!(position_tolerance > 0.0 && rotation_tolerance > 0.0)) {
    throw ConfigError("tolerances must be positive");
  }
}

poseopt::Target2D feedback_update(const poseopt::Target2D& q_star,
                                  const poseopt::Target2D& q,
                                  const pcc::Pose2D& observed, double alpha) {
  poseopt::Target2D next = q_star;
  next.x += alpha * (q.x - observed.x);
  next.y += alpha * (q.y - observed.y);
  next.theta += alpha * (q.theta - q.theta_root - observed.theta);
  return next;
}

poseopt::Target2D path_update(const poseopt::Target2D& q_star,
                              const poseopt::Target2D& q,
                              const poseopt::Target2D& q_next,
                              const pcc::Pose2D& observed, double beta) {
  poseopt::Target2D next = q_star;
  next.x += (q_next.x - q.x) + beta * (q.x - observed.x);
  next.y += (q_next.y - q.y) + beta * (q.y - observed.y);
  next.theta += (q_next.theta - q.theta) +
                beta * (q.theta - q.theta_root - observed.theta);
  return next;
}

double position_error(const poseopt::Target2D& q, const pcc::Pose2D& p) {
  return std::hypot(q.x - p.x, q.y - p.y);
}

double rotation_error(const poseopt::Target2D& q, const pcc::Pose2D& p) {
  return std::abs(q.theta - q.theta_root - p.theta);
}

ModelController::ModelController(net::NetBundle nets,
                                 std::vector<poseopt::SegmentLimits> limits,
                                 poseopt::CostWeights weights, std::uint64_t seed,
                                 poseopt::OptimizerOptions options)
    : nets_(std::move(nets)), limits_(std::move(limits)), weights_(weights),
      seed_(seed), options_(options) {
  if (nets_.nets.size() != limits_.size()) {
    throw DimensionMismatch("one network per segment is required");
  }
  for (const auto& l : limits_) {
    last_.curvature.push_back(0.0);
    last_.length.push_back(l.l_min);
  }
}

plant::PressureCommand ModelController::control_point(
    const poseopt::Target2D& target, const pcc::ConfigurationSpace& previous,
    pcc::ConfigurationSpace* solved) {
  const poseopt::PoseResult pose =
      poseopt::optimize_pose(target, limits_, weights_, seed_ + calls_++, options_);
  if (solved) *solved = pose.config;
  return nets_.command(pose.config, previous);
}

namespace {

Iteration run_once(plant::SimulatedArm& arm, ModelController& ctrl,
                   const poseopt::Target2D& input, const poseopt::Target2D& goal) {
  pcc::ConfigurationSpace solved;
  Iteration it;
  it.input = input;
  it.command = ctrl.control_point(input, ctrl.last_target(), &solved);
  ctrl.reset(solved);
  arm.apply(it.command);
  it.observed = arm.observe().planar_tip();
  it.position_error = position_error(goal, it.observed);
  it.rotation_error = rotation_error(goal, it.observed);
  return it;
}

}  // namespace

namespace {

constexpr int kBackoffHalvings = 4;

}  // namespace

FeedbackResult feedback_point(plant::SimulatedArm& arm, ModelController& ctrl,
                              const poseopt::Target2D& target,
                              const FeedbackParams& params) {
  params.validate();
  FeedbackResult res;
  poseopt::Target2D input = target;
  res.iterations.push_back(run_once(arm, ctrl, input, target));
  for (int k = 1;; ++k) {
    const Iteration& last = res.iterations.back();
    if (last.position_error <= params.position_tolerance &&
        last.rotation_error <= params.rotation_tolerance) {
      res.converged = true;
      break;
    }
    if (k >= params.max_iterations) break;
    // Halve the correction while the translated input is out of reach.
    bool moved = false;
    double alpha = params.alpha;
    for (int halving = 0; halving <= kBackoffHalvings && !moved; ++halving, alpha *= 0.5) {
      const poseopt::Target2D next = feedback_update(input, target, last.observed, alpha);
      try {
        res.iterations.push_back(run_once(arm, ctrl, next, target));
        input = next;
        moved = true;
      } catch (const UnreachableTarget&) {
      }
    }
    if (!moved) {
      res.unreachable = true;
      break;
    }
  }
  return res;
}

double PathResult::mean_position_error() const {
  double s = 0.0;
  for (const auto& w : waypoints) s += w.position_error;
  return waypoints.empty() ? 0.0 : s / static_cast<double>(waypoints.size());
}

double PathResult::mean_rotation_error() const {
  double s = 0.0;
  for (const auto& w : waypoints) s += w.rotation_error;
  return waypoints.empty() ? 0.0 : s / static_cast<double>(waypoints.size());
}

PathResult track_path(plant::SimulatedArm& arm, ModelController& ctrl,
                      const std::vector<poseopt::Target2D>& waypoints,
                      const FeedbackParams& params) {
  params.validate();
  if (waypoints.size() < 2) throw ConfigError("a path needs at least 2 waypoints");
  PathResult res;
  poseopt::Target2D input = waypoints.front();
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    Iteration it;
    try {
      it = run_once(arm, ctrl, input, waypoints[i]);
    } catch (const UnreachableTarget&) {
      // Hold the previous command for this waypoint.
      it.input = input;
      arm.apply(arm.command());
      it.command = arm.command();
      it.observed = arm.observe().planar_tip();
      it.position_error = position_error(waypoints[i], it.observed);
      it.rotation_error = rotation_error(waypoints[i], it.observed);
    }
    res.waypoints.push_back(it);
    if (i + 1 < waypoints.size()) {
      input = path_update(input, waypoints[i], waypoints[i + 1], it.observed,
                          params.beta);
    }
  }
  return res;
}

}  // namespace softarm::twolevel
