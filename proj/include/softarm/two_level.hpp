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

// Model-based controller: pose optimization picks a configuration for the
// target, the per-segment networks turn it into pressures. A target
// translation loop closes the loop on the observed tip pose.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "softarm/config_net.hpp"
#include "softarm/plant.hpp"
#include "softarm/pose_opt.hpp"

namespace softarm::twolevel {

struct FeedbackParams {
  double alpha = 1.0;  // point modification rate
  double beta = 1.0;   // path modification rate
  int max_iterations = 10;
  double position_tolerance = 2.0;  // mm
  double rotation_tolerance = 0.02; // rad

  void validate() const;
};

// q* <- q* + alpha (q - q')
poseopt::Target2D feedback_update(const poseopt::Target2D& q_star,
                                  const poseopt::Target2D& q,
                                  const pcc::Pose2D& observed, double alpha);
// q*_{i+1} <- q*_i + (q_{i+1} - q_i) + beta (q_i - q'_i)
poseopt::Target2D path_update(const poseopt::Target2D& q_star,
                              const poseopt::Target2D& q,
                              const poseopt::Target2D& q_next,
                              const pcc::Pose2D& observed, double beta);

double position_error(const poseopt::Target2D& q, const pcc::Pose2D& p);
double rotation_error(const poseopt::Target2D& q, const pcc::Pose2D& p);

class ModelController {
 public:
  ModelController(net::NetBundle nets, std::vector<poseopt::SegmentLimits> limits,
                  poseopt::CostWeights weights = {}, std::uint64_t seed = 0,
                  poseopt::OptimizerOptions options = {});

  const net::NetBundle& nets() const { return nets_; }
  const std::vector<poseopt::SegmentLimits>& limits() const { return limits_; }

  // Pose optimization followed by the network forward pass. `previous` is
  // the configuration the history-aware networks take as (k', l'); the
  // solved configuration is written to `solved` when given.
  plant::PressureCommand control_point(const poseopt::Target2D& target,
                                       const pcc::ConfigurationSpace& previous,
                                       pcc::ConfigurationSpace* solved = nullptr);

  // Previous target configuration, the rest pose until the first solve.
  const pcc::ConfigurationSpace& last_target() const { return last_; }
  void reset(const pcc::ConfigurationSpace& rest) { last_ = rest; }

 private:
  net::NetBundle nets_;
  std::vector<poseopt::SegmentLimits> limits_;
  poseopt::CostWeights weights_;
  std::uint64_t seed_;
  std::uint64_t calls_ = 0;
  poseopt::OptimizerOptions options_;
  pcc::ConfigurationSpace last_;
};

struct Iteration {
  poseopt::Target2D input;  // q* sent to the controller
  pcc::Pose2D observed;
  plant::PressureCommand command;
  double position_error = 0.0;
  double rotation_error = 0.0;
};

struct FeedbackResult {
  std::vector<Iteration> iterations;
  bool converged = false;
  // Set when a translated input left the optimizer's reach.
  bool unreachable = false;
  double open_loop_position_error() const { return iterations.front().position_error; }
  double open_loop_rotation_error() const { return iterations.front().rotation_error; }
  double final_position_error() const { return iterations.back().position_error; }
  double final_rotation_error() const { return iterations.back().rotation_error; }
};

// One plant step per iteration. Stops once both tolerances hold or after
// max_iterations; non-convergence is reported, not thrown.
FeedbackResult feedback_point(plant::SimulatedArm& arm, ModelController& ctrl,
                              const poseopt::Target2D& target,
                              const FeedbackParams& params);

struct PathResult {
  std::vector<Iteration> waypoints;
  double mean_position_error() const;
  double mean_rotation_error() const;
};

// Dense waypoint tracking, one plant step per waypoint, with the error of
// each subtask carried into the next input.
PathResult track_path(plant::SimulatedArm& arm, ModelController& ctrl,
                      const std::vector<poseopt::Target2D>& waypoints,
                      const FeedbackParams& params);

}  // namespace softarm::twolevel
