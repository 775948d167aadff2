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


// Experiment protocols on simulated plants: the comparative study of the
// three controllers under disturbance groups, point-to-point and path runs
// of the model-based controller, and atom behaviours of the spatial
// estimated-model controller. Reports are plain CSV, JSON lines and a text
// table; every run is a pure function of its configuration and seed.
//
// Simulated time is controller iterations times a nominal step time.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "softarm/config_net.hpp"
#include "softarm/jacobian_ctrl.hpp"
#include "softarm/plant.hpp"
#include "softarm/pose_opt.hpp"
#include "softarm/qlearn.hpp"
#include "softarm/two_level.hpp"

namespace softarm::harness {

enum class ControllerId { kModelBased, kEstimatedModel, kQLearning };
enum class Group { kFree, kForce075, kForce150, kSwapMiddle, kSwapRoot };

std::string to_string(ControllerId id);
std::string to_string(Group g);
// Throws ConfigError on unknown tokens.
ControllerId parse_controller(const std::string& token);
Group parse_group(const std::string& token);
std::vector<ControllerId> all_controllers();
std::vector<Group> all_groups();

// Swaps address the middle and the root segment; forces push along +x.
plant::Disturbance disturbance_for(Group g, const plant::ArmPlant& plant);

struct ComparativeConfig {
  int targets = 20;
  double position_tolerance = 15.0;  // mm
  double rotation_tolerance = 15.0;  // degrees
  double expire_seconds = 100.0;
  double model_step_seconds = 6.0;
  double feedback_step_seconds = 1.0;
  std::uint64_t seed = 1;
  std::vector<ControllerId> controllers = all_controllers();
  std::vector<Group> groups = all_groups();

  // Preparation.
  int net_samples = 1000;
  int net_epochs = 200;
  int workspace_samples = 4000;
  qlearn::TrainParams q_params = default_q_params();
  int q_orientation_bins = 3;
  double q_epsilon = 0.05;  // exploration while controlling
  bool q_online = true;    // keep learning while controlling
  double jacobian_step_ratio = 0.5;  // estimated-model damped step

  static qlearn::TrainParams default_q_params();
  void validate() const;
  int model_step_cap() const;     // iterations that fit before expiry
  int feedback_step_cap() const;
};

// Everything the controllers need, built once per plant and seed.
struct Prepared {
  plant::ArmPlant plant;
  qlearn::Workspace workspace;
  std::vector<pcc::Pose2D> targets;
  std::optional<net::NetBundle> nets;
  std::vector<poseopt::SegmentLimits> limits;
  std::optional<std::vector<jacobian::SingleSegJacobian>> singles;
  std::optional<qlearn::QLearner> learner;
  std::optional<qlearn::TrainReport> q_report;
};

// Deterministic targets: points drawn uniformly inside the workspace outline
// by rejection, each replaced by the nearest unused sampled pose.
std::vector<pcc::Pose2D> draw_targets(const qlearn::Workspace& ws, int count, std::uint64_t seed);

// Every episode starts from this settled straight pose.
plant::PressureCommand start_command(const plant::ArmPlant& plant);

Prepared prepare(const plant::ArmPlant& plant, const ComparativeConfig& config);

struct EpisodeResult {
  bool success = false;
  int steps = 0;
  double seconds = 0.0;
  double position_error = 0.0;  // mm, at the end of the episode
  double rotation_error = 0.0;  // degrees
};

struct ResultRow {
  ControllerId controller = ControllerId::kModelBased;
  Group group = Group::kFree;
  std::vector<EpisodeResult> episodes;
  double success_rate = 0.0;
  // Over successful episodes; NaN when none succeeded.
  double mean_steps = 0.0;
  double mean_seconds = 0.0;
  // mean_seconds over the Q-learning row of the same group; NaN when unknown.
  double relative_time = 0.0;
};

EpisodeResult run_episode(const Prepared& prep, const ComparativeConfig& config, ControllerId id,
                          plant::SimulatedArm& arm, const pcc::Pose2D& target,
                          twolevel::ModelController* model, qlearn::QLearner* learner);

// Throws ConfigError when a requested controller was not prepared.
std::vector<ResultRow> run_comparative(const Prepared& prep, const ComparativeConfig& config);

const ResultRow& find_row(const std::vector<ResultRow>& rows, ControllerId id, Group g);

std::string comparative_csv(const std::vector<ResultRow>& rows);
std::string episodes_csv(const std::vector<ResultRow>& rows);
// Text table of time and rate with one row per group and one column per controller.
std::string comparative_table(const std::vector<ResultRow>& rows);

// Point-to-point runs of the model-based controller.
struct P2pRow {
  int id = 0;
  poseopt::Target2D target;
  twolevel::FeedbackResult result;
};
std::vector<P2pRow> run_p2p(plant::SimulatedArm& arm, twolevel::ModelController& ctrl,
                            const std::vector<poseopt::Target2D>& targets,
                            const twolevel::FeedbackParams& params);
std::string p2p_csv(const std::vector<P2pRow>& rows);
std::string p2p_jsonl(const std::vector<P2pRow>& rows);

std::string path_csv(const std::vector<poseopt::Target2D>& waypoints,
                     const twolevel::PathResult& result);
std::string path_jsonl(const std::vector<poseopt::Target2D>& waypoints,
                       const twolevel::PathResult& result);

// Straight run (+x, then +y in the planar frame) starting at `start`.
std::vector<poseopt::Target2D> corner_path(const poseopt::Target2D& start, double step_x,
                                           int count_x, double step_y, int count_y);

enum class Direction { kPlusX, kMinusX, kPlusY, kMinusY, kPlusZ, kMinusZ,
                       kRotPlusX, kRotMinusX, kRotPlusY, kRotMinusY };
// Tokens: +x -x +y -y +z -z rot+x rot-x rot+y rot-y. Throws ConfigError otherwise.
Direction parse_direction(const std::string& token);
std::string to_string(Direction d);

// Straight line the goal is projected onto every step.
struct Rail {
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  Eigen::Vector3d direction = Eigen::Vector3d::UnitZ();
};

struct AtomOptions {
  int horizon = 20;  // controller iterations
  std::optional<Rail> rail;
};

// Moving goal offset from the observed tip by `magnitude` (mm, or rad for
// rotations, in the base frame) at every iteration of the estimated-model
// controller.
jacobian::RunReport atom_behavior(plant::SimulatedArm& arm,
                                  const jacobian::JacobianController& ctrl, Direction d,
                                  double magnitude, const AtomOptions& options = {});

std::string run_report_jsonl(const jacobian::RunReport& report);

// Tips of settled random feasible commands of a spatial plant. `spread` in
// (0, 1] scales the generalized actuation range around mid-elongation.
std::vector<pcc::Transform> random_spatial_goals(const plant::ArmPlant& plant, int count,
                                                 std::uint64_t seed, double spread = 1.0);

// One estimated-model run per goal, each from the settled home command.
std::vector<jacobian::RunReport> run_jacobian(const plant::ArmPlant& plant,
                                              const jacobian::JacobianController& ctrl,
                                              const std::vector<pcc::Transform>& goals,
                                              const plant::Disturbance& dist = {});
std::string jacobian_csv(const std::vector<jacobian::RunReport>& reports);
std::string jacobian_jsonl(const std::vector<jacobian::RunReport>& reports);

}  // namespace softarm::harness
