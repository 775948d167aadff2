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

// Estimated-Jacobian feedback control. Every segment keeps a sparse,
// constant 5x3 sensitivity of its tip vector (x, y, z, theta_x, theta_y) to
// its generalized actuation (p_sx, p_sy, p_sz). The full Jacobian of the arm
// tip is rebuilt each iteration by perturbing one segment at a time through
// the transform chain, and a damped pseudoinverse step drives the tip toward
// the goal expressed in the tip frame.
//
// Planar plants use the same machinery embedded in the x-z plane: the p_sy
// column is structurally zero and (p_sx, p_sz) map to (p_r - p_l, p_l + p_r).

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "softarm/actuation.hpp"
#include "softarm/pcc.hpp"
#include "softarm/plant.hpp"

namespace softarm::jacobian {

using Vector5 = Eigen::Matrix<double, 5, 1>;
using Matrix53 = Eigen::Matrix<double, 5, 3>;

// Rows carrying a structurally nonzero entry, per generalized column.
inline constexpr int kSparsity[3][2] = {{0, 3}, {1, 4}, {2, -1}};

struct SingleSegJacobian {
  Matrix53 m = Matrix53::Zero();

  // True when every entry outside the five-element pattern is exactly 0.
  bool sparse() const;
};

// Relative tip transform of one segment at steady state for a generalized
// actuation (x = p_sx, y = p_sy, z = p_sz).
pcc::Transform steady_segment_transform(const plant::ArmPlant& plant,
                                        std::size_t segment,
                                        const actuation::Generalized& g,
                                        const plant::Disturbance& dist = {});

// Central-difference 5x3 sensitivity of one segment at g.
Matrix53 segment_fd_jacobian(const plant::ArmPlant& plant, std::size_t segment,
                             const actuation::Generalized& g, double dp);

// Generalized-actuation samples on an even grid over the feasible set.
std::vector<actuation::Generalized> feasible_grid(const plant::ArmPlant& plant,
                                                  std::size_t segment, int levels);

struct ProbeOptions {
  int levels = 5;
  double dp = 0.01;  // MPa
};

// Each structural entry is the largest finite-difference magnitude found on
// the probe grid.
std::vector<SingleSegJacobian> init_single_jacobians(const plant::ArmPlant& plant,
                                                     const ProbeOptions& options = {});

// Converts a tip vector to the controller's metric: angles times `lever` mm.
Vector5 scaled(const pcc::TipVector5& v, double lever);

struct FullJacobian {
  Eigen::MatrixXd m;        // 5 x 3n
  std::vector<bool> valid;  // per column
};

// `relative` holds {}^{i-1}T_i for every segment. Columns whose perturbed
// recomposition leaves the representable range are zeroed and flagged.
FullJacobian assemble_jacobian(const std::vector<pcc::Transform>& relative,
                               const std::vector<SingleSegJacobian>& singles,
                               double dp, double lever);

// Goal in the tip frame, T_tip^{-1} T_goal, as a tip vector. Throws
// RepresentationRangeError when the z-axes are 90 degrees or more apart.
pcc::TipVector5 goal_deviation(const pcc::Transform& tip, const pcc::Transform& goal);

struct DampedStep {
  double ratio = 0.3;
  double max_delta = 0.05;  // MPa per generalized channel and step
  double cutoff = 1e-8;     // relative to the largest singular value
};

// a * J^+ dx without clipping. Throws NoMotion when J has no usable
// singular value.
Eigen::VectorXd damped_pseudoinverse_step(const Eigen::MatrixXd& j,
                                          const Eigen::VectorXd& dx,
                                          const DampedStep& step);
// damped_pseudoinverse_step followed by the per-component clip.
Eigen::VectorXd feedback_step(const Eigen::MatrixXd& j, const Eigen::VectorXd& dx,
                              const DampedStep& step);

struct ControllerParams {
  DampedStep step;
  double dp = 0.01;          // assembly perturbation, MPa
  double lever = 100.0;      // mm per rad
  double tolerance = 5.0;    // mm-equivalent norm of the scaled deviation
  // Also converged once position and rotation errors are both within these
  // bounds; disabled while either is 0.
  double position_tolerance = 0.0;  // mm
  double rotation_tolerance = 0.0;  // degrees
  int max_iterations = 100;
  bool true_markers = false; // segment tips from the plant instead of interpolation
  // Largest tip-to-goal z-axis angle handled in one go; farther goals are
  // approached through geodesic intermediate goals.
  double max_goal_angle = 1.3;
};

struct IterationLog {
  int iteration = 0;
  double position_error = 0.0;  // mm
  double rotation_error = 0.0;  // degrees
  double scaled_error = 0.0;    // mm-equivalent
  bool accepted = false;        // step passed the direction check
  double direction_dot = 0.0;   // position part of (J dp) . dx
  std::vector<double> actuation;  // generalized, after the step
};

struct RunReport {
  std::vector<IterationLog> log;
  bool converged = false;
  int iterations = 0;  // actuation steps issued
  std::string failure;
};

// Optional per-iteration goal, given the observed tip and iteration index.
using GoalProvider = std::function<pcc::Transform(const pcc::Transform&, int)>;

class JacobianController {
 public:
  JacobianController(std::vector<SingleSegJacobian> singles, ControllerParams params);

  const std::vector<SingleSegJacobian>& singles() const { return singles_; }
  const ControllerParams& params() const { return params_; }

  RunReport run(plant::SimulatedArm& arm, const pcc::Transform& goal,
                const GoalProvider& provider = {}) const;

 private:
  std::vector<SingleSegJacobian> singles_;
  ControllerParams params_;
};

// Generalized actuation of the arm's current command, one triple per segment.
std::vector<actuation::Generalized> generalized_state(const plant::ArmPlant& plant,
                                                      const plant::PressureCommand& cmd);
// Feasible command for a set of generalized triples (projected when needed).
plant::PressureCommand command_from_generalized(
    const plant::ArmPlant& plant, std::vector<actuation::Generalized>& g);

// The straight mid-elongation pose every spatial episode starts from.
plant::PressureCommand home_command(const plant::ArmPlant& plant);

}  // namespace softarm::jacobian
