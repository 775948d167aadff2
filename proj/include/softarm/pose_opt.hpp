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

// Task-space target to configuration-space pose through a three-term cost:
//
//   Cost1 = sum_i sqrt(f_i^2 + delta^2) + f_i        feasibility
//   Cost2 = (theta_t - theta_r - theta_n)^4           arrival orientation
//   Cost3 = sum_i u_l,i^2 + u_k,i^2                   uniformity
//
// with f_i = |2(l_i - l_avg)/(l_max - l_min)| + |2(k_i - k_avg)/(k_max - k_min)| - 1.
// The decision variables are the middle segment tips; the final tip is pinned
// to the target and each candidate is mapped back to (K, L) by estimate_params.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "softarm/pcc.hpp"
#include "softarm/plant.hpp"

namespace softarm::poseopt {

struct SegmentLimits {
  double k_min = 0.0, k_max = 0.0, k_avg = 0.0;  // 1/mm
  double l_min = 0.0, l_max = 0.0, l_avg = 0.0;  // mm

  // Region the plant reaches under any in-range command.
  static SegmentLimits from_spec(const plant::SegmentSpec& spec);
  void validate() const;
};

std::vector<SegmentLimits> limits_from_plant(const plant::ArmPlant& plant);

struct CostWeights {
  double alpha = 100.0;
  double beta = 10.0;
  double gamma = 1.0;
  double delta = 1e-3;

  void validate() const;
};

struct Target2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double theta_root = 0.0;
};

// Per-segment f_i; f_i <= 0 inside the feasible diamond.
std::vector<double> feasibility_margins(const pcc::ConfigurationSpace& config,
                                        const std::vector<SegmentLimits>& limits);
double cost_feasibility(const pcc::ConfigurationSpace& config,
                        const std::vector<SegmentLimits>& limits, double delta);
double orientation_deviation(const pcc::ConfigurationSpace& config,
                             const Target2D& target);
double cost_orientation(const pcc::ConfigurationSpace& config,
                        const Target2D& target);
double cost_uniformity(const pcc::ConfigurationSpace& config,
                       const std::vector<SegmentLimits>& limits);
double total_cost(const pcc::ConfigurationSpace& config, const Target2D& target,
                  const std::vector<SegmentLimits>& limits,
                  const CostWeights& weights);

// Objective over the packed middle tips (x_1, y_1, ..., x_{n-1}, y_{n-1}).
// Returns +inf where estimate_params is undefined.
class TipObjective {
 public:
  TipObjective(Target2D target, std::vector<SegmentLimits> limits,
               CostWeights weights);

  std::size_t dimension() const { return 2 * (limits_.size() - 1); }
  const CostWeights& weights() const { return weights_; }
  void set_weights(const CostWeights& w) { weights_ = w; }

  double operator()(const std::vector<double>& free_tips) const;
  // Configuration for the packed tips; nullopt when no arc chain fits.
  std::optional<pcc::ConfigurationSpace> config(
      const std::vector<double>& free_tips) const;
  std::vector<double> pack(const pcc::ConfigurationSpace& config) const;

 private:
  Target2D target_;
  std::vector<SegmentLimits> limits_;
  CostWeights weights_;
};

// Five-point stencil with per-coordinate step h.
std::vector<double> numeric_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x, double h);

struct OptimizerOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-6;
  double cost_tolerance = 1e-10;
  int restarts = 5;
  double jitter = 0.1;  // fraction of the average segment length
  // The quartic orientation term is flat at its minimum; the orientation
  // weight is raised by `continuation_factor` per stage until the residual
  // deviation drops below `orientation_tolerance`.
  double orientation_tolerance = 1e-4;
  double continuation_factor = 100.0;
  int max_stages = 8;
  double feasibility_tolerance = 1e-6;
};

struct PoseResult {
  pcc::ConfigurationSpace config;
  double cost = 0.0;  // at the nominal weights
  double orientation_error = 0.0;
  double max_margin = 0.0;
  int restart = 0;
  int iterations = 0;
  // Accepted costs per continuation stage, each at that stage's weights.
  std::vector<std::vector<double>> traces;
};

// Throws UnreachableTarget when the target lies outside the reach disc or
// every restart ends infeasible.
PoseResult optimize_pose(const Target2D& target,
                         const std::vector<SegmentLimits>& limits,
                         const CostWeights& weights, std::uint64_t seed,
                         const OptimizerOptions& options = {});

}  // namespace softarm::poseopt
