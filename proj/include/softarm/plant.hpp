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

// Synthetic pneumatic arm used as ground truth by every controller.
//
// Each segment is quasi-static. A command produces a target pose through a
// saturating response law, a lateral tip force adds a curvature offset, and
// the realized pose blends the target with the previous pose through a
// single-pole memory (viscoelasticity):
//
//   planar:  k* = k_max * tanh(g_b * (p_r - p_l) / p_max)
//            l* = l_rest + dl_max * clip(g_e * (p_l + p_r) / (2 p_max))
//   spatial: the airbag quadruple reduces to (p_sx, p_sy, p_sz); the bend
//            azimuth is atan2(p_sy, p_sx), the bend angle is
//            k_max * l_rest * tanh(g_b * |(p_sx, p_sy)| / (2 p_max)) and the
//            length follows p_sz / (4 p_max).
//   realized = (1 - eta) * target + eta * previous

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "softarm/pcc.hpp"

namespace softarm::plant {

inline constexpr double kNewtonPerGram = 9.81e-3;

enum class Dimensionality { kPlanar, kSpatial };

struct SegmentSpec {
  double rest_length = 60.0;     // mm
  double max_elongation = 30.0;  // mm
  double max_curvature = 0.015;  // 1/mm
  double bend_gain = 1.0;        // tanh argument per normalized pressure
  double elong_gain = 1.0;       // normalized elongation per pressure sum
  double pressure_max = 0.3;     // MPa
  double memory = 0.2;           // eta in [0, 1)
  double compliance = 2e-3;      // curvature (1/mm) per N of lateral force

  double min_length() const { return rest_length; }
  double max_length() const { return rest_length + max_elongation; }
  // Throws ConfigError when an invariant is violated.
  void validate() const;
};

// Realized pose of one segment. Planar segments keep curvature_y == 0.
struct SegmentPose {
  double curvature_x = 0.0;
  double curvature_y = 0.0;
  double length = 0.0;

  double curvature() const;
};

struct PlantState {
  Dimensionality dims = Dimensionality::kPlanar;
  std::vector<SegmentPose> poses;  // doubles as the memory of the next step
  std::size_t steps = 0;
};

struct Disturbance {
  double lateral_force = 0.0;    // N, applied at the tip
  double tip_load = 0.0;         // g, converted at 9.81e-3 N/g
  double force_direction = 0.0;  // rad, heading in the base x-y plane
  std::optional<std::size_t> channel_swap;
  double sensor_noise_sigma = 0.0;  // mm

  double total_force() const { return lateral_force + tip_load * kNewtonPerGram; }
};

// Per-segment airbag pressures: (p_l, p_r) for planar, (p_s1..p_s4) for
// spatial segments.
class PressureCommand {
 public:
  PressureCommand() = default;
  PressureCommand(Dimensionality dims, std::size_t segments);

  Dimensionality dims() const { return dims_; }
  std::size_t segments() const { return segments_; }
  std::size_t channels() const { return dims_ == Dimensionality::kPlanar ? 2 : 4; }

  double& at(std::size_t segment, std::size_t channel) {
    return values_[segment * channels() + channel];
  }
  double at(std::size_t segment, std::size_t channel) const {
    return values_[segment * channels() + channel];
  }
  std::span<const double> segment(std::size_t i) const {
    return {values_.data() + i * channels(), channels()};
  }
  const std::vector<double>& values() const { return values_; }

  bool operator==(const PressureCommand&) const = default;

 private:
  Dimensionality dims_ = Dimensionality::kPlanar;
  std::size_t segments_ = 0;
  std::vector<double> values_;
};

struct Observation {
  std::vector<pcc::Pose2D> planar;      // planar plants
  std::vector<pcc::Transform> spatial;  // spatial plants, base frame

  pcc::Pose2D planar_tip() const { return planar.back(); }
  pcc::Transform spatial_tip() const { return spatial.back(); }
};

class ArmPlant {
 public:
  ArmPlant(Dimensionality dims, std::vector<SegmentSpec> specs);

  // 3 planar segments, the layout used by the model-based and comparative
  // experiments.
  static ArmPlant planar_default(std::size_t segments = 3);
  // 4 planar segments sized for the 480 mm Q-learning partition.
  static ArmPlant qlearning_default();
  static ArmPlant spatial_default(std::size_t segments = 5);

  Dimensionality dims() const { return dims_; }
  std::size_t segments() const { return specs_.size(); }
  const SegmentSpec& spec(std::size_t i) const { return specs_.at(i); }
  const std::vector<SegmentSpec>& specs() const { return specs_; }
  ArmPlant with_memory(double eta) const;

  PlantState rest_state() const;
  PressureCommand zero_command() const;

  // Throws CommandRejected with the offending channel and bound.
  void validate(const PressureCommand& cmd) const;

  // Steady-state pose of one segment for its raw channels, before memory.
  SegmentPose response(std::size_t segment, std::span<const double> channels,
                       const Disturbance& dist) const;

  PlantState step(const PlantState& state, const PressureCommand& cmd,
                  const Disturbance& dist) const;
  // Pose the arm converges to when `cmd` is held (memory ignored).
  PlantState settle(const PressureCommand& cmd, const Disturbance& dist) const;

  // Marker readout with zero-mean Gaussian position noise; deterministic
  // per seed.
  Observation observe(const PlantState& state, const Disturbance& dist,
                      std::uint64_t seed) const;

  pcc::ConfigurationSpace planar_config(const PlantState& state) const;
  // Relative transforms {}^{i-1}T_i of every segment.
  std::vector<pcc::Transform> segment_transforms(const PlantState& state) const;
  // Absolute tip transforms T_1..T_n (spatial or embedded planar).
  std::vector<pcc::Transform> tip_transforms(const PlantState& state) const;

  // Throws when a state violates curvature/length bounds.
  void check_state(const PlantState& state) const;

 private:
  Dimensionality dims_;
  std::vector<SegmentSpec> specs_;
};

// Owns a plant, its current state, the active disturbance and the last
// command. Controllers drive one of these per episode.
class SimulatedArm {
 public:
  SimulatedArm(ArmPlant plant, Disturbance dist = {}, std::uint64_t seed = 0);

  const ArmPlant& plant() const { return plant_; }
  const PlantState& state() const { return state_; }
  const Disturbance& disturbance() const { return dist_; }
  const PressureCommand& command() const { return command_; }
  void set_disturbance(const Disturbance& dist) { dist_ = dist; }
  void reset();
  void set_state(const PlantState& state, const PressureCommand& cmd);

  void apply(const PressureCommand& cmd);
  // Holds the current command until the memory has decayed below 1e-12.
  void settle();
  // Each call draws fresh noise from a counter-based seed sequence.
  Observation observe();

 private:
  ArmPlant plant_;
  Disturbance dist_;
  std::uint64_t seed_;
  std::uint64_t observations_ = 0;
  PlantState state_;
  PressureCommand command_;
};

// Key/value plant description:
//
//   dims = planar | spatial
//   segments = 3
//   <field> = value             applies to every segment
//   segment.<i>.<field> = value overrides segment i (0-based)
//
// Fields: rest_length, max_elongation, max_curvature, bend_gain, elong_gain,
// pressure_max, memory, compliance. Lines starting with '#' are comments.
ArmPlant parse_plant_config(const std::string& text);
ArmPlant load_plant_config(const std::string& path);

}  // namespace softarm::plant
