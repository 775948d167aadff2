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

#include "softarm/plant.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "softarm/actuation.hpp"
#include "softarm/error.hpp"

namespace softarm::plant {
namespace {

std::string describe_channel(std::size_t seg, std::size_t ch, double v,
                             double hi) {
  std::ostringstream os;
  os << "pressure " << v << " MPa on segment " << seg << " channel " << ch
     << " outside [0, " << hi << "]";
  return os.str();
}

// Clamp a curvature vector to the magnitude bound.
void clamp_curvature(SegmentPose& pose, double k_max) {
  const double k = pose.curvature();
  if (k > k_max) {
    const double s = k_max / k;
    pose.curvature_x *= s;
    pose.curvature_y *= s;
  }
}

}  // namespace

void SegmentSpec::validate() const {
  auto fail = [](const char* what) { throw ConfigError(what); };
  if (!(rest_length > 0.0)) fail("rest_length must be positive");
  if (!(max_elongation > 0.0)) fail("max_elongation must be positive");
  if (!(max_curvature > 0.0)) fail("max_curvature must be positive");
  if (!(bend_gain > 0.0)) fail("bend_gain must be positive");
  if (!(elong_gain > 0.0)) fail("elong_gain must be positive");
  if (!(pressure_max > 0.0)) fail("pressure_max must be positive");
  if (!(compliance >= 0.0)) fail("compliance must be non-negative");
  if (!(memory >= 0.0 && memory < 1.0)) fail("memory must lie in [0, 1)");
  if (!(max_curvature * rest_length < 0.5 * std::numbers::pi)) {
    fail("max_curvature * rest_length must stay below pi/2");
  }
}

double SegmentPose::curvature() const {
  return std::hypot(curvature_x, curvature_y);
}

PressureCommand::PressureCommand(Dimensionality dims, std::size_t segments)
    : dims_(dims), segments_(segments), values_(segments * channels(), 0.0) {}

ArmPlant::ArmPlant(Dimensionality dims, std::vector<SegmentSpec> specs)
    : dims_(dims), specs_(std::move(specs)) {
  if (specs_.empty()) throw ConfigError("plant needs at least one segment");
  for (const auto& s : specs_) s.validate();
}

ArmPlant ArmPlant::planar_default(std::size_t segments) {
  return ArmPlant(Dimensionality::kPlanar,
                  std::vector<SegmentSpec>(segments, SegmentSpec{}));
}

ArmPlant ArmPlant::qlearning_default() {
  SegmentSpec s;
  s.rest_length = 60.0;
  s.max_elongation = 30.0;
  s.max_curvature = 0.008;
  return ArmPlant(Dimensionality::kPlanar, std::vector<SegmentSpec>(4, s));
}

ArmPlant ArmPlant::spatial_default(std::size_t segments) {
  SegmentSpec s;
  s.rest_length = 50.0;
  s.max_elongation = 25.0;
  s.max_curvature = 0.012;
  return ArmPlant(Dimensionality::kSpatial,
                  std::vector<SegmentSpec>(segments, s));
}

ArmPlant ArmPlant::with_memory(double eta) const {
  auto specs = specs_;
  for (auto& s : specs) s.memory = eta;
  return ArmPlant(dims_, std::move(specs));
}

PlantState ArmPlant::rest_state() const {
  PlantState st;
  st.dims = dims_;
  for (const auto& s : specs_) st.poses.push_back({0.0, 0.0, s.rest_length});
  return st;
}

PressureCommand ArmPlant::zero_command() const {
  return PressureCommand(dims_, segments());
}

void ArmPlant::validate(const PressureCommand& cmd) const {
  if (cmd.dims() != dims_ || cmd.segments() != segments()) {
    throw CommandRejected("command layout does not match the plant");
  }
  for (std::size_t i = 0; i < segments(); ++i) {
    const double hi = specs_[i].pressure_max;
    for (std::size_t c = 0; c < cmd.channels(); ++c) {
      const double v = cmd.at(i, c);
      if (!(v >= 0.0 && v <= hi)) {
        throw CommandRejected(describe_channel(i, c, v, hi));
      }
    }
    if (dims_ == Dimensionality::kSpatial) {
      const double gap =
          (cmd.at(i, 0) + cmd.at(i, 3)) - (cmd.at(i, 1) + cmd.at(i, 2));
      if (std::abs(gap) > 1e-9) {
        std::ostringstream os;
        os << "segment " << i << " violates p1 + p4 = p2 + p3 (gap " << gap
           << ")";
        throw CommandRejected(os.str());
      }
    }
  }
}

SegmentPose ArmPlant::response(std::size_t segment,
                               std::span<const double> channels,
                               const Disturbance& dist) const {
  const SegmentSpec& s = specs_.at(segment);
  const bool swap = dist.channel_swap && *dist.channel_swap == segment;
  SegmentPose pose;
  const double offset = s.compliance * dist.total_force();
  if (dims_ == Dimensionality::kPlanar) {
    double pl = channels[0], pr = channels[1];
    if (swap) std::swap(pl, pr);
    pose.curvature_x =
        s.max_curvature * std::tanh(s.bend_gain * (pr - pl) / s.pressure_max);
    const double e =
        std::clamp(s.elong_gain * (pl + pr) / (2.0 * s.pressure_max), 0.0, 1.0);
    pose.length = s.rest_length + s.max_elongation * e;
    pose.curvature_x += offset * std::cos(dist.force_direction);
    pose.curvature_x =
        std::clamp(pose.curvature_x, -s.max_curvature, s.max_curvature);
    return pose;
  }
  actuation::Airbags p{channels[0], channels[1], channels[2], channels[3]};
  if (swap) p = {p[1], p[0], p[3], p[2]};
  const actuation::Generalized g = actuation::airbag_to_generalized(p);
  const double e =
      std::clamp(s.elong_gain * g.z / (4.0 * s.pressure_max), 0.0, 1.0);
  pose.length = s.rest_length + s.max_elongation * e;
  // The tanh law sets the bend angle, so elongation keeps the angle fixed.
  const double bend = std::hypot(g.x, g.y);
  const double angle = s.max_curvature * s.rest_length *
                       std::tanh(s.bend_gain * bend / (2.0 * s.pressure_max));
  if (bend > 0.0) {
    const double k = angle / pose.length;
    pose.curvature_x = k * g.x / bend;
    pose.curvature_y = k * g.y / bend;
  }
  pose.curvature_x += offset * std::cos(dist.force_direction);
  pose.curvature_y += offset * std::sin(dist.force_direction);
  clamp_curvature(pose, s.max_curvature);
  return pose;
}

PlantState ArmPlant::step(const PlantState& state, const PressureCommand& cmd,
                          const Disturbance& dist) const {
  validate(cmd);
  if (dist.channel_swap && *dist.channel_swap >= segments()) {
    throw CommandRejected("channel_swap index beyond segment count");
  }
  if (state.poses.size() != segments()) {
    throw DimensionMismatch("state does not match plant segment count");
  }
  PlantState next = state;
  for (std::size_t i = 0; i < segments(); ++i) {
    const SegmentPose target = response(i, cmd.segment(i), dist);
    const double eta = specs_[i].memory;
    const SegmentPose& prev = state.poses[i];
    SegmentPose& out = next.poses[i];
    out.curvature_x = (1.0 - eta) * target.curvature_x + eta * prev.curvature_x;
    out.curvature_y = (1.0 - eta) * target.curvature_y + eta * prev.curvature_y;
    out.length = (1.0 - eta) * target.length + eta * prev.length;
    clamp_curvature(out, specs_[i].max_curvature);
    out.length = std::clamp(out.length, specs_[i].min_length(),
                            specs_[i].max_length());
  }
  ++next.steps;
  return next;
}

PlantState ArmPlant::settle(const PressureCommand& cmd,
                            const Disturbance& dist) const {
  validate(cmd);
  PlantState st = rest_state();
  for (std::size_t i = 0; i < segments(); ++i) {
    st.poses[i] = response(i, cmd.segment(i), dist);
  }
  return st;
}

pcc::ConfigurationSpace ArmPlant::planar_config(const PlantState& state) const {
  pcc::ConfigurationSpace c;
  for (const auto& p : state.poses) {
    c.curvature.push_back(p.curvature_x);
    c.length.push_back(p.length);
  }
  return c;
}

std::vector<pcc::Transform> ArmPlant::segment_transforms(
    const PlantState& state) const {
  std::vector<pcc::Transform> out;
  out.reserve(state.poses.size());
  for (const auto& p : state.poses) {
    const double k = p.curvature();
    const double azimuth = k > 0.0 ? std::atan2(p.curvature_y, p.curvature_x) : 0.0;
    out.push_back(pcc::arc_transform(azimuth, k * p.length, p.length));
  }
  return out;
}

std::vector<pcc::Transform> ArmPlant::tip_transforms(
    const PlantState& state) const {
  std::vector<pcc::Transform> out;
  pcc::Transform acc;
  for (const auto& rel : segment_transforms(state)) {
    acc = acc * rel;
    out.push_back(acc);
  }
  return out;
}

Observation ArmPlant::observe(const PlantState& state, const Disturbance& dist,
                              std::uint64_t seed) const {
  Observation obs;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double sigma = dist.sensor_noise_sigma;
  if (dims_ == Dimensionality::kPlanar) {
    obs.planar = pcc::forward_2d(planar_config(state));
    if (sigma > 0.0) {
      for (auto& p : obs.planar) {
        p.x += sigma * noise(rng);
        p.y += sigma * noise(rng);
      }
    }
    return obs;
  }
  obs.spatial = tip_transforms(state);
  if (sigma > 0.0) {
    for (auto& t : obs.spatial) {
      const Eigen::Vector3d jitter(noise(rng), noise(rng), noise(rng));
      t = pcc::Transform(t.rotation(), t.position() + sigma * jitter);
    }
  }
  return obs;
}

void ArmPlant::check_state(const PlantState& state) const {
  for (std::size_t i = 0; i < segments(); ++i) {
    const auto& p = state.poses.at(i);
    const auto& s = specs_[i];
    if (p.curvature() > s.max_curvature * (1.0 + 1e-12) ||
        p.length < s.min_length() - 1e-9 || p.length > s.max_length() + 1e-9) {
      std::ostringstream os;
      os << "segment " << i << " pose out of bounds (k=" << p.curvature()
         << ", l=" << p.length << ")";
      throw Error(os.str());
    }
  }
}

SimulatedArm::SimulatedArm(ArmPlant plant, Disturbance dist, std::uint64_t seed)
    : plant_(std::move(plant)), dist_(dist), seed_(seed) {
  reset();
}

void SimulatedArm::reset() {
  state_ = plant_.rest_state();
  command_ = plant_.zero_command();
  observations_ = 0;
}

void SimulatedArm::set_state(const PlantState& state,
                             const PressureCommand& cmd) {
  plant_.validate(cmd);
  state_ = state;
  command_ = cmd;
}

void SimulatedArm::apply(const PressureCommand& cmd) {
  state_ = plant_.step(state_, cmd, dist_);
  command_ = cmd;
}

void SimulatedArm::settle() {
  const std::size_t steps = state_.steps;
  state_ = plant_.settle(command_, dist_);
  state_.steps = steps;
}

Observation SimulatedArm::observe() {
  // splitmix-style decorrelation of consecutive readouts
  std::uint64_t z = seed_ + 0x9E3779B97F4A7C15ULL * (++observations_);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return plant_.observe(state_, dist_, z ^ (z >> 31));
}

namespace {

void set_field(SegmentSpec& s, const std::string& key, double v) {
  if (key == "rest_length") s.rest_length = v;
  else if (key == "max_elongation") s.max_elongation = v;
  else if (key == "max_curvature") s.max_curvature = v;
  else if (key == "bend_gain") s.bend_gain = v;
  else if (key == "elong_gain") s.elong_gain = v;
  else if (key == "pressure_max") s.pressure_max = v;
  else if (key == "memory") s.memory = v;
  else if (key == "compliance") s.compliance = v;
  else throw ConfigError("unknown plant field '" + key + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size()) {
    throw ConfigError("value for '" + key + "' is not a number: " + text);
  }
  return v;
}

}  // namespace

ArmPlant parse_plant_config(const std::string& text) {
  Dimensionality dims = Dimensionality::kPlanar;
  std::size_t count = 3;
  std::vector<std::pair<std::string, double>> shared;
  std::vector<std::tuple<std::size_t, std::string, double>> overrides;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "dims") {
      if (value == "planar") dims = Dimensionality::kPlanar;
      else if (value == "spatial") dims = Dimensionality::kSpatial;
      else throw ConfigError("dims must be planar or spatial");
    } else if (key == "segments") {
      const double v = parse_number(key, value);
      if (!(v >= 1.0) || v != std::floor(v)) {
        throw ConfigError("segments must be a positive integer");
      }
      count = static_cast<std::size_t>(v);
    } else if (key.rfind("segment.", 0) == 0) {
      const auto dot = key.find('.', 8);
      if (dot == std::string::npos) throw ConfigError("malformed key " + key);
      const std::size_t idx = std::stoul(key.substr(8, dot - 8));
      overrides.emplace_back(idx, key.substr(dot + 1), parse_number(key, value));
    } else {
      shared.emplace_back(key, parse_number(key, value));
    }
  }
  std::vector<SegmentSpec> specs(count);
  for (auto& s : specs) {
    if (dims == Dimensionality::kSpatial) {
      s = ArmPlant::spatial_default(1).spec(0);
    }
    for (const auto& [k, v] : shared) set_field(s, k, v);
  }
  for (const auto& [i, k, v] : overrides) {
    if (i >= count) throw ConfigError("segment override index out of range");
    set_field(specs[i], k, v);
  }
  return ArmPlant(dims, std::move(specs));
}

ArmPlant load_plant_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open plant config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_plant_config(ss.str());
}

}  // namespace softarm::plant
