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

#include "softarm/pcc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "softarm/error.hpp"

namespace softarm::pcc {
namespace {

// Local arc endpoint, (0, l) in the straight limit.
Eigen::Vector2d arc_endpoint(double k, double l) {
  const double a = k * l;
  if (std::abs(a) < 1e-12) return {0.5 * k * l * l, l};
  const double s = std::sin(0.5 * a);
  return {2.0 * s * s / k, std::sin(a) / k};
}

}  // namespace

std::vector<double> ConfigurationSpace::cumulative_angles() const {
  std::vector<double> theta(size());
  double acc = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    acc += curvature[i] * length[i];
    theta[i] = acc;
  }
  return theta;
}

double ConfigurationSpace::total_angle() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < size(); ++i) acc += curvature[i] * length[i];
  return acc;
}

std::vector<Pose2D> forward_2d(const ConfigurationSpace& config) {
  std::vector<Pose2D> tips;
  tips.reserve(config.size());
  Pose2D cur;
  for (std::size_t i = 0; i < config.size(); ++i) {
    const Eigen::Vector2d local =
        arc_endpoint(config.curvature[i], config.length[i]);
    const double c = std::cos(cur.theta);
    const double s = std::sin(cur.theta);
    cur.x += c * local.x() + s * local.y();
    cur.y += -s * local.x() + c * local.y();
    cur.theta += config.curvature[i] * config.length[i];
    tips.push_back(cur);
  }
  return tips;
}

namespace {

enum class EstimateFailure { kNone, kDegenerate, kHalfPlane };

EstimateFailure estimate_into(const std::vector<double>& xs,
                              const std::vector<double>& ys,
                              ConfigurationSpace& out) {
  const std::size_t n = xs.size();
  out.curvature.assign(n, 0.0);
  out.length.assign(n, 0.0);
  double px = 0.0, py = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - px;
    const double dy = ys[i] - py;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double lx = c * dx - s * dy;
    const double ly = s * dx + c * dy;
    const double chord2 = lx * lx + ly * ly;
    if (chord2 < 1e-24) return EstimateFailure::kDegenerate;
    if (ly <= 0.0) return EstimateFailure::kHalfPlane;
    double k = 0.0, l = 0.0;
    if (std::abs(lx) < kStraightEpsilon) {
      l = std::sqrt(chord2);
    } else {
      k = 2.0 * lx / chord2;
      l = 2.0 * std::atan(lx / ly) / k;
    }
    out.curvature[i] = k;
    out.length[i] = l;
    theta += k * l;
    px = xs[i];
    py = ys[i];
  }
  return EstimateFailure::kNone;
}

}  // namespace

ConfigurationSpace estimate_params(const std::vector<double>& xs,
                                   const std::vector<double>& ys) {
  if (xs.size() != ys.size()) {
    throw DimensionMismatch("estimate_params: x/y length mismatch");
  }
  ConfigurationSpace out;
  switch (estimate_into(xs, ys, out)) {
    case EstimateFailure::kDegenerate:
      throw EstimationError("estimate_params: coincident consecutive tips");
    case EstimateFailure::kHalfPlane:
      throw EstimationError(
          "estimate_params: bend exceeds representable half-plane (y' <= 0)");
    case EstimateFailure::kNone:
      break;
  }
  return out;
}

ConfigurationSpace estimate_params(const std::vector<Pose2D>& tips) {
  std::vector<double> xs, ys;
  for (const auto& t : tips) {
    xs.push_back(t.x);
    ys.push_back(t.y);
  }
  return estimate_params(xs, ys);
}

std::optional<ConfigurationSpace> try_estimate_params(
    const std::vector<double>& xs, const std::vector<double>& ys) {
  ConfigurationSpace out;
  if (xs.size() != ys.size()) return std::nullopt;
  if (estimate_into(xs, ys, out) != EstimateFailure::kNone) return std::nullopt;
  return out;
}

Transform::Transform(const Eigen::Matrix3d& rotation,
                     const Eigen::Vector3d& position)
    : m_(Eigen::Matrix4d::Identity()) {
  m_.topLeftCorner<3, 3>() = rotation;
  m_.topRightCorner<3, 1>() = position;
}

Transform Transform::translation(const Eigen::Vector3d& p) {
  return Transform(Eigen::Matrix3d::Identity(), p);
}

Transform Transform::inverse() const {
  const Eigen::Matrix3d rt = rotation().transpose();
  return Transform(rt, -rt * position());
}

double Transform::orthonormality_error() const {
  const Eigen::Matrix3d r = rotation();
  return (r.transpose() * r - Eigen::Matrix3d::Identity()).norm();
}

Eigen::Matrix<double, 5, 1> TipVector5::as_vector() const {
  Eigen::Matrix<double, 5, 1> v;
  v << x, y, z, theta_x, theta_y;
  return v;
}

TipVector5 TipVector5::from_vector(const Eigen::Matrix<double, 5, 1>& v) {
  return {v(0), v(1), v(2), v(3), v(4)};
}

Eigen::Matrix3d tilt_rotation(double azimuth, double bend) {
  const Eigen::Matrix3d rz(Eigen::AngleAxisd(azimuth, Eigen::Vector3d::UnitZ()));
  const Eigen::Matrix3d ry(Eigen::AngleAxisd(bend, Eigen::Vector3d::UnitY()));
  return rz * ry * rz.transpose();
}

Transform arc_transform(double azimuth, double bend, double length) {
  Eigen::Vector3d p;
  if (std::abs(bend) < 1e-12) {
    const double lateral = 0.5 * bend * length;
    p << lateral * std::cos(azimuth), lateral * std::sin(azimuth), length;
  } else {
    const double r = length / bend;
    const double lateral = r * (1.0 - std::cos(bend));
    p << lateral * std::cos(azimuth), lateral * std::sin(azimuth),
        r * std::sin(bend);
  }
  return Transform(tilt_rotation(azimuth, bend), p);
}

Tilt projections_to_tilt(double theta_x, double theta_y) {
  constexpr double kHalfPi = 0.5 * std::numbers::pi;
  if (!(std::abs(theta_x) < kHalfPi) || !(std::abs(theta_y) < kHalfPi)) {
    throw RepresentationRangeError(
        "projected angle pair implies a bend of 90 degrees or more");
  }
  const double tx = std::tan(theta_x);
  const double ty = std::tan(theta_y);
  Tilt tilt;
  tilt.bend = std::atan(std::hypot(tx, ty));
  tilt.azimuth = (tx == 0.0 && ty == 0.0) ? 0.0 : std::atan2(ty, tx);
  return tilt;
}

Transform segment_transform(double theta_x, double theta_y, double length) {
  const Tilt tilt = projections_to_tilt(theta_x, theta_y);
  return arc_transform(tilt.azimuth, tilt.bend, length);
}

Transform chain_transforms(const std::vector<Transform>& transforms) {
  Eigen::Matrix4d acc = Eigen::Matrix4d::Identity();
  for (const auto& t : transforms) acc = acc * t.matrix();
  return Transform(acc);
}

TipVector5 transform_to_vector(const Transform& t) {
  const Eigen::Vector3d z = t.z_axis();
  if (!(z.z() > 0.0)) {
    throw RepresentationRangeError(
        "tip z-axis is 90 degrees or more from the base z-axis");
  }
  const Eigen::Vector3d p = t.position();
  return {p.x(), p.y(), p.z(), std::atan2(z.x(), z.z()),
          std::atan2(z.y(), z.z())};
}

Transform vector_to_transform(const TipVector5& v) {
  const Tilt tilt = projections_to_tilt(v.theta_x, v.theta_y);
  return Transform(tilt_rotation(tilt.azimuth, tilt.bend),
                   Eigen::Vector3d(v.x, v.y, v.z));
}

double z_axis_angle(const Transform& a, const Transform& b) {
  const double c = std::clamp(a.z_axis().dot(b.z_axis()), -1.0, 1.0);
  return std::acos(c);
}

std::vector<Transform> interpolate_intermediate(const Transform& base,
                                                const Transform& tip,
                                                std::size_t n) {
  if (n < 1) throw std::invalid_argument("interpolate_intermediate: n < 1");
  const Eigen::Matrix3d rb = base.rotation();
  const Eigen::AngleAxisd rel(Eigen::Matrix3d(rb.transpose() * tip.rotation()));
  const Eigen::Vector3d pb = base.position();
  const Eigen::Vector3d pt = tip.position();
  std::vector<Transform> out;
  out.reserve(n - 1);
  for (std::size_t i = 1; i < n; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(n);
    const Eigen::Matrix3d r =
        rb * Eigen::AngleAxisd(s * rel.angle(), rel.axis()).toRotationMatrix();
    out.emplace_back(r, (1.0 - s) * pb + s * pt);
  }
  return out;
}

Transform planar_to_spatial(const Pose2D& pose) {
  const Eigen::Matrix3d r(
      Eigen::AngleAxisd(pose.theta, Eigen::Vector3d::UnitY()));
  return Transform(r, Eigen::Vector3d(pose.x, 0.0, pose.y));
}

}  // namespace softarm::pcc
