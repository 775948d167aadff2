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

// Piecewise-constant-curvature kinematics: the planar chain used by the
// pose optimizer and the spatial transform algebra used by the Jacobian
// controller.
//
// Planar convention: each segment's local frame has +y along the starting
// tangent of its arc. A positive curvature bends the arc toward local +x,
// and the tangent angle theta is measured from +y toward +x.
//
// Spatial convention: a segment bends by angle `bend` in the plane at
// azimuth `azimuth` about its base z-axis, without torsion.

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace softarm::pcc {

inline constexpr double kStraightEpsilon = 1e-9;

struct ConfigurationSpace {
  std::vector<double> curvature;  // 1/mm
  std::vector<double> length;     // mm

  std::size_t size() const { return curvature.size(); }
  // theta_i = theta_{i-1} + k_i * l_i, starting from zero.
  std::vector<double> cumulative_angles() const;
  double total_angle() const;
};

struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

// Tip pose of every segment, in order, relative to the base frame.
std::vector<Pose2D> forward_2d(const ConfigurationSpace& config);

// Inverse of forward_2d from tip positions. Throws EstimationError on
// coincident tips or when a local tip falls outside the y' > 0 half-plane.
ConfigurationSpace estimate_params(const std::vector<double>& xs,
                                   const std::vector<double>& ys);
ConfigurationSpace estimate_params(const std::vector<Pose2D>& tips);

// Non-throwing variant used inside optimizers.
std::optional<ConfigurationSpace> try_estimate_params(
    const std::vector<double>& xs, const std::vector<double>& ys);

/// Homogeneous 4x4 transform with an orthonormal rotation block.
class Transform {
 public:
  Transform() : m_(Eigen::Matrix4d::Identity()) {}
  explicit Transform(const Eigen::Matrix4d& m) : m_(m) {}
  Transform(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& position);

  static Transform identity() { return Transform(); }
  static Transform translation(const Eigen::Vector3d& p);

  const Eigen::Matrix4d& matrix() const { return m_; }
  Eigen::Matrix3d rotation() const { return m_.topLeftCorner<3, 3>(); }
  Eigen::Vector3d position() const { return m_.topRightCorner<3, 1>(); }
  Eigen::Vector3d z_axis() const { return m_.block<3, 1>(0, 2); }

  // Closed-form rigid inverse (R^T, -R^T p).
  Transform inverse() const;
  Transform operator*(const Transform& rhs) const {
    return Transform(Eigen::Matrix4d(m_ * rhs.m_));
  }

  // ||R^T R - I|| (Frobenius).
  double orthonormality_error() const;

 private:
  Eigen::Matrix4d m_;
};

/// Tip state (x, y, z, theta_x, theta_y): theta_x and theta_y are the angles
/// between the base z-axis and the projections of the tip z-axis onto the
/// x-z and y-z planes.
struct TipVector5 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double theta_x = 0.0;
  double theta_y = 0.0;

  Eigen::Matrix<double, 5, 1> as_vector() const;
  static TipVector5 from_vector(const Eigen::Matrix<double, 5, 1>& v);
};

// Arc transform parameterised by azimuth, bend angle and arc length.
Transform arc_transform(double azimuth, double bend, double length);

// Rotation that tilts the z-axis by `bend` toward azimuth, with no twist.
Eigen::Matrix3d tilt_rotation(double azimuth, double bend);

// Projected angles -> (azimuth, bend). Throws RepresentationRangeError when
// the implied bend reaches 90 degrees.
struct Tilt {
  double azimuth = 0.0;
  double bend = 0.0;
};
Tilt projections_to_tilt(double theta_x, double theta_y);

// PCC arc whose tip orientation projects to (theta_x, theta_y).
Transform segment_transform(double theta_x, double theta_y, double length);

// Ordered product of the list (identity for an empty list).
Transform chain_transforms(const std::vector<Transform>& transforms);

// Throws RepresentationRangeError when the z-axis of `t` is 90 degrees or
// more from the base z-axis.
TipVector5 transform_to_vector(const Transform& t);

// Rebuilds a transform: translation from the position entries, twist-free
// rotation from the projected angles.
Transform vector_to_transform(const TipVector5& v);

// Angle between the z-axes of two rotations, radians.
double z_axis_angle(const Transform& a, const Transform& b);

// n-1 intermediate transforms between base and tip: positions linearly
// interpolated, rotations along the geodesic. Requires n >= 1.
std::vector<Transform> interpolate_intermediate(const Transform& base,
                                                const Transform& tip,
                                                std::size_t n);

// Planar pose embedded in the spatial frame: planar x -> x, planar y -> z,
// theta -> rotation about +y.
Transform planar_to_spatial(const Pose2D& pose);

}  // namespace softarm::pcc
