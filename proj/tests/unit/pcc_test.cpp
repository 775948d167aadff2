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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "softarm/error.hpp"

namespace softarm::pcc {
namespace {

constexpr double kPi = std::numbers::pi;

// Independent forward kinematics: integrate the arc as a dense polyline.
Pose2D integrate_arc_chain(const ConfigurationSpace& c) {
  Pose2D p;
  const int steps = 20000;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double ds = c.length[i] / steps;
    for (int s = 0; s < steps; ++s) {
      const double mid = p.theta + 0.5 * ds * c.curvature[i];
      p.x += ds * std::sin(mid);
      p.y += ds * std::cos(mid);
      p.theta += ds * c.curvature[i];
    }
  }
  return p;
}

ConfigurationSpace random_config(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> len(0.5, 3.0);
  std::uniform_real_distribution<double> bend(-0.95 * kPi, 0.95 * kPi);
  ConfigurationSpace c;
  for (std::size_t i = 0; i < n; ++i) {
    const double l = len(rng);
    c.length.push_back(l);
    c.curvature.push_back(bend(rng) / l);
  }
  return c;
}

Eigen::Matrix4d random_rigid(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = q.toRotationMatrix();
  m.topRightCorner<3, 1>() = Eigen::Vector3d(g(rng), g(rng), g(rng)) * 20.0;
  return m;
}

TEST(ForwardKinematics, QuarterCircle) {
  const auto tips = forward_2d({{1.0}, {kPi / 2}});
  ASSERT_EQ(tips.size(), 1u);
  EXPECT_NEAR(tips[0].x, 1.0, 1e-12);
  EXPECT_NEAR(tips[0].y, 1.0, 1e-12);
  EXPECT_NEAR(tips[0].theta, kPi / 2, 1e-12);
}

TEST(ForwardKinematics, StraightLimit) {
  const auto tips = forward_2d({{0.0}, {2.0}});
  EXPECT_DOUBLE_EQ(tips[0].x, 0.0);
  EXPECT_DOUBLE_EQ(tips[0].y, 2.0);
  EXPECT_DOUBLE_EQ(tips[0].theta, 0.0);
  const auto near = forward_2d({{1e-14}, {2.0}});
  EXPECT_NEAR(near[0].x, 0.0, 1e-12);
  EXPECT_NEAR(near[0].y, 2.0, 1e-12);
}

TEST(ForwardKinematics, CurvatureTwoQuarterTurn) {
  const auto tips = forward_2d({{2.0}, {kPi / 4}});
  EXPECT_NEAR(tips[0].x, 0.5, 1e-12);
  EXPECT_NEAR(tips[0].y, 0.5, 1e-12);
}

TEST(ForwardKinematics, ScaledNumericExample) {
  // k l = 0.5 rad case from the arc endpoint formula.
  const auto tips = forward_2d({{2.0}, {0.25}});
  EXPECT_NEAR(tips[0].x, 0.061209, 1e-6);
  EXPECT_NEAR(tips[0].y, 0.239713, 1e-6);
}

TEST(ForwardKinematics, MatchesNumericIntegration) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const auto c = random_config(rng, 3);
    const Pose2D ref = integrate_arc_chain(c);
    const Pose2D tip = forward_2d(c).back();
    EXPECT_NEAR(tip.x, ref.x, 1e-7);
    EXPECT_NEAR(tip.y, ref.y, 1e-7);
    EXPECT_NEAR(tip.theta, ref.theta, 1e-9);
  }
}

TEST(ForwardKinematics, CumulativeAngleRecurrence) {
  const ConfigurationSpace c{{0.1, -0.3, 0.2}, {2.0, 1.0, 1.5}};
  const auto theta = c.cumulative_angles();
  EXPECT_DOUBLE_EQ(theta[0], 0.2);
  EXPECT_DOUBLE_EQ(theta[1], theta[0] + (-0.3));
  EXPECT_DOUBLE_EQ(theta[2], theta[1] + 0.3);
  const auto tips = forward_2d(c);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(tips[i].theta, theta[i]);
}

TEST(EstimateParams, QuarterCircle) {
  const auto c = estimate_params(std::vector<double>{1.0}, std::vector<double>{1.0});
  EXPECT_NEAR(c.curvature[0], 1.0, 1e-12);
  EXPECT_NEAR(c.length[0], kPi / 2, 1e-12);
  EXPECT_NEAR(c.total_angle(), kPi / 2, 1e-12);
}

TEST(EstimateParams, Straight) {
  const auto c = estimate_params(std::vector<double>{0.0}, std::vector<double>{2.0});
  EXPECT_EQ(c.curvature[0], 0.0);
  EXPECT_DOUBLE_EQ(c.length[0], 2.0);
}

TEST(EstimateParams, TwoSegmentRoundtrip) {
  const ConfigurationSpace c{{0.5, -0.8}, {1.0, 1.2}};
  const auto back = estimate_params(forward_2d(c));
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(back.curvature[i], c.curvature[i], 1e-9);
    EXPECT_NEAR(back.length[i], c.length[i], 1e-9);
  }
}

TEST(EstimateParams, RejectsHalfPlaneAndCoincidentTips) {
  EXPECT_THROW(estimate_params(std::vector<double>{1.0}, std::vector<double>{-0.5}),
               EstimationError);
  EXPECT_THROW(estimate_params(std::vector<double>{1.0, 1.0},
                               std::vector<double>{1.0, 1.0}),
               EstimationError);
  EXPECT_THROW(estimate_params(std::vector<double>{1.0}, std::vector<double>{}),
               DimensionMismatch);
  EXPECT_FALSE(try_estimate_params({1.0}, {-0.5}).has_value());
}

TEST(EstimateParams, PrintedLocalRotationIsConsistent) {
  // The local-frame rotation must invert the global chaining: rotating the
  // second segment's global delta into the first tip's frame recovers the
  // local arc endpoint.
  const ConfigurationSpace c{{0.6, 0.4}, {1.0, 1.5}};
  const auto tips = forward_2d(c);
  const double th = tips[0].theta;
  const double dx = tips[1].x - tips[0].x;
  const double dy = tips[1].y - tips[0].y;
  const double lx = std::cos(th) * dx - std::sin(th) * dy;
  const double ly = std::sin(th) * dx + std::cos(th) * dy;
  const auto local = forward_2d({{0.4}, {1.5}})[0];
  EXPECT_NEAR(lx, local.x, 1e-12);
  EXPECT_NEAR(ly, local.y, 1e-12);
}

TEST(EstimateParams, RoundtripProperty) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const auto c = random_config(rng, 1 + trial % 5);
    const auto tips = forward_2d(c);
    const auto back = estimate_params(tips);
    for (std::size_t i = 0; i < c.size(); ++i) {
      EXPECT_NEAR(back.curvature[i], c.curvature[i], 1e-9);
      EXPECT_NEAR(back.length[i], c.length[i], 1e-9);
    }
    const auto again = forward_2d(back);
    for (std::size_t i = 0; i < c.size(); ++i) {
      EXPECT_NEAR(again[i].x, tips[i].x, 1e-9);
      EXPECT_NEAR(again[i].y, tips[i].y, 1e-9);
    }
  }
}

TEST(Transform, InverseMatchesGeneralInverse) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const Transform t(random_rigid(rng));
    const Eigen::Matrix4d oracle = t.matrix().inverse();
    EXPECT_LT((t.inverse().matrix() - oracle).norm(), 1e-12);
  }
}

TEST(SegmentTransform, StraightIsTranslation) {
  const Transform t = segment_transform(0.0, 0.0, 7.0);
  EXPECT_LT((t.matrix() - Transform::translation({0, 0, 7.0}).matrix()).norm(),
            1e-15);
}

TEST(SegmentTransform, PlanarReduction) {
  for (double a : {-1.2, -0.3, 0.4, 1.3}) {
    const double l = 2.5;
    const Transform t = segment_transform(a, 0.0, l);
    const Pose2D p = forward_2d({{a / l}, {l}})[0];
    const Transform ref = planar_to_spatial(p);
    EXPECT_LT((t.matrix() - ref.matrix()).norm(), 1e-12) << a;
  }
}

TEST(SegmentTransform, ProjectionRoundtrip) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ang(-1.4, 1.4);
  for (int i = 0; i < 200; ++i) {
    const double a = ang(rng), b = ang(rng);
    const Transform t = segment_transform(a, b, 3.0);
    EXPECT_LT(t.orthonormality_error(), 1e-12);
    const TipVector5 v = transform_to_vector(t);
    EXPECT_NEAR(v.theta_x, a, 1e-9);
    EXPECT_NEAR(v.theta_y, b, 1e-9);
  }
}

TEST(SegmentTransform, RangeErrors) {
  EXPECT_THROW(segment_transform(kPi / 2, 0.0, 1.0), RepresentationRangeError);
  EXPECT_THROW(segment_transform(0.0, -2.0, 1.0), RepresentationRangeError);
  const Transform flipped(
      Eigen::Matrix3d(Eigen::AngleAxisd(2.0, Eigen::Vector3d::UnitX())),
      Eigen::Vector3d::Zero());
  EXPECT_THROW(transform_to_vector(flipped), RepresentationRangeError);
}

TEST(SegmentTransform, ArcLengthIsPreserved) {
  // The tip of a bent arc lies on the circle of radius l / bend.
  const Transform t = arc_transform(0.7, 1.1, 4.0);
  const double r = 4.0 / 1.1;
  const Eigen::Vector3d centre(r * std::cos(0.7), r * std::sin(0.7), 0.0);
  EXPECT_NEAR((t.position() - centre).norm(), r, 1e-12);
}

TEST(TransformToVector, Examples) {
  const TipVector5 id = transform_to_vector(Transform());
  EXPECT_EQ(id.as_vector().norm(), 0.0);
  const Transform ry(Eigen::Matrix3d(Eigen::AngleAxisd(0.3, Eigen::Vector3d::UnitY())),
                     Eigen::Vector3d::Zero());
  const TipVector5 v = transform_to_vector(ry);
  EXPECT_NEAR(v.theta_x, 0.3, 1e-15);
  EXPECT_NEAR(v.theta_y, 0.0, 1e-15);
}

TEST(ChainTransforms, IdentityAndTranslations) {
  EXPECT_EQ(chain_transforms({Transform(), Transform(), Transform()}).matrix(),
            Eigen::Matrix4d::Identity());
  const Transform c = chain_transforms(
      {Transform::translation({0, 0, 2.0}), Transform::translation({0, 0, 3.5})});
  EXPECT_DOUBLE_EQ(c.position().z(), 5.5);
}

TEST(ChainTransforms, MatchesNaiveProductAndIsAssociative) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Transform> ts;
    for (int i = 0; i < 5; ++i) ts.emplace_back(random_rigid(rng));
    // Entry-wise triple loop as the product oracle.
    Eigen::Matrix4d acc = Eigen::Matrix4d::Identity();
    for (const auto& t : ts) {
      Eigen::Matrix4d next = Eigen::Matrix4d::Zero();
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
          for (int k = 0; k < 4; ++k) next(r, c) += acc(r, k) * t.matrix()(k, c);
      acc = next;
    }
    EXPECT_LT((chain_transforms(ts).matrix() - acc).norm(), 1e-12 * acc.norm());
    const Transform left = chain_transforms({chain_transforms({ts[0], ts[1]}), ts[2]});
    const Transform right = chain_transforms({ts[0], chain_transforms({ts[1], ts[2]})});
    EXPECT_LT((left.matrix() - right.matrix()).norm(), 1e-12 * left.matrix().norm());
  }
}

TEST(ChainTransforms, OrthonormalityDrift) {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> ang(-1.0, 1.0);
  std::vector<Transform> ts;
  for (int i = 0; i < 10; ++i) ts.push_back(segment_transform(ang(rng), ang(rng), 10.0));
  EXPECT_LT(chain_transforms(ts).orthonormality_error(), 1e-9);
}

TEST(InterpolateIntermediate, IdenticalEndpoints) {
  const Transform t = segment_transform(0.2, -0.4, 5.0);
  const auto mids = interpolate_intermediate(t, t, 4);
  ASSERT_EQ(mids.size(), 3u);
  for (const auto& m : mids) EXPECT_LT((m.matrix() - t.matrix()).norm(), 1e-12);
}

TEST(InterpolateIntermediate, EvenTranslation) {
  const auto mids = interpolate_intermediate(
      Transform(), Transform::translation({0, 0, 100.0}), 5);
  ASSERT_EQ(mids.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(mids[i].position().z(), 20.0 * (i + 1), 1e-12);
  }
  EXPECT_TRUE(interpolate_intermediate(Transform(), Transform(), 1).empty());
  EXPECT_THROW(interpolate_intermediate(Transform(), Transform(), 0),
               std::invalid_argument);
}

TEST(InterpolateIntermediate, GeodesicHasConstantAngularSteps) {
  const Transform tip = segment_transform(0.9, 0.5, 10.0);
  const auto mids = interpolate_intermediate(Transform(), tip, 4);
  std::vector<Transform> path{Transform()};
  path.insert(path.end(), mids.begin(), mids.end());
  path.push_back(tip);
  const double first = Eigen::AngleAxisd(Eigen::Matrix3d(
      path[0].rotation().transpose() * path[1].rotation())).angle();
  for (std::size_t i = 1; i + 1 < path.size(); ++i) {
    const double step = Eigen::AngleAxisd(Eigen::Matrix3d(
        path[i].rotation().transpose() * path[i + 1].rotation())).angle();
    EXPECT_NEAR(step, first, 1e-12);
  }
}

}  // namespace
}  // namespace softarm::pcc
