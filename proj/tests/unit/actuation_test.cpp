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

#include "softarm/actuation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace softarm::actuation {
namespace {

void expect_generalized(const Generalized& g, double x, double y, double z) {
  EXPECT_DOUBLE_EQ(g.x, x);
  EXPECT_DOUBLE_EQ(g.y, y);
  EXPECT_DOUBLE_EQ(g.z, z);
}

TEST(AirbagToGeneralized, Examples) {
  expect_generalized(airbag_to_generalized({0, 0, 0, 0}), 0, 0, 0);
  expect_generalized(airbag_to_generalized({0, 2, 0, 2}), 4, 0, 4);
  expect_generalized(airbag_to_generalized({1, 1, 1, 1}), 0, 0, 4);
}

TEST(GeneralizedToAirbag, Examples) {
  const Airbags zero = generalized_to_airbag_unclipped({0, 0, 0});
  for (double p : zero) EXPECT_EQ(p, 0.0);
  const Airbags p = generalized_to_airbag_unclipped({4, 0, 4});
  EXPECT_DOUBLE_EQ(p[0], 0.0);
  EXPECT_DOUBLE_EQ(p[1], 2.0);
  EXPECT_DOUBLE_EQ(p[2], 0.0);
  EXPECT_DOUBLE_EQ(p[3], 2.0);
}

TEST(GeneralizedToAirbag, RoundtripOnConstraintManifold) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 0.3);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), b = u(rng), c = u(rng);
    const double d = b + c - a;  // p1 + p4 = p2 + p3
    const Airbags p{a, b, c, d};
    const Airbags back = generalized_to_airbag_unclipped(airbag_to_generalized(p));
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(back[k], p[k], 1e-12);
  }
}

TEST(GeneralizedToAirbag, OutputSatisfiesConstraint) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Airbags p = generalized_to_airbag_unclipped({u(rng), u(rng), u(rng)});
    EXPECT_NEAR(p[0] + p[3], p[1] + p[2], 1e-12);
  }
}

TEST(GeneralizedToAirbag, ClipsIntoBoundsAndFlags) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 500; ++i) {
    const Generalized g{u(rng), u(rng), u(rng)};
    const AirbagConversion c = generalized_to_airbag(g, 0.3);
    for (double p : c.pressures) {
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 0.3);
    }
    EXPECT_NEAR(c.pressures[0] + c.pressures[3], c.pressures[1] + c.pressures[2],
                1e-12);
    const Airbags raw = generalized_to_airbag_unclipped(g);
    bool in_range = true;
    for (double p : raw) in_range = in_range && p >= 0.0 && p <= 0.3;
    EXPECT_EQ(c.clipped, !in_range);
  }
  const AirbagConversion ok = generalized_to_airbag({0.1, 0.05, 0.6}, 0.3);
  EXPECT_FALSE(ok.clipped);
}

TEST(PlanarPair, Roundtrip) {
  const PlanarPair p{0.07, 0.21};
  const PlanarPair back = generalized_to_planar(planar_to_generalized(p));
  EXPECT_NEAR(back.left, p.left, 1e-15);
  EXPECT_NEAR(back.right, p.right, 1e-15);
  bool clipped = false;
  const Generalized g = project_planar({0.5, 0.0, 0.55}, 0.3, &clipped);
  EXPECT_TRUE(clipped);
  const PlanarPair q = generalized_to_planar(g);
  EXPECT_GE(q.left, -1e-15);
  EXPECT_LE(q.right, 0.3 + 1e-15);
}

bool feasible(const Generalized& g, double pmax, double tol) {
  const double bend = std::abs(g.x) + std::abs(g.y);
  return g.z >= -tol && g.z <= 4.0 * pmax + tol &&
         bend <= std::min(g.z, 4.0 * pmax - g.z) + tol;
}

TEST(NearestFeasible, FixesFeasiblePoints) {
  const Generalized g{0.1, -0.05, 0.5};
  const Generalized q = nearest_feasible(g, 0.3, false);
  EXPECT_NEAR(q.x, g.x, 1e-15);
  EXPECT_NEAR(q.y, g.y, 1e-15);
  EXPECT_NEAR(q.z, g.z, 1e-15);
}

TEST(NearestFeasible, NoFeasibleSampleIsCloser) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const Generalized g{u(rng), u(rng), u(rng)};
    const Generalized q = nearest_feasible(g, 0.3, false);
    ASSERT_TRUE(feasible(q, 0.3, 1e-9));
    const double best = std::hypot(q.x - g.x, q.y - g.y, q.z - g.z);
    for (int s = 0; s < 2000; ++s) {
      const double z = 1.2 * unit(rng);
      const double budget = std::min(z, 1.2 - z);
      const double x = budget * (2.0 * unit(rng) - 1.0);
      const double y = (budget - std::abs(x)) * (2.0 * unit(rng) - 1.0);
      EXPECT_GE(std::hypot(x - g.x, y - g.y, z - g.z), best - 1e-9);
    }
  }
}

TEST(NearestFeasible, PlanarDropsY) {
  const Generalized q = nearest_feasible({0.8, 0.4, 0.3}, 0.3, true);
  EXPECT_EQ(q.y, 0.0);
  EXPECT_LE(std::abs(q.x), std::min(q.z, 0.6 - q.z) + 1e-12);
  // Closest point of the face x = z to (0.8, 0.3) is (0.55, 0.55), which lies
  // past the apex at z = 0.3, so the answer is the apex itself.
  EXPECT_NEAR(q.x, 0.3, 1e-9);
  EXPECT_NEAR(q.z, 0.3, 1e-9);
}

}  // namespace
}  // namespace softarm::actuation
