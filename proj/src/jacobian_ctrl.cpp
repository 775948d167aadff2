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

#include "softarm/jacobian_ctrl.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "softarm/error.hpp"

namespace softarm::jacobian {
namespace {

using actuation::Generalized;
using plant::Dimensionality;

pcc::Transform pose_transform(const plant::SegmentPose& p) {
  const double k = p.curvature();
  const double az = k > 0.0 ? std::atan2(p.curvature_y, p.curvature_x) : 0.0;
  return pcc::arc_transform(az, k * p.length, p.length);
}

double& component(Generalized& g, int c) { return c == 0 ? g.x : (c == 1 ? g.y : g.z); }

}  // namespace

bool SingleSegJacobian::sparse() const {
  for (int c = 0; c < 3; ++c) {
    for (int r = 0; r < 5; ++r) {
      const bool structural = r == kSparsity[c][0] || r == kSparsity[c][1];
      if (!structural && m(r, c) != 0.0) return false;
    }
  }
  return true;
}

pcc::Transform steady_segment_transform(const plant::ArmPlant& plant,
                                        std::size_t segment, const Generalized& g,
                                        const plant::Disturbance& dist) {
  if (plant.dims() == Dimensionality::kPlanar) {
    const actuation::PlanarPair p = actuation::generalized_to_planar(g);
    const std::array<double, 2> ch{p.left, p.right};
    return pose_transform(plant.response(segment, ch, dist));
  }
  const actuation::Airbags a = actuation::generalized_to_airbag_unclipped(g);
  return pose_transform(plant.response(segment, a, dist));
}

Matrix53 segment_fd_jacobian(const plant::ArmPlant& plant, std::size_t segment,
                             const Generalized& g, double dp) {
  Matrix53 j = Matrix53::Zero();
  for (int c = 0; c < 3; ++c) {
    if (plant.dims() == Dimensionality::kPlanar && c == 1) continue;
    Generalized hi = g, lo = g;
    component(hi, c) += dp;
    component(lo, c) -= dp;
    const Vector5 vh =
        pcc::transform_to_vector(steady_segment_transform(plant, segment, hi)).as_vector();
    const Vector5 vl =
        pcc::transform_to_vector(steady_segment_transform(plant, segment, lo)).as_vector();
    j.col(c) = (vh - vl) / (2.0 * dp);
  }
  return j;
}

std::vector<Generalized> feasible_grid(const plant::ArmPlant& plant,
                                       std::size_t segment, int levels) {
  if (levels < 2) throw ConfigError("probe grid needs at least 2 levels");
  const double pmax = plant.spec(segment).pressure_max;
  const bool planar = plant.dims() == Dimensionality::kPlanar;
  const double z_max = (planar ? 2.0 : 4.0) * pmax;
  std::vector<Generalized> out;
  for (int iz = 0; iz < levels; ++iz) {
    const double z = z_max * iz / (levels - 1);
    const double budget = std::min(z, z_max - z);
    for (int ix = 0; ix < levels; ++ix) {
      const double x = -budget + 2.0 * budget * ix / (levels - 1);
      if (planar) {
        out.push_back({x, 0.0, z});
        continue;
      }
      for (int iy = 0; iy < levels; ++iy) {
        const double y = -budget + 2.0 * budget * iy / (levels - 1);
        if (std::abs(x) + std::abs(y) <= budget * (1.0 + 1e-12)) out.push_back({x, y, z});
      }
    }
  }
  return out;
}

std::vector<SingleSegJacobian> init_single_jacobians(const plant::ArmPlant& plant,
                                                     const ProbeOptions& options) {
  std::vector<SingleSegJacobian> out(plant.segments());
  for (std::size_t s = 0; s < plant.segments(); ++s) {
    for (const Generalized& g : feasible_grid(plant, s, options.levels)) {
      const Matrix53 fd = segment_fd_jacobian(plant, s, g, options.dp);
      for (int c = 0; c < 3; ++c) {
        for (int r : kSparsity[c]) {
          if (r < 0) continue;
          out[s].m(r, c) = std::max(out[s].m(r, c), std::abs(fd(r, c)));
        }
      }
    }
    if (plant.dims() == Dimensionality::kPlanar) out[s].m.col(1).setZero();
  }
  return out;
}

Vector5 scaled(const pcc::TipVector5& v, double lever) {
  Vector5 s = v.as_vector();
  s(3) *= lever;
  s(4) *= lever;
  return s;
}

FullJacobian assemble_jacobian(const std::vector<pcc::Transform>& relative,
                               const std::vector<SingleSegJacobian>& singles,
                               double dp, double lever) {
  if (relative.size() != singles.size()) {
    throw DimensionMismatch("one single-segment Jacobian per transform is required");
  }
  if (!(dp > 0.0)) throw ConfigError("assembly perturbation must be positive");
  const std::size_t n = relative.size();
  std::vector<pcc::Transform> prefix(n + 1), suffix(n + 1);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] * relative[i];
  for (std::size_t i = n; i-- > 0;) suffix[i] = relative[i] * suffix[i + 1];
  const pcc::Transform tip_inv = prefix[n].inverse();

  FullJacobian out;
  out.m = Eigen::MatrixXd::Zero(5, static_cast<Eigen::Index>(3 * n));
  out.valid.assign(3 * n, true);
  for (std::size_t i = 0; i < n; ++i) {
    pcc::TipVector5 v;
    try {
      v = pcc::transform_to_vector(relative[i]);
    } catch (const RepresentationRangeError&) {
      for (int c = 0; c < 3; ++c) out.valid[3 * i + c] = false;
      continue;
    }
    // Rotation about the segment axis that the tip vector does not carry.
    const pcc::Transform residual =
        pcc::vector_to_transform(v).inverse() * relative[i];
    for (int c = 0; c < 3; ++c) {
      const std::size_t col = 3 * i + c;
      const Vector5 jc = singles[i].m.col(c);
      if (jc.isZero(0.0)) continue;
      try {
        const Vector5 moved = v.as_vector() + jc * dp;
        const pcc::Transform seg =
            pcc::vector_to_transform(pcc::TipVector5::from_vector(moved)) * residual;
        const pcc::Transform perturbed = prefix[i] * seg * suffix[i + 1];
        const pcc::TipVector5 dev = pcc::transform_to_vector(tip_inv * perturbed);
        out.m.col(static_cast<Eigen::Index>(col)) = scaled(dev, lever) / dp;
      } catch (const RepresentationRangeError&) {
        out.valid[col] = false;
      }
    }
  }
  return out;
}

pcc::TipVector5 goal_deviation(const pcc::Transform& tip, const pcc::Transform& goal) {
  return pcc::transform_to_vector(tip.inverse() * goal);
}

Eigen::VectorXd damped_pseudoinverse_step(const Eigen::MatrixXd& j,
                                          const Eigen::VectorXd& dx,
                                          const DampedStep& step) {
  if (j.rows() != dx.size()) throw DimensionMismatch("J rows must match dx");
  if (!j.allFinite()) throw NoMotion("Jacobian has non-finite entries");
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(j, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  if (!(smax > 1e-300)) throw NoMotion("Jacobian is zero; no direction to move");
  const double cut = step.cutoff * smax;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cut) inv(i) = 1.0 / s(i);
  }
  return step.ratio * (svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose() * dx);
}

Eigen::VectorXd feedback_step(const Eigen::MatrixXd& j, const Eigen::VectorXd& dx,
                              const DampedStep& step) {
  return damped_pseudoinverse_step(j, dx, step)
      .cwiseMax(-step.max_delta)
      .cwiseMin(step.max_delta);
}

std::vector<Generalized> generalized_state(const plant::ArmPlant& plant,
                                           const plant::PressureCommand& cmd) {
  std::vector<Generalized> g(plant.segments());
  for (std::size_t i = 0; i < plant.segments(); ++i) {
    if (plant.dims() == Dimensionality::kPlanar) {
      g[i] = actuation::planar_to_generalized({cmd.at(i, 0), cmd.at(i, 1)});
    } else {
      g[i] = actuation::airbag_to_generalized(
          {cmd.at(i, 0), cmd.at(i, 1), cmd.at(i, 2), cmd.at(i, 3)});
    }
  }
  return g;
}

plant::PressureCommand command_from_generalized(const plant::ArmPlant& plant,
                                                std::vector<Generalized>& g) {
  plant::PressureCommand cmd = plant.zero_command();
  for (std::size_t i = 0; i < plant.segments(); ++i) {
    const double pmax = plant.spec(i).pressure_max;
    if (plant.dims() == Dimensionality::kPlanar) {
      g[i] = actuation::project_planar(g[i], pmax, nullptr);
      const actuation::PlanarPair p = actuation::generalized_to_planar(g[i]);
      cmd.at(i, 0) = std::clamp(p.left, 0.0, pmax);
      cmd.at(i, 1) = std::clamp(p.right, 0.0, pmax);
    } else {
      g[i] = actuation::project_spatial(g[i], pmax, nullptr);
      const actuation::AirbagConversion a = actuation::generalized_to_airbag(g[i], pmax);
      for (int c = 0; c < 4; ++c) cmd.at(i, c) = a.pressures[c];
    }
  }
  return cmd;
}

plant::PressureCommand home_command(const plant::ArmPlant& plant) {
  plant::PressureCommand cmd = plant.zero_command();
  for (std::size_t i = 0; i < plant.segments(); ++i) {
    for (std::size_t c = 0; c < cmd.channels(); ++c) {
      cmd.at(i, c) = 0.5 * plant.spec(i).pressure_max;
    }
  }
  return cmd;
}

JacobianController::JacobianController(std::vector<SingleSegJacobian> singles,
                                       ControllerParams params)
    : singles_(std::move(singles)), params_(params) {
  if (!(params_.step.ratio > 0.0 && params_.step.ratio <= 1.0)) {
    throw ConfigError("damping ratio must lie in (0, 1]");
  }
  const bool boxed = params_.position_tolerance > 0.0 && params_.rotation_tolerance > 0.0;
  if (!(params_.step.max_delta > 0.0 && params_.lever > 0.0) ||
      !(params_.tolerance > 0.0 || (boxed && params_.tolerance == 0.0))) {
    throw ConfigError("step limit, tolerance and lever must be positive");
  }
}

namespace {

std::vector<pcc::Transform> observed_tips(plant::SimulatedArm& arm) {
  const plant::Observation obs = arm.observe();
  if (arm.plant().dims() == Dimensionality::kSpatial) return obs.spatial;
  std::vector<pcc::Transform> out;
  for (const auto& p : obs.planar) out.push_back(pcc::planar_to_spatial(p));
  return out;
}

pcc::Transform reachable_goal(const pcc::Transform& tip, const pcc::Transform& goal,
                              double max_angle) {
  const double angle = pcc::z_axis_angle(tip, goal);
  if (angle <= max_angle) return goal;
  const auto steps = static_cast<std::size_t>(std::ceil(angle / max_angle));
  return pcc::interpolate_intermediate(tip, goal, steps).front();
}

// Minimizes |J_pos d - a dx_pos|^2 over steps that stay feasible and inside
// the per-channel step box, by projected gradient from d = 0.
Eigen::VectorXd constrained_position_step(const plant::ArmPlant& plant,
                                          const std::vector<Generalized>& g,
                                          const Eigen::MatrixXd& j, const Vector5& dx,
                                          const DampedStep& step) {
  const std::size_t n = g.size();
  const Eigen::MatrixXd jp = j.topRows(3);
  const Eigen::Vector3d r = step.ratio * dx.head(3);
  const double lipschitz = (jp.transpose() * jp).eigenvalues().real().maxCoeff();
  Eigen::VectorXd d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(3 * n));
  if (!(lipschitz > 0.0)) return d;
  const bool planar = plant.dims() == Dimensionality::kPlanar;
  std::vector<std::vector<actuation::HalfSpace>> sets(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Feasibility of g + d plus the box |d_k| <= max_delta, in terms of d.
    for (auto h : actuation::feasible_halfspaces(plant.spec(i).pressure_max, planar)) {
      h.b -= h.a[0] * g[i].x + h.a[1] * g[i].y + h.a[2] * g[i].z;
      sets[i].push_back(h);
    }
    for (int k = 0; k < 3; ++k) {
      for (double sgn : {-1.0, 1.0}) {
        actuation::HalfSpace h;
        h.a[k] = sgn;
        h.b = step.max_delta;
        sets[i].push_back(h);
      }
    }
  }
  for (int it = 0; it < 300; ++it) {
    const Eigen::VectorXd grad = jp.transpose() * (jp * d - r);
    Eigen::VectorXd next = d - grad / lipschitz;
    for (std::size_t i = 0; i < n; ++i) {
      const auto i3 = static_cast<Eigen::Index>(3 * i);
      auto q = actuation::project_halfspaces({next(i3), planar ? 0.0 : next(i3 + 1), next(i3 + 2)},
                                             sets[i]);
      next(i3) = q[0];
      next(i3 + 1) = planar ? 0.0 : q[1];
      next(i3 + 2) = q[2];
    }
    const double change = (next - d).norm();
    d = next;
    if (change < 1e-12) break;
  }
  return d;
}

}  // namespace

RunReport JacobianController::run(plant::SimulatedArm& arm, const pcc::Transform& goal,
                                  const GoalProvider& provider) const {
  const plant::ArmPlant& plant = arm.plant();
  const std::size_t n = plant.segments();
  if (singles_.size() != n) throw DimensionMismatch("Jacobian count != segments");
  const ControllerParams& p = params_;
  std::vector<Generalized> g = generalized_state(plant, arm.command());
  RunReport report;

  for (int it = 0;; ++it) {
    const std::vector<pcc::Transform> tips = observed_tips(arm);
    const pcc::Transform& tip = tips.back();
    const pcc::Transform target = provider ? provider(tip, it) : goal;
    IterationLog log;
    log.iteration = it;
    log.position_error = (target.position() - tip.position()).norm();
    const double angle = pcc::z_axis_angle(tip, target);
    log.rotation_error = angle * 180.0 / std::numbers::pi;
    log.scaled_error = std::hypot(log.position_error, p.lever * angle);
    for (const auto& gi : g) log.actuation.insert(log.actuation.end(), {gi.x, gi.y, gi.z});
    const bool boxed = p.position_tolerance > 0.0 && p.rotation_tolerance > 0.0 &&
                       log.position_error <= p.position_tolerance &&
                       log.rotation_error <= p.rotation_tolerance;
    if (log.scaled_error <= p.tolerance || boxed) {
      report.converged = true;
      report.log.push_back(log);
      break;
    }
    if (it >= p.max_iterations) {
      report.failure = "iteration cap reached";
      report.log.push_back(log);
      break;
    }

    std::vector<pcc::Transform> absolute;
    if (p.true_markers) {
      absolute = tips;
    } else {
      absolute = pcc::interpolate_intermediate(pcc::Transform(), tip, n);
      absolute.push_back(tip);
    }
    std::vector<pcc::Transform> relative(n);
    pcc::Transform prev;
    for (std::size_t i = 0; i < n; ++i) {
      relative[i] = prev.inverse() * absolute[i];
      prev = absolute[i];
    }
    const FullJacobian jac = assemble_jacobian(relative, singles_, p.dp, p.lever);
    const Vector5 dx =
        scaled(goal_deviation(tip, reachable_goal(tip, target, p.max_goal_angle)), p.lever);

    Eigen::VectorXd raw;
    try {
      raw = damped_pseudoinverse_step(jac.m, dx, p.step);
    } catch (const NoMotion& e) {
      report.failure = e.what();
      report.log.push_back(log);
      break;
    }
    std::vector<Eigen::VectorXd> candidates;
    candidates.push_back(raw.cwiseMax(-p.step.max_delta).cwiseMin(p.step.max_delta));
    const double peak = raw.cwiseAbs().maxCoeff();
    candidates.push_back(peak > p.step.max_delta ? Eigen::VectorXd(raw * (p.step.max_delta / peak))
                                                 : raw);
    try {
      const Eigen::MatrixXd jp = jac.m.topRows(3);
      Eigen::VectorXd pos = damped_pseudoinverse_step(jp, dx.head(3), p.step);
      const double pk = pos.cwiseAbs().maxCoeff();
      if (pk > p.step.max_delta) pos *= p.step.max_delta / pk;
      candidates.push_back(pos);
    } catch (const NoMotion&) {
    }

    candidates.push_back(constrained_position_step(plant, g, jac.m, dx, p.step));

    std::vector<Generalized> next = g;
    bool accepted = false;
    for (const Eigen::VectorXd& cand : candidates) {
      std::vector<Generalized> trial = g;
      for (std::size_t i = 0; i < n; ++i) {
        trial[i] = actuation::nearest_feasible(
            {g[i].x + cand(3 * i), g[i].y + cand(3 * i + 1), g[i].z + cand(3 * i + 2)},
            plant.spec(i).pressure_max, plant.dims() == Dimensionality::kPlanar);
      }
      command_from_generalized(plant, trial);
      Eigen::VectorXd eff(3 * n);
      for (std::size_t i = 0; i < n; ++i) {
        eff(3 * i) = trial[i].x - g[i].x;
        eff(3 * i + 1) = trial[i].y - g[i].y;
        eff(3 * i + 2) = trial[i].z - g[i].z;
      }
      const Vector5 predicted = jac.m * eff;
      const double dot = predicted.head(3).dot(dx.head(3));
      if (dot > 0.0) {
        next = trial;
        accepted = true;
        log.direction_dot = dot;
        break;
      }
    }
    log.accepted = accepted;
    report.log.push_back(log);
    if (accepted) g = next;
    arm.apply(command_from_generalized(plant, g));
    ++report.iterations;
  }
  return report;
}

}  // namespace softarm::jacobian
