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


#include "softarm/harness.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

#include "softarm/error.hpp"

namespace softarm::harness {
namespace {

using json = nlohmann::json;

constexpr double kDeg = 180.0 / std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::ostringstream csv_stream() {
  std::ostringstream out;
  out << std::setprecision(10);
  return out;
}

// JSON numbers are written with a fixed precision so reruns match bytewise.
double tidy(double v) {
  if (!std::isfinite(v)) return v;
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return std::stod(s.str());
}

std::string format_cell(double v, int precision) {
  if (!std::isfinite(v)) return "N/A";
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

}  // namespace

std::string to_string(ControllerId id) {
  switch (id) {
    case ControllerId::kModelBased: return "model-based";
    case ControllerId::kEstimatedModel: return "estimated-model";
    case ControllerId::kQLearning: return "q-learning";
  }
  return "";
}

std::string to_string(Group g) {
  switch (g) {
    case Group::kFree: return "free";
    case Group::kForce075: return "force-0.75N";
    case Group::kForce150: return "force-1.5N";
    case Group::kSwapMiddle: return "swap-middle";
    case Group::kSwapRoot: return "swap-root";
  }
  return "";
}

ControllerId parse_controller(const std::string& token) {
  for (ControllerId id : all_controllers()) {
    if (to_string(id) == token) return id;
  }
  throw ConfigError("unknown controller '" + token + "'");
}

Group parse_group(const std::string& token) {
  for (Group g : all_groups()) {
    if (to_string(g) == token) return g;
  }
  throw ConfigError("unknown disturbance group '" + token + "'");
}

std::vector<ControllerId> all_controllers() {
  return {ControllerId::kModelBased, ControllerId::kEstimatedModel, ControllerId::kQLearning};
}

std::vector<Group> all_groups() {
  return {Group::kFree, Group::kForce075, Group::kForce150, Group::kSwapMiddle, Group::kSwapRoot};
}

plant::Disturbance disturbance_for(Group g, const plant::ArmPlant& plant) {
  plant::Disturbance d;
  switch (g) {
    case Group::kFree: break;
    case Group::kForce075: d.lateral_force = 0.75; break;
    case Group::kForce150: d.lateral_force = 1.5; break;
    case Group::kSwapMiddle: d.channel_swap = plant.segments() / 2; break;
    case Group::kSwapRoot: d.channel_swap = 0; break;
  }
  return d;
}

qlearn::TrainParams ComparativeConfig::default_q_params() {
  qlearn::TrainParams p;
  p.threshold = 15.0;
  p.orientation_threshold = 15.0 / kDeg;
  p.orientation_weight = kDeg;  // one mm per degree
  p.virtual_targets = 300;
  p.alpha = 1.0;
  p.gamma = 0.5;
  return p;
}

void ComparativeConfig::validate() const {
  if (targets < 1) throw ConfigError("need at least one target");
  if (!(position_tolerance > 0.0) || !(rotation_tolerance > 0.0)) {
    throw ConfigError("tolerances must be positive");
  }
  if (!(expire_seconds > 0.0) || !(model_step_seconds > 0.0) || !(feedback_step_seconds > 0.0)) {
    throw ConfigError("times must be positive");
  }
  if (net_samples < 10 || net_epochs < 0 || workspace_samples < 1) {
    throw ConfigError("preparation sizes out of range");
  }
  if (q_orientation_bins < 1 || q_orientation_bins % 2 == 0) {
    throw ConfigError("orientation bins must be a positive odd count");
  }
  if (!(q_epsilon >= 0.0 && q_epsilon <= 1.0)) throw ConfigError("epsilon must be in [0, 1]");
  if (!(jacobian_step_ratio > 0.0 && jacobian_step_ratio <= 1.0)) {
    throw ConfigError("jacobian step ratio must be in (0, 1]");
  }
  q_params.validate();
}

int ComparativeConfig::model_step_cap() const {
  return static_cast<int>(std::floor(expire_seconds / model_step_seconds + 1e-9));
}

int ComparativeConfig::feedback_step_cap() const {
  return static_cast<int>(std::floor(expire_seconds / feedback_step_seconds + 1e-9));
}

std::vector<pcc::Pose2D> draw_targets(const qlearn::Workspace& ws, int count, std::uint64_t seed) {
  if (count < 1) throw ConfigError("need at least one target");
  if (static_cast<std::size_t>(count) > ws.poses.size()) {
    throw ConfigError("more targets than sampled workspace poses");
  }
  Eigen::Vector2d lo = ws.boundary.front(), hi = ws.boundary.front();
  for (const auto& v : ws.boundary) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(lo.x(), hi.x()), uy(lo.y(), hi.y());
  std::vector<char> used(ws.poses.size(), 0);
  std::vector<pcc::Pose2D> out;
  while (static_cast<int>(out.size()) < count) {
    const Eigen::Vector2d p(ux(rng), uy(rng));
    if (!qlearn::polygon_contains(ws.boundary, p)) continue;
    std::size_t best = ws.poses.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < ws.poses.size(); ++k) {
      if (used[k]) continue;
      const double d = std::hypot(ws.poses[k].x - p.x(), ws.poses[k].y - p.y());
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    used[best] = 1;
    out.push_back(ws.poses[best]);
  }
  return out;
}

plant::PressureCommand start_command(const plant::ArmPlant& plant) {
  return jacobian::home_command(plant);
}

namespace {

void reset_to_start(plant::SimulatedArm& arm) {
  arm.reset();
  arm.apply(start_command(arm.plant()));
  arm.settle();
}

}  // namespace

Prepared prepare(const plant::ArmPlant& plant, const ComparativeConfig& config) {
  config.validate();
  if (plant.dims() != plant::Dimensionality::kPlanar) {
    throw ConfigError("the comparative study runs on a planar plant");
  }
  Prepared prep{plant, qlearn::Workspace::sample(plant, config.workspace_samples, config.seed),
                {}, {}, {}, {}, {}, {}};
  prep.targets = draw_targets(prep.workspace, config.targets, config.seed + 1);
  auto wants = [&](ControllerId id) {
    return std::find(config.controllers.begin(), config.controllers.end(), id) !=
           config.controllers.end();
  };
  if (wants(ControllerId::kModelBased)) {
    const net::SegmentDatasets data =
        net::generate_data(plant, static_cast<std::size_t>(config.net_samples), config.seed + 2);
    net::TrainOptions opt;
    opt.epochs = config.net_epochs;
    opt.seed = config.seed + 3;
    prep.nets = net::train_bundle(data.history, true, plant.spec(0).pressure_max, opt);
    prep.limits = poseopt::limits_from_plant(plant);
  }
  if (wants(ControllerId::kEstimatedModel)) prep.singles = jacobian::init_single_jacobians(plant);
  if (wants(ControllerId::kQLearning)) {
    qlearn::Partition part;
    part.orientation_bins = config.q_orientation_bins;
    prep.learner.emplace(part, qlearn::make_actions(plant.segments(), true), config.q_params,
                         config.seed + 4);
    plant::SimulatedArm arm(plant, {}, config.seed + 5);
    reset_to_start(arm);
    prep.q_report = prep.learner->train(arm, prep.workspace);
  }
  return prep;
}

EpisodeResult run_episode(const Prepared& prep, const ComparativeConfig& config, ControllerId id,
                          plant::SimulatedArm& arm, const pcc::Pose2D& target,
                          twolevel::ModelController* model, qlearn::QLearner* learner) {
  EpisodeResult r;
  switch (id) {
    case ControllerId::kModelBased: {
      twolevel::FeedbackParams fp;
      fp.max_iterations = config.model_step_cap();
      fp.position_tolerance = config.position_tolerance;
      fp.rotation_tolerance = config.rotation_tolerance / kDeg;
      const poseopt::Target2D goal{target.x, target.y, target.theta, 0.0};
      try {
        const twolevel::FeedbackResult fr = twolevel::feedback_point(arm, *model, goal, fp);
        r.steps = static_cast<int>(fr.iterations.size());
        r.position_error = fr.final_position_error();
        r.rotation_error = fr.final_rotation_error() * kDeg;
        r.success = r.position_error <= config.position_tolerance &&
                    r.rotation_error <= config.rotation_tolerance;
      } catch (const Error&) {
        r.steps = config.model_step_cap();
        const pcc::Pose2D tip = arm.observe().planar_tip();
        r.position_error = twolevel::position_error(goal, tip);
        r.rotation_error = twolevel::rotation_error(goal, tip) * kDeg;
      }
      r.seconds = r.steps * config.model_step_seconds;
      break;
    }
    case ControllerId::kEstimatedModel: {
      jacobian::ControllerParams cp;
      cp.max_iterations = config.feedback_step_cap();
      cp.tolerance = 0.0;
      cp.position_tolerance = config.position_tolerance;
      cp.rotation_tolerance = config.rotation_tolerance;
      cp.step.ratio = config.jacobian_step_ratio;
      const jacobian::JacobianController ctrl(*prep.singles, cp);
      const jacobian::RunReport rep = ctrl.run(arm, pcc::planar_to_spatial(target));
      r.steps = rep.iterations;
      r.position_error = rep.log.back().position_error;
      r.rotation_error = rep.log.back().rotation_error;
      r.success = rep.converged;
      r.seconds = r.steps * config.feedback_step_seconds;
      break;
    }
    case ControllerId::kQLearning: {
      qlearn::ControlOptions co;
      co.threshold = config.position_tolerance;
      co.orientation_threshold = config.rotation_tolerance / kDeg;
      co.epsilon = config.q_epsilon;
      co.max_steps = config.feedback_step_cap();
      co.learn = config.q_online;
      co.learn_rate = config.q_params.alpha;
      const qlearn::Episode ep = learner->control(arm, target, co);
      r.steps = ep.steps;
      r.position_error = ep.distance.back();
      r.rotation_error = std::abs(ep.heading_error.back()) * kDeg;
      r.success = ep.reached;
      r.seconds = r.steps * config.feedback_step_seconds;
      break;
    }
  }
  return r;
}

std::vector<ResultRow> run_comparative(const Prepared& prep, const ComparativeConfig& config) {
  config.validate();
  for (ControllerId id : config.controllers) {
    const bool ready = (id == ControllerId::kModelBased && prep.nets) ||
                       (id == ControllerId::kEstimatedModel && prep.singles) ||
                       (id == ControllerId::kQLearning && prep.learner);
    if (!ready) throw ConfigError(to_string(id) + " controller was not prepared");
  }
  std::vector<ResultRow> rows;
  for (Group g : config.groups) {
    for (ControllerId id : config.controllers) {
      ResultRow row;
      row.controller = id;
      row.group = g;
      plant::SimulatedArm arm(prep.plant, disturbance_for(g, prep.plant), config.seed + 6);
      std::optional<twolevel::ModelController> model;
      if (id == ControllerId::kModelBased) {
        model.emplace(*prep.nets, prep.limits, poseopt::CostWeights{}, config.seed + 7);
      }
      // Each group adapts its own copy of the free-space table.
      std::optional<qlearn::QLearner> learner;
      if (id == ControllerId::kQLearning) learner = *prep.learner;
      for (const pcc::Pose2D& target : prep.targets) {
        reset_to_start(arm);
        if (model) model->reset(prep.plant.planar_config(arm.state()));
        row.episodes.push_back(run_episode(prep, config, id, arm, target,
                                           model ? &*model : nullptr,
                                           learner ? &*learner : nullptr));
      }
      int ok = 0;
      double steps = 0.0, seconds = 0.0;
      for (const EpisodeResult& e : row.episodes) {
        if (!e.success) continue;
        ++ok;
        steps += e.steps;
        seconds += e.seconds;
      }
      row.success_rate = static_cast<double>(ok) / row.episodes.size();
      row.mean_steps = ok ? steps / ok : kNaN;
      row.mean_seconds = ok ? seconds / ok : kNaN;
      rows.push_back(row);
    }
  }
  for (ResultRow& row : rows) {
    row.relative_time = kNaN;
    for (const ResultRow& q : rows) {
      if (q.group == row.group && q.controller == ControllerId::kQLearning &&
          std::isfinite(q.mean_seconds) && q.mean_seconds > 0.0) {
        row.relative_time = row.mean_seconds / q.mean_seconds;
      }
    }
  }
  return rows;
}

const ResultRow& find_row(const std::vector<ResultRow>& rows, ControllerId id, Group g) {
  for (const ResultRow& r : rows) {
    if (r.controller == id && r.group == g) return r;
  }
  throw ConfigError("no result row for " + to_string(id) + " / " + to_string(g));
}

std::string comparative_csv(const std::vector<ResultRow>& rows) {
  auto out = csv_stream();
  out << "controller,group,success_rate,mean_steps,mean_seconds,relative_time\n";
  for (const ResultRow& r : rows) {
    out << to_string(r.controller) << ',' << to_string(r.group) << ',' << r.success_rate << ','
        << r.mean_steps << ',' << r.mean_seconds << ',' << r.relative_time << '\n';
  }
  return out.str();
}

std::string episodes_csv(const std::vector<ResultRow>& rows) {
  auto out = csv_stream();
  out << "controller,group,target,success,steps,seconds,position_error,rotation_error_deg\n";
  for (const ResultRow& r : rows) {
    for (std::size_t k = 0; k < r.episodes.size(); ++k) {
      const EpisodeResult& e = r.episodes[k];
      out << to_string(r.controller) << ',' << to_string(r.group) << ',' << k << ','
          << (e.success ? 1 : 0) << ',' << e.steps << ',' << e.seconds << ',' << e.position_error
          << ',' << e.rotation_error << '\n';
    }
  }
  return out.str();
}

std::string comparative_table(const std::vector<ResultRow>& rows) {
  std::vector<Group> groups;
  std::vector<ControllerId> ids;
  for (const ResultRow& r : rows) {
    if (std::find(groups.begin(), groups.end(), r.group) == groups.end()) groups.push_back(r.group);
    if (std::find(ids.begin(), ids.end(), r.controller) == ids.end()) ids.push_back(r.controller);
  }
  std::ostringstream out;
  out << "Comparative study (simulated seconds / relative time / rate)\n";
  out << std::left << std::setw(14) << "group";
  for (ControllerId id : ids) out << std::setw(26) << to_string(id);
  out << '\n';
  for (Group g : groups) {
    out << std::setw(14) << to_string(g);
    for (ControllerId id : ids) {
      const ResultRow& r = find_row(rows, id, g);
      const std::string cell = format_cell(r.mean_seconds, 1) + " / " +
                               format_cell(r.relative_time, 2) + " / " +
                               format_cell(r.success_rate, 2);
      out << std::setw(26) << cell;
    }
    out << '\n';
  }
  return out.str();
}

std::vector<P2pRow> run_p2p(plant::SimulatedArm& arm, twolevel::ModelController& ctrl,
                            const std::vector<poseopt::Target2D>& targets,
                            const twolevel::FeedbackParams& params) {
  std::vector<P2pRow> rows;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    rows.push_back({static_cast<int>(k), targets[k],
                    twolevel::feedback_point(arm, ctrl, targets[k], params)});
  }
  return rows;
}

std::string p2p_csv(const std::vector<P2pRow>& rows) {
  auto out = csv_stream();
  out << "target,x,y,theta,iterations,converged,unreachable,open_position_error,"
         "open_rotation_error,final_position_error,final_rotation_error\n";
  for (const P2pRow& r : rows) {
    const auto& f = r.result;
    out << r.id << ',' << r.target.x << ',' << r.target.y << ',' << r.target.theta << ','
        << f.iterations.size() << ',' << (f.converged ? 1 : 0) << ',' << (f.unreachable ? 1 : 0)
        << ',' << f.open_loop_position_error() << ',' << f.open_loop_rotation_error() << ','
        << f.final_position_error() << ',' << f.final_rotation_error() << '\n';
  }
  return out.str();
}

namespace {

json iteration_json(const twolevel::Iteration& it) {
  return {{"input", {tidy(it.input.x), tidy(it.input.y), tidy(it.input.theta)}},
          {"observed", {tidy(it.observed.x), tidy(it.observed.y), tidy(it.observed.theta)}},
          {"position_error", tidy(it.position_error)},
          {"rotation_error", tidy(it.rotation_error)}};
}

}  // namespace

std::string p2p_jsonl(const std::vector<P2pRow>& rows) {
  std::ostringstream out;
  for (const P2pRow& r : rows) {
    json line;
    line["target"] = r.id;
    line["goal"] = {tidy(r.target.x), tidy(r.target.y), tidy(r.target.theta)};
    line["iterations"] = json::array();
    for (const auto& it : r.result.iterations) line["iterations"].push_back(iteration_json(it));
    out << line.dump() << '\n';
  }
  return out.str();
}

std::string path_csv(const std::vector<poseopt::Target2D>& waypoints,
                     const twolevel::PathResult& result) {
  auto out = csv_stream();
  out << "waypoint,x,y,theta,observed_x,observed_y,observed_theta,position_error,rotation_error\n";
  for (std::size_t k = 0; k < result.waypoints.size(); ++k) {
    const auto& w = waypoints[k];
    const auto& it = result.waypoints[k];
    out << k << ',' << w.x << ',' << w.y << ',' << w.theta << ',' << it.observed.x << ','
        << it.observed.y << ',' << it.observed.theta << ',' << it.position_error << ','
        << it.rotation_error << '\n';
  }
  return out.str();
}

std::string path_jsonl(const std::vector<poseopt::Target2D>& waypoints,
                       const twolevel::PathResult& result) {
  std::ostringstream out;
  for (std::size_t k = 0; k < result.waypoints.size(); ++k) {
    json line = iteration_json(result.waypoints[k]);
    line["waypoint"] = k;
    line["goal"] = {tidy(waypoints[k].x), tidy(waypoints[k].y), tidy(waypoints[k].theta)};
    out << line.dump() << '\n';
  }
  return out.str();
}

std::vector<poseopt::Target2D> corner_path(const poseopt::Target2D& start, double step_x,
                                           int count_x, double step_y, int count_y) {
  if (count_x < 0 || count_y < 0) throw ConfigError("path counts must be non-negative");
  std::vector<poseopt::Target2D> out{start};
  for (int k = 0; k < count_x; ++k) {
    poseopt::Target2D p = out.back();
    p.x += step_x;
    out.push_back(p);
  }
  for (int k = 0; k < count_y; ++k) {
    poseopt::Target2D p = out.back();
    p.y += step_y;
    out.push_back(p);
  }
  return out;
}

namespace {

constexpr const char* kDirectionTokens[] = {"+x", "-x", "+y", "-y", "+z",
                                            "-z", "rot+x", "rot-x", "rot+y", "rot-y"};

}  // namespace

Direction parse_direction(const std::string& token) {
  for (int k = 0; k < 10; ++k) {
    if (token == kDirectionTokens[k]) return static_cast<Direction>(k);
  }
  throw ConfigError("unknown direction '" + token + "'");
}

std::string to_string(Direction d) { return kDirectionTokens[static_cast<int>(d)]; }

jacobian::RunReport atom_behavior(plant::SimulatedArm& arm,
                                  const jacobian::JacobianController& ctrl, Direction d,
                                  double magnitude, const AtomOptions& options) {
  if (options.horizon < 0) throw ConfigError("horizon must be non-negative");
  if (options.rail && !(options.rail->direction.norm() > 0.0)) {
    throw ConfigError("rail direction must be non-zero");
  }
  const int k = static_cast<int>(d);
  const bool rotation = k >= 6;
  const Eigen::Vector3d axis = rotation ? (k < 8 ? Eigen::Vector3d::UnitX()
                                                 : Eigen::Vector3d::UnitY())
                                        : Eigen::Vector3d::Unit(k / 2);
  const double sign = k % 2 == 0 ? 1.0 : -1.0;
  auto provider = [&](const pcc::Transform& tip, int) {
    Eigen::Vector3d p = tip.position();
    Eigen::Matrix3d r = tip.rotation();
    if (rotation) {
      r = Eigen::AngleAxisd(sign * magnitude, axis).toRotationMatrix() * r;
    } else {
      p += sign * magnitude * axis;
    }
    if (options.rail) {
      const Eigen::Vector3d u = options.rail->direction.normalized();
      p = options.rail->point + u * u.dot(p - options.rail->point);
    }
    return pcc::Transform(r, p);
  };
  jacobian::ControllerParams params = ctrl.params();
  params.max_iterations = options.horizon;
  const jacobian::JacobianController bounded(ctrl.singles(), params);
  return bounded.run(arm, pcc::Transform(), provider);
}

std::string run_report_jsonl(const jacobian::RunReport& report) {
  std::ostringstream out;
  for (const auto& log : report.log) {
    json line{{"iteration", log.iteration},
              {"position_error", tidy(log.position_error)},
              {"rotation_error_deg", tidy(log.rotation_error)},
              {"scaled_error", tidy(log.scaled_error)},
              {"accepted", log.accepted},
              {"direction_dot", tidy(log.direction_dot)}};
    json act = json::array();
    for (double a : log.actuation) act.push_back(tidy(a));
    line["actuation"] = act;
    out << line.dump() << '\n';
  }
  return out.str();
}

std::vector<pcc::Transform> random_spatial_goals(const plant::ArmPlant& plant, int count,
                                                 std::uint64_t seed, double spread) {
  if (plant.dims() != plant::Dimensionality::kSpatial) {
    throw ConfigError("spatial goals need a spatial plant");
  }
  if (count < 0 || !(spread > 0.0 && spread <= 1.0)) {
    throw ConfigError("goal count or spread out of range");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<pcc::Transform> goals;
  for (int k = 0; k < count; ++k) {
    std::vector<actuation::Generalized> g;
    for (std::size_t i = 0; i < plant.segments(); ++i) {
      const double pmax = plant.spec(i).pressure_max;
      const double z = 4.0 * pmax * (0.5 + spread * (u(rng) - 0.5));
      const double budget = spread * std::min(z, 4.0 * pmax - z);
      double x, y;
      do {
        x = (2.0 * u(rng) - 1.0) * budget;
        y = (2.0 * u(rng) - 1.0) * budget;
      } while (std::abs(x) + std::abs(y) > budget);
      g.push_back({x, y, z});
    }
    goals.push_back(
        plant.tip_transforms(plant.settle(jacobian::command_from_generalized(plant, g), {})).back());
  }
  return goals;
}

std::vector<jacobian::RunReport> run_jacobian(const plant::ArmPlant& plant,
                                              const jacobian::JacobianController& ctrl,
                                              const std::vector<pcc::Transform>& goals,
                                              const plant::Disturbance& dist) {
  std::vector<jacobian::RunReport> reports;
  for (const pcc::Transform& goal : goals) {
    plant::SimulatedArm arm(plant, dist);
    arm.apply(jacobian::home_command(plant));
    arm.settle();
    reports.push_back(ctrl.run(arm, goal));
  }
  return reports;
}

std::string jacobian_csv(const std::vector<jacobian::RunReport>& reports) {
  auto out = csv_stream();
  out << "goal,converged,iterations,initial_position_error,final_position_error,"
         "final_rotation_error_deg,rejected_steps\n";
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const jacobian::RunReport& r = reports[k];
    int rejected = 0;
    for (const auto& l : r.log) rejected += l.iteration < r.iterations && !l.accepted;
    out << k << ',' << (r.converged ? 1 : 0) << ',' << r.iterations << ','
        << r.log.front().position_error << ',' << r.log.back().position_error << ','
        << r.log.back().rotation_error << ',' << rejected << '\n';
  }
  return out.str();
}

std::string jacobian_jsonl(const std::vector<jacobian::RunReport>& reports) {
  std::ostringstream out;
  for (std::size_t k = 0; k < reports.size(); ++k) {
    std::istringstream lines(run_report_jsonl(reports[k]));
    for (std::string line; std::getline(lines, line);) {
      json j = json::parse(line);
      j["goal"] = k;
      out << j.dump() << '\n';
    }
  }
  return out.str();
}

}  // namespace softarm::harness
