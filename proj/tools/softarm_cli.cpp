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


// Command line front end for the experiment harness. Every subcommand writes
// its reports into --out and is a pure function of --config and --seed.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "softarm/design.hpp"
#include "softarm/error.hpp"
#include "softarm/harness.hpp"

namespace {

using namespace softarm;
namespace fs = std::filesystem;

struct Globals {
  std::string config;
  std::uint64_t seed = 1;
  std::string out = "out";
};

void write_file(const Globals& g, const std::string& name, const std::string& text) {
  fs::create_directories(g.out);
  const fs::path path = fs::path(g.out) / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << text;
  std::cout << "wrote " << path.string() << '\n';
}

plant::ArmPlant load_plant(const Globals& g, plant::ArmPlant fallback,
                           plant::Dimensionality dims) {
  plant::ArmPlant p = g.config.empty() ? std::move(fallback) : plant::load_plant_config(g.config);
  if (p.dims() != dims) {
    throw ConfigError(std::string("this subcommand needs a ") +
                      (dims == plant::Dimensionality::kPlanar ? "planar" : "spatial") + " plant");
  }
  return p;
}

std::ostringstream csv() {
  std::ostringstream out;
  out << std::setprecision(10);
  return out;
}

// train-net
struct NetArgs {
  int samples = 1000;
  int epochs = 200;
  bool plain = false;
};

net::NetBundle train_nets(const plant::ArmPlant& plant, const NetArgs& a, std::uint64_t seed) {
  const net::SegmentDatasets data =
      net::generate_data(plant, static_cast<std::size_t>(a.samples), seed);
  net::TrainOptions opt;
  opt.epochs = a.epochs;
  opt.seed = seed + 1;
  return net::train_bundle(a.plain ? data.plain : data.history, !a.plain,
                           plant.spec(0).pressure_max, opt);
}

void cmd_train_net(const Globals& g, const NetArgs& a) {
  const plant::ArmPlant plant =
      load_plant(g, plant::ArmPlant::planar_default(), plant::Dimensionality::kPlanar);
  const net::NetBundle nets = train_nets(plant, a, g.seed);
  write_file(g, "nets.json", nets.to_json());
  auto out = csv();
  out << "segment,final_loss\n";
  for (std::size_t i = 0; i < nets.nets.size(); ++i) out << i << ',' << nets.nets[i].final_loss << '\n';
  write_file(g, "net_loss.csv", out.str());
}

// train-q
struct QArgs {
  int workspace_samples = 2000;
  int orientation_bins = 1;
};

void cmd_train_q(const Globals& g, const QArgs& a) {
  const plant::ArmPlant plant =
      load_plant(g, plant::ArmPlant::qlearning_default(), plant::Dimensionality::kPlanar);
  const qlearn::Workspace ws = qlearn::Workspace::sample(plant, a.workspace_samples, g.seed + 1);
  qlearn::Partition part;
  part.orientation_bins = a.orientation_bins;
  qlearn::QLearner learner(part, qlearn::make_actions(plant.segments(), true), {}, g.seed + 2);
  plant::SimulatedArm arm(plant, {}, g.seed + 3);
  const qlearn::TrainReport rep = learner.train(arm, ws);
  write_file(g, "qtable.json", learner.table().to_json());
  auto out = csv();
  out << "outer,marked,proportion,steps,reached\n";
  for (const auto& c : rep.curve) {
    out << c.outer << ',' << c.marked << ',' << c.proportion << ',' << c.steps << ','
        << (c.reached ? 1 : 0) << '\n';
  }
  write_file(g, "q_curve.csv", out.str());
  std::ostringstream s;
  s << "converged " << (rep.converged ? "yes" : "no") << "\nouter_iterations "
    << rep.outer_iterations << "\ntotal_steps " << rep.total_steps << "\nmarked_proportion "
    << std::setprecision(6) << learner.marked_proportion() << '\n';
  if (!rep.failure.empty()) s << "failure " << rep.failure << '\n';
  write_file(g, "q_summary.txt", s.str());
}

// p2p and path
struct ModelArgs {
  NetArgs net;
  std::string nets_path;
  int targets = 20;
  twolevel::FeedbackParams feedback;
};

struct ModelSetup {
  plant::ArmPlant plant;
  net::NetBundle nets;
  std::vector<poseopt::SegmentLimits> limits;
};

ModelSetup model_setup(const Globals& g, const ModelArgs& a) {
  plant::ArmPlant plant =
      load_plant(g, plant::ArmPlant::planar_default(), plant::Dimensionality::kPlanar);
  net::NetBundle nets =
      a.nets_path.empty() ? train_nets(plant, a.net, g.seed) : net::NetBundle::load(a.nets_path);
  std::vector<poseopt::SegmentLimits> limits = poseopt::limits_from_plant(plant);
  return {std::move(plant), std::move(nets), std::move(limits)};
}

void cmd_p2p(const Globals& g, const ModelArgs& a) {
  ModelSetup m = model_setup(g, a);
  const qlearn::Workspace ws = qlearn::Workspace::sample(m.plant, 2000, g.seed + 2);
  std::vector<poseopt::Target2D> targets;
  for (const pcc::Pose2D& t : harness::draw_targets(ws, a.targets, g.seed + 3)) {
    targets.push_back({t.x, t.y, t.theta, 0.0});
  }
  plant::SimulatedArm arm(m.plant, {}, g.seed + 4);
  twolevel::ModelController ctrl(m.nets, m.limits, {}, g.seed + 5);
  const auto rows = harness::run_p2p(arm, ctrl, targets, a.feedback);
  write_file(g, "p2p.csv", harness::p2p_csv(rows));
  write_file(g, "p2p.jsonl", harness::p2p_jsonl(rows));
}

struct PathArgs {
  double step_x = 2.0;
  int count_x = 30;
  double step_y = 2.0;
  int count_y = 30;
};

void cmd_path(const Globals& g, const ModelArgs& a, const PathArgs& p) {
  ModelSetup m = model_setup(g, a);
  pcc::ConfigurationSpace mid;
  for (const auto& l : m.limits) {
    mid.curvature.push_back(l.k_avg);
    mid.length.push_back(l.l_avg);
  }
  const pcc::Pose2D home = pcc::forward_2d(mid).back();
  const auto waypoints = harness::corner_path({home.x - p.step_x * p.count_x / 2.0, home.y,
                                               home.theta, 0.0},
                                              p.step_x, p.count_x, p.step_y, p.count_y);
  plant::SimulatedArm arm(m.plant, {}, g.seed + 4);
  twolevel::ModelController ctrl(m.nets, m.limits, {}, g.seed + 5);
  const twolevel::PathResult result = twolevel::track_path(arm, ctrl, waypoints, a.feedback);
  write_file(g, "path.csv", harness::path_csv(waypoints, result));
  write_file(g, "path.jsonl", harness::path_jsonl(waypoints, result));
}

// jacobian-run
struct JacobianArgs {
  int goals = 30;
  double load = 0.0;  // g
  double spread = 1.0;
  int max_iterations = 100;
};

void cmd_jacobian(const Globals& g, const JacobianArgs& a) {
  const plant::ArmPlant plant =
      load_plant(g, plant::ArmPlant::spatial_default(), plant::Dimensionality::kSpatial);
  jacobian::ControllerParams params;
  params.max_iterations = a.max_iterations;
  const jacobian::JacobianController ctrl(jacobian::init_single_jacobians(plant), params);
  plant::Disturbance dist;
  dist.tip_load = a.load;
  const auto reports = harness::run_jacobian(
      plant, ctrl, harness::random_spatial_goals(plant, a.goals, g.seed, a.spread), dist);
  write_file(g, "jacobian.csv", harness::jacobian_csv(reports));
  write_file(g, "jacobian.jsonl", harness::jacobian_jsonl(reports));
}

// compare
struct CompareArgs {
  int targets = 20;
  std::vector<std::string> controllers;
  std::vector<std::string> groups;
};

void cmd_compare(const Globals& g, const CompareArgs& a) {
  const plant::ArmPlant plant =
      load_plant(g, plant::ArmPlant::planar_default(), plant::Dimensionality::kPlanar);
  harness::ComparativeConfig config;
  config.seed = g.seed;
  config.targets = a.targets;
  if (!a.controllers.empty()) {
    config.controllers.clear();
    for (const auto& c : a.controllers) config.controllers.push_back(harness::parse_controller(c));
  }
  if (!a.groups.empty()) {
    config.groups.clear();
    for (const auto& s : a.groups) config.groups.push_back(harness::parse_group(s));
  }
  config.validate();
  const harness::Prepared prep = harness::prepare(plant, config);
  const auto rows = harness::run_comparative(prep, config);
  write_file(g, "comparative.csv", harness::comparative_csv(rows));
  write_file(g, "episodes.csv", harness::episodes_csv(rows));
  write_file(g, "table.txt", harness::comparative_table(rows));
  std::cout << harness::comparative_table(rows);
}

// design-sweep
struct DesignArgs {
  double f_min = 0.15;
  double m_min = 2.3;  // N m
};

void cmd_design(const Globals& g, const DesignArgs& a) {
  const design::Surrogate model;
  const design::Surface s =
      design::sweep(model, design::default_wall_grid(), design::default_groove_grid());
  auto surface = csv();
  surface << "wall_mm,groove_mm,flexibility,load_moment_nm\n";
  for (std::size_t i = 0; i < s.w.size(); ++i) {
    for (std::size_t j = 0; j < s.d.size(); ++j) {
      surface << s.w[i] << ',' << s.d[j] << ',' << s.f(i, j) << ',' << s.m(i, j) << '\n';
    }
  }
  write_file(g, "surface.csv", surface.str());
  auto extrema = csv();
  extrema << "wall_mm,grid_argmax_groove_mm,peak_groove_mm\n";
  for (std::size_t i = 0; i < s.w.size(); ++i) {
    extrema << s.w[i] << ',' << s.argmax_d[i] << ',' << s.peak_d[i] << '\n';
  }
  write_file(g, "extrema.csv", extrema.str());
  auto feasible = csv();
  feasible << "wall_mm,groove_mm,flexibility,load_moment_nm\n";
  for (const auto& p : design::feasible_region(s, a.f_min, a.m_min)) {
    feasible << p.w << ',' << p.d << ',' << p.f << ',' << p.m << '\n';
  }
  write_file(g, "feasible.csv", feasible.str());
}

// atom
struct AtomArgs {
  std::string direction = "+z";
  double magnitude = 10.0;
  int horizon = 20;
  std::vector<double> rail;  // direction through the starting tip
};

void cmd_atom(const Globals& g, const AtomArgs& a) {
  const plant::ArmPlant plant =
      load_plant(g, plant::ArmPlant::spatial_default(), plant::Dimensionality::kSpatial);
  const harness::Direction d = harness::parse_direction(a.direction);
  const jacobian::JacobianController ctrl(jacobian::init_single_jacobians(plant), {});
  plant::SimulatedArm arm(plant, {}, g.seed);
  arm.apply(jacobian::home_command(plant));
  arm.settle();
  harness::AtomOptions opt;
  opt.horizon = a.horizon;
  if (!a.rail.empty()) {
    if (a.rail.size() != 3) throw ConfigError("--rail needs three components");
    opt.rail = harness::Rail{arm.observe().spatial_tip().position(),
                             Eigen::Vector3d(a.rail[0], a.rail[1], a.rail[2])};
  }
  const jacobian::RunReport r = harness::atom_behavior(arm, ctrl, d, a.magnitude, opt);
  write_file(g, "atom.jsonl", harness::run_report_jsonl(r));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Soft arm kinematics, control and design experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "Plant description (key = value)")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed for every random stream");
  app.add_option("--out", g.out, "Output directory");

  NetArgs net;
  auto* train_net = app.add_subcommand("train-net", "Train the per-segment actuation networks");
  train_net->add_option("--samples", net.samples, "Samples per segment");
  train_net->add_option("--epochs", net.epochs, "Training epochs");
  train_net->add_flag("--plain", net.plain, "Train memoryless networks");

  QArgs q;
  auto* train_q = app.add_subcommand("train-q", "Train the tabular Q-learning controller");
  train_q->add_option("--workspace-samples", q.workspace_samples, "Sampled workspace poses");
  train_q->add_option("--orientation-bins", q.orientation_bins, "Odd heading-error bin count");

  ModelArgs model;
  PathArgs path;
  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--nets", model.nets_path, "Trained networks (trained on the fly otherwise)");
    sub->add_option("--samples", model.net.samples, "Samples per segment when training");
    sub->add_option("--epochs", model.net.epochs, "Epochs when training");
    sub->add_option("--alpha", model.feedback.alpha, "Point modification rate");
    sub->add_option("--beta", model.feedback.beta, "Path modification rate");
    sub->add_option("--max-iterations", model.feedback.max_iterations, "Feedback iterations");
  };
  auto* p2p = app.add_subcommand("p2p", "Point-to-point runs of the model-based controller");
  add_model(p2p);
  p2p->add_option("--targets", model.targets, "Target count");
  auto* path_cmd = app.add_subcommand("path", "Corner path tracking of the model-based controller");
  add_model(path_cmd);
  path_cmd->add_option("--step-x", path.step_x, "mm per waypoint along x");
  path_cmd->add_option("--count-x", path.count_x, "Waypoints along x");
  path_cmd->add_option("--step-y", path.step_y, "mm per waypoint along y");
  path_cmd->add_option("--count-y", path.count_y, "Waypoints along y");

  JacobianArgs jac;
  auto* jac_cmd = app.add_subcommand("jacobian-run", "Estimated-model runs to random 3D goals");
  jac_cmd->add_option("--goals", jac.goals, "Goal count");
  jac_cmd->add_option("--load", jac.load, "Tip load in g");
  jac_cmd->add_option("--spread", jac.spread, "Actuation range of the goals in (0, 1]");
  jac_cmd->add_option("--max-iterations", jac.max_iterations, "Iterations per goal");

  CompareArgs cmp;
  auto* compare = app.add_subcommand("compare", "Comparative study under disturbance groups");
  compare->add_option("--targets", cmp.targets, "Targets per group");
  compare->add_option("--controllers", cmp.controllers,
                      "model-based, estimated-model, q-learning")->delimiter(',');
  compare->add_option("--groups", cmp.groups,
                      "free, force-0.75N, force-1.5N, swap-middle, swap-root")->delimiter(',');

  DesignArgs des;
  auto* design_cmd = app.add_subcommand("design-sweep", "Wall and groove design surrogate sweep");
  design_cmd->add_option("--f-min", des.f_min, "Flexibility threshold");
  design_cmd->add_option("--m-min", des.m_min, "Load moment threshold in N m");

  AtomArgs atom;
  auto* atom_cmd = app.add_subcommand("atom", "Atom behaviour of the 3D estimated-model controller");
  atom_cmd->add_option("--direction", atom.direction, "+x -x +y -y +z -z rot+x rot-x rot+y rot-y");
  atom_cmd->add_option("--magnitude", atom.magnitude, "Goal offset in mm, or rad for rotations");
  atom_cmd->add_option("--horizon", atom.horizon, "Controller iterations");
  atom_cmd->add_option("--rail", atom.rail, "Rail direction x,y,z through the start tip")
      ->delimiter(',');

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train_net) cmd_train_net(g, net);
    if (*train_q) cmd_train_q(g, q);
    if (*p2p) cmd_p2p(g, model);
    if (*path_cmd) cmd_path(g, model, path);
    if (*jac_cmd) cmd_jacobian(g, jac);
    if (*compare) cmd_compare(g, cmp);
    if (*design_cmd) cmd_design(g, des);
    if (*atom_cmd) cmd_atom(g, atom);
  } catch (const softarm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
