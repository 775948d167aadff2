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


// Acceptance run: one PASS or FAIL line per criterion with the measured
// quantities and wall time. Exits non-zero when any criterion fails.
//
// Usage: acceptance <path to the softarm CLI>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "softarm/config_net.hpp"
#include "softarm/design.hpp"
#include "softarm/harness.hpp"
#include "softarm/jacobian_ctrl.hpp"
#include "softarm/pcc.hpp"
#include "softarm/pose_opt.hpp"
#include "softarm/qlearn.hpp"
#include "softarm/two_level.hpp"

namespace {

using namespace softarm;
namespace fs = std::filesystem;

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Interior of the feasible diamond of each segment.
pcc::ConfigurationSpace random_feasible(const std::vector<poseopt::SegmentLimits>& lim,
                                        std::mt19937_64& rng, double extent) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  pcc::ConfigurationSpace c;
  for (const auto& l : lim) {
    double a, b;
    do {
      a = u(rng);
      b = u(rng);
    } while (std::abs(a) + std::abs(b) > extent);
    c.length.push_back(l.l_avg + 0.5 * a * (l.l_max - l.l_min));
    c.curvature.push_back(l.k_avg + 0.5 * b * (l.k_max - l.k_min));
  }
  return c;
}

Outcome kinematics_roundtrip() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> len(40.0, 160.0);
  std::uniform_real_distribution<double> bend(-0.95 * kPi, 0.95 * kPi);
  std::uniform_int_distribution<int> segs(1, 5);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    pcc::ConfigurationSpace c;
    for (int i = segs(rng); i > 0; --i) {
      const double l = len(rng);
      c.length.push_back(l);
      c.curvature.push_back(bend(rng) / l);
    }
    const auto tips = pcc::forward_2d(c);
    const auto back = pcc::estimate_params(tips);
    const auto again = pcc::forward_2d(back);
    for (std::size_t i = 0; i < c.size(); ++i) {
      worst = std::max({worst, std::abs(back.length[i] - c.length[i]),
                        std::abs(back.curvature[i] - c.curvature[i]),
                        std::abs(again[i].x - tips[i].x), std::abs(again[i].y - tips[i].y)});
    }
  }
  return {worst <= 1e-9, fmt("1000 configs, worst deviation %.2e", worst)};
}

Outcome pose_optimizer() {
  const auto lim = poseopt::limits_from_plant(plant::ArmPlant::planar_default());
  std::mt19937_64 rng(2);
  double worst_pos = 0.0, worst_rot = 0.0, worst_grad = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto tip = pcc::forward_2d(random_feasible(lim, rng, 0.9)).back();
    const poseopt::Target2D target{tip.x, tip.y, tip.theta, 0.0};
    const poseopt::PoseResult r = poseopt::optimize_pose(target, lim, {}, 100 + t);
    const auto got = pcc::forward_2d(r.config).back();
    worst_pos = std::max(worst_pos, std::hypot(got.x - tip.x, got.y - tip.y));
    worst_rot = std::max(worst_rot, r.orientation_error);

    poseopt::Target2D off = target;
    off.theta += 0.2;
    const poseopt::TipObjective obj(off, lim, {});
    auto x = obj.pack(random_feasible(lim, rng, 0.9));
    const double h = 1e-5 * 75.0;
    auto f = [&](const std::vector<double>& v) { return obj(v); };
    const auto grad = poseopt::numeric_gradient(f, x, h);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      auto xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      const double oracle = (obj(xp) - obj(xm)) / (2.0 * h);
      num += (grad[i] - oracle) * (grad[i] - oracle);
      den += oracle * oracle;
    }
    if (den > 0.0) worst_grad = std::max(worst_grad, std::sqrt(num / den));
  }
  return {worst_pos < 1e-2 && worst_rot < 1e-3 && worst_grad < 1e-4,
          fmt("worst tip %.2e mm, orientation %.2e rad, gradient rel. err %.2e", worst_pos,
              worst_rot, worst_grad)};
}

Outcome viscoelastic_compensation() {
  const plant::ArmPlant plant = plant::ArmPlant::planar_default().with_memory(0.2);
  const net::SegmentDatasets data = net::generate_data(plant, 2000, 1);
  net::TrainOptions opt;
  opt.epochs = 300;
  const net::NetBundle plain = net::train_bundle(data.plain, false, 0.3, opt);
  const net::NetBundle star = net::train_bundle(data.history, true, 0.3, opt);
  auto mean_error = [&](const net::NetBundle& bundle) {
    plant::SimulatedArm arm(plant);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 0.3);
    pcc::ConfigurationSpace prev = plant.planar_config(plant.rest_state());
    double err = 0.0;
    for (int t = 0; t < 100; ++t) {
      plant::PressureCommand cmd = plant.zero_command();
      for (std::size_t i = 0; i < plant.segments(); ++i) {
        cmd.at(i, 0) = u(rng);
        cmd.at(i, 1) = u(rng);
      }
      const pcc::ConfigurationSpace target = plant.planar_config(plant.settle(cmd, {}));
      arm.apply(bundle.command(target, prev));
      const pcc::Pose2D tip = arm.observe().planar_tip();
      const pcc::Pose2D want = pcc::forward_2d(target).back();
      err += std::hypot(tip.x - want.x, tip.y - want.y);
      prev = target;
    }
    return err / 100.0;
  };
  const double e_plain = mean_error(plain), e_star = mean_error(star);
  return {e_star <= 0.8 * e_plain,
          fmt("Net* %.3f mm vs Net %.3f mm, ratio %.3f", e_star, e_plain, e_star / e_plain)};
}

Outcome closed_loop_gain() {
  const plant::ArmPlant plant = plant::ArmPlant::planar_default();
  const net::SegmentDatasets data = net::generate_data(plant, 2000, 1);
  net::TrainOptions opt;
  opt.epochs = 300;
  const auto lim = poseopt::limits_from_plant(plant);
  twolevel::ModelController ctrl(net::train_bundle(data.history, true, 0.3, opt), lim, {}, 3);
  plant::SimulatedArm arm(plant);
  twolevel::FeedbackParams fp;
  fp.max_iterations = 10;
  fp.position_tolerance = 0.5;
  fp.rotation_tolerance = 0.005;
  std::mt19937_64 rng(5);
  double open = 0.0, closed = 0.0;
  std::size_t longest = 0;
  for (int t = 0; t < 100; ++t) {
    const auto tip = pcc::forward_2d(random_feasible(lim, rng, 0.9)).back();
    const twolevel::FeedbackResult r =
        twolevel::feedback_point(arm, ctrl, {tip.x, tip.y, tip.theta, 0.0}, fp);
    open += r.open_loop_position_error();
    closed += r.final_position_error();
    // The first entry is the open-loop step.
    longest = std::max(longest, r.iterations.size() - 1);
  }
  return {closed <= 0.2 * open && longest <= 10,
          fmt("closed %.3f mm vs open %.3f mm mean, ratio %.3f, at most %zu iterations",
              closed / 100, open / 100, closed / open, longest)};
}

Outcome jacobian_controller() {
  const plant::ArmPlant plant = plant::ArmPlant::spatial_default();
  const jacobian::JacobianController ctrl(jacobian::init_single_jacobians(plant), {});
  const auto goals = harness::random_spatial_goals(plant, 30, 7);
  plant::Disturbance load;
  load.tip_load = 100.0;
  int within = 0, bad_dir = 0;
  std::vector<int> free_its, load_its;
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& r : harness::run_jacobian(plant, ctrl, goals, pass ? load : plant::Disturbance{})) {
      (pass ? load_its : free_its).push_back(r.converged ? r.iterations : 1000000);
      if (!pass) within += r.converged && r.iterations <= 15;
      for (const auto& l : r.log) bad_dir += l.accepted && !(l.direction_dot > 0.0);
    }
  }
  auto median = [](std::vector<int> v) {
    std::sort(v.begin(), v.end());
    return 0.5 * (v[(v.size() - 1) / 2] + v[v.size() / 2]);
  };
  const double m0 = median(free_its), m1 = median(load_its);
  return {within >= 24 && m1 < 1.5 * m0 && bad_dir == 0,
          fmt("%d/30 within 15 iterations, median %.1f -> %.1f with load (+%.0f%%), %d bad "
              "accepted steps",
              within, m0, m1, 100.0 * (m1 - m0) / m0, bad_dir)};
}

Outcome jacobian_vs_oracle() {
  const plant::ArmPlant plant = plant::ArmPlant::spatial_default();
  const auto singles = jacobian::init_single_jacobians(plant);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double h = 1e-4, lever = 100.0;
  int total = 0, bad = 0;
  double lowest = 1.0;
  for (int t = 0; t < 100; ++t) {
    std::vector<actuation::Generalized> g;
    for (std::size_t i = 0; i < plant.segments(); ++i) {
      const double pmax = plant.spec(i).pressure_max;
      const double z = 4.0 * pmax * (0.5 + 0.9 * (u(rng) - 0.5));
      const double budget = 0.9 * std::min(z, 4.0 * pmax - z);
      double x, y;
      do {
        x = (2.0 * u(rng) - 1.0) * budget;
        y = (2.0 * u(rng) - 1.0) * budget;
      } while (std::abs(x) + std::abs(y) > budget);
      g.push_back({x, y, z});
    }
    auto gg = g;
    const auto state = plant.settle(jacobian::command_from_generalized(plant, gg), {});
    const auto j = jacobian::assemble_jacobian(plant.segment_transforms(state), singles, 0.01, lever);
    const pcc::Transform inv = plant.tip_transforms(state).back().inverse();
    for (std::size_t i = 0; i < plant.segments(); ++i) {
      for (int c = 0; c < 3; ++c) {
        const std::size_t col = 3 * i + static_cast<std::size_t>(c);
        auto deviation = [&](double s) {
          auto q = g;
          double* f = c == 0 ? &q[i].x : c == 1 ? &q[i].y : &q[i].z;
          *f += s * h;
          const auto st = plant.settle(jacobian::command_from_generalized(plant, q), {});
          return jacobian::scaled(pcc::transform_to_vector(inv * plant.tip_transforms(st).back()),
                                  lever);
        };
        const jacobian::Vector5 fd = (deviation(1.0) - deviation(-1.0)) / (2.0 * h);
        const Eigen::VectorXd a = j.m.col(static_cast<Eigen::Index>(col));
        if (!j.valid[col] || fd.norm() < 1e-9) continue;
        const double cosine = a.dot(fd) / (a.norm() * fd.norm());
        ++total;
        bad += !(cosine > 0.0);
        lowest = std::min(lowest, cosine);
      }
    }
  }
  return {total > 0 && bad == 0,
          fmt("%d valid columns, %d non-positive, lowest cosine %.3f", total, bad, lowest)};
}

Outcome qlearning() {
  // Bellman fixed point on a chain against value iteration.
  const int n = 9;
  const double gamma = 0.9;
  qlearn::TabularMdp m;
  m.states = n;
  m.actions = 2;
  m.terminal.assign(n, 0);
  m.terminal.back() = 1;
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < 2; ++a) {
      const int next = std::clamp(s + (a == 0 ? -1 : 1), 0, n - 1);
      m.next.push_back(next);
      m.reward.push_back(next == n - 1 && s != n - 1 ? 10.0 : -1.0);
    }
  }
  std::vector<double> v(n, 0.0);
  for (int it = 0; it < 2000; ++it) {
    std::vector<double> nv(n, 0.0);
    for (int s = 0; s + 1 < n; ++s) {
      for (int a = 0; a < 2; ++a) {
        const auto k = static_cast<std::size_t>(2 * s + a);
        nv[s] = std::max(a ? nv[s] : -1e300, m.reward[k] + gamma * v[m.next[k]]);
      }
    }
    v = nv;
  }
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, 2);
  qlearn::q_sweeps(m, q, 0.5, gamma, 1e-12, 100000);
  double bellman = 0.0;
  for (int s = 0; s + 1 < n; ++s) {
    for (int a = 0; a < 2; ++a) {
      const auto k = static_cast<std::size_t>(2 * s + a);
      bellman = std::max(bellman, std::abs(q(s, a) - (m.reward[k] + gamma * v[m.next[k]])));
    }
  }

  const plant::ArmPlant plant = plant::ArmPlant::qlearning_default();
  const qlearn::Workspace ws = qlearn::Workspace::sample(plant, 2000, 7);
  qlearn::QLearner learner({}, qlearn::make_actions(plant.segments(), true), {}, 4);
  plant::SimulatedArm arm(plant, {}, 4);
  const qlearn::TrainReport rep = learner.train(arm, ws);
  std::mt19937_64 rng(21);
  int reached = 0;
  for (int k = 0; k < 20; ++k) {
    qlearn::ControlOptions opt;
    opt.epsilon = 0.1;
    reached += learner.control(arm, ws.draw(rng), opt).reached;
  }
  const bool trained = rep.converged && rep.outer_iterations <= 5000 &&
                       learner.marked_proportion() >= 0.5;
  return {trained && reached >= 18 && bellman < 1e-6,
          fmt("marked %.3f after %d outer iterations, reached %d/20 within 10 mm, Bellman "
              "deviation %.1e",
              learner.marked_proportion(), rep.outer_iterations, reached, bellman)};
}

// Criteria 8 and 9 share one comparative run.
struct ComparativeRun {
  std::vector<harness::ResultRow> rows;
};

ComparativeRun& comparative() {
  static ComparativeRun run = [] {
    const harness::ComparativeConfig config;
    const harness::Prepared prep = harness::prepare(plant::ArmPlant::planar_default(), config);
    return ComparativeRun{harness::run_comparative(prep, config)};
  }();
  return run;
}

Outcome comparative_orderings() {
  using harness::ControllerId;
  using harness::Group;
  const auto& rows = comparative().rows;
  auto row = [&](ControllerId c, Group g) -> const harness::ResultRow& {
    return harness::find_row(rows, c, g);
  };
  const auto& mb = row(ControllerId::kModelBased, Group::kFree);
  const auto& em = row(ControllerId::kEstimatedModel, Group::kFree);
  const auto& ql = row(ControllerId::kQLearning, Group::kFree);
  const bool free_ok = mb.success_rate == 1.0 && em.success_rate == 1.0 &&
                       ql.success_rate == 1.0 && mb.mean_steps < em.mean_steps &&
                       em.mean_steps < ql.mean_steps;
  const double swap_q = row(ControllerId::kQLearning, Group::kSwapRoot).success_rate;
  const double swap_mb = row(ControllerId::kModelBased, Group::kSwapRoot).success_rate;
  const double swap_em = row(ControllerId::kEstimatedModel, Group::kSwapRoot).success_rate;
  const bool swap_ok = swap_q == 1.0 && swap_mb <= 0.2 && swap_em <= 0.3;
  // Relative-time rise from free space to the strongest lateral force.
  const double d_mb = row(ControllerId::kModelBased, Group::kForce150).relative_time -
                      mb.relative_time;
  const double d_em = row(ControllerId::kEstimatedModel, Group::kForce150).relative_time -
                      em.relative_time;
  const bool force_ok = std::isfinite(d_mb) && std::isfinite(d_em) && d_mb > d_em;
  return {free_ok && swap_ok && force_ok,
          fmt("free steps %.2f < %.2f < %.2f, rates %.2f/%.2f/%.2f; swap-root rates q %.2f mb "
              "%.2f em %.2f; relative-time rise mb %+.2f vs em %+.2f",
              mb.mean_steps, em.mean_steps, ql.mean_steps, mb.success_rate, em.success_rate,
              ql.success_rate, swap_q, swap_mb, swap_em, d_mb, d_em)};
}

Outcome online_recovery() {
  const auto& q = harness::find_row(comparative().rows, harness::ControllerId::kQLearning,
                                    harness::Group::kSwapRoot);
  double first = 0.0, rest = 0.0;
  for (std::size_t k = 0; k < q.episodes.size(); ++k) (k < 5 ? first : rest) += q.episodes[k].steps;
  first /= 5.0;
  rest /= static_cast<double>(q.episodes.size() - 5);
  return {rest < first, fmt("swap-root mean steps first 5 %.1f, last 15 %.1f", first, rest)};
}

Outcome design_formulas() {
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_mc = 0.0;
  for (int k = 0; k < 20; ++k) {
    design::ArmGeometry g;
    g.L0 = 50.0 + 100.0 * u(rng);
    g.L1 = g.L0 * (1.3 + 0.7 * u(rng));
    g.D = 10.0 + 30.0 * u(rng);
    const double r_min = std::max(g.D, g.L1 / 5.0);
    g.R = r_min + (g.L1 - r_min) * u(rng);
    const double closed = design::flexibility(g);
    worst_mc = std::max(worst_mc,
                        std::abs(design::reachable_area_mc(g, 1000000, 100 + k) - closed) / closed);
  }
  const double spa = 10.0 * 0.1 * 2.0;
  const bool equal = std::abs(design::load_moment({3, 5, 3, 10.0, 0.1, 2.0}) - spa) < 1e-12;
  const double stiff = design::load_moment({2, 5, 1000.0 * 7.0, 10.0, 0.1, 2.0});
  const bool limit = std::abs(stiff - 3.0 * spa) <= 0.01 * 3.0 * spa;
  const bool euler = std::abs(design::euler_critical(50, 10, 5) - kPi * kPi * 500.0 / 100.0) < 1e-9;
  const bool ft = std::abs(design::flexural_torsional_critical(2, 3, 5, 7, 10) -
                           kPi * std::sqrt(210.0) / 10.0) < 1e-9;

  const design::Surrogate s;
  const design::Surface surf =
      design::sweep(s, design::default_wall_grid(), design::default_groove_grid());
  bool monotone = true;
  for (Eigen::Index i = 0; i < surf.f.rows(); ++i) {
    for (Eigen::Index j = 0; j + 1 < surf.f.cols(); ++j) monotone &= surf.f(i, j) < surf.f(i, j + 1);
  }
  bool interior = true, rightward = true;
  for (std::size_t i = 0; i < surf.w.size(); ++i) {
    if (surf.w[i] >= 2.5) {
      interior &= surf.argmax_d[i] > surf.d.front() && surf.argmax_d[i] < surf.d.back();
    }
    if (i > 0) rightward &= surf.peak_d[i] > surf.peak_d[i - 1];
  }
  const auto region = design::feasible_region(surf, 0.15, 2.3);
  return {worst_mc < 0.02 && equal && limit && euler && ft && monotone && interior && rightward &&
              !region.empty(),
          fmt("MC worst %.2f%%, k3 limit %.4f of 3Spa, substitutions %s, findings %d%d%d, "
              "%zu feasible designs",
              100.0 * worst_mc, stiff / (3.0 * spa), euler && ft ? "exact" : "off", monotone,
              interior, rightward, region.size())};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

Outcome cli_determinism(const std::string& cli) {
  if (cli.empty() || !fs::exists(cli)) return {false, "CLI binary not given"};
  const fs::path root = fs::temp_directory_path() / "softarm_acceptance";
  fs::remove_all(root);
  const std::vector<std::string> runs{
      "train-net --samples 300 --epochs 50",
      "train-q",
      "p2p --samples 300 --epochs 50 --targets 5",
      "path --samples 300 --epochs 50 --count-x 10 --count-y 10",
      "jacobian-run --goals 5",
      "compare --targets 4",
      "design-sweep",
      "atom --direction +x --magnitude 10 --rail 1,0,0"};
  int files = 0;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    std::vector<fs::path> dirs;
    for (int rep = 0; rep < 2; ++rep) {
      dirs.push_back(root / std::to_string(rep) / std::to_string(k));
      const std::string cmd = "\"" + cli + "\" --seed 3 --out \"" + dirs.back().string() + "\" " +
                              runs[k] + " > /dev/null";
      if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + runs[k]};
    }
    for (const auto& e : fs::recursive_directory_iterator(dirs[0])) {
      if (!e.is_regular_file()) continue;
      const fs::path twin = dirs[1] / fs::relative(e.path(), dirs[0]);
      if (!fs::exists(twin) || slurp(e.path()) != slurp(twin)) {
        return {false, "differs: " + fs::relative(e.path(), root).string()};
      }
      ++files;
    }
  }
  fs::remove_all(root);
  return {files > 0, fmt("%zu subcommands run twice, %d output files byte-identical",
                         runs.size(), files)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"kinematics roundtrip", kinematics_roundtrip},
      {"pose optimizer self-consistency", pose_optimizer},
      {"viscoelasticity compensation", viscoelastic_compensation},
      {"closed-loop gain", closed_loop_gain},
      {"jacobian controller", jacobian_controller},
      {"jacobian vs finite differences", jacobian_vs_oracle},
      {"q-learning", qlearning},
      {"comparative orderings", comparative_orderings},
      {"q-learning online recovery", online_recovery},
      {"design formulas", design_formulas},
      {"cli determinism", [&] { return cli_determinism(cli); }}};
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    const Outcome o = criteria[k].second();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("%s %2zu %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", k + 1,
                criteria[k].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
