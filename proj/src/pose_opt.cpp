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

#include "softarm/pose_opt.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "softarm/error.hpp"

namespace softarm::poseopt {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_sizes(const pcc::ConfigurationSpace& c,
                 const std::vector<SegmentLimits>& limits) {
  if (c.size() != limits.size()) {
    throw DimensionMismatch("configuration and limits differ in segment count");
  }
}

}  // namespace

SegmentLimits SegmentLimits::from_spec(const plant::SegmentSpec& spec) {
  SegmentLimits l;
  l.k_max = spec.max_curvature * std::tanh(spec.bend_gain);
  l.k_min = -l.k_max;
  l.k_avg = 0.0;
  l.l_min = spec.min_length();
  l.l_max = spec.min_length() + spec.max_elongation * std::min(1.0, spec.elong_gain);
  l.l_avg = 0.5 * (l.l_min + l.l_max);
  return l;
}

void SegmentLimits::validate() const {
  if (!(k_min < k_avg && k_avg < k_max && l_min < l_avg && l_avg < l_max)) {
    throw ConfigError("segment limits need min < avg < max");
  }
}

std::vector<SegmentLimits> limits_from_plant(const plant::ArmPlant& plant) {
  std::vector<SegmentLimits> out;
  for (const auto& s : plant.specs()) out.push_back(SegmentLimits::from_spec(s));
  return out;
}

void CostWeights::validate() const {
  if (!(alpha > beta && beta > gamma && gamma > 0.0 && delta > 0.0)) {
    throw ConfigError("cost weights need alpha > beta > gamma > 0 and delta > 0");
  }
}

std::vector<double> feasibility_margins(const pcc::ConfigurationSpace& config,
                                        const std::vector<SegmentLimits>& limits) {
  check_sizes(config, limits);
  std::vector<double> f(config.size());
  for (std::size_t i = 0; i < config.size(); ++i) {
    const auto& lim = limits[i];
    f[i] = std::abs(2.0 * (config.length[i] - lim.l_avg) / (lim.l_max - lim.l_min)) +
           std::abs(2.0 * (config.curvature[i] - lim.k_avg) / (lim.k_max - lim.k_min)) -
           1.0;
  }
  return f;
}

double cost_feasibility(const pcc::ConfigurationSpace& config,
                        const std::vector<SegmentLimits>& limits, double delta) {
  double cost = 0.0;
  for (double f : feasibility_margins(config, limits)) {
    cost += std::sqrt(f * f + delta * delta) + f;
  }
  return cost;
}

double orientation_deviation(const pcc::ConfigurationSpace& config,
                             const Target2D& target) {
  return target.theta - target.theta_root - config.total_angle();
}

double cost_orientation(const pcc::ConfigurationSpace& config,
                        const Target2D& target) {
  const double d = orientation_deviation(config, target);
  const double d2 = d * d;
  return d2 * d2;
}

double cost_uniformity(const pcc::ConfigurationSpace& config,
                       const std::vector<SegmentLimits>& limits) {
  check_sizes(config, limits);
  double cost = 0.0;
  for (std::size_t i = 0; i < config.size(); ++i) {
    const auto& lim = limits[i];
    const double ul = (config.length[i] - lim.l_avg) / (lim.l_max - lim.l_min);
    const double uk = (config.curvature[i] - lim.k_avg) / (lim.k_max - lim.k_min);
    cost += ul * ul + uk * uk;
  }
  return cost;
}

double total_cost(const pcc::ConfigurationSpace& config, const Target2D& target,
                  const std::vector<SegmentLimits>& limits,
                  const CostWeights& w) {
  return w.alpha * cost_feasibility(config, limits, w.delta) +
         w.beta * cost_orientation(config, target) +
         w.gamma * cost_uniformity(config, limits);
}

TipObjective::TipObjective(Target2D target, std::vector<SegmentLimits> limits,
                           CostWeights weights)
    : target_(target), limits_(std::move(limits)), weights_(weights) {
  if (limits_.empty()) throw ConfigError("pose optimization needs a segment");
}

std::optional<pcc::ConfigurationSpace> TipObjective::config(
    const std::vector<double>& free_tips) const {
  const std::size_t n = limits_.size();
  if (free_tips.size() != dimension()) {
    throw DimensionMismatch("packed tip vector has the wrong size");
  }
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    xs[i] = free_tips[2 * i];
    ys[i] = free_tips[2 * i + 1];
  }
  xs[n - 1] = target_.x;
  ys[n - 1] = target_.y;
  return pcc::try_estimate_params(xs, ys);
}

double TipObjective::operator()(const std::vector<double>& free_tips) const {
  const auto c = config(free_tips);
  if (!c) return kInf;
  const double v = total_cost(*c, target_, limits_, weights_);
  return std::isfinite(v) ? v : kInf;
}

std::vector<double> TipObjective::pack(const pcc::ConfigurationSpace& c) const {
  const auto tips = pcc::forward_2d(c);
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < tips.size(); ++i) {
    out.push_back(tips[i].x);
    out.push_back(tips[i].y);
  }
  return out;
}

std::vector<double> numeric_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x, double h) {
  std::vector<double> g(x.size());
  std::vector<double> probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto at = [&](double offset) {
      probe[i] = x[i] + offset;
      return f(probe);
    };
    const double fp1 = at(h), fm1 = at(-h), fp2 = at(2 * h), fm2 = at(-2 * h);
    probe[i] = x[i];
    if (std::isfinite(fp2) && std::isfinite(fm2)) {
      g[i] = (8.0 * (fp1 - fm1) - (fp2 - fm2)) / (12.0 * h);
    } else {
      g[i] = (fp1 - fm1) / (2.0 * h);
    }
  }
  return g;
}

namespace {

struct StageOutcome {
  std::vector<double> x;
  double cost = kInf;
  int iterations = 0;
};

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

// Quasi-Newton descent with Armijo backtracking; every accepted step lowers
// the cost.
StageOutcome minimize(const TipObjective& objective, std::vector<double> x0,
                      double h, double step_scale, const OptimizerOptions& opt,
                      std::vector<double>& trace) {
  auto f = [&](const std::vector<double>& v) { return objective(v); };
  const auto n = static_cast<Eigen::Index>(x0.size());
  StageOutcome out;
  Eigen::VectorXd x = to_eigen(x0);
  double fx = f(x0);
  out.cost = fx;
  out.x = x0;
  if (n == 0 || !std::isfinite(fx)) return out;
  trace.push_back(fx);
  Eigen::VectorXd g = to_eigen(numeric_gradient(f, x0, h));
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  bool fresh = true;
  for (int it = 0; it < opt.max_iterations; ++it) {
    if (g.norm() < opt.gradient_tolerance) break;
    Eigen::VectorXd d = -H * g;
    if (fresh) d *= step_scale / std::max(g.norm(), 1e-300);
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      H.setIdentity();
      fresh = true;
      d = -g * (step_scale / g.norm());
      slope = g.dot(d);
    }
    double t = 1.0;
    double ft = kInf;
    Eigen::VectorXd xt;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      xt = x + t * d;
      ft = f(to_std(xt));
      if (std::isfinite(ft) && ft <= fx + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (fresh) break;
      H.setIdentity();
      fresh = true;
      continue;
    }
    const Eigen::VectorXd gt = to_eigen(numeric_gradient(f, to_std(xt), h));
    const Eigen::VectorXd s = xt - x;
    const Eigen::VectorXd y = gt - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (fresh) H = Eigen::MatrixXd::Identity(n, n) * (sy / y.squaredNorm());
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) +
          rho * s * s.transpose();
      fresh = false;
    }
    const double change = fx - ft;
    x = xt;
    fx = ft;
    g = gt;
    trace.push_back(fx);
    ++out.iterations;
    if (change < opt.cost_tolerance * std::max(1.0, std::abs(fx))) break;
  }
  out.x = to_std(x);
  out.cost = fx;
  return out;
}

}  // namespace

PoseResult optimize_pose(const Target2D& target,
                         const std::vector<SegmentLimits>& limits,
                         const CostWeights& weights, std::uint64_t seed,
                         const OptimizerOptions& options) {
  if (limits.empty()) throw ConfigError("pose optimization needs a segment");
  for (const auto& l : limits) l.validate();
  double reach = 0.0, mean_length = 0.0;
  for (const auto& l : limits) {
    reach += l.l_max;
    mean_length += l.l_avg / static_cast<double>(limits.size());
  }
  if (std::hypot(target.x, target.y) > reach) {
    std::ostringstream os;
    os << "target (" << target.x << ", " << target.y
       << ") lies outside the reach disc of radius " << reach << " mm";
    throw UnreachableTarget(os.str());
  }

  const std::size_t n = limits.size();
  const TipObjective nominal(target, limits, weights);
  const double h = 1e-5 * mean_length;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jitter(0.0, options.jitter * mean_length);

  PoseResult best;
  best.cost = kInf;
  bool have_feasible = false;
  for (int r = 0; r < options.restarts && !have_feasible; ++r) {
    std::vector<double> x(nominal.dimension());
    for (int attempt = 0; attempt < 100; ++attempt) {
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const double s = static_cast<double>(i + 1) / static_cast<double>(n);
        x[2 * i] = s * target.x + jitter(rng);
        x[2 * i + 1] = s * target.y + jitter(rng);
      }
      if (std::isfinite(nominal(x))) break;
    }

    PoseResult res;
    res.restart = r;
    TipObjective staged = nominal;
    CostWeights w = weights;
    for (int stage = 0; stage < options.max_stages; ++stage) {
      res.traces.emplace_back();
      const StageOutcome o =
          minimize(staged, x, h, 0.1 * mean_length, options, res.traces.back());
      x = o.x;
      res.iterations += o.iterations;
      const auto c = nominal.config(x);
      if (!c) break;
      if (std::abs(orientation_deviation(*c, target)) <= options.orientation_tolerance) {
        break;
      }
      w.beta *= options.continuation_factor;
      staged.set_weights(w);
    }
    const auto c = nominal.config(x);
    if (!c) continue;
    res.config = *c;
    res.cost = nominal(x);
    res.orientation_error = std::abs(orientation_deviation(*c, target));
    const auto margins = feasibility_margins(*c, limits);
    res.max_margin = *std::max_element(margins.begin(), margins.end());
    const bool feasible = res.max_margin <= options.feasibility_tolerance;
    if (feasible || res.cost < best.cost) {
      best = std::move(res);
      have_feasible = feasible;
    }
  }
  if (!have_feasible) {
    std::ostringstream os;
    os << "no feasible pose after " << options.restarts
       << " restarts for target (" << target.x << ", " << target.y << ", "
       << target.theta << ")";
    if (std::isfinite(best.cost)) os << "; best max margin " << best.max_margin;
    throw UnreachableTarget(os.str());
  }
  return best;
}

}  // namespace softarm::poseopt
