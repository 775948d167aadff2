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

#include "softarm/config_net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "softarm/error.hpp"

namespace softarm::net {
namespace {

using json = nlohmann::json;
constexpr int kFormatVersion = 1;

std::vector<double> to_list(const Eigen::MatrixXd& m) {
  return {m.data(), m.data() + m.size()};
}

Eigen::MatrixXd from_list(const json& j, Eigen::Index rows, Eigen::Index cols) {
  const auto v = j.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(v.size()) != rows * cols) {
    throw ConfigError("model array has the wrong number of entries");
  }
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
}

}  // namespace

Normalizer Normalizer::fit(const std::vector<Eigen::VectorXd>& rows) {
  if (rows.empty()) throw ConfigError("cannot fit a normalizer to no data");
  Normalizer n{rows.front(), rows.front()};
  for (const auto& r : rows) {
    n.lo = n.lo.cwiseMin(r);
    n.hi = n.hi.cwiseMax(r);
  }
  for (Eigen::Index i = 0; i < n.lo.size(); ++i) {
    if (!(n.hi[i] > n.lo[i])) n.hi[i] = n.lo[i] + 1.0;
  }
  return n;
}

Eigen::VectorXd Normalizer::normalize(const Eigen::VectorXd& x) const {
  return (2.0 * (x - lo).array() / (hi - lo).array() - 1.0).matrix();
}

Eigen::VectorXd Normalizer::denormalize(const Eigen::VectorXd& z) const {
  return (lo.array() + 0.5 * (z.array() + 1.0) * (hi - lo).array()).matrix();
}

Mlp::Mlp(int inputs, int hidden, int outputs, std::uint64_t seed)
    : w1_(hidden, inputs), w2_(outputs, hidden),
      b1_(Eigen::VectorXd::Zero(hidden)), b2_(Eigen::VectorXd::Zero(outputs)) {
  std::mt19937_64 rng(seed);
  const double a1 = std::sqrt(6.0 / (inputs + hidden));
  const double a2 = std::sqrt(6.0 / (hidden + outputs));
  std::uniform_real_distribution<double> u1(-a1, a1), u2(-a2, a2);
  for (Eigen::Index i = 0; i < w1_.size(); ++i) w1_.data()[i] = u1(rng);
  for (Eigen::Index i = 0; i < w2_.size(); ++i) w2_.data()[i] = u2(rng);
  in_ = {Eigen::VectorXd::Constant(inputs, -1.0), Eigen::VectorXd::Constant(inputs, 1.0)};
  out_ = {Eigen::VectorXd::Constant(outputs, -1.0), Eigen::VectorXd::Constant(outputs, 1.0)};
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& z) const {
  if (z.size() != inputs()) {
    std::ostringstream os;
    os << "network expects " << inputs() << " inputs, got " << z.size();
    throw DimensionMismatch(os.str());
  }
  const Eigen::VectorXd h = (w1_ * z + b1_).array().tanh().matrix();
  return w2_ * h + b2_;
}

Eigen::VectorXd Mlp::evaluate(const Eigen::VectorXd& x) const {
  if (x.size() != inputs()) {
    std::ostringstream os;
    os << "network expects " << inputs() << " inputs, got " << x.size();
    throw DimensionMismatch(os.str());
  }
  return out_.denormalize(forward(in_.normalize(x)));
}

std::vector<double> Mlp::parameters() const {
  std::vector<double> p;
  p.reserve(w1_.size() + b1_.size() + w2_.size() + b2_.size());
  auto append = [&](const Eigen::MatrixXd& m) {
    p.insert(p.end(), m.data(), m.data() + m.size());
  };
  append(w1_);
  append(b1_);
  append(w2_);
  append(b2_);
  return p;
}

void Mlp::set_parameters(const std::vector<double>& p) {
  const std::size_t want = w1_.size() + b1_.size() + w2_.size() + b2_.size();
  if (p.size() != want) throw DimensionMismatch("parameter vector size mismatch");
  const double* src = p.data();
  auto take = [&](auto& m) {
    std::copy(src, src + m.size(), m.data());
    src += m.size();
  };
  take(w1_);
  take(b1_);
  take(w2_);
  take(b2_);
}

std::string Mlp::to_json() const {
  json j;
  j["format"] = "softarm-mlp";
  j["version"] = kFormatVersion;
  j["inputs"] = inputs();
  j["hidden"] = hidden();
  j["outputs"] = outputs();
  j["w1"] = to_list(w1_);
  j["b1"] = to_list(b1_);
  j["w2"] = to_list(w2_);
  j["b2"] = to_list(b2_);
  j["input_lo"] = to_list(in_.lo);
  j["input_hi"] = to_list(in_.hi);
  j["output_lo"] = to_list(out_.lo);
  j["output_hi"] = to_list(out_.hi);
  j["final_loss"] = final_loss;
  j["epochs"] = epochs_trained;
  return j.dump();
}

Mlp Mlp::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model file is not valid JSON: ") + e.what());
  }
  if (j.value("format", "") != "softarm-mlp") throw ConfigError("not an MLP model");
  if (j.value("version", 0) != kFormatVersion) {
    throw ConfigError("unsupported MLP model version");
  }
  try {
    const int in = j.at("inputs"), hid = j.at("hidden"), out = j.at("outputs");
    if (in < 1 || hid < 1 || out < 1) throw ConfigError("model sizes must be positive");
    Mlp m;
    m.w1_ = from_list(j.at("w1"), hid, in);
    m.b1_ = from_list(j.at("b1"), hid, 1);
    m.w2_ = from_list(j.at("w2"), out, hid);
    m.b2_ = from_list(j.at("b2"), out, 1);
    m.in_ = {from_list(j.at("input_lo"), in, 1), from_list(j.at("input_hi"), in, 1)};
    m.out_ = {from_list(j.at("output_lo"), out, 1), from_list(j.at("output_hi"), out, 1)};
    m.final_loss = j.at("final_loss");
    m.epochs_trained = j.at("epochs");
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed MLP model: ") + e.what());
  }
}

namespace {

struct Normalized {
  std::vector<Eigen::VectorXd> z;
  std::vector<Eigen::VectorXd> y;
};

Normalized normalize_samples(const Mlp& net, const std::vector<TrainingSample>& s) {
  Normalized n;
  for (const auto& x : s) {
    if (x.input.size() != net.inputs()) {
      throw DimensionMismatch("sample input size does not match the network");
    }
    n.z.push_back(net.input_scale().normalize(x.input));
    n.y.push_back(net.output_scale().normalize(x.label));
  }
  return n;
}

// Accumulates the batch gradient of 1/(N*outputs) * sum |f(z) - y|^2.
double accumulate(const Eigen::MatrixXd& w1, const Eigen::VectorXd& b1,
                  const Eigen::MatrixXd& w2, const Eigen::VectorXd& b2,
                  const Normalized& data, const std::size_t* idx, std::size_t count,
                  Eigen::MatrixXd& gw1, Eigen::VectorXd& gb1, Eigen::MatrixXd& gw2,
                  Eigen::VectorXd& gb2) {
  gw1.setZero(w1.rows(), w1.cols());
  gb1.setZero(b1.size());
  gw2.setZero(w2.rows(), w2.cols());
  gb2.setZero(b2.size());
  double total = 0.0;
  const double scale = 1.0 / (static_cast<double>(count) * static_cast<double>(w2.rows()));
  for (std::size_t n = 0; n < count; ++n) {
    const std::size_t i = idx ? idx[n] : n;
    const Eigen::VectorXd& z = data.z[i];
    const Eigen::VectorXd h = (w1 * z + b1).array().tanh().matrix();
    const Eigen::VectorXd e = w2 * h + b2 - data.y[i];
    total += e.squaredNorm();
    const Eigen::VectorXd dout = 2.0 * scale * e;
    gw2 += dout * h.transpose();
    gb2 += dout;
    const Eigen::VectorXd dh =
        ((w2.transpose() * dout).array() * (1.0 - h.array().square())).matrix();
    gw1 += dh * z.transpose();
    gb1 += dh;
  }
  return total * scale;
}

}  // namespace

LossGradient loss_and_gradient(const Mlp& net,
                               const std::vector<TrainingSample>& samples) {
  const Normalized data = normalize_samples(net, samples);
  const std::vector<double> p = net.parameters();
  const Eigen::Index in = net.inputs(), hid = net.hidden(), out = net.outputs();
  Eigen::Map<const Eigen::MatrixXd> w1(p.data(), hid, in);
  Eigen::Map<const Eigen::VectorXd> b1(p.data() + hid * in, hid);
  Eigen::Map<const Eigen::MatrixXd> w2(p.data() + hid * in + hid, out, hid);
  Eigen::Map<const Eigen::VectorXd> b2(p.data() + hid * in + hid + out * hid, out);
  Eigen::MatrixXd gw1, gw2;
  Eigen::VectorXd gb1, gb2;
  LossGradient r;
  r.loss = accumulate(w1, b1, w2, b2, data, nullptr, samples.size(), gw1, gb1, gw2, gb2);
  r.gradient.insert(r.gradient.end(), gw1.data(), gw1.data() + gw1.size());
  r.gradient.insert(r.gradient.end(), gb1.data(), gb1.data() + gb1.size());
  r.gradient.insert(r.gradient.end(), gw2.data(), gw2.data() + gw2.size());
  r.gradient.insert(r.gradient.end(), gb2.data(), gb2.data() + gb2.size());
  return r;
}

double loss(const Mlp& net, const std::vector<TrainingSample>& samples) {
  const Normalized data = normalize_samples(net, samples);
  double total = 0.0;
  for (std::size_t i = 0; i < data.z.size(); ++i) {
    total += (net.forward(data.z[i]) - data.y[i]).squaredNorm();
  }
  return total / (static_cast<double>(data.z.size()) * net.outputs());
}

Mlp train(const std::vector<TrainingSample>& samples, const TrainOptions& opt) {
  if (samples.size() < 10) throw TrainingFailure("training needs at least 10 samples");
  if (opt.batch_size < 1 || opt.epochs < 0 || !(opt.learning_rate > 0.0)) {
    throw ConfigError("invalid training options");
  }
  const int in = static_cast<int>(samples.front().input.size());
  Mlp net(in, opt.hidden, 2, opt.seed);
  std::vector<Eigen::VectorXd> xs, ys;
  for (const auto& s : samples) {
    xs.push_back(s.input);
    ys.push_back(s.label);
  }
  net.input_scale() = Normalizer::fit(xs);
  net.output_scale() = Normalizer::fit(ys);
  const Normalized data = normalize_samples(net, samples);

  std::vector<double> p = net.parameters();
  std::vector<double> m(p.size(), 0.0), v(p.size(), 0.0);
  const Eigen::Index hid = opt.hidden;
  const Eigen::Index nout = 2;
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(opt.seed ^ 0x5DEECE66DULL);
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  long step = 0;
  Eigen::MatrixXd gw1, gw2;
  Eigen::VectorXd gb1, gb2;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = opt.learning_rate * std::pow(opt.decay, epoch);
    for (std::size_t start = 0; start < order.size(); start += opt.batch_size) {
      const std::size_t count =
          std::min<std::size_t>(opt.batch_size, order.size() - start);
      Eigen::Map<const Eigen::MatrixXd> w1(p.data(), hid, in);
      Eigen::Map<const Eigen::VectorXd> bb1(p.data() + hid * in, hid);
      Eigen::Map<const Eigen::MatrixXd> w2(p.data() + hid * in + hid, nout, hid);
      Eigen::Map<const Eigen::VectorXd> bb2(p.data() + hid * in + hid + nout * hid, nout);
      accumulate(w1, bb1, w2, bb2, data, order.data() + start, count, gw1, gb1, gw2, gb2);
      std::size_t k = 0;
      ++step;
      const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
      auto apply = [&](const auto& g) {
        for (Eigen::Index i = 0; i < g.size(); ++i, ++k) {
          const double gi = g.data()[i];
          m[k] = b1 * m[k] + (1.0 - b1) * gi;
          v[k] = b2 * v[k] + (1.0 - b2) * gi * gi;
          p[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps);
        }
      };
      apply(gw1);
      apply(gb1);
      apply(gw2);
      apply(gb2);
    }
    for (double x : p) {
      if (!std::isfinite(x)) {
        std::ostringstream os;
        os << "training diverged at epoch " << epoch << " (lr " << lr << ")";
        throw TrainingFailure(os.str());
      }
    }
  }
  net.set_parameters(p);
  net.final_loss = loss(net, samples);
  net.epochs_trained = opt.epochs;
  if (!std::isfinite(net.final_loss)) {
    throw TrainingFailure("training loss is not finite");
  }
  return net;
}

Eigen::Vector2d predict(const Mlp& net, const Eigen::VectorXd& input,
                        double pressure_max) {
  const Eigen::VectorXd raw = net.evaluate(input);
  if (raw.size() != 2) throw DimensionMismatch("network output must be (p_l, p_r)");
  return raw.cwiseMax(0.0).cwiseMin(pressure_max);
}

SegmentDatasets generate_data(const plant::ArmPlant& plant, std::size_t n,
                              std::uint64_t seed, const plant::Disturbance& dist) {
  if (n < 1) throw ConfigError("generate_data needs n >= 1");
  if (plant.dims() != plant::Dimensionality::kPlanar) {
    throw ConfigError("configuration networks are planar only");
  }
  const std::size_t segs = plant.segments();
  SegmentDatasets out;
  out.plain.resize(segs);
  out.history.resize(segs);
  std::mt19937_64 rng(seed);
  plant::SimulatedArm arm(plant, dist, seed);
  pcc::ConfigurationSpace previous = plant.planar_config(plant.rest_state());
  for (std::size_t s = 0; s < n; ++s) {
    plant::PressureCommand cmd = plant.zero_command();
    for (std::size_t i = 0; i < segs; ++i) {
      std::uniform_real_distribution<double> u(0.0, plant.spec(i).pressure_max);
      cmd.at(i, 0) = u(rng);
      cmd.at(i, 1) = u(rng);
    }
    arm.apply(cmd);
    const pcc::ConfigurationSpace realized =
        pcc::estimate_params(arm.observe().planar);
    for (std::size_t i = 0; i < segs; ++i) {
      const Eigen::Vector2d label(cmd.at(i, 0), cmd.at(i, 1));
      Eigen::VectorXd plain(2), hist(4);
      plain << realized.curvature[i], realized.length[i];
      hist << realized.curvature[i], realized.length[i], previous.curvature[i],
          previous.length[i];
      out.plain[i].push_back({plain, label});
      out.history[i].push_back({hist, label});
    }
    previous = realized;
  }
  return out;
}

plant::PressureCommand NetBundle::command(
    const pcc::ConfigurationSpace& target,
    const pcc::ConfigurationSpace& previous) const {
  if (target.size() != nets.size() || (history && previous.size() != nets.size())) {
    throw DimensionMismatch("configuration size does not match the network bundle");
  }
  plant::PressureCommand cmd(plant::Dimensionality::kPlanar, nets.size());
  for (std::size_t i = 0; i < nets.size(); ++i) {
    Eigen::VectorXd x(history ? 4 : 2);
    if (history) {
      x << target.curvature[i], target.length[i], previous.curvature[i],
          previous.length[i];
    } else {
      x << target.curvature[i], target.length[i];
    }
    const Eigen::Vector2d p = predict(nets[i], x, pressure_max);
    cmd.at(i, 0) = p[0];
    cmd.at(i, 1) = p[1];
  }
  return cmd;
}

std::string NetBundle::to_json() const {
  json j;
  j["format"] = "softarm-net-bundle";
  j["version"] = kFormatVersion;
  j["history"] = history;
  j["pressure_max"] = pressure_max;
  j["nets"] = json::array();
  for (const auto& n : nets) j["nets"].push_back(json::parse(n.to_json()));
  return j.dump(1);
}

NetBundle NetBundle::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bundle is not valid JSON: ") + e.what());
  }
  if (j.value("format", "") != "softarm-net-bundle" ||
      j.value("version", 0) != kFormatVersion) {
    throw ConfigError("unsupported network bundle");
  }
  NetBundle b;
  b.history = j.value("history", false);
  b.pressure_max = j.value("pressure_max", 0.3);
  for (const auto& n : j.at("nets")) {
    b.nets.push_back(Mlp::from_json(n.dump()));
    if (b.nets.back().inputs() != (b.history ? 4 : 2)) {
      throw ConfigError("network input size does not match the bundle kind");
    }
  }
  return b;
}

void NetBundle::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << to_json() << '\n';
}

NetBundle NetBundle::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return from_json(ss.str());
}

NetBundle train_bundle(const std::vector<std::vector<TrainingSample>>& data,
                       bool history, double pressure_max,
                       const TrainOptions& options) {
  NetBundle b;
  b.history = history;
  b.pressure_max = pressure_max;
  for (std::size_t i = 0; i < data.size(); ++i) {
    TrainOptions o = options;
    o.seed = options.seed + 7919 * i;
    b.nets.push_back(train(data[i], o));
  }
  return b;
}

}  // namespace softarm::net
