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

// Per-segment feedforward networks mapping a configuration (k, l) to the
// airbag pair (p_l, p_r). The history-aware variant also takes the previous
// pose (k', l') so it can undo the plant's viscoelastic memory.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "softarm/plant.hpp"

namespace softarm::net {

// Min-max scaling of each coordinate onto [-1, 1].
struct Normalizer {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  static Normalizer fit(const std::vector<Eigen::VectorXd>& rows);
  Eigen::VectorXd normalize(const Eigen::VectorXd& x) const;
  Eigen::VectorXd denormalize(const Eigen::VectorXd& z) const;
};

struct TrainingSample {
  Eigen::VectorXd input;  // (k, l) or (k, l, k', l')
  Eigen::Vector2d label;  // (p_l, p_r), MPa
};

class Mlp {
 public:
  Mlp() = default;
  Mlp(int inputs, int hidden, int outputs, std::uint64_t seed);

  int inputs() const { return static_cast<int>(w1_.cols()); }
  int hidden() const { return static_cast<int>(w1_.rows()); }
  int outputs() const { return static_cast<int>(w2_.rows()); }

  // Pass in normalized coordinates.
  Eigen::VectorXd forward(const Eigen::VectorXd& z) const;
  // Raw input to raw output, no clipping.
  Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const;

  Normalizer& input_scale() { return in_; }
  Normalizer& output_scale() { return out_; }
  const Normalizer& input_scale() const { return in_; }
  const Normalizer& output_scale() const { return out_; }

  // Flat parameter view: W1, b1, W2, b2 in column-major order.
  std::vector<double> parameters() const;
  void set_parameters(const std::vector<double>& p);

  double final_loss = 0.0;
  int epochs_trained = 0;

  std::string to_json() const;
  static Mlp from_json(const std::string& text);

 private:
  friend struct LossGradient;
  Eigen::MatrixXd w1_, w2_;
  Eigen::VectorXd b1_, b2_;
  Normalizer in_, out_;
};

// Mean squared error in normalized output space and its parameter gradient.
struct LossGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};
LossGradient loss_and_gradient(const Mlp& net,
                               const std::vector<TrainingSample>& samples);
double loss(const Mlp& net, const std::vector<TrainingSample>& samples);

struct TrainOptions {
  int epochs = 500;
  double learning_rate = 1e-2;
  double decay = 0.99;  // per epoch
  int batch_size = 32;
  int hidden = 25;
  std::uint64_t seed = 0;
};

// Mini-batch Adam on the MSE loss. Throws TrainingFailure on divergence.
Mlp train(const std::vector<TrainingSample>& samples, const TrainOptions& options);

// Forward pass with the outputs clipped to [0, pressure_max].
Eigen::Vector2d predict(const Mlp& net, const Eigen::VectorXd& input,
                        double pressure_max);

// Effective per-segment dataset gathered by driving a planar plant with
// random commands and estimating each realized pose from the observed tips.
struct SegmentDatasets {
  std::vector<std::vector<TrainingSample>> plain;    // (k, l) inputs
  std::vector<std::vector<TrainingSample>> history;  // (k, l, k', l') inputs
};
SegmentDatasets generate_data(const plant::ArmPlant& plant, std::size_t n,
                              std::uint64_t seed,
                              const plant::Disturbance& dist = {});

struct NetBundle {
  std::vector<Mlp> nets;
  bool history = false;
  double pressure_max = 0.3;

  // Full command for target configuration `target`, given the previous
  // target `previous` (ignored by plain networks).
  plant::PressureCommand command(const pcc::ConfigurationSpace& target,
                                 const pcc::ConfigurationSpace& previous) const;

  std::string to_json() const;
  static NetBundle from_json(const std::string& text);
  void save(const std::string& path) const;
  static NetBundle load(const std::string& path);
};

NetBundle train_bundle(const std::vector<std::vector<TrainingSample>>& data,
                       bool history, double pressure_max,
                       const TrainOptions& options);

}  // namespace softarm::net
