// SPDX-License-Identifier: Apache-2.0
//
// effchan: effective-channel estimation for impaired multi-user MIMO uplinks
// Copyright (C) 2026 The effchan authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef EFFCHAN_TRAINING_HPP
#define EFFCHAN_TRAINING_HPP

#include "effchan/dataset.hpp"
#include "effchan/impairments.hpp"
#include "effchan/mlp.hpp"
#include "effchan/scaler.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace effchan
{

// Defaults are artifact choices; the network shape follows two hidden ReLU layers of 300 units.
struct TrainingParams
{
    std::vector<int> hidden{300, 300};
    AdamParams adam{};
    std::size_t batch_size = 512;
    int max_epochs = 60;
    int patience = 5; // early stopping on validation MSE

    // Learning-rate schedule: multiply by lr_decay after lr_patience epochs without improvement.
    double lr_decay = 0.5;
    int lr_patience = 2;
    double min_learning_rate = 1e-6;

    // Workers for the per-batch gradient shards; results do not depend on it.
    int threads = 1;
};

struct EpochRecord
{
    int epoch = 0;
    double train_mse = 0.0; // mean over the epoch's batches, scaled units
    double val_mse = 0.0;   // scaled units
    double learning_rate = 0.0;
};

struct TrainingLog
{
    std::uint64_t seed = 0;
    TrainingParams params;
    std::vector<EpochRecord> epochs;
    double initial_val_mse = 0.0;
    int best_epoch = 0;
    double best_val_mse = 0.0;
    std::size_t train_samples = 0;
    std::size_t val_samples = 0;
};

// Trained network together with the scalers it expects.
struct NeuralEstimator
{
    MlpModel model;
    ScalerSet scalers;
    std::string fingerprint; // configuration / profile the network was trained for

    [[nodiscard]] EffectiveChannelRow estimate(const SystemConfig &config, const PilotObservation &obs) const;
    // Unscaled, user-sorted features (3K x N) to unscaled sorted outputs (2K x N).
    [[nodiscard]] Eigen::MatrixXd predict(const Eigen::MatrixXd &features) const;
};

struct TrainingResult
{
    NeuralEstimator estimator;
    TrainingLog log;
};

using EpochCallback = std::function<void(const EpochRecord &)>;

// Mini-batch Adam on scaled MSE with per-epoch shuffling; keeps the best-validation snapshot.
// Scalers are fitted on `train` only. Throws TrainingDiverged on non-finite losses.
TrainingResult train(const Dataset &train, const Dataset &validation, const TrainingParams &params,
                     RandomStream &rng, const EpochCallback &on_epoch = {});

// Generates train/validation sets from (config, profile) and trains.
TrainingResult train(const SystemConfig &config, const LargeScaleProfile &profile, std::size_t train_n,
                     std::size_t val_n, const TrainingParams &params, RandomStream &rng,
                     const EpochCallback &on_epoch = {});

// Scaled-space MSE of a network over a dataset.
double evaluate_mse(const NeuralEstimator &est, const Dataset &data);

} // namespace effchan

#endif
