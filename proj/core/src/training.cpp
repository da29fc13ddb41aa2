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

#include "effchan/training.hpp"

#include "effchan/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace effchan
{

namespace
{

constexpr Eigen::Index kEvalChunk = 8192;
// Batches are split into fixed-width shards whatever the thread count, so gradients sum in the same order.
constexpr std::size_t kShardColumns = 128;

MatrixT<float> scaled_inputs(const ScalerSet &s, const Eigen::MatrixXd &raw)
{
    Eigen::MatrixXd x = raw;
    s.apply_inputs(x);
    return x.cast<float>();
}

MatrixT<float> scaled_targets(const ScalerSet &s, const Eigen::MatrixXd &raw)
{
    Eigen::MatrixXd y = raw;
    s.apply_targets(y);
    return y.cast<float>();
}

double mse(const MlpModel &net, const MatrixT<float> &x, const MatrixT<float> &y)
{
    double acc = 0.0;
    for (Eigen::Index c = 0; c < x.cols(); c += kEvalChunk)
    {
        const Eigen::Index n = std::min(kEvalChunk, x.cols() - c);
        const MatrixT<float> out = net.forward_batch(x.middleCols(c, n));
        acc += (out - y.middleCols(c, n)).cast<double>().squaredNorm();
    }
    return acc / static_cast<double>(y.size());
}

} // namespace

Eigen::MatrixXd NeuralEstimator::predict(const Eigen::MatrixXd &features) const
{
    Eigen::MatrixXd out = model.forward_batch(scaled_inputs(scalers, features)).cast<double>();
    scalers.invert_targets(out);
    return out;
}

EffectiveChannelRow NeuralEstimator::estimate(const SystemConfig &config, const PilotObservation &obs) const
{
    const std::vector<int> order = user_order(config);
    Eigen::VectorXd features(3 * config.num_users);
    write_features(config, order, obs.matched, features);
    const Eigen::MatrixXd out = predict(features);
    return unsort_outputs(order, out.col(0));
}

double evaluate_mse(const NeuralEstimator &est, const Dataset &data)
{
    return mse(est.model, scaled_inputs(est.scalers, data.inputs()), scaled_targets(est.scalers, data.targets()));
}

TrainingResult train(const Dataset &train_set, const Dataset &validation, const TrainingParams &params,
                     RandomStream &rng, const EpochCallback &on_epoch)
{
    if (train_set.size() == 0 || validation.size() == 0)
        throw std::invalid_argument("train: empty training or validation set");
    if (train_set.num_users() != validation.num_users())
        throw std::invalid_argument("train: training and validation sets disagree on K");
    if (params.batch_size == 0)
        throw std::invalid_argument("train: batch size must be positive");

    const int K = train_set.num_users();
    TrainingResult result;
    NeuralEstimator &est = result.estimator;
    est.scalers = fit_scalers(train_set);
    est.fingerprint = train_set.fingerprint();

    const MatrixT<float> x_train = scaled_inputs(est.scalers, train_set.inputs());
    const MatrixT<float> y_train = scaled_targets(est.scalers, train_set.targets());
    const MatrixT<float> x_val = scaled_inputs(est.scalers, validation.inputs());
    const MatrixT<float> y_val = scaled_targets(est.scalers, validation.targets());

    std::vector<int> widths{3 * K};
    widths.insert(widths.end(), params.hidden.begin(), params.hidden.end());
    widths.push_back(2 * K);
    RandomStream init_rng = rng.split("init");
    RandomStream shuffle_rng = rng.split("shuffle");
    MlpModel net = MlpModel::he_uniform(widths, init_rng);

    TrainingLog &log = result.log;
    log.seed = rng.key();
    log.params = params;
    log.train_samples = train_set.size();
    log.val_samples = validation.size();
    log.initial_val_mse = mse(net, x_val, y_val);
    log.best_val_mse = log.initial_val_mse;
    log.best_epoch = 0;
    est.model = net;

    AdamParams adam = params.adam;
    AdamState<float> state(net);
    const std::size_t max_shards = (params.batch_size + kShardColumns - 1) / kShardColumns;
    std::vector<MlpGradients<float>> shard_grads(max_shards, MlpGradients<float>(net));
    MlpGradients<float> grads(net);

    const auto N = static_cast<Eigen::Index>(train_set.size());
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(N));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    const auto B = static_cast<Eigen::Index>(params.batch_size);
    MatrixT<float> xb(x_train.rows(), B), yb(y_train.rows(), B);

    int since_best = 0;
    int since_lr_change = 0;
    for (int epoch = 1; epoch <= params.max_epochs; ++epoch)
    {
        std::shuffle(perm.begin(), perm.end(), shuffle_rng.engine());
        double loss_sum = 0.0;
        long batches = 0;
        for (Eigen::Index start = 0; start < N; start += B)
        {
            const Eigen::Index n = std::min(B, N - start);
            if (xb.cols() != n)
            {
                xb.resize(x_train.rows(), n);
                yb.resize(y_train.rows(), n);
            }
            for (Eigen::Index j = 0; j < n; ++j)
            {
                const Eigen::Index src = perm[static_cast<std::size_t>(start + j)];
                xb.col(j) = x_train.col(src);
                yb.col(j) = y_train.col(src);
            }

            float loss = 0.0f;
            const ChunkPlan plan{static_cast<std::size_t>(n), kShardColumns};
            if (plan.chunks() == 1)
                loss = backward(net, xb, yb, grads);
            else
            {
                std::vector<float> shard_loss(plan.chunks(), 0.0f);
                for_each_chunk(plan, std::max(1, params.threads), [&](std::size_t c, std::size_t b, std::size_t e) {
                    const auto cb = static_cast<Eigen::Index>(b), ce = static_cast<Eigen::Index>(e);
                    shard_loss[c] = backward<float>(net, xb.middleCols(cb, ce - cb), yb.middleCols(cb, ce - cb),
                                                    shard_grads[c]);
                });
                grads.set_zero();
                for (std::size_t c = 0; c < plan.chunks(); ++c)
                {
                    const float w = static_cast<float>(plan.end(c) - plan.begin(c)) / static_cast<float>(n);
                    for (std::size_t p = 0; p < grads.weights.size(); ++p)
                    {
                        grads.weights[p] += w * shard_grads[c].weights[p];
                        grads.bias[p] += w * shard_grads[c].bias[p];
                    }
                    loss += w * shard_loss[c];
                }
            }
            if (!std::isfinite(loss))
            {
                std::ostringstream os;
                os << "training diverged: non-finite loss in epoch " << epoch << ", batch " << batches
                   << " (learning rate " << adam.learning_rate << ")";
                throw TrainingDiverged(os.str());
            }
            adam_step(net, grads, state, adam);
            loss_sum += loss;
            ++batches;
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_mse = loss_sum / static_cast<double>(batches);
        rec.val_mse = mse(net, x_val, y_val);
        rec.learning_rate = adam.learning_rate;
        if (!std::isfinite(rec.val_mse))
            throw TrainingDiverged("training diverged: non-finite validation loss in epoch " + std::to_string(epoch));
        log.epochs.push_back(rec);
        if (on_epoch)
            on_epoch(rec);

        if (rec.val_mse < log.best_val_mse)
        {
            log.best_val_mse = rec.val_mse;
            log.best_epoch = epoch;
            est.model = net;
            since_best = 0;
            since_lr_change = 0;
        }
        else
        {
            ++since_best;
            ++since_lr_change;
            if (since_best >= params.patience)
                break;
            if (since_lr_change >= params.lr_patience && adam.learning_rate > params.min_learning_rate)
            {
                adam.learning_rate = std::max(params.min_learning_rate, adam.learning_rate * params.lr_decay);
                since_lr_change = 0;
            }
        }
    }
    return result;
}

TrainingResult train(const SystemConfig &config, const LargeScaleProfile &profile, std::size_t train_n,
                     std::size_t val_n, const TrainingParams &params, RandomStream &rng, const EpochCallback &on_epoch)
{
    RandomStream train_rng = rng.split("train-data");
    RandomStream val_rng = rng.split("validation-data");
    RandomStream fit_rng = rng.split("fit");
    const Dataset train_set = generate_dataset(config, profile, train_n, train_rng, params.threads);
    const Dataset val_set = generate_dataset(config, profile, val_n, val_rng, params.threads);
    TrainingResult r = train(train_set, val_set, params, fit_rng, on_epoch);
    r.estimator.fingerprint = config.fingerprint() + ":" + profile.describe();
    return r;
}

} // namespace effchan
