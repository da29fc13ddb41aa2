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

#include "effchan/effective_channel.hpp"
#include "effchan/estimators.hpp"
#include "effchan/impairments.hpp"
#include "effchan/scenario.hpp"
#include "effchan/training.hpp"

#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace effchan;

namespace
{

TrainingParams small_params()
{
    TrainingParams p;
    p.hidden = {64, 64};
    p.batch_size = 128;
    p.max_epochs = 8;
    return p;
}

} // namespace

TEST(Training, SmokeRunHalvesValidationError)
{
    const SystemConfig c = test::impaired_config(2, 3, 0.98, 10.0);
    RandomStream r(1);
    const TrainingResult res = train(c, LargeScaleProfile::fixed(), 10000, 2000, small_params(), r);
    const TrainingLog &log = res.log;
    ASSERT_GE(log.epochs.size(), 3u);
    EXPECT_LT(log.best_val_mse, 0.5 * log.initial_val_mse);
    EXPECT_LT(log.epochs[1].train_mse, log.epochs[0].train_mse);
    EXPECT_LT(log.epochs[2].train_mse, log.epochs[1].train_mse);
    EXPECT_EQ(res.estimator.scalers.num_users, 2);
    EXPECT_EQ(res.estimator.fingerprint, c.fingerprint() + ":fixed");
}

TEST(Training, IdealHardwareApproachesAnalyticLmmse)
{
    const double snr = 10.0;
    const SystemConfig c = test::ideal_config(2, snr);
    RandomStream r(2);
    TrainingParams p = small_params();
    p.max_epochs = 20;
    const TrainingResult res = train(c, LargeScaleProfile::fixed(), 40000, 5000, p, r);

    RandomStream er(3);
    const PilotMatrix pilots = dft_pilots(2, 2);
    NmseAccumulator acc;
    for (int i = 0; i < 20000; ++i)
    {
        const auto ch = sample_channel(c, er);
        const PilotObservation obs = simulate_pilot_rx(ch.row(), pilots, c, er);
        acc.add(effective_channel_row(ch.row(), c), res.estimator.estimate(c, obs));
    }
    const double analytic_db = to_db(1.0 / (1.0 + 2.0 * snr));
    EXPECT_LT(std::abs(acc.report().nmse_db - analytic_db), 1.0) << acc.report().nmse_db << " vs " << analytic_db;
}

TEST(Training, IdenticalSeedsGiveIdenticalWeights)
{
    const SystemConfig c = test::impaired_config(2, 3, 0.98);
    TrainingParams p = small_params();
    p.max_epochs = 2;
    RandomStream a(4), b(4);
    const TrainingResult x = train(c, LargeScaleProfile::fixed(), 3000, 500, p, a);
    const TrainingResult y = train(c, LargeScaleProfile::fixed(), 3000, 500, p, b);
    for (std::size_t l = 0; l < x.estimator.model.layers.size(); ++l)
    {
        EXPECT_EQ(x.estimator.model.layers[l].weights, y.estimator.model.layers[l].weights);
        EXPECT_EQ(x.estimator.model.layers[l].bias, y.estimator.model.layers[l].bias);
    }
    EXPECT_EQ(x.log.best_val_mse, y.log.best_val_mse);
}

TEST(Training, WorkerCountDoesNotChangeWeights)
{
    const SystemConfig c = test::impaired_config(2, 3, 0.98);
    TrainingParams p = small_params();
    p.max_epochs = 2;
    p.batch_size = 500; // several shards
    RandomStream a(5), b(5);
    const TrainingResult x = train(c, LargeScaleProfile::fixed(), 3000, 500, p, a);
    p.threads = 3;
    const TrainingResult y = train(c, LargeScaleProfile::fixed(), 3000, 500, p, b);
    EXPECT_EQ(x.log.best_val_mse, y.log.best_val_mse);
    EXPECT_EQ(x.estimator.model.layers[0].weights, y.estimator.model.layers[0].weights);
}

TEST(Training, DivergenceIsReported)
{
    const SystemConfig c = test::impaired_config(2, 3, 0.98);
    TrainingParams p = small_params();
    p.adam.learning_rate = 1e30;
    RandomStream r(6);
    EXPECT_THROW((void)train(c, LargeScaleProfile::fixed(), 2000, 200, p, r), TrainingDiverged);
}

TEST(Training, EmptyOrMismatchedSetsThrow)
{
    const SystemConfig c2 = test::impaired_config(2, 3, 0.98);
    const SystemConfig c3 = test::impaired_config(3, 3, 0.98);
    RandomStream r(7);
    const Dataset a = generate_dataset(c2, LargeScaleProfile::fixed(), 50, r);
    const Dataset b = generate_dataset(c3, LargeScaleProfile::fixed(), 50, r);
    EXPECT_THROW((void)train(a, b, small_params(), r), std::invalid_argument);
    EXPECT_THROW((void)train(a, Dataset{}, small_params(), r), std::invalid_argument);
}

TEST(Training, EpochCallbackSeesEveryEpoch)
{
    const SystemConfig c = test::impaired_config(2, 3, 0.98);
    TrainingParams p = small_params();
    p.max_epochs = 3;
    p.patience = 100;
    int calls = 0;
    RandomStream r(8);
    const TrainingResult res =
        train(c, LargeScaleProfile::fixed(), 1000, 200, p, r, [&](const EpochRecord &e) { EXPECT_EQ(e.epoch, ++calls); });
    EXPECT_EQ(calls, 3);
    EXPECT_EQ(res.log.epochs.size(), 3u);
}
