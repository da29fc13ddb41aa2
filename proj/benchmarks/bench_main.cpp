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

#include "effchan/config.hpp"
#include "effchan/effective_channel.hpp"
#include "effchan/impairments.hpp"
#include "effchan/mlp.hpp"
#include "effchan/scenario.hpp"

#include <benchmark/benchmark.h>

using namespace effchan;

namespace
{

SystemConfig bench_config(int K, int L)
{
    SystemConfig c;
    c.num_users = K;
    c.poly_order = L;
    const auto a = illustrative_coefficients();
    c.ref_coefficients.assign(a.begin(), a.begin() + L + 1);
    c.pilot_len = K;
    c.ue_kappa.assign(static_cast<std::size_t>(K), 0.98);
    c.ue_power.assign(static_cast<std::size_t>(K), 1.0);
    c.large_scale.assign(static_cast<std::size_t>(K), 10.0);
    return c;
}

void BM_EffectiveChannelRow(benchmark::State &state)
{
    const SystemConfig c = bench_config(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
    const EffectiveChannelModel model(c);
    RandomStream r(1);
    const ChannelRealization ch = sample_channel(c, r);
    for (auto _ : state)
        benchmark::DoNotOptimize(model.row(ch.row()));
}
BENCHMARK(BM_EffectiveChannelRow)->Args({10, 1})->Args({10, 3})->Args({32, 3});

void BM_PilotRx(benchmark::State &state)
{
    const SystemConfig c = bench_config(static_cast<int>(state.range(0)), 3);
    const ImpairedLink link(c);
    const PilotMatrix pilots = dft_pilots(c.pilot_len, c.num_users);
    RandomStream r(2);
    const ChannelRealization ch = sample_channel(c, r);
    for (auto _ : state)
        benchmark::DoNotOptimize(link.pilot_rx(ch.row(), pilots, r));
}
BENCHMARK(BM_PilotRx)->Arg(10)->Arg(32);

void BM_MlpForward(benchmark::State &state)
{
    RandomStream r(3);
    const auto net = MlpModel::he_uniform({30, 300, 300, 20}, r);
    const MatrixT<float> x = MatrixT<float>::Random(30, state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(net.forward_batch(x));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpForward)->Arg(1)->Arg(512);

void BM_MlpBackward(benchmark::State &state)
{
    RandomStream r(4);
    const auto net = MlpModel::he_uniform({30, 300, 300, 20}, r);
    const MatrixT<float> x = MatrixT<float>::Random(30, state.range(0));
    const MatrixT<float> y = MatrixT<float>::Random(20, state.range(0));
    MlpGradients<float> g(net);
    for (auto _ : state)
        benchmark::DoNotOptimize(backward(net, x, y, g));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpBackward)->Arg(128)->Arg(512);

} // namespace

BENCHMARK_MAIN();
