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

#include "effchan/dataset.hpp"

#include "effchan/impairments.hpp"
#include "effchan/parallel.hpp"
#include "effchan/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace effchan
{

void LargeScaleProfile::draw(SystemConfig &config, RandomStream &rng) const
{
    if (kind == Kind::fixed)
        return;
    for (std::size_t k = 0; k < config.large_scale.size(); ++k)
    {
        const double root = rng.uniform(sqrt_snr_min, sqrt_snr_max);
        config.large_scale[k] = root * root * config.noise_power / config.ue_power[k];
    }
}

std::string LargeScaleProfile::describe() const
{
    if (kind == Kind::fixed)
        return "fixed";
    char buf[96];
    std::snprintf(buf, sizeof buf, "uniform-sqrt-snr[%a,%a]", sqrt_snr_min, sqrt_snr_max);
    return buf;
}

std::vector<int> user_order(const SystemConfig &config)
{
    std::vector<int> order(static_cast<std::size_t>(config.num_users));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&config](int a, int b) {
        const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
        return config.large_scale[ua] * config.ue_power[ua] > config.large_scale[ub] * config.ue_power[ub];
    });
    return order;
}

void write_features(const SystemConfig &config, std::span<const int> order, const Eigen::VectorXcd &matched,
                    Eigen::Ref<Eigen::VectorXd> out)
{
    const auto K = static_cast<Eigen::Index>(order.size());
    if (out.size() != 3 * K || matched.size() != K)
        throw std::invalid_argument("write_features: dimension mismatch");
    for (Eigen::Index i = 0; i < K; ++i)
    {
        const auto k = static_cast<std::size_t>(order[static_cast<std::size_t>(i)]);
        const cplx v = matched(static_cast<Eigen::Index>(k));
        out(2 * i) = v.real();
        out(2 * i + 1) = v.imag();
        out(2 * K + i) = std::sqrt(config.large_scale[k] * config.ue_power[k]);
    }
}

void write_targets(std::span<const int> order, const EffectiveChannelRow &truth, Eigen::Ref<Eigen::VectorXd> out)
{
    const auto K = static_cast<Eigen::Index>(order.size());
    if (out.size() != 2 * K || truth.size() != K)
        throw std::invalid_argument("write_targets: dimension mismatch");
    for (Eigen::Index i = 0; i < K; ++i)
    {
        const cplx v = truth.values(order[static_cast<std::size_t>(i)]);
        out(2 * i) = v.real();
        out(2 * i + 1) = v.imag();
    }
}

EffectiveChannelRow unsort_outputs(std::span<const int> order, const Eigen::Ref<const Eigen::VectorXd> &outputs)
{
    const auto K = static_cast<Eigen::Index>(order.size());
    if (outputs.size() != 2 * K)
        throw std::invalid_argument("unsort_outputs: expected 2K outputs");
    EffectiveChannelRow row;
    row.values.resize(K);
    for (Eigen::Index i = 0; i < K; ++i)
        row.values(order[static_cast<std::size_t>(i)]) = cplx{outputs(2 * i), outputs(2 * i + 1)};
    return row;
}

TrainingSample make_training_sample(const SystemConfig &config, const Eigen::VectorXcd &matched,
                                    const EffectiveChannelRow &truth)
{
    TrainingSample s;
    s.order = user_order(config);
    const auto K = static_cast<Eigen::Index>(config.num_users);
    s.inputs.resize(3 * K);
    s.targets.resize(2 * K);
    write_features(config, s.order, matched, s.inputs);
    write_targets(s.order, truth, s.targets);
    return s;
}

Dataset::Dataset(int num_users, std::size_t size)
    : num_users_(num_users),
      size_(size),
      inputs_(3 * num_users, static_cast<Eigen::Index>(size)),
      targets_(2 * num_users, static_cast<Eigen::Index>(size)),
      large_scale_(num_users, static_cast<Eigen::Index>(size)),
      channels_(num_users, static_cast<Eigen::Index>(size)),
      order_(static_cast<std::size_t>(num_users) * size)
{
}

std::span<const int> Dataset::order(std::size_t i) const
{
    const auto K = static_cast<std::size_t>(num_users_);
    return {order_.data() + i * K, K};
}

TrainingSample Dataset::sample(std::size_t i) const
{
    if (i >= size_)
        throw std::out_of_range("Dataset::sample index out of range");
    const auto c = static_cast<Eigen::Index>(i);
    const auto o = order(i);
    return {inputs_.col(c), targets_.col(c), std::vector<int>(o.begin(), o.end())};
}

void Dataset::set_sample(std::size_t i, const TrainingSample &s, std::span<const cplx> g,
                         std::span<const double> beta)
{
    const auto c = static_cast<Eigen::Index>(i);
    const auto K = static_cast<std::size_t>(num_users_);
    inputs_.col(c) = s.inputs;
    targets_.col(c) = s.targets;
    std::copy(s.order.begin(), s.order.end(), order_.begin() + static_cast<std::ptrdiff_t>(i * K));
    for (std::size_t k = 0; k < K; ++k)
    {
        channels_(static_cast<Eigen::Index>(k), c) = g[k];
        large_scale_(static_cast<Eigen::Index>(k), c) = beta[k];
    }
}

Dataset generate_dataset(const SystemConfig &base, const LargeScaleProfile &profile, std::size_t n,
                         RandomStream &rng, int threads)
{
    if (n == 0)
        throw std::invalid_argument("generate_dataset: n must be positive");
    Dataset data(base.num_users, n);
    const PilotMatrix pilots = dft_pilots(base.pilot_len, base.num_users);

    // fixed profile: one set of models shared by every sample
    std::optional<ImpairedLink> shared_link;
    std::optional<EffectiveChannelModel> shared_model;
    if (profile.kind == LargeScaleProfile::Kind::fixed)
    {
        shared_link.emplace(base);
        shared_model.emplace(base);
    }

    const ChunkPlan plan{n, 1024};
    for_each_chunk(plan, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
        RandomStream local = rng.split(c);
        SystemConfig cfg = base;
        for (std::size_t i = begin; i < end; ++i)
        {
            profile.draw(cfg, local);
            std::optional<ImpairedLink> link;
            std::optional<EffectiveChannelModel> model;
            if (!shared_link)
            {
                link.emplace(cfg);
                model.emplace(cfg);
            }
            const ImpairedLink &lk = shared_link ? *shared_link : *link;
            const EffectiveChannelModel &md = shared_model ? *shared_model : *model;

            const ChannelRealization ch = sample_channel(cfg, local);
            const PilotObservation obs = lk.pilot_rx(ch.row(), pilots, local);
            const EffectiveChannelRow truth = md.row(ch.row());
            data.set_sample(i, make_training_sample(cfg, obs.matched, truth), ch.row(), cfg.large_scale);
        }
    });

    char buf[64];
    std::snprintf(buf, sizeof buf, "%016llx:%zu", static_cast<unsigned long long>(rng.key()), n);
    data.set_fingerprint(base.fingerprint() + ":" + profile.describe() + ":" + buf);
    return data;
}

} // namespace effchan
