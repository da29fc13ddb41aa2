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

#ifndef EFFCHAN_DATASET_HPP
#define EFFCHAN_DATASET_HPP

#include "effchan/config.hpp"
#include "effchan/effective_channel.hpp"
#include "effchan/rng.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace effchan
{

// How the large-scale profile of each sample is chosen: the configured one, or per-user SNRs whose square
// roots are uniform on [sqrt_snr_min, sqrt_snr_max] (beta_k = snr_k sigma^2 / p_k).
struct LargeScaleProfile
{
    enum class Kind
    {
        fixed,
        uniform_sqrt_snr
    };
    Kind kind = Kind::fixed;
    double sqrt_snr_min = 0.0;
    double sqrt_snr_max = 0.0;

    static LargeScaleProfile fixed() { return {}; }
    static LargeScaleProfile uniform_sqrt_snr(double lo, double hi) { return {Kind::uniform_sqrt_snr, lo, hi}; }

    // Overwrites config.large_scale for a random profile; leaves it untouched for a fixed one.
    void draw(SystemConfig &config, RandomStream &rng) const;
    [[nodiscard]] std::string describe() const;
};

// One user-sorted network sample. order[i] is the original index of the user at sorted position i.
struct TrainingSample
{
    Eigen::VectorXd inputs;  // 3K
    Eigen::VectorXd targets; // 2K
    std::vector<int> order;
};

// Users by descending beta_k p_k; ties keep ascending original index.
std::vector<int> user_order(const SystemConfig &config);

// Writes the 3K sorted input features (see ScalerSet for the layout).
void write_features(const SystemConfig &config, std::span<const int> order, const Eigen::VectorXcd &matched,
                    Eigen::Ref<Eigen::VectorXd> out);
void write_targets(std::span<const int> order, const EffectiveChannelRow &truth, Eigen::Ref<Eigen::VectorXd> out);
// Inverse of the sorting: 2K sorted outputs back to an effective-channel row in original user order.
EffectiveChannelRow unsort_outputs(std::span<const int> order, const Eigen::Ref<const Eigen::VectorXd> &outputs);

TrainingSample make_training_sample(const SystemConfig &config, const Eigen::VectorXcd &matched,
                                    const EffectiveChannelRow &truth);

// Column-per-sample storage of network samples plus the raw draws they came from.
class Dataset
{
public:
    Dataset() = default;
    Dataset(int num_users, std::size_t size);

    [[nodiscard]] int num_users() const noexcept { return num_users_; }
    [[nodiscard]] std::size_t size() const noexcept { return size_; }

    [[nodiscard]] const Eigen::MatrixXd &inputs() const noexcept { return inputs_; }   // 3K x N, unscaled
    [[nodiscard]] const Eigen::MatrixXd &targets() const noexcept { return targets_; } // 2K x N, unscaled
    [[nodiscard]] const Eigen::MatrixXcd &channels() const noexcept { return channels_; }      // K x N, original order
    [[nodiscard]] const Eigen::MatrixXd &large_scale() const noexcept { return large_scale_; } // K x N, original order
    [[nodiscard]] std::span<const int> order(std::size_t i) const;

    [[nodiscard]] TrainingSample sample(std::size_t i) const;
    void set_sample(std::size_t i, const TrainingSample &s, std::span<const cplx> g, std::span<const double> beta);

    [[nodiscard]] const std::string &fingerprint() const noexcept { return fingerprint_; }
    void set_fingerprint(std::string fp) { fingerprint_ = std::move(fp); }

private:
    int num_users_ = 0;
    std::size_t size_ = 0;
    Eigen::MatrixXd inputs_, targets_, large_scale_;
    Eigen::MatrixXcd channels_;
    std::vector<int> order_;
    std::string fingerprint_;
};

// Draws n samples: profile, channel, pilot observation, matched filter and exact effective-channel targets.
Dataset generate_dataset(const SystemConfig &base, const LargeScaleProfile &profile, std::size_t n,
                         RandomStream &rng, int threads = 1);

} // namespace effchan

#endif
