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

#ifndef EFFCHAN_ESTIMATORS_HPP
#define EFFCHAN_ESTIMATORS_HPP

#include "effchan/config.hpp"
#include "effchan/effective_channel.hpp"
#include "effchan/impairments.hpp"
#include "effchan/rng.hpp"

#include <Eigen/Dense>

#include <map>
#include <span>
#include <string>

namespace effchan
{

// Second-order statistics for the distortion-aware LMMSE estimator of one large-scale profile.
struct DaLmmseStatistics
{
    Eigen::MatrixXcd cross;     // K x tau_p, row k = E{[C]_k y_p^H}
    Eigen::MatrixXcd auto_corr; // tau_p x tau_p, E{y_p y_p^H}
    std::size_t num_trials = 0;
    std::string fingerprint;

    // K x tau_p matrix cross * (auto_corr + eps tr(auto_corr)/tau_p I)^-1, set by finalize().
    Eigen::MatrixXcd gain;

    static constexpr double regularization = 1e-10;

    // Throws std::runtime_error when the regularized auto-correlation is not positive definite.
    void finalize();
};

// Running sums for DaLmmseStatistics; merge() partial accumulators in a fixed order for reproducibility.
class DaLmmseAccumulator
{
public:
    DaLmmseAccumulator(int num_users, int pilot_len);

    void add(const EffectiveChannelRow &truth, const Eigen::VectorXcd &y_p);
    void merge(const DaLmmseAccumulator &other);
    [[nodiscard]] DaLmmseStatistics finish(std::string fingerprint) const;
    [[nodiscard]] std::size_t count() const noexcept { return count_; }

private:
    Eigen::MatrixXcd cross_;
    Eigen::MatrixXcd auto_;
    std::size_t count_ = 0;
};

// Monte-Carlo fit over fresh (g, UE distortion, noise) draws; truth rows come from the closed form.
DaLmmseStatistics fit_da_lmmse(const SystemConfig &config, std::size_t num_trials, RandomStream &rng,
                               int threads = 1);

EffectiveChannelRow da_lmmse_estimate(const DaLmmseStatistics &stats, const PilotObservation &obs);
// Refuses statistics fitted for a different configuration fingerprint.
EffectiveChannelRow da_lmmse_estimate(const DaLmmseStatistics &stats, const SystemConfig &config,
                                      const PilotObservation &obs);

// Ideal-hardware LMMSE of g_k from I_k, mapped to the ideal effective channel sqrt(p_k) g_k.
EffectiveChannelRow du_lmmse_estimate(const SystemConfig &config, const PilotObservation &obs);

void save_statistics(const DaLmmseStatistics &stats, const std::string &path);
DaLmmseStatistics load_statistics(const std::string &path);

struct EstimateRecord
{
    EffectiveChannelRow truth;
    std::map<std::string, EffectiveChannelRow> estimates;
};

// dB with a floor for exact zeros.
double to_db(double linear);
inline constexpr double nmse_floor_db = -300.0;

struct NmseReport
{
    double nmse = 0.0;      // sum ||est - truth||^2 / sum ||truth||^2
    double nmse_db = 0.0;
    double std_error = 0.0; // delta-method standard error of the ratio, linear units
    Eigen::VectorXd per_user;
    std::size_t records = 0;
};

class NmseAccumulator
{
public:
    void add(const EffectiveChannelRow &truth, const EffectiveChannelRow &estimate);
    void merge(const NmseAccumulator &other);
    [[nodiscard]] NmseReport report() const;
    [[nodiscard]] std::size_t count() const noexcept { return n_; }

private:
    std::size_t n_ = 0;
    double e_ = 0.0, t_ = 0.0, ee_ = 0.0, tt_ = 0.0, et_ = 0.0;
    Eigen::VectorXd user_e_, user_t_;
};

// Per-estimator NMSE over a non-empty collection; throws std::invalid_argument when empty.
std::map<std::string, NmseReport> nmse(std::span<const EstimateRecord> records);

} // namespace effchan

#endif
