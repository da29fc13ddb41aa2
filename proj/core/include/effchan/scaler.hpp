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

#ifndef EFFCHAN_SCALER_HPP
#define EFFCHAN_SCALER_HPP

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace effchan
{

// Per-feature (x - mean) / stddev. Features are rows; samples are columns.
struct StandardScaler
{
    Eigen::VectorXd mean;
    Eigen::VectorXd stddev;
    std::vector<bool> passthrough; // constant features: offset removed, unit scale

    // Returns one warning per constant feature.
    std::vector<std::string> fit(const Eigen::MatrixXd &data, const std::string &label);
    void apply(Eigen::Ref<Eigen::MatrixXd> data) const;
    void invert(Eigen::Ref<Eigen::MatrixXd> data) const;
};

// Per-feature (x - min) / (max - min).
struct MinMaxScaler
{
    Eigen::VectorXd min;
    Eigen::VectorXd max;
    std::vector<bool> passthrough;

    std::vector<std::string> fit(const Eigen::MatrixXd &data, const std::string &label);
    void apply(Eigen::Ref<Eigen::MatrixXd> data) const;
    void invert(Eigen::Ref<Eigen::MatrixXd> data) const;
};

// Input layout per sample (users in sorted order): Re I_0, Im I_0, ..., Re I_{K-1}, Im I_{K-1},
// sqrt(beta_0 p_0), ..., sqrt(beta_{K-1} p_{K-1}). Targets: Re O_0, Im O_0, ...
struct ScalerSet
{
    int num_users = 0;
    StandardScaler iq;      // first 2K input features
    MinMaxScaler power;     // last K input features
    StandardScaler targets; // 2K outputs
    std::string fitted_on;  // fingerprint of the fitting dataset
    std::vector<std::string> warnings;

    void apply_inputs(Eigen::Ref<Eigen::MatrixXd> inputs) const;
    void invert_inputs(Eigen::Ref<Eigen::MatrixXd> inputs) const;
    void apply_targets(Eigen::Ref<Eigen::MatrixXd> targets_) const;
    void invert_targets(Eigen::Ref<Eigen::MatrixXd> targets_) const;
};

class Dataset;

// Fits every scaler on the given (training) split. Throws std::invalid_argument on an empty dataset.
ScalerSet fit_scalers(const Dataset &train);

} // namespace effchan

#endif
