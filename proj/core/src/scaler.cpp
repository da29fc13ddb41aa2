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

#include "effchan/scaler.hpp"

#include "effchan/dataset.hpp"

#include <cmath>
#include <stdexcept>

namespace effchan
{

namespace
{

// Relative threshold under which a feature counts as constant.
constexpr double kDegenerate = 1e-12;

} // namespace

std::vector<std::string> StandardScaler::fit(const Eigen::MatrixXd &data, const std::string &label)
{
    if (data.cols() == 0)
        throw std::invalid_argument("StandardScaler: no samples");
    const double n = static_cast<double>(data.cols());
    mean = data.rowwise().mean();
    stddev.resize(data.rows());
    passthrough.assign(static_cast<std::size_t>(data.rows()), false);
    std::vector<std::string> warnings;
    for (Eigen::Index i = 0; i < data.rows(); ++i)
    {
        const double var = (data.row(i).array() - mean(i)).square().sum() / n;
        const double sd = std::sqrt(var);
        if (!(sd > kDegenerate * std::max(1.0, std::abs(mean(i)))))
        {
            passthrough[static_cast<std::size_t>(i)] = true;
            stddev(i) = 1.0;
            warnings.push_back(label + " feature " + std::to_string(i) + " is constant; centred but not rescaled");
        }
        else
            stddev(i) = sd;
    }
    return warnings;
}

void StandardScaler::apply(Eigen::Ref<Eigen::MatrixXd> data) const
{
    if (data.rows() != mean.size())
        throw std::invalid_argument("StandardScaler: feature count mismatch");
    for (Eigen::Index i = 0; i < data.rows(); ++i)
        data.row(i) = (data.row(i).array() - mean(i)) / stddev(i);
}

void StandardScaler::invert(Eigen::Ref<Eigen::MatrixXd> data) const
{
    if (data.rows() != mean.size())
        throw std::invalid_argument("StandardScaler: feature count mismatch");
    for (Eigen::Index i = 0; i < data.rows(); ++i)
        data.row(i) = data.row(i).array() * stddev(i) + mean(i);
}

std::vector<std::string> MinMaxScaler::fit(const Eigen::MatrixXd &data, const std::string &label)
{
    if (data.cols() == 0)
        throw std::invalid_argument("MinMaxScaler: no samples");
    min = data.rowwise().minCoeff();
    max = data.rowwise().maxCoeff();
    passthrough.assign(static_cast<std::size_t>(data.rows()), false);
    std::vector<std::string> warnings;
    for (Eigen::Index i = 0; i < data.rows(); ++i)
        if (!(max(i) - min(i) > kDegenerate * std::max(1.0, std::abs(max(i)))))
        {
            passthrough[static_cast<std::size_t>(i)] = true;
            max(i) = min(i) + 1.0;
            warnings.push_back(label + " feature " + std::to_string(i) + " is constant; centred but not rescaled");
        }
    return warnings;
}

void MinMaxScaler::apply(Eigen::Ref<Eigen::MatrixXd> data) const
{
    if (data.rows() != min.size())
        throw std::invalid_argument("MinMaxScaler: feature count mismatch");
    for (Eigen::Index i = 0; i < data.rows(); ++i)
        data.row(i) = (data.row(i).array() - min(i)) / (max(i) - min(i));
}

void MinMaxScaler::invert(Eigen::Ref<Eigen::MatrixXd> data) const
{
    if (data.rows() != min.size())
        throw std::invalid_argument("MinMaxScaler: feature count mismatch");
    for (Eigen::Index i = 0; i < data.rows(); ++i)
        data.row(i) = data.row(i).array() * (max(i) - min(i)) + min(i);
}

void ScalerSet::apply_inputs(Eigen::Ref<Eigen::MatrixXd> inputs) const
{
    if (inputs.rows() != 3 * num_users)
        throw std::invalid_argument("ScalerSet: expected 3K input features");
    iq.apply(inputs.topRows(2 * num_users));
    power.apply(inputs.bottomRows(num_users));
}

void ScalerSet::invert_inputs(Eigen::Ref<Eigen::MatrixXd> inputs) const
{
    if (inputs.rows() != 3 * num_users)
        throw std::invalid_argument("ScalerSet: expected 3K input features");
    iq.invert(inputs.topRows(2 * num_users));
    power.invert(inputs.bottomRows(num_users));
}

void ScalerSet::apply_targets(Eigen::Ref<Eigen::MatrixXd> t) const
{
    targets.apply(t);
}

void ScalerSet::invert_targets(Eigen::Ref<Eigen::MatrixXd> t) const
{
    targets.invert(t);
}

ScalerSet fit_scalers(const Dataset &train)
{
    if (train.size() == 0)
        throw std::invalid_argument("fit_scalers: empty dataset");
    const int K = train.num_users();
    ScalerSet s;
    s.num_users = K;
    s.fitted_on = train.fingerprint();
    auto take = [&s](std::vector<std::string> w) { s.warnings.insert(s.warnings.end(), w.begin(), w.end()); };
    take(s.iq.fit(train.inputs().topRows(2 * K), "matched-filter"));
    take(s.power.fit(train.inputs().bottomRows(K), "large-scale"));
    take(s.targets.fit(train.targets(), "target"));
    return s;
}

} // namespace effchan
