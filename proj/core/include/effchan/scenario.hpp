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

#ifndef EFFCHAN_SCENARIO_HPP
#define EFFCHAN_SCENARIO_HPP

#include "effchan/config.hpp"
#include "effchan/rng.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace effchan
{

// Channel coefficients g_km = sqrt(beta_k) h_km for M antennas, stored antenna-major (row m holds users 0..K-1).
struct ChannelRealization
{
    std::size_t num_antennas = 1;
    std::size_t num_users = 0;
    std::vector<cplx> g;
    std::vector<cplx> h;

    [[nodiscard]] std::span<const cplx> row(std::size_t m = 0) const
    {
        return {g.data() + m * num_users, num_users};
    }
};

// i.i.d. Rayleigh draw: h_km ~ CN(0, 1).
ChannelRealization sample_channel(const SystemConfig &config, RandomStream &rng, std::size_t num_antennas = 1);

// Columns are unit-norm pilot sequences phi_k; they are transmitted scaled by sqrt(tau_p).
struct PilotMatrix
{
    Eigen::MatrixXcd phi; // tau_p x K
    double scale = 1.0;   // sqrt(tau_p)

    [[nodiscard]] int length() const { return static_cast<int>(phi.rows()); }
    [[nodiscard]] int users() const { return static_cast<int>(phi.cols()); }
};

// phi_k[n] = exp(-j 2 pi n k / tau_p) / sqrt(tau_p), k = 0..K-1. Throws std::invalid_argument if tau_p < K.
PilotMatrix dft_pilots(int tau_p, int num_users);

} // namespace effchan

#endif
