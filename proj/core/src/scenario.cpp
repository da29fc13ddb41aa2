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

#include "effchan/scenario.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace effchan
{

ChannelRealization sample_channel(const SystemConfig &config, RandomStream &rng, std::size_t num_antennas)
{
    const auto K = static_cast<std::size_t>(config.num_users);
    ChannelRealization ch;
    ch.num_antennas = num_antennas;
    ch.num_users = K;
    ch.g.resize(num_antennas * K);
    ch.h.resize(num_antennas * K);
    for (std::size_t m = 0; m < num_antennas; ++m)
        for (std::size_t k = 0; k < K; ++k)
        {
            const cplx h = rng.complex_normal(1.0);
            ch.h[m * K + k] = h;
            ch.g[m * K + k] = std::sqrt(config.large_scale[k]) * h;
        }
    return ch;
}

PilotMatrix dft_pilots(int tau_p, int num_users)
{
    if (num_users < 1 || tau_p < num_users)
        throw std::invalid_argument("DFT pilots need tau_p >= K >= 1 (tau_p = " + std::to_string(tau_p) +
                                    ", K = " + std::to_string(num_users) + ")");
    PilotMatrix p;
    p.phi.resize(tau_p, num_users);
    const double norm = 1.0 / std::sqrt(static_cast<double>(tau_p));
    for (int n = 0; n < tau_p; ++n)
        for (int k = 0; k < num_users; ++k)
        {
            // reduce n*k modulo tau_p so the phase argument stays small and exact
            const double angle = -2.0 * std::numbers::pi * static_cast<double>((n * k) % tau_p) / tau_p;
            p.phi(n, k) = std::polar(norm, angle);
        }
    p.scale = std::sqrt(static_cast<double>(tau_p));
    return p;
}

} // namespace effchan
