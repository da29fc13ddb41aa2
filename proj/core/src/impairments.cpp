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

#include "effchan/impairments.hpp"

#include <cmath>
#include <stdexcept>

namespace effchan
{

ScaledPolynomial scale_coefficients(const SystemConfig &config, std::size_t antenna)
{
    ScaledPolynomial p;
    p.input_power = config.backoff_linear() * config.received_power();
    const auto &a = config.coefficients(antenna);
    p.coeffs.resize(a.size());
    double denom = 1.0;
    for (std::size_t l = 0; l < a.size(); ++l)
    {
        p.coeffs[l] = a[l] / denom;
        denom *= p.input_power;
    }
    return p;
}

cplx ue_transmit(cplx symbol, double kappa, double power, RandomStream &rng)
{
    const cplx s = std::sqrt(kappa * power) * symbol;
    const double var = (1.0 - kappa) * power;
    return var > 0.0 ? s + rng.complex_normal(var) : s;
}

ImpairedLink::ImpairedLink(const SystemConfig &config, std::size_t antenna)
    : config_(&config), poly_(scale_coefficients(config, antenna))
{
    const auto K = static_cast<std::size_t>(config.num_users);
    signal_amp_.resize(K);
    distortion_var_.resize(K);
    for (std::size_t k = 0; k < K; ++k)
    {
        signal_amp_[k] = std::sqrt(config.ue_kappa[k] * config.ue_power[k]);
        distortion_var_[k] = (1.0 - config.ue_kappa[k]) * config.ue_power[k];
    }
}

cplx ImpairedLink::data_input(std::span<const cplx> g, std::span<const cplx> symbols, RandomStream &rng) const
{
    if (g.size() != signal_amp_.size() || symbols.size() != signal_amp_.size())
        throw std::invalid_argument("data_input: expected K channel entries and K symbols");
    cplx u{0.0, 0.0};
    for (std::size_t k = 0; k < g.size(); ++k)
    {
        cplx s = signal_amp_[k] * symbols[k];
        if (distortion_var_[k] > 0.0)
            s += rng.complex_normal(distortion_var_[k]);
        u += g[k] * s;
    }
    return u;
}

cplx ImpairedLink::data_rx(std::span<const cplx> g, std::span<const cplx> symbols, RandomStream &rng) const
{
    const cplx u = data_input(g, symbols, rng);
    return distort(poly_, u) + rng.complex_normal(config_->noise_power);
}

PilotObservation ImpairedLink::pilot_rx(std::span<const cplx> g, const PilotMatrix &pilots, RandomStream &rng) const
{
    const auto K = signal_amp_.size();
    if (g.size() != K || static_cast<std::size_t>(pilots.users()) != K)
        throw std::invalid_argument("pilot_rx: channel, pilots and configuration disagree on K");
    const int tau = pilots.length();
    PilotObservation obs;
    obs.y_p.resize(tau);
    for (int n = 0; n < tau; ++n)
    {
        cplx u{0.0, 0.0};
        for (std::size_t k = 0; k < K; ++k)
        {
            cplx s = signal_amp_[k] * pilots.scale * pilots.phi(n, static_cast<Eigen::Index>(k));
            if (distortion_var_[k] > 0.0)
                s += rng.complex_normal(distortion_var_[k]);
            u += g[k] * s;
        }
        obs.y_p(n) = distort(poly_, u) + rng.complex_normal(config_->noise_power);
    }
    obs.matched = pilots.phi.adjoint() * obs.y_p;
    return obs;
}

cplx simulate_data_rx(std::span<const cplx> g, std::span<const cplx> symbols, const SystemConfig &config,
                      RandomStream &rng)
{
    return ImpairedLink(config).data_rx(g, symbols, rng);
}

PilotObservation simulate_pilot_rx(std::span<const cplx> g, const PilotMatrix &pilots, const SystemConfig &config,
                                   RandomStream &rng)
{
    return ImpairedLink(config).pilot_rx(g, pilots, rng);
}

} // namespace effchan
