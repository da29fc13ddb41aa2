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

#ifndef EFFCHAN_IMPAIRMENTS_HPP
#define EFFCHAN_IMPAIRMENTS_HPP

#include "effchan/config.hpp"
#include "effchan/rng.hpp"
#include "effchan/scenario.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace effchan
{

// Amplifier coefficients after automatic gain control: coeffs[l] = a_l / input_power^l with
// input_power = b_off * sum_k beta_k p_k.
struct ScaledPolynomial
{
    std::vector<cplx> coeffs;
    double input_power = 1.0;

    [[nodiscard]] int order() const { return static_cast<int>(coeffs.size()) - 1; } // L
};

ScaledPolynomial scale_coefficients(const SystemConfig &config, std::size_t antenna = 0);

// Quasi-memoryless nonlinearity: sum_l coeffs[l] * u * |u|^(2l).
inline cplx distort(const ScaledPolynomial &poly, cplx u)
{
    const double r2 = std::norm(u);
    cplx gain{0.0, 0.0};
    for (auto it = poly.coeffs.rbegin(); it != poly.coeffs.rend(); ++it)
        gain = gain * r2 + *it;
    return u * gain;
}

// s = sqrt(kappa p) symbol + w, w ~ CN(0, (1 - kappa) p) independent of the symbol.
cplx ue_transmit(cplx symbol, double kappa, double power, RandomStream &rng);

// One antenna's received pilot block and its matched-filter statistics I_k = phi_k^H y_p.
struct PilotObservation
{
    Eigen::VectorXcd y_p;
    Eigen::VectorXcd matched;
};

// Precomputed per-antenna signal chain for one configuration.
class ImpairedLink
{
public:
    explicit ImpairedLink(const SystemConfig &config, std::size_t antenna = 0);

    [[nodiscard]] const ScaledPolynomial &polynomial() const noexcept { return poly_; }
    [[nodiscard]] const SystemConfig &config() const noexcept { return *config_; }

    // Distortion-free receive signal u = sum_k g_k s_k for given symbols (draws UE distortion).
    cplx data_input(std::span<const cplx> g, std::span<const cplx> symbols, RandomStream &rng) const;
    // y = distort(u) + n, n ~ CN(0, sigma^2).
    cplx data_rx(std::span<const cplx> g, std::span<const cplx> symbols, RandomStream &rng) const;
    // Pilot phase with fresh UE distortion per sample.
    PilotObservation pilot_rx(std::span<const cplx> g, const PilotMatrix &pilots, RandomStream &rng) const;

private:
    const SystemConfig *config_;
    ScaledPolynomial poly_;
    std::vector<double> signal_amp_;     // sqrt(kappa_k p_k)
    std::vector<double> distortion_var_; // (1 - kappa_k) p_k
};

cplx simulate_data_rx(std::span<const cplx> g, std::span<const cplx> symbols, const SystemConfig &config,
                      RandomStream &rng);
PilotObservation simulate_pilot_rx(std::span<const cplx> g, const PilotMatrix &pilots, const SystemConfig &config,
                                   RandomStream &rng);

} // namespace effchan

#endif
