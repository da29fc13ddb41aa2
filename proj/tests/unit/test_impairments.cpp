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

#include "effchan/effective_channel.hpp"
#include "effchan/impairments.hpp"
#include "effchan/scenario.hpp"

#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace effchan;

TEST(ScaleCoefficients, ZerothOrderIgnoresPowers)
{
    SystemConfig c = test::ideal_config(3, 123.0);
    c.ref_coefficients = {cplx{0.7, 0.2}};
    const ScaledPolynomial p = scale_coefficients(c);
    ASSERT_EQ(p.coeffs.size(), 1u);
    EXPECT_EQ(p.coeffs[0], cplx(0.7, 0.2));
}

TEST(ScaleCoefficients, SevenDbBackoff)
{
    SystemConfig c = test::ideal_config(1, 1.0);
    c.poly_order = 1;
    c.ref_coefficients = {cplx{1, 0}, cplx{1, 0}};
    c.backoff_db = 7.0;
    const ScaledPolynomial p = scale_coefficients(c);
    EXPECT_NEAR(p.coeffs[1].real(), 0.19953, 1e-5);
    EXPECT_EQ(p.coeffs[0], cplx(1, 0));
    EXPECT_NEAR(p.input_power, 5.0119, 1e-4);
}

TEST(ScaleCoefficients, DoublingPowersScalesByTwoToMinusL)
{
    SystemConfig c = test::impaired_config(4, 3, 1.0, 3.0);
    const ScaledPolynomial a = scale_coefficients(c);
    for (double &p : c.ue_power)
        p *= 2.0;
    const ScaledPolynomial b = scale_coefficients(c);
    for (int l = 0; l <= 3; ++l)
        EXPECT_NEAR(std::abs(b.coeffs[l] - a.coeffs[l] * std::pow(2.0, -l)), 0.0, 1e-15 * std::abs(a.coeffs[l]) + 1e-300);
}

TEST(Distort, HandValues)
{
    ScaledPolynomial p{{cplx{1, 0}, cplx{-0.1, 0}}, 1.0};
    EXPECT_EQ(distort(p, cplx(0, 0)), cplx(0, 0));
    EXPECT_NEAR(std::abs(distort(p, cplx(2, 0)) - cplx(1.2, 0)), 0.0, 1e-15);
    ScaledPolynomial id{{cplx{1, 0}}, 1.0};
    EXPECT_EQ(distort(id, cplx(0.3, -4.0)), cplx(0.3, -4.0));
}

TEST(Distort, RotationEquivariance)
{
    ScaledPolynomial p{{cplx{1, 0.1}, cplx{-0.3, 0.2}, cplx{0.05, -0.01}, cplx{-0.004, 0.001}}, 1.0};
    RandomStream r(2);
    for (int i = 0; i < 200; ++i)
    {
        const cplx u = r.complex_normal(2.0);
        const cplx rot = std::polar(1.0, r.uniform(-std::numbers::pi, std::numbers::pi));
        EXPECT_LT(std::abs(distort(p, u * rot) - rot * distort(p, u)), 1e-12 * (1.0 + std::abs(distort(p, u))));
    }
}

TEST(UeTransmit, PerfectHardwareIsExact)
{
    RandomStream r(1);
    const cplx s{1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0)};
    EXPECT_EQ(ue_transmit(s, 1.0, 4.0, r), 2.0 * s);
}

TEST(UeTransmit, DistortionVarianceAndPower)
{
    RandomStream r(9);
    const Constellation q = Constellation::qpsk();
    const int n = 100000;
    const double kappa = 0.98, p = 1.0;
    double w2 = 0, w4 = 0, s2 = 0, s4 = 0;
    for (int i = 0; i < n; ++i)
    {
        const cplx sym = q[r.index(q.size())];
        const cplx s = ue_transmit(sym, kappa, p, r);
        const double w = std::norm(s - std::sqrt(kappa * p) * sym);
        w2 += w;
        w4 += w * w;
        s2 += std::norm(s);
        s4 += std::norm(s) * std::norm(s);
    }
    const double mw = w2 / n, sw = std::sqrt((w4 / n - mw * mw) / n);
    const double ms = s2 / n, ss = std::sqrt((s4 / n - ms * ms) / n);
    EXPECT_LT(std::abs(mw - (1 - kappa) * p), 3 * sw);
    EXPECT_LT(std::abs(ms - p), 3 * ss);
}

TEST(DataRx, IdealHardwareIsTheLinearModel)
{
    SystemConfig c = test::ideal_config(3);
    c.noise_power = 0.0;
    c.ue_power = {1.0, 2.0, 0.5};
    RandomStream r(4);
    const auto ch = sample_channel(c, r);
    const Constellation q = Constellation::qpsk();
    const std::vector<cplx> sym{q[0], q[3], q[1]};
    const cplx y = simulate_data_rx(ch.row(), sym, c, r);
    cplx expect{0, 0};
    for (int k = 0; k < 3; ++k)
        expect += std::sqrt(c.ue_power[k]) * ch.g[k] * sym[k];
    EXPECT_NEAR(std::abs(y - expect), 0.0, 1e-13);
}

TEST(DataRx, SingleUserHandValue)
{
    SystemConfig c = test::ideal_config(1);
    c.noise_power = 0.0;
    c.poly_order = 1;
    c.backoff_db = 0.0;
    c.ue_power = {4.0};
    c.large_scale = {0.25}; // sum beta p = 1, so the scaled coefficients equal the reference ones
    c.ref_coefficients = {cplx{1, 0}, cplx{-0.1, 0}};
    const cplx s{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
    RandomStream r(0);
    const std::vector<cplx> g{cplx{1, 0}};
    const cplx y = simulate_data_rx(g, std::vector<cplx>{s}, c, r);
    EXPECT_NEAR(std::abs(y - 2.0 * s * 0.6), 0.0, 1e-14);
}

TEST(DataRx, ZeroChannelIsPureNoise)
{
    SystemConfig c = test::impaired_config(2, 3, 0.98);
    c.noise_power = 2.5;
    const ImpairedLink link(c);
    RandomStream r(8);
    const std::vector<cplx> g{cplx{0, 0}, cplx{0, 0}};
    const Constellation q = Constellation::qpsk();
    const std::vector<cplx> sym{q[0], q[1]};
    const int n = 100000;
    double acc = 0, acc2 = 0;
    for (int i = 0; i < n; ++i)
    {
        const double v = std::norm(link.data_rx(g, sym, r));
        acc += v;
        acc2 += v * v;
    }
    const double m = acc / n, se = std::sqrt((acc2 / n - m * m) / n);
    EXPECT_LT(std::abs(m - 2.5), 3 * se);
}

TEST(DataRx, InputPowerBookkeeping)
{
    SystemConfig c = test::impaired_config(4, 3, 0.9);
    c.large_scale = {1.0, 2.0, 0.5, 3.0};
    c.ue_power = {1.0, 0.5, 2.0, 1.0};
    const ImpairedLink link(c);
    const Constellation q = Constellation::qpsk();
    RandomStream r(12);
    const int n = 100000;
    double acc = 0, acc2 = 0;
    std::vector<cplx> sym(4);
    for (int i = 0; i < n; ++i)
    {
        const auto ch = sample_channel(c, r);
        for (auto &s : sym)
            s = q[r.index(q.size())];
        const double v = std::norm(link.data_input(ch.row(), sym, r));
        acc += v;
        acc2 += v * v;
    }
    const double m = acc / n, se = std::sqrt((acc2 / n - m * m) / n);
    EXPECT_LT(std::abs(m - c.received_power()), 3 * se);
}

TEST(PilotRx, IdealNoiselessMatchedFilterRecoversChannel)
{
    SystemConfig c = test::ideal_config(4);
    c.noise_power = 0.0;
    c.pilot_len = 6;
    c.ue_power = {1.0, 2.0, 0.5, 3.0};
    RandomStream r(21);
    const auto ch = sample_channel(c, r);
    const PilotMatrix pilots = dft_pilots(6, 4);
    const PilotObservation obs = simulate_pilot_rx(ch.row(), pilots, c, r);
    ASSERT_EQ(obs.y_p.size(), 6);
    ASSERT_EQ(obs.matched.size(), 4);
    for (int k = 0; k < 4; ++k)
        EXPECT_LT(std::abs(obs.matched(k) - std::sqrt(c.ue_power[k] * 6.0) * ch.g[k]), 1e-12);
}

TEST(PilotRx, ZeroChannelMatchedEntriesKeepNoisePower)
{
    SystemConfig c = test::impaired_config(3, 3, 0.98);
    c.noise_power = 0.7;
    const ImpairedLink link(c);
    const PilotMatrix pilots = dft_pilots(3, 3);
    const std::vector<cplx> g(3, cplx{0, 0});
    RandomStream r(5);
    const int n = 50000;
    Eigen::Vector3d acc = Eigen::Vector3d::Zero(), acc2 = Eigen::Vector3d::Zero();
    for (int i = 0; i < n; ++i)
    {
        const auto obs = link.pilot_rx(g, pilots, r);
        const Eigen::Vector3d v = obs.matched.cwiseAbs2();
        acc += v;
        acc2 += v.cwiseAbs2();
    }
    for (int k = 0; k < 3; ++k)
    {
        const double m = acc(k) / n, se = std::sqrt((acc2(k) / n - m * m) / n);
        EXPECT_LT(std::abs(m - 0.7), 3 * se);
    }
}

// Independent pilot-phase pipeline: direct term-by-term polynomial, own noise draws.
TEST(PilotRx, MatchedFilterGainAgreesWithIndependentPipeline)
{
    SystemConfig c = test::impaired_config(3, 3, 0.98, 20.0);
    const ImpairedLink link(c);
    const PilotMatrix pilots = dft_pilots(3, 3);
    const ScaledPolynomial poly = scale_coefficients(c);
    const int n = 10000;
    RandomStream r1(100), r2(200);

    auto ratio = [&](auto &&observe, RandomStream &r) {
        cplx num{0, 0}, num2_acc{0, 0};
        double den = 0, num_sq = 0;
        std::vector<cplx> samples;
        samples.reserve(n);
        for (int i = 0; i < n; ++i)
        {
            const auto ch = sample_channel(c, r);
            const cplx x = observe(ch, r) * std::conj(ch.g[0]);
            samples.push_back(x);
            num += x;
            den += std::norm(ch.g[0]);
        }
        const cplx mean = num / double(n);
        for (const auto &x : samples)
            num_sq += std::norm(x - mean);
        (void)num2_acc;
        // delta-method SE, treating the denominator as exact (its relative error is far smaller)
        return std::pair<cplx, double>{num / den, std::sqrt(num_sq / n / n) / (den / n)};
    };

    const auto lib = ratio([&](const ChannelRealization &ch, RandomStream &r) { return link.pilot_rx(ch.row(), pilots, r).matched(0); }, r1);
    const auto ref = ratio(
        [&](const ChannelRealization &ch, RandomStream &r) {
            cplx I{0, 0};
            for (int t = 0; t < 3; ++t)
            {
                cplx u{0, 0};
                for (int k = 0; k < 3; ++k)
                {
                    const cplx s = std::sqrt(c.ue_kappa[k] * c.ue_power[k] * 3.0) * pilots.phi(t, k) +
                                   r.complex_normal((1 - c.ue_kappa[k]) * c.ue_power[k]);
                    u += ch.g[k] * s;
                }
                cplx z{0, 0};
                for (std::size_t l = 0; l < poly.coeffs.size(); ++l)
                    z += poly.coeffs[l] * u * std::pow(std::abs(u), 2.0 * double(l));
                const cplx y = z + r.complex_normal(c.noise_power);
                I += std::conj(pilots.phi(t, 0)) * y;
            }
            return I;
        },
        r2);
    const double se = std::hypot(lib.second, ref.second);
    EXPECT_LT(std::abs(lib.first - ref.first), 3.0 * se) << lib.first << " vs " << ref.first;
}
