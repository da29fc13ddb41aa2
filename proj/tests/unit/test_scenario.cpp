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

#include "effchan/config.hpp"
#include "effchan/constellation.hpp"
#include "effchan/scenario.hpp"

#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace effchan;

namespace
{

const char *kDoc = R"(
num_users: 10
poly_order: 3
backoff_db: 7
noise_power: 1.0
pilot_len: 10
constellation: qpsk
amplifier:
  coefficients: [[1.0, 0.0], [-0.35, 0.12], [0.20, -0.06], [-0.05, 0.015]]
users:
  kappa: 0.98
  power: 1.0
  large_scale: 10.0
)";

std::string replace(std::string s, const std::string &from, const std::string &to)
{
    s.replace(s.find(from), from.size(), to);
    return s;
}

} // namespace

TEST(Config, ReferenceScenarioLoads)
{
    const SystemConfig c = load_config(kDoc);
    EXPECT_EQ(c.num_users, 10);
    EXPECT_EQ(c.poly_order, 3);
    EXPECT_EQ(c.pilot_len, 10);
    EXPECT_DOUBLE_EQ(c.backoff_db, 7.0);
    EXPECT_EQ(c.constellation.name(), "qpsk");
    ASSERT_EQ(c.ue_kappa.size(), 10u);
    for (double k : c.ue_kappa)
        EXPECT_DOUBLE_EQ(k, 0.98);
    EXPECT_NEAR(c.backoff_linear(), 5.011872336, 1e-9);
}

TEST(Config, KappaAboveOneNamesTheField)
{
    const std::string doc = replace(kDoc, "kappa: 0.98", "kappa: [1.2, 1, 1, 1, 1, 1, 1, 1, 1, 1]");
    try
    {
        (void)load_config(doc);
        FAIL() << "expected ConfigError";
    }
    catch (const ConfigError &e)
    {
        EXPECT_EQ(e.field(), "users.kappa[0]");
    }
}

TEST(Config, PilotShorterThanUserCountIsRejected)
{
    try
    {
        (void)load_config(replace(kDoc, "pilot_len: 10", "pilot_len: 5"));
        FAIL() << "expected ConfigError";
    }
    catch (const ConfigError &e)
    {
        EXPECT_EQ(e.field(), "pilot_len");
    }
}

TEST(Config, OtherInvariantViolations)
{
    EXPECT_THROW((void)load_config(replace(kDoc, "power: 1.0", "power: 0")), ConfigError);
    EXPECT_THROW((void)load_config(replace(kDoc, "large_scale: 10.0", "large_scale: -1")), ConfigError);
    EXPECT_THROW((void)load_config(replace(kDoc, "poly_order: 3", "poly_order: 2")), ConfigError);
    EXPECT_THROW((void)load_config(replace(kDoc, "noise_power: 1.0", "noise_power: 0")), ConfigError);
    EXPECT_THROW((void)load_config(replace(kDoc, "kappa: 0.98", "kappa: [0.98, 0.98]")), ConfigError);
    EXPECT_THROW((void)load_config("num_users: [1"), ConfigError);
    EXPECT_THROW((void)load_config(replace(kDoc, "constellation: qpsk", "constellation: 8psk")), ConfigError);
}

TEST(Config, DumpRoundTripsExactly)
{
    SystemConfig c = load_config(kDoc);
    c.large_scale[3] = 0.1 + 0.2;
    c.ue_power[1] = 1.0 / 3.0;
    const SystemConfig back = load_config(dump_config(c));
    EXPECT_EQ(back.fingerprint(), c.fingerprint());
    EXPECT_EQ(back.large_scale, c.large_scale);
    EXPECT_EQ(back.ue_power, c.ue_power);
    EXPECT_EQ(back.ref_coefficients, c.ref_coefficients);
}

TEST(Config, FingerprintTracksPhysicsNotSeed)
{
    SystemConfig a = load_config(kDoc), b = a;
    b.rng_seed = 99;
    EXPECT_EQ(a.fingerprint(), b.fingerprint());
    b.large_scale[0] *= 2.0;
    EXPECT_NE(a.fingerprint(), b.fingerprint());
}

TEST(Config, ShippedConfigsValidate)
{
    EXPECT_NO_THROW((void)load_config_file(std::string(EFFCHAN_CONFIG_DIR) + "/default.yaml"));
    EXPECT_NO_THROW((void)load_config_file(std::string(EFFCHAN_CONFIG_DIR) + "/ideal.yaml"));
}

TEST(Constellation, QpskMoments)
{
    const Constellation q = Constellation::qpsk();
    EXPECT_NEAR(std::abs(q.moment(1, 1) - cplx(1, 0)), 0.0, 1e-15);
    EXPECT_EQ(q.moment(2, 1), cplx(0, 0));
    EXPECT_NEAR(std::abs(q.moment(4, 0) - cplx(-1, 0)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(q.moment(2, 2) - cplx(1, 0)), 0.0, 1e-14);
}

TEST(Constellation, SymmetryForcesVanishingMoments)
{
    for (const char *name : {"qpsk", "qam16", "qam64"})
    {
        const Constellation c = Constellation::from_name(name);
        EXPECT_TRUE(has_quarter_turn_symmetry(c.points()));
        double energy = 0.0;
        for (const auto &p : c.points())
            energy += std::norm(p);
        EXPECT_NEAR(energy / static_cast<double>(c.size()), 1.0, 1e-12) << name;
        for (int a = 0; a <= 7; ++a)
            for (int b = 0; b <= 7; ++b)
            {
                const cplx m = c.moment(a, b);
                if ((a - b) % 4 != 0)
                    EXPECT_LT(std::abs(m), 1e-12) << name << " " << a << "," << b;
                EXPECT_LT(std::abs(m - std::conj(c.moment(b, a))), 1e-12);
            }
    }
}

TEST(Constellation, RejectsAsymmetricOrUnnormalizedPoints)
{
    EXPECT_THROW(Constellation("bpsk", {{1, 0}, {-1, 0}}), std::invalid_argument);
    EXPECT_THROW(Constellation("big", {{2, 0}, {0, 2}, {-2, 0}, {0, -2}}), std::invalid_argument);
}

TEST(Pilots, TwoPointDft)
{
    const PilotMatrix p = dft_pilots(2, 2);
    const double s = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(std::abs(p.phi(0, 0) - s), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(p.phi(1, 0) - s), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(p.phi(0, 1) - s), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(p.phi(1, 1) + s), 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(p.scale, std::sqrt(2.0));
}

TEST(Pilots, GramIsIdentityAndEntriesEquimodular)
{
    for (int tau : {1, 3, 10, 16})
        for (int K = 1; K <= tau; K += 3)
        {
            const PilotMatrix p = dft_pilots(tau, K);
            const Eigen::MatrixXcd gram = p.phi.adjoint() * p.phi;
            EXPECT_LT((gram - Eigen::MatrixXcd::Identity(K, K)).cwiseAbs().maxCoeff(), 1e-12);
            EXPECT_LT((p.phi.cwiseAbs().array() - 1.0 / std::sqrt(double(tau))).abs().maxCoeff(), 1e-15);
        }
    EXPECT_THROW((void)dft_pilots(5, 10), std::invalid_argument);
}

TEST(Channel, ZeroLargeScaleGivesZeroChannel)
{
    SystemConfig c = test::ideal_config(3);
    c.large_scale[1] = 0.0;
    RandomStream r(1);
    const auto ch = sample_channel(c, r);
    EXPECT_EQ(ch.g[1], cplx(0, 0));
    EXPECT_NE(ch.g[0], cplx(0, 0));
}

TEST(Channel, RayleighStatistics)
{
    SystemConfig c = test::ideal_config(2);
    c.large_scale = {1.0, 4.0};
    RandomStream r(11);
    const int n = 100000;
    double mh_re = 0, mh_im = 0, vh = 0;
    double vg[2] = {0, 0};
    cplx mg[2] = {};
    for (int i = 0; i < n; ++i)
    {
        const auto ch = sample_channel(c, r);
        mh_re += ch.h[0].real();
        mh_im += ch.h[0].imag();
        vh += std::norm(ch.h[0]);
        for (int k = 0; k < 2; ++k)
        {
            mg[k] += ch.g[k];
            vg[k] += std::norm(ch.g[k]);
            EXPECT_EQ(ch.g[k], std::sqrt(c.large_scale[k]) * ch.h[k]);
        }
    }
    EXPECT_NEAR(mh_re / n, 0.0, 0.02);
    EXPECT_NEAR(mh_im / n, 0.0, 0.02);
    EXPECT_NEAR(vh / n, 1.0, 0.02);
    for (int k = 0; k < 2; ++k)
    {
        const double beta = c.large_scale[k];
        // |g|^2 is exponential with mean beta: standard error beta / sqrt(n)
        EXPECT_LT(std::abs(vg[k] / n - beta), 3.0 * beta / std::sqrt(double(n)));
        EXPECT_LT(std::abs(mg[k] / double(n)), 3.0 * std::sqrt(beta / n));
    }
}
