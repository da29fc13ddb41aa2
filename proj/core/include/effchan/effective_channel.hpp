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

#ifndef EFFCHAN_EFFECTIVE_CHANNEL_HPP
#define EFFCHAN_EFFECTIVE_CHANNEL_HPP

#include "effchan/config.hpp"
#include "effchan/impairments.hpp"
#include "effchan/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace effchan
{

// Symbol moments E{s^a conj(s)^b}, 0 <= a, b <= max_order. Entries with (a - b) mod 4 != 0 are stored as exact
// zeros, which the 90-degree rotation symmetry of the constellation guarantees.
class MomentTable
{
public:
    MomentTable(const Constellation &constellation, int max_order);

    [[nodiscard]] cplx operator()(int a, int b) const;
    [[nodiscard]] int max_order() const noexcept { return max_order_; }

private:
    int max_order_;
    std::vector<cplx> values_;
};

// Multinomial n! / (k_1! ... k_m!). Parts must be non-negative and sum to n.
std::uint64_t multinomial(int n, std::span<const int> parts);

// Combinatorial weights c_lr (0 <= r <= l <= L) that fold the UE-distortion expansion into powers of |t|^2.
class ClrTable
{
public:
    explicit ClrTable(int order); // builds entries from the two multinomial sums

    [[nodiscard]] std::uint64_t operator()(int l, int r) const;
    [[nodiscard]] int order() const noexcept { return order_; }

    friend bool operator==(const ClrTable &, const ClrTable &) = default;

private:
    ClrTable() = default;
    friend ClrTable read_clr_table(std::istream &);
    int order_ = 0;
    std::vector<std::uint64_t> values_; // row-major (L+1) x (L+1), zero above the diagonal
};

ClrTable build_clr_table(int order);

// Golden-file format: one "l r c_lr" / "a b re im" entry per line, '#' comments allowed.
void write_clr_table(std::ostream &os, const ClrTable &table);
ClrTable read_clr_table(std::istream &is);
void write_moment_table(std::ostream &os, const MomentTable &table);

// E{|v|^(2n)} for v ~ CN(0, sigma_v_sq): n! sigma_v_sq^n. Throws std::invalid_argument for n < 0.
double v_moment(double sigma_v_sq, int n);

// Pluggable UE-distortion moment law; defaults to the circularly-symmetric Gaussian above.
using DistortionMomentFn = std::function<double(double sigma_v_sq, int n)>;

// E{|t|^(2r) t conj(s_k)} with t = sum_l g_tilde_l s_l and independent equiprobable symbols.
// Computed by folding users one at a time, each contributing its own symbol moments.
cplx t_moment(std::span<const cplx> g_tilde, const MomentTable &moments, int r, int k);

// Same quantity by direct expansion over all (2r+1)-long sequences of user indices. O(K^(2r+1)); for cross-checks.
cplx t_moment_enumerated(std::span<const cplx> g_tilde, const MomentTable &moments, int r, int k);

// Entries [C_ys]_{m,0..K-1} for one antenna.
struct EffectiveChannelRow
{
    Eigen::VectorXcd values;

    [[nodiscard]] Eigen::Index size() const { return values.size(); }
};

// Closed-form evaluator for one configuration and antenna; tables are built once and reused.
class EffectiveChannelModel
{
public:
    explicit EffectiveChannelModel(const SystemConfig &config, std::size_t antenna = 0,
                                   DistortionMomentFn v_moments = v_moment);

    [[nodiscard]] EffectiveChannelRow row(std::span<const cplx> g) const;

    // All t-moments for r = 0..L (rows) and k = 0..K-1 (cols), given g_tilde_k = sqrt(kappa_k p_k) g_k.
    [[nodiscard]] Eigen::MatrixXcd t_moments(std::span<const cplx> g_tilde) const;

    // Per-r weights sum_{l=r}^{L} a~_l mu_(l-r) c_lr for a given UE-distortion power.
    [[nodiscard]] std::vector<cplx> radial_weights(double sigma_v_sq) const;

    [[nodiscard]] double distortion_power(std::span<const cplx> g) const; // sum_k |g_k|^2 (1 - kappa_k) p_k

    [[nodiscard]] const ScaledPolynomial &polynomial() const noexcept { return poly_; }
    [[nodiscard]] const ClrTable &clr() const noexcept { return clr_; }
    [[nodiscard]] const MomentTable &moments() const noexcept { return moments_; }

private:
    const SystemConfig *config_;
    ScaledPolynomial poly_;
    ClrTable clr_;
    MomentTable moments_;
    DistortionMomentFn v_moments_;
    std::vector<double> signal_amp_;
    std::vector<double> distortion_var_;
};

EffectiveChannelRow effective_channel_row(std::span<const cplx> g, const SystemConfig &config);

struct OracleEstimate
{
    EffectiveChannelRow mean;
    Eigen::VectorXd std_error; // sqrt(E|x - mean|^2 / N), per entry
    std::size_t samples = 0;
};

// Sample mean of y * conj(s_k) over independent symbols, UE distortion and noise, straight from the definition.
OracleEstimate effective_channel_mc_oracle(std::span<const cplx> g, const SystemConfig &config,
                                           std::size_t num_samples, RandomStream &rng);

// Exact average over every joint symbol vector; requires kappa_k = 1 for all k (no continuous UE distortion).
// Noise is zero-mean and independent of the symbols, so it is left out.
EffectiveChannelRow effective_channel_exhaustive(std::span<const cplx> g, const SystemConfig &config);

} // namespace effchan

#endif
