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

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace effchan
{

// ---------- moments and combinatorics ----------

MomentTable::MomentTable(const Constellation &constellation, int max_order)
    : max_order_(max_order)
{
    if (max_order < 0)
        throw std::invalid_argument("MomentTable: max_order must be non-negative");
    const int n = max_order + 1;
    values_.assign(static_cast<std::size_t>(n * n), cplx{0.0, 0.0});
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if ((a - b) % 4 == 0)
                values_[static_cast<std::size_t>(a * n + b)] = constellation.moment(a, b);
}

cplx MomentTable::operator()(int a, int b) const
{
    if (a < 0 || b < 0 || a > max_order_ || b > max_order_)
        throw std::out_of_range("MomentTable: order (" + std::to_string(a) + ", " + std::to_string(b) +
                                ") outside table of order " + std::to_string(max_order_));
    return values_[static_cast<std::size_t>(a * (max_order_ + 1) + b)];
}

std::uint64_t multinomial(int n, std::span<const int> parts)
{
    int total = 0;
    for (int p : parts)
    {
        if (p < 0)
            throw std::invalid_argument("multinomial: negative part");
        total += p;
    }
    if (total != n)
        throw std::invalid_argument("multinomial: parts do not sum to n");
    // product of binomials C(k_1 + ... + k_i, k_i)
    std::uint64_t result = 1;
    int acc = 0;
    for (int p : parts)
        for (int i = 1; i <= p; ++i)
        {
            ++acc;
            result = result * static_cast<std::uint64_t>(acc) / static_cast<std::uint64_t>(i);
        }
    return result;
}

ClrTable::ClrTable(int order)
    : order_(order)
{
    if (order < 0)
        throw std::invalid_argument("ClrTable: order must be non-negative");
    const int n = order + 1;
    values_.assign(static_cast<std::size_t>(n * n), 0);
    for (int l = 0; l <= order; ++l)
        for (int r = 0; r <= l; ++r)
        {
            std::uint64_t c = 0;
            // first sum: l2 - l1 = l - 2r, parts (l1, l2, r - l1, r - l1)
            for (int l1 = 0; l1 <= r; ++l1)
            {
                const int l2 = l1 + l - 2 * r;
                if (l2 < 0)
                    continue;
                const int parts[] = {l1, l2, r - l1, r - l1};
                c += multinomial(l, parts);
            }
            // second sum: l2 - l1 = l - 2r - 1, parts (l1, l2, r + 1 - l1, r - l1)
            for (int l1 = 0; l1 <= r; ++l1)
            {
                const int l2 = l1 + l - 2 * r - 1;
                if (l2 < 0)
                    continue;
                const int parts[] = {l1, l2, r + 1 - l1, r - l1};
                c += multinomial(l, parts);
            }
            values_[static_cast<std::size_t>(l * n + r)] = c;
        }
}

std::uint64_t ClrTable::operator()(int l, int r) const
{
    if (r < 0 || l < r || l > order_)
        throw std::out_of_range("ClrTable: need 0 <= r <= l <= " + std::to_string(order_));
    return values_[static_cast<std::size_t>(l * (order_ + 1) + r)];
}

ClrTable build_clr_table(int order)
{
    return ClrTable(order);
}

void write_clr_table(std::ostream &os, const ClrTable &table)
{
    os << "# c_lr table, order L = " << table.order() << "\n# l r c_lr\n";
    for (int l = 0; l <= table.order(); ++l)
        for (int r = 0; r <= l; ++r)
            os << l << " " << r << " " << table(l, r) << "\n";
}

ClrTable read_clr_table(std::istream &is)
{
    struct Entry
    {
        int l, r;
        std::uint64_t c;
    };
    std::vector<Entry> entries;
    int order = -1;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line))
    {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream ls(line);
        Entry e{};
        if (!(ls >> e.l >> e.r >> e.c) || e.r < 0 || e.l < e.r)
            throw std::runtime_error("c_lr table: malformed line " + std::to_string(lineno));
        order = std::max(order, e.l);
        entries.push_back(e);
    }
    if (order < 0)
        throw std::runtime_error("c_lr table: no entries");
    ClrTable t;
    t.order_ = order;
    t.values_.assign(static_cast<std::size_t>((order + 1) * (order + 1)), 0);
    for (const Entry &e : entries)
        t.values_[static_cast<std::size_t>(e.l * (order + 1) + e.r)] = e.c;
    return t;
}

void write_moment_table(std::ostream &os, const MomentTable &table)
{
    os << "# constellation moments E{s^a conj(s)^b}, max order " << table.max_order() << "\n# a b re im\n";
    char buf[96];
    for (int a = 0; a <= table.max_order(); ++a)
        for (int b = 0; b <= table.max_order(); ++b)
        {
            const cplx m = table(a, b);
            std::snprintf(buf, sizeof buf, "%d %d %.17g %.17g\n", a, b, m.real(), m.imag());
            os << buf;
        }
}

double v_moment(double sigma_v_sq, int n)
{
    if (n < 0)
        throw std::invalid_argument("v_moment: n must be non-negative");
    double r = 1.0;
    for (int i = 1; i <= n; ++i)
        r *= static_cast<double>(i) * sigma_v_sq;
    return r;
}

// ---------- conditional moments of t ----------

namespace
{

// Joint moment tables E{X^a conj(X)^b}, a <= amax, b <= bmax, for independent sums; combining two tables
// is a binomial convolution in both indices.
class FoldTable
{
public:
    FoldTable(int amax, int bmax)
        : amax_(amax), bmax_(bmax), v_(static_cast<std::size_t>((amax + 1) * (bmax + 1)), cplx{0.0, 0.0})
    {
    }

    static FoldTable identity(int amax, int bmax)
    {
        FoldTable t(amax, bmax);
        t(0, 0) = 1.0;
        return t;
    }

    cplx &operator()(int a, int b) { return v_[static_cast<std::size_t>(a * (bmax_ + 1) + b)]; }
    const cplx &operator()(int a, int b) const { return v_[static_cast<std::size_t>(a * (bmax_ + 1) + b)]; }
    int amax() const { return amax_; }
    int bmax() const { return bmax_; }

private:
    int amax_, bmax_;
    std::vector<cplx> v_;
};

struct Binomials
{
    explicit Binomials(int n)
        : n_(n), c_(static_cast<std::size_t>((n + 1) * (n + 1)), 0.0)
    {
        for (int i = 0; i <= n; ++i)
        {
            at(i, 0) = 1.0;
            for (int j = 1; j <= i; ++j)
                at(i, j) = at(i - 1, j - 1) + (j <= i - 1 ? at(i - 1, j) : 0.0);
        }
    }
    double operator()(int n, int k) const { return c_[static_cast<std::size_t>(n * (n_ + 1) + k)]; }

private:
    double &at(int n, int k) { return c_[static_cast<std::size_t>(n * (n_ + 1) + k)]; }
    int n_;
    std::vector<double> c_;
};

FoldTable convolve(const FoldTable &p, const FoldTable &q, const Binomials &binom)
{
    FoldTable out(p.amax(), p.bmax());
    for (int a = 0; a <= p.amax(); ++a)
        for (int b = 0; b <= p.bmax(); ++b)
        {
            cplx acc{0.0, 0.0};
            for (int i = 0; i <= a; ++i)
                for (int j = 0; j <= b; ++j)
                {
                    const cplx &pv = p(i, j);
                    if (pv == cplx{0.0, 0.0})
                        continue;
                    acc += binom(a, i) * binom(b, j) * pv * q(a - i, b - j);
                }
            out(a, b) = acc;
        }
    return out;
}

// E{x^i conj(x)^j s^i conj(s)^(j + tag)} for one user with amplitude x.
FoldTable user_table(cplx x, const MomentTable &m, int amax, int bmax, int tag)
{
    FoldTable t(amax, bmax);
    std::vector<cplx> xp(static_cast<std::size_t>(amax + 1)), xc(static_cast<std::size_t>(bmax + 1));
    xp[0] = 1.0;
    for (int i = 1; i <= amax; ++i)
        xp[static_cast<std::size_t>(i)] = xp[static_cast<std::size_t>(i - 1)] * x;
    xc[0] = 1.0;
    for (int j = 1; j <= bmax; ++j)
        xc[static_cast<std::size_t>(j)] = xc[static_cast<std::size_t>(j - 1)] * std::conj(x);
    for (int i = 0; i <= amax; ++i)
        for (int j = 0; j <= bmax; ++j)
            if ((i - j - tag) % 4 == 0)
                t(i, j) = xp[static_cast<std::size_t>(i)] * xc[static_cast<std::size_t>(j)] * m(i, j + tag);
    return t;
}

// (L+1) x K matrix of E{|t|^(2r) t conj(s_k)}.
Eigen::MatrixXcd t_moment_matrix(std::span<const cplx> g_tilde, const MomentTable &moments, int order)
{
    const int K = static_cast<int>(g_tilde.size());
    const int amax = order + 1;
    const int bmax = order;
    if (moments.max_order() < order + 1)
        throw std::invalid_argument("t_moment: moment table order " + std::to_string(moments.max_order()) +
                                    " is below the required " + std::to_string(order + 1));
    const Binomials binom(amax);

    std::vector<FoldTable> plain;
    plain.reserve(static_cast<std::size_t>(K));
    for (int l = 0; l < K; ++l)
        plain.push_back(user_table(g_tilde[static_cast<std::size_t>(l)], moments, amax, bmax, 0));

    // prefix[k] folds users < k, suffix[k] folds users >= k
    std::vector<FoldTable> prefix, suffix;
    prefix.reserve(static_cast<std::size_t>(K) + 1);
    prefix.push_back(FoldTable::identity(amax, bmax));
    for (int l = 0; l < K; ++l)
        prefix.push_back(convolve(prefix.back(), plain[static_cast<std::size_t>(l)], binom));
    suffix.assign(static_cast<std::size_t>(K) + 1, FoldTable::identity(amax, bmax));
    for (int l = K - 1; l >= 0; --l)
        suffix[static_cast<std::size_t>(l)] =
            convolve(plain[static_cast<std::size_t>(l)], suffix[static_cast<std::size_t>(l) + 1], binom);

    Eigen::MatrixXcd out(order + 1, K);
    for (int k = 0; k < K; ++k)
    {
        const FoldTable tagged = user_table(g_tilde[static_cast<std::size_t>(k)], moments, amax, bmax, 1);
        const FoldTable left = convolve(prefix[static_cast<std::size_t>(k)], tagged, binom);
        const FoldTable &right = suffix[static_cast<std::size_t>(k) + 1];
        for (int r = 0; r <= order; ++r)
        {
            cplx acc{0.0, 0.0};
            for (int i = 0; i <= r + 1; ++i)
                for (int j = 0; j <= r; ++j)
                    acc += binom(r + 1, i) * binom(r, j) * left(i, j) * right(r + 1 - i, r - j);
            out(r, k) = acc;
        }
    }
    return out;
}

} // namespace

cplx t_moment(std::span<const cplx> g_tilde, const MomentTable &moments, int r, int k)
{
    if (r < 0 || k < 0 || static_cast<std::size_t>(k) >= g_tilde.size())
        throw std::out_of_range("t_moment: r or k out of range");
    return t_moment_matrix(g_tilde, moments, r)(r, k);
}

cplx t_moment_enumerated(std::span<const cplx> g_tilde, const MomentTable &moments, int r, int k)
{
    const int K = static_cast<int>(g_tilde.size());
    if (r < 0 || k < 0 || k >= K)
        throw std::out_of_range("t_moment_enumerated: r or k out of range");
    if (moments.max_order() < r + 1)
        throw std::invalid_argument("t_moment_enumerated: moment table order too small");

    const int len = 2 * r + 1; // r+1 unconjugated factors, then r conjugated ones
    std::vector<int> seq(static_cast<std::size_t>(len), 0);
    std::vector<int> a(static_cast<std::size_t>(K)), b(static_cast<std::size_t>(K));
    cplx total{0.0, 0.0};
    while (true)
    {
        std::fill(a.begin(), a.end(), 0);
        std::fill(b.begin(), b.end(), 0);
        cplx term{1.0, 0.0};
        for (int s = 0; s < len; ++s)
        {
            const auto u = static_cast<std::size_t>(seq[static_cast<std::size_t>(s)]);
            if (s <= r)
            {
                term *= g_tilde[u];
                ++a[u];
            }
            else
            {
                term *= std::conj(g_tilde[u]);
                ++b[u];
            }
        }
        ++b[static_cast<std::size_t>(k)];
        for (int u = 0; u < K && term != cplx{0.0, 0.0}; ++u)
            term *= moments(a[static_cast<std::size_t>(u)], b[static_cast<std::size_t>(u)]);
        total += term;

        int pos = 0;
        while (pos < len && ++seq[static_cast<std::size_t>(pos)] == K)
            seq[static_cast<std::size_t>(pos++)] = 0;
        if (pos == len)
            break;
    }
    return total;
}

// ---------- effective channel ----------

EffectiveChannelModel::EffectiveChannelModel(const SystemConfig &config, std::size_t antenna,
                                             DistortionMomentFn v_moments)
    : config_(&config),
      poly_(scale_coefficients(config, antenna)),
      clr_(config.poly_order),
      moments_(config.constellation, 2 * config.poly_order + 1),
      v_moments_(std::move(v_moments))
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

double EffectiveChannelModel::distortion_power(std::span<const cplx> g) const
{
    double s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
        s += std::norm(g[k]) * distortion_var_[k];
    return s;
}

std::vector<cplx> EffectiveChannelModel::radial_weights(double sigma_v_sq) const
{
    const int L = poly_.order();
    std::vector<double> mu(static_cast<std::size_t>(L) + 1);
    for (int n = 0; n <= L; ++n)
        mu[static_cast<std::size_t>(n)] = v_moments_(sigma_v_sq, n);
    std::vector<cplx> w(static_cast<std::size_t>(L) + 1, cplx{0.0, 0.0});
    for (int r = 0; r <= L; ++r)
        for (int l = r; l <= L; ++l)
            w[static_cast<std::size_t>(r)] += poly_.coeffs[static_cast<std::size_t>(l)] *
                                              mu[static_cast<std::size_t>(l - r)] *
                                              static_cast<double>(clr_(l, r));
    return w;
}

Eigen::MatrixXcd EffectiveChannelModel::t_moments(std::span<const cplx> g_tilde) const
{
    return t_moment_matrix(g_tilde, moments_, poly_.order());
}

EffectiveChannelRow EffectiveChannelModel::row(std::span<const cplx> g) const
{
    const std::size_t K = signal_amp_.size();
    if (g.size() != K)
        throw std::invalid_argument("effective channel: expected " + std::to_string(K) + " channel entries");
    std::vector<cplx> g_tilde(K);
    for (std::size_t k = 0; k < K; ++k)
        g_tilde[k] = signal_amp_[k] * g[k];

    const Eigen::MatrixXcd t = t_moments(g_tilde);
    const std::vector<cplx> w = radial_weights(distortion_power(g));
    EffectiveChannelRow row;
    row.values = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(K));
    for (Eigen::Index r = 0; r < t.rows(); ++r)
        row.values += w[static_cast<std::size_t>(r)] * t.row(r).transpose();
    return row;
}

EffectiveChannelRow effective_channel_row(std::span<const cplx> g, const SystemConfig &config)
{
    return EffectiveChannelModel(config).row(g);
}

OracleEstimate effective_channel_mc_oracle(std::span<const cplx> g, const SystemConfig &config,
                                           std::size_t num_samples, RandomStream &rng)
{
    if (num_samples < 2)
        throw std::invalid_argument("effective_channel_mc_oracle: need at least two samples");
    const ImpairedLink link(config);
    const auto K = static_cast<std::size_t>(config.num_users);
    const auto &points = config.constellation.points();

    Eigen::VectorXcd sum = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(K));
    Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(K));
    std::vector<cplx> symbols(K);
    for (std::size_t n = 0; n < num_samples; ++n)
    {
        for (std::size_t k = 0; k < K; ++k)
            symbols[k] = points[rng.index(points.size())];
        const cplx y = link.data_rx(g, symbols, rng);
        for (std::size_t k = 0; k < K; ++k)
        {
            const cplx x = y * std::conj(symbols[k]);
            sum(static_cast<Eigen::Index>(k)) += x;
            sum_sq(static_cast<Eigen::Index>(k)) += std::norm(x);
        }
    }
    const double N = static_cast<double>(num_samples);
    OracleEstimate est;
    est.samples = num_samples;
    est.mean.values = sum / N;
    est.std_error.resize(static_cast<Eigen::Index>(K));
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(K); ++k)
    {
        const double var = std::max(0.0, (sum_sq(k) - N * std::norm(est.mean.values(k))) / (N - 1.0));
        est.std_error(k) = std::sqrt(var / N);
    }
    return est;
}

EffectiveChannelRow effective_channel_exhaustive(std::span<const cplx> g, const SystemConfig &config)
{
    for (double kappa : config.ue_kappa)
        if (kappa != 1.0)
            throw std::invalid_argument("exhaustive oracle requires kappa = 1 for every user");
    const auto K = static_cast<std::size_t>(config.num_users);
    const auto &points = config.constellation.points();
    const double combos = std::pow(static_cast<double>(points.size()), static_cast<double>(K));
    if (combos > 67108864.0)
        throw std::invalid_argument("exhaustive oracle: too many joint symbol vectors");

    const ScaledPolynomial poly = scale_coefficients(config);
    std::vector<cplx> amp(K);
    for (std::size_t k = 0; k < K; ++k)
        amp[k] = std::sqrt(config.ue_power[k]) * g[k];

    std::vector<std::size_t> idx(K, 0);
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(K));
    std::size_t count = 0;
    while (true)
    {
        cplx u{0.0, 0.0};
        for (std::size_t k = 0; k < K; ++k)
            u += amp[k] * points[idx[k]];
        const cplx z = distort(poly, u);
        for (std::size_t k = 0; k < K; ++k)
            acc(static_cast<Eigen::Index>(k)) += z * std::conj(points[idx[k]]);
        ++count;

        std::size_t pos = 0;
        while (pos < K && ++idx[pos] == points.size())
            idx[pos++] = 0;
        if (pos == K)
            break;
    }
    EffectiveChannelRow row;
    row.values = acc / static_cast<double>(count);
    return row;
}

} // namespace effchan
