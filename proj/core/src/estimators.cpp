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

#include "effchan/estimators.hpp"

#include "effchan/parallel.hpp"
#include "effchan/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace effchan
{

namespace
{

constexpr const char *kStatsFormat = "effchan-lmmse-stats";
constexpr int kStatsVersion = 1;
constexpr std::size_t kTrialChunk = 1024;

nlohmann::json to_json(const Eigen::MatrixXcd &m)
{
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
    {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXcd matrix_from_json(const nlohmann::json &j, const std::string &what)
{
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw std::runtime_error("statistics file: '" + what + "' is not a matrix");
    Eigen::MatrixXcd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j[0].size()));
    for (std::size_t i = 0; i < j.size(); ++i)
    {
        if (j[i].size() != j[0].size())
            throw std::runtime_error("statistics file: ragged matrix '" + what + "'");
        for (std::size_t c = 0; c < j[i].size(); ++c)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                cplx{j[i][c].at(0).get<double>(), j[i][c].at(1).get<double>()};
    }
    return m;
}

} // namespace

void DaLmmseStatistics::finalize()
{
    const Eigen::Index tau = auto_corr.rows();
    if (tau == 0 || auto_corr.cols() != tau || cross.cols() != tau)
        throw std::runtime_error("LMMSE statistics have inconsistent dimensions");
    const double trace = auto_corr.diagonal().real().sum();
    if (!(trace > 0.0) || !std::isfinite(trace))
        throw std::runtime_error("LMMSE auto-correlation has non-positive trace");
    Eigen::MatrixXcd reg = auto_corr;
    reg.diagonal().array() += regularization * trace / static_cast<double>(tau);
    Eigen::LLT<Eigen::MatrixXcd> llt(reg);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("LMMSE auto-correlation is singular beyond regularization");
    // gain = cross * reg^-1, and reg is Hermitian
    gain = llt.solve(cross.adjoint()).adjoint();
}

DaLmmseAccumulator::DaLmmseAccumulator(int num_users, int pilot_len)
    : cross_(Eigen::MatrixXcd::Zero(num_users, pilot_len)), auto_(Eigen::MatrixXcd::Zero(pilot_len, pilot_len))
{
}

void DaLmmseAccumulator::add(const EffectiveChannelRow &truth, const Eigen::VectorXcd &y_p)
{
    cross_.noalias() += truth.values * y_p.adjoint();
    auto_.noalias() += y_p * y_p.adjoint();
    ++count_;
}

void DaLmmseAccumulator::merge(const DaLmmseAccumulator &other)
{
    cross_ += other.cross_;
    auto_ += other.auto_;
    count_ += other.count_;
}

DaLmmseStatistics DaLmmseAccumulator::finish(std::string fingerprint) const
{
    if (count_ == 0)
        throw std::runtime_error("LMMSE statistics: no trials accumulated");
    DaLmmseStatistics s;
    const double n = static_cast<double>(count_);
    s.cross = cross_ / n;
    s.auto_corr = auto_ / n;
    // exact Hermitian symmetry
    s.auto_corr = (0.5 * (s.auto_corr + s.auto_corr.adjoint())).eval();
    s.num_trials = count_;
    s.fingerprint = std::move(fingerprint);
    s.finalize();
    return s;
}

DaLmmseStatistics fit_da_lmmse(const SystemConfig &config, std::size_t num_trials, RandomStream &rng, int threads)
{
    if (num_trials == 0)
        throw std::invalid_argument("fit_da_lmmse: num_trials must be positive");
    const PilotMatrix pilots = dft_pilots(config.pilot_len, config.num_users);
    const ImpairedLink link(config);
    const EffectiveChannelModel model(config);

    const ChunkPlan plan{num_trials, kTrialChunk};
    std::vector<DaLmmseAccumulator> parts(plan.chunks(), DaLmmseAccumulator(config.num_users, config.pilot_len));
    for_each_chunk(plan, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
        RandomStream local = rng.split(c);
        for (std::size_t t = begin; t < end; ++t)
        {
            const ChannelRealization ch = sample_channel(config, local);
            const PilotObservation obs = link.pilot_rx(ch.row(), pilots, local);
            parts[c].add(model.row(ch.row()), obs.y_p);
        }
    });
    DaLmmseAccumulator total(config.num_users, config.pilot_len);
    for (const auto &p : parts)
        total.merge(p);
    return total.finish(config.fingerprint());
}

EffectiveChannelRow da_lmmse_estimate(const DaLmmseStatistics &stats, const PilotObservation &obs)
{
    if (stats.gain.size() == 0)
        throw std::runtime_error("LMMSE statistics are not finalized");
    if (obs.y_p.size() != stats.gain.cols())
        throw std::invalid_argument("LMMSE estimate: pilot length mismatch");
    EffectiveChannelRow row;
    row.values = stats.gain * obs.y_p;
    return row;
}

EffectiveChannelRow da_lmmse_estimate(const DaLmmseStatistics &stats, const SystemConfig &config,
                                      const PilotObservation &obs)
{
    if (stats.fingerprint != config.fingerprint())
        throw std::runtime_error("LMMSE statistics were fitted for configuration " + stats.fingerprint +
                                 ", not " + config.fingerprint());
    return da_lmmse_estimate(stats, obs);
}

EffectiveChannelRow du_lmmse_estimate(const SystemConfig &config, const PilotObservation &obs)
{
    const auto K = static_cast<Eigen::Index>(config.num_users);
    if (obs.matched.size() != K)
        throw std::invalid_argument("DU-LMMSE estimate: expected K matched-filter outputs");
    const double tau = static_cast<double>(config.pilot_len);
    EffectiveChannelRow row;
    row.values.resize(K);
    for (Eigen::Index k = 0; k < K; ++k)
    {
        const auto ku = static_cast<std::size_t>(k);
        const double p = config.ue_power[ku];
        const double beta = config.large_scale[ku];
        const double gain = std::sqrt(p * tau) * beta / (tau * p * beta + config.noise_power);
        row.values(k) = std::sqrt(p) * gain * obs.matched(k);
    }
    return row;
}

void save_statistics(const DaLmmseStatistics &stats, const std::string &path)
{
    nlohmann::json j;
    j["format"] = kStatsFormat;
    j["version"] = kStatsVersion;
    j["fingerprint"] = stats.fingerprint;
    j["num_trials"] = stats.num_trials;
    j["cross"] = to_json(stats.cross);
    j["auto"] = to_json(stats.auto_corr);
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write statistics file '" + path + "'");
    out << j.dump(1) << "\n";
    if (!out)
        throw std::runtime_error("failed writing statistics file '" + path + "'");
}

DaLmmseStatistics load_statistics(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open statistics file '" + path + "'");
    nlohmann::json j;
    try
    {
        in >> j;
    }
    catch (const nlohmann::json::exception &e)
    {
        throw std::runtime_error("statistics file '" + path + "' is corrupt: " + e.what());
    }
    if (j.value("format", "") != kStatsFormat)
        throw std::runtime_error("'" + path + "' is not an LMMSE statistics file");
    if (j.value("version", 0) != kStatsVersion)
        throw std::runtime_error("unsupported statistics file version in '" + path + "'");
    DaLmmseStatistics s;
    s.fingerprint = j.at("fingerprint").get<std::string>();
    s.num_trials = j.at("num_trials").get<std::size_t>();
    s.cross = matrix_from_json(j.at("cross"), "cross");
    s.auto_corr = matrix_from_json(j.at("auto"), "auto");
    s.finalize();
    return s;
}

double to_db(double linear)
{
    if (!(linear > 0.0))
        return nmse_floor_db;
    return std::max(nmse_floor_db, 10.0 * std::log10(linear));
}

void NmseAccumulator::add(const EffectiveChannelRow &truth, const EffectiveChannelRow &estimate)
{
    if (truth.size() != estimate.size())
        throw std::invalid_argument("NMSE: truth and estimate dimensions differ");
    if (user_e_.size() == 0)
    {
        user_e_ = Eigen::VectorXd::Zero(truth.size());
        user_t_ = Eigen::VectorXd::Zero(truth.size());
    }
    else if (user_e_.size() != truth.size())
        throw std::invalid_argument("NMSE: records have different numbers of users");
    const Eigen::VectorXd err = (estimate.values - truth.values).cwiseAbs2();
    const Eigen::VectorXd pow = truth.values.cwiseAbs2();
    const double e = err.sum();
    const double t = pow.sum();
    user_e_ += err;
    user_t_ += pow;
    e_ += e;
    t_ += t;
    ee_ += e * e;
    tt_ += t * t;
    et_ += e * t;
    ++n_;
}

void NmseAccumulator::merge(const NmseAccumulator &other)
{
    if (other.n_ == 0)
        return;
    if (n_ == 0)
    {
        *this = other;
        return;
    }
    user_e_ += other.user_e_;
    user_t_ += other.user_t_;
    e_ += other.e_;
    t_ += other.t_;
    ee_ += other.ee_;
    tt_ += other.tt_;
    et_ += other.et_;
    n_ += other.n_;
}

NmseReport NmseAccumulator::report() const
{
    if (n_ == 0)
        throw std::invalid_argument("NMSE: no records");
    NmseReport r;
    r.records = n_;
    r.nmse = t_ > 0.0 ? e_ / t_ : std::numeric_limits<double>::infinity();
    r.nmse_db = to_db(r.nmse);
    if (n_ > 1 && t_ > 0.0)
    {
        // Var of ratio estimator: sum (e_i - R t_i)^2 / (sum t_i)^2, with n/(n-1) correction
        const double R = r.nmse;
        const double ss = std::max(0.0, ee_ - 2.0 * R * et_ + R * R * tt_);
        const double n = static_cast<double>(n_);
        r.std_error = std::sqrt(ss * n / (n - 1.0)) / t_;
    }
    r.per_user = user_e_.cwiseQuotient(user_t_);
    return r;
}

std::map<std::string, NmseReport> nmse(std::span<const EstimateRecord> records)
{
    if (records.empty())
        throw std::invalid_argument("NMSE: empty record collection");
    std::map<std::string, NmseAccumulator> acc;
    for (const EstimateRecord &rec : records)
        for (const auto &[name, est] : rec.estimates)
            acc[name].add(rec.truth, est);
    std::map<std::string, NmseReport> out;
    for (const auto &[name, a] : acc)
        out[name] = a.report();
    return out;
}

} // namespace effchan
