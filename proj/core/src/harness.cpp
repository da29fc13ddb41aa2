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

#include "effchan/harness.hpp"

#include "effchan/dataset.hpp"
#include "effchan/effective_channel.hpp"
#include "effchan/model_io.hpp"
#include "effchan/parallel.hpp"
#include "effchan/scenario.hpp"

#include <Eigen/Core>
#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#ifndef EFFCHAN_VERSION
#define EFFCHAN_VERSION "0.0.0"
#endif

namespace effchan
{

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

constexpr std::size_t kTrialChunk = 1024;
constexpr const char *kManifestFormat = "effchan-run-manifest";
constexpr int kManifestVersion = 1;

template <typename T>
T yaml_value(const YAML::Node &node, const std::string &field)
{
    try
    {
        return node.as<T>();
    }
    catch (const YAML::Exception &)
    {
        throw ConfigError(field, "expected a value of the right type");
    }
}

template <typename T>
std::vector<T> yaml_list(const YAML::Node &node, const std::string &field)
{
    if (node.IsScalar())
        return {yaml_value<T>(node, field)};
    if (!node.IsSequence())
        throw ConfigError(field, "expected a list");
    std::vector<T> out;
    for (std::size_t i = 0; i < node.size(); ++i)
        out.push_back(yaml_value<T>(node[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

template <typename T>
void read_key(const YAML::Node &map, const char *key, const std::string &prefix, T &target)
{
    if (map[key])
        target = yaml_value<T>(map[key], prefix + key);
}

std::string fmt_g(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

double db_to_linear(double db)
{
    return std::pow(10.0, db / 10.0);
}

// Serializes log callbacks coming from worker threads.
class SyncLog
{
public:
    explicit SyncLog(LogFn fn) : fn_(std::move(fn)) {}
    void operator()(const std::string &msg) const
    {
        if (!fn_)
            return;
        std::lock_guard lock(mutex_);
        fn_(msg);
    }

private:
    LogFn fn_;
    mutable std::mutex mutex_;
};

// Outer workers for independent points and inner workers for each point's own chunked loops.
std::pair<int, int> split_threads(int threads, std::size_t points)
{
    const int outer = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(std::max(1, threads)), points));
    return {std::max(1, outer), std::max(1, std::max(1, threads) / std::max(1, outer))};
}

struct NetworkOutcome
{
    NeuralEstimator estimator;
    std::vector<std::vector<ResultTable::Cell>> log_rows;
};

NetworkOutcome obtain_network(const std::string &experiment, const std::string &label, const SystemConfig &config,
                              const LargeScaleProfile &profile, const ExperimentSpec &spec, const RunContext &ctx,
                              RandomStream rng, const SyncLog &log)
{
    NetworkOutcome out;
    const std::string file = label + ".json";
    if (!spec.train_networks)
    {
        const fs::path path = fs::path(spec.model_dir) / file;
        if (spec.model_dir.empty() || !fs::exists(path))
            throw std::runtime_error("missing network '" + path.string() + "' and training is disabled");
        out.estimator = load_model(path.string(), config.num_users).estimator;
        log("loaded " + path.string());
        return out;
    }
    log("training " + label + " on " + std::to_string(spec.train_samples) + " samples");
    TrainingResult r = train(config, profile, spec.train_samples, spec.val_samples, spec.training, rng,
                             [&](const EpochRecord &e) {
                                 char buf[160];
                                 std::snprintf(buf, sizeof buf, "%s epoch %d train %.4g val %.4g lr %.3g",
                                               label.c_str(), e.epoch, e.train_mse, e.val_mse, e.learning_rate);
                                 log(buf);
                             });
    for (const auto &e : r.log.epochs)
        out.log_rows.push_back({experiment, label, std::int64_t{e.epoch}, e.train_mse, e.val_mse, e.learning_rate,
                                static_cast<std::int64_t>(ctx.seed)});
    if (!ctx.out_dir.empty())
    {
        const fs::path dir = fs::path(ctx.out_dir) / "models";
        fs::create_directories(dir);
        save_model((dir / file).string(), r.estimator, &r.log);
    }
    out.estimator = std::move(r.estimator);
    return out;
}

std::vector<ResultTable::Cell> nmse_row(const std::string &experiment, const std::string &point, double snr_db,
                                        double kappa, const std::string &estimator, const NmseReport &rep,
                                        std::uint64_t seed, const std::string &fingerprint)
{
    return {experiment,
            point,
            snr_db,
            kappa,
            estimator,
            rep.nmse,
            rep.nmse_db,
            rep.std_error,
            static_cast<std::int64_t>(rep.records),
            static_cast<std::int64_t>(seed),
            fingerprint};
}

json spec_to_json(const ExperimentSpec &s)
{
    const TrainingParams &t = s.training;
    return {{"snr_db", s.snr_db},
            {"kappa", s.kappas},
            {"stat_trials", s.stat_trials},
            {"eval_trials", s.eval_trials},
            {"per_point_networks", s.per_point_networks},
            {"cdf",
             {{"profiles", s.cdf_profiles}, {"trials", s.cdf_trials}, {"snr_min", s.cdf_snr_min},
              {"snr_max", s.cdf_snr_max}}},
            {"estimators", s.estimators},
            {"train_networks", s.train_networks},
            {"model_dir", s.model_dir},
            {"training",
             {{"train_samples", s.train_samples},
              {"val_samples", s.val_samples},
              {"profile", s.random_snr_training ? "random-snr" : "fixed"},
              {"hidden", t.hidden},
              {"learning_rate", t.adam.learning_rate},
              {"beta1", t.adam.beta1},
              {"beta2", t.adam.beta2},
              {"epsilon", t.adam.epsilon},
              {"batch_size", t.batch_size},
              {"max_epochs", t.max_epochs},
              {"patience", t.patience},
              {"lr_decay", t.lr_decay},
              {"lr_patience", t.lr_patience},
              {"min_learning_rate", t.min_learning_rate},
              {"threads", t.threads}}}};
}

LargeScaleProfile cdf_profile(const ExperimentSpec &spec)
{
    return LargeScaleProfile::uniform_sqrt_snr(std::sqrt(spec.cdf_snr_min), std::sqrt(spec.cdf_snr_max));
}

std::string fnv_hex(const std::string &data)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : data)
    {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Files hash their contents; directories hash the sorted (name, hash) list of their regular files.
std::string hash_path(const std::string &path)
{
    if (!fs::is_directory(path))
        return hash_file(path);
    std::vector<std::string> entries;
    for (const auto &e : fs::directory_iterator(path))
        if (e.is_regular_file())
            entries.push_back(e.path().filename().string() + ":" + hash_file(e.path().string()));
    std::sort(entries.begin(), entries.end());
    std::string joined;
    for (const auto &e : entries)
        joined += e + "\n";
    return fnv_hex(joined);
}

void write_text(const fs::path &path, const std::string &text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
    out.close();
    if (!out)
        throw std::runtime_error("failed writing '" + path.string() + "'");
}

} // namespace

void ExperimentSpec::validate() const
{
    if (snr_db.empty())
        throw ConfigError("experiment.snr_db", "SNR grid is empty");
    for (double s : snr_db)
        if (!std::isfinite(s))
            throw ConfigError("experiment.snr_db", "SNR values must be finite");
    if (kappas.empty())
        throw ConfigError("experiment.kappa", "kappa list is empty");
    for (double k : kappas)
        if (!(k >= 0.0 && k <= 1.0))
            throw ConfigError("experiment.kappa", "kappa must lie in [0, 1]");
    if (stat_trials < 1)
        throw ConfigError("experiment.stat_trials", "must be at least 1");
    if (eval_trials < 1)
        throw ConfigError("experiment.eval_trials", "must be at least 1");
    if (cdf_profiles < 1)
        throw ConfigError("experiment.cdf.profiles", "must be at least 1");
    if (cdf_trials < 1)
        throw ConfigError("experiment.cdf.trials", "must be at least 1");
    if (!(cdf_snr_min > 0.0) || !(cdf_snr_max >= cdf_snr_min) || !std::isfinite(cdf_snr_max))
        throw ConfigError("experiment.cdf.snr_min", "need 0 < snr_min <= snr_max");
    if (estimators.empty())
        throw ConfigError("experiment.estimators", "no estimators selected");
    std::set<std::string> seen;
    for (const auto &e : estimators)
    {
        if (e != kDaLmmse && e != kDuLmmse && e != kNeural)
            throw ConfigError("experiment.estimators", "unknown estimator '" + e + "'");
        if (!seen.insert(e).second)
            throw ConfigError("experiment.estimators", "estimator '" + e + "' listed twice");
    }
    if (train_samples < 1)
        throw ConfigError("training.train_samples", "must be at least 1");
    if (val_samples < 1)
        throw ConfigError("training.val_samples", "must be at least 1");
    if (training.hidden.empty())
        throw ConfigError("training.hidden", "need at least one hidden layer");
    for (int w : training.hidden)
        if (w < 1)
            throw ConfigError("training.hidden", "widths must be positive");
    if (training.batch_size < 1)
        throw ConfigError("training.batch_size", "must be positive");
    if (!(training.adam.learning_rate > 0.0))
        throw ConfigError("training.learning_rate", "must be positive");
    if (!(training.adam.beta1 >= 0.0 && training.adam.beta1 < 1.0))
        throw ConfigError("training.beta1", "must lie in [0, 1)");
    if (!(training.adam.beta2 >= 0.0 && training.adam.beta2 < 1.0))
        throw ConfigError("training.beta2", "must lie in [0, 1)");
    if (!(training.adam.epsilon > 0.0))
        throw ConfigError("training.epsilon", "must be positive");
    if (training.max_epochs < 1)
        throw ConfigError("training.max_epochs", "must be at least 1");
    if (training.patience < 1)
        throw ConfigError("training.patience", "must be at least 1");
    if (!(training.lr_decay > 0.0 && training.lr_decay <= 1.0))
        throw ConfigError("training.lr_decay", "must lie in (0, 1]");
    if (training.lr_patience < 1)
        throw ConfigError("training.lr_patience", "must be at least 1");
    if (training.threads < 1)
        throw ConfigError("training.threads", "must be at least 1");
    if (!train_networks && uses(kNeural) && model_dir.empty())
        throw ConfigError("experiment.models", "training is disabled but no model directory is given");
}

bool ExperimentSpec::uses(const std::string &estimator) const
{
    return std::find(estimators.begin(), estimators.end(), estimator) != estimators.end();
}

ExperimentSpec load_experiment(const std::string &yaml_text)
{
    YAML::Node root;
    try
    {
        root = YAML::Load(yaml_text);
    }
    catch (const YAML::Exception &e)
    {
        throw ConfigError("", std::string("parse error: ") + e.what());
    }
    ExperimentSpec s;
    if (const YAML::Node ex = root["experiment"])
    {
        if (!ex.IsMap())
            throw ConfigError("experiment", "expected a mapping");
        if (ex["snr_db"])
            s.snr_db = yaml_list<double>(ex["snr_db"], "experiment.snr_db");
        if (ex["kappa"])
            s.kappas = yaml_list<double>(ex["kappa"], "experiment.kappa");
        if (ex["estimators"])
            s.estimators = yaml_list<std::string>(ex["estimators"], "experiment.estimators");
        read_key(ex, "stat_trials", "experiment.", s.stat_trials);
        read_key(ex, "eval_trials", "experiment.", s.eval_trials);
        read_key(ex, "per_point_networks", "experiment.", s.per_point_networks);
        read_key(ex, "train", "experiment.", s.train_networks);
        read_key(ex, "models", "experiment.", s.model_dir);
        if (const YAML::Node cdf = ex["cdf"])
        {
            if (!cdf.IsMap())
                throw ConfigError("experiment.cdf", "expected a mapping");
            read_key(cdf, "profiles", "experiment.cdf.", s.cdf_profiles);
            read_key(cdf, "trials", "experiment.cdf.", s.cdf_trials);
            read_key(cdf, "snr_min", "experiment.cdf.", s.cdf_snr_min);
            read_key(cdf, "snr_max", "experiment.cdf.", s.cdf_snr_max);
        }
    }
    if (const YAML::Node tr = root["training"])
    {
        if (!tr.IsMap())
            throw ConfigError("training", "expected a mapping");
        TrainingParams &t = s.training;
        read_key(tr, "train_samples", "training.", s.train_samples);
        read_key(tr, "val_samples", "training.", s.val_samples);
        if (tr["hidden"])
            t.hidden = yaml_list<int>(tr["hidden"], "training.hidden");
        read_key(tr, "learning_rate", "training.", t.adam.learning_rate);
        read_key(tr, "beta1", "training.", t.adam.beta1);
        read_key(tr, "beta2", "training.", t.adam.beta2);
        read_key(tr, "epsilon", "training.", t.adam.epsilon);
        read_key(tr, "batch_size", "training.", t.batch_size);
        read_key(tr, "max_epochs", "training.", t.max_epochs);
        read_key(tr, "patience", "training.", t.patience);
        read_key(tr, "lr_decay", "training.", t.lr_decay);
        read_key(tr, "lr_patience", "training.", t.lr_patience);
        read_key(tr, "min_learning_rate", "training.", t.min_learning_rate);
        read_key(tr, "threads", "training.", t.threads);
        if (tr["profile"])
        {
            const auto p = yaml_value<std::string>(tr["profile"], "training.profile");
            if (p == "random-snr")
                s.random_snr_training = true;
            else if (p != "fixed")
                throw ConfigError("training.profile", "expected 'fixed' or 'random-snr'");
        }
    }
    s.validate();
    return s;
}

TrialSet generate_trials(const SystemConfig &config, std::size_t n, RandomStream &rng, int threads)
{
    if (n == 0)
        throw std::invalid_argument("generate_trials: n must be positive");
    const PilotMatrix pilots = dft_pilots(config.pilot_len, config.num_users);
    const ImpairedLink link(config);
    const EffectiveChannelModel model(config);
    TrialSet set;
    set.truth.resize(n);
    set.obs.resize(n);
    const ChunkPlan plan{n, kTrialChunk};
    for_each_chunk(plan, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
        RandomStream local = rng.split(c);
        for (std::size_t t = begin; t < end; ++t)
        {
            const ChannelRealization ch = sample_channel(config, local);
            set.obs[t] = link.pilot_rx(ch.row(), pilots, local);
            set.truth[t] = model.row(ch.row());
        }
    });
    return set;
}

DaLmmseStatistics fit_da_lmmse(const SystemConfig &config, const TrialSet &trials)
{
    if (trials.size() == 0)
        throw std::invalid_argument("fit_da_lmmse: no trials");
    DaLmmseAccumulator acc(config.num_users, config.pilot_len);
    for (std::size_t t = 0; t < trials.size(); ++t)
        acc.add(trials.truth[t], trials.obs[t].y_p);
    return acc.finish(config.fingerprint());
}

std::map<std::string, NmseReport> evaluate_estimators(const SystemConfig &config, const TrialSet &trials,
                                                      const EstimatorSet &est, int threads)
{
    if (trials.size() == 0)
        throw std::invalid_argument("evaluate_estimators: no trials");
    const int K = config.num_users;
    const std::vector<int> order = user_order(config);
    const ChunkPlan plan{trials.size(), kTrialChunk};
    struct Partial
    {
        NmseAccumulator da, du, nn;
    };
    std::vector<Partial> parts(plan.chunks());
    for_each_chunk(plan, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
        Partial &p = parts[c];
        Eigen::MatrixXd nn_out;
        if (est.nn)
        {
            Eigen::MatrixXd features(3 * K, static_cast<Eigen::Index>(end - begin));
            for (std::size_t t = begin; t < end; ++t)
                write_features(config, order, trials.obs[t].matched, features.col(static_cast<Eigen::Index>(t - begin)));
            nn_out = est.nn->predict(features);
        }
        for (std::size_t t = begin; t < end; ++t)
        {
            const EffectiveChannelRow &truth = trials.truth[t];
            if (est.da)
                p.da.add(truth, da_lmmse_estimate(*est.da, trials.obs[t]));
            if (est.du)
                p.du.add(truth, du_lmmse_estimate(config, trials.obs[t]));
            if (est.nn)
                p.nn.add(truth, unsort_outputs(order, nn_out.col(static_cast<Eigen::Index>(t - begin))));
        }
    });
    Partial total;
    for (const auto &p : parts)
    {
        total.da.merge(p.da);
        total.du.merge(p.du);
        total.nn.merge(p.nn);
    }
    std::map<std::string, NmseReport> out;
    if (est.da)
        out[kDaLmmse] = total.da.report();
    if (est.du)
        out[kDuLmmse] = total.du.report();
    if (est.nn)
        out[kNeural] = total.nn.report();
    return out;
}

ResultTable make_nmse_table()
{
    return ResultTable({"experiment", "point", "snr_db", "kappa", "estimator", "nmse", "nmse_db", "std_error",
                        "trials", "seed", "config_fingerprint"});
}

ResultTable make_training_table()
{
    return ResultTable({"experiment", "network", "epoch", "train_mse", "val_mse", "learning_rate", "seed"});
}

SweepResult run_equal_snr(const SystemConfig &base, const ExperimentSpec &spec, const RunContext &ctx)
{
    base.validate();
    spec.validate();
    const SyncLog log(ctx.log);
    const RandomStream root(ctx.seed);
    const std::string fp = base.fingerprint();
    const std::size_t nk = spec.kappas.size();
    const std::size_t points = spec.snr_db.size() * nk;
    const bool want_nn = spec.uses(kNeural);

    auto point_config = [&](std::size_t si, std::size_t ki) {
        SystemConfig cfg = base;
        cfg.set_equal_snr(db_to_linear(spec.snr_db[si]));
        cfg.set_kappa(spec.kappas[ki]);
        return cfg;
    };

    // one network per kappa over the SNR span of the grid
    std::vector<NetworkOutcome> shared(nk);
    if (want_nn && !spec.per_point_networks)
    {
        const auto [lo, hi] = std::minmax_element(spec.snr_db.begin(), spec.snr_db.end());
        const auto profile =
            LargeScaleProfile::uniform_sqrt_snr(std::sqrt(db_to_linear(*lo)), std::sqrt(db_to_linear(*hi)));
        for (std::size_t ki = 0; ki < nk; ++ki)
        {
            SystemConfig cfg = point_config(0, ki);
            shared[ki] = obtain_network("sweep", "sweep_kappa" + fmt_g(spec.kappas[ki]), cfg, profile, spec, ctx,
                                        root.split("sweep-network").split(ki), log);
        }
    }

    struct Slot
    {
        std::map<std::string, NmseReport> reports;
        std::vector<std::vector<ResultTable::Cell>> log_rows;
    };
    std::vector<Slot> slots(points);
    const auto [outer, inner] = split_threads(ctx.threads, points);
    for_each_chunk(ChunkPlan{points, 1}, outer, [&](std::size_t pi, std::size_t, std::size_t) {
        const std::size_t si = pi / nk, ki = pi % nk;
        const SystemConfig cfg = point_config(si, ki);
        const std::string label = "sweep_snr" + fmt_g(spec.snr_db[si]) + "_kappa" + fmt_g(spec.kappas[ki]);
        const RandomStream prng = root.split("sweep").split(pi);

        std::optional<DaLmmseStatistics> stats;
        if (spec.uses(kDaLmmse))
        {
            RandomStream r = prng.split("lmmse");
            stats = fit_da_lmmse(cfg, spec.stat_trials, r, inner);
        }
        std::optional<NetworkOutcome> own;
        const NeuralEstimator *nn = nullptr;
        if (want_nn)
        {
            if (spec.per_point_networks)
            {
                own = obtain_network("sweep", label, cfg, LargeScaleProfile::fixed(), spec, ctx, prng.split("nn"),
                                     log);
                nn = &own->estimator;
                slots[pi].log_rows = std::move(own->log_rows);
            }
            else
                nn = &shared[ki].estimator;
        }
        // evaluation draws are shared by both kappa values at one SNR
        RandomStream erng = root.split("sweep-eval").split(si);
        const TrialSet trials = generate_trials(cfg, spec.eval_trials, erng, inner);
        EstimatorSet set;
        set.da = stats ? &*stats : nullptr;
        set.du = spec.uses(kDuLmmse);
        set.nn = nn;
        slots[pi].reports = evaluate_estimators(cfg, trials, set, inner);
        log(label + " done");
    });

    SweepResult result;
    for (const auto &s : shared)
        for (const auto &row : s.log_rows)
            result.training.append(row);
    for (std::size_t pi = 0; pi < points; ++pi)
    {
        const std::size_t si = pi / nk, ki = pi % nk;
        const std::string label = "snr" + fmt_g(spec.snr_db[si]) + "_kappa" + fmt_g(spec.kappas[ki]);
        for (const auto &name : spec.estimators)
            result.nmse.append(nmse_row("equal-snr", label, spec.snr_db[si], spec.kappas[ki], name,
                                        slots[pi].reports.at(name), ctx.seed, fp));
        for (const auto &row : slots[pi].log_rows)
            result.training.append(row);
    }
    return result;
}

CdfResult run_random_snr_cdf(const SystemConfig &base, const ExperimentSpec &spec, const RunContext &ctx)
{
    base.validate();
    spec.validate();
    const SyncLog log(ctx.log);
    const RandomStream root(ctx.seed);
    const std::string fp = base.fingerprint();
    const std::size_t nk = spec.kappas.size();
    const std::size_t P = spec.cdf_profiles;
    const LargeScaleProfile profile = cdf_profile(spec);

    CdfResult result;
    result.profiles = ResultTable({"kappa", "profile", "estimator", "nmse", "nmse_db", "std_error", "trials",
                                   "min_snr_db", "max_snr_db", "seed", "config_fingerprint"});
    result.cdf = ResultTable({"kappa", "estimator", "rank", "quantile", "nmse_db", "seed", "config_fingerprint"});

    std::vector<NetworkOutcome> nets(nk);
    if (spec.uses(kNeural))
        for (std::size_t ki = 0; ki < nk; ++ki)
        {
            SystemConfig cfg = base;
            cfg.set_kappa(spec.kappas[ki]);
            nets[ki] = obtain_network("random-snr", "cdf_kappa" + fmt_g(spec.kappas[ki]), cfg, profile, spec, ctx,
                                      root.split("cdf-network").split(ki), log);
            for (const auto &row : nets[ki].log_rows)
                result.training.append(row);
        }

    // profiles are drawn once and shared by every kappa
    std::vector<std::vector<double>> betas(P);
    for (std::size_t j = 0; j < P; ++j)
    {
        SystemConfig cfg = base;
        RandomStream r = root.split("cdf-profile").split(j);
        profile.draw(cfg, r);
        betas[j] = cfg.large_scale;
    }

    const std::size_t jobs = nk * P;
    std::vector<std::map<std::string, NmseReport>> reports(jobs);
    const auto [outer, inner] = split_threads(ctx.threads, jobs);
    for_each_chunk(ChunkPlan{jobs, 1}, outer, [&](std::size_t job, std::size_t, std::size_t) {
        const std::size_t ki = job / P, j = job % P;
        SystemConfig cfg = base;
        cfg.set_kappa(spec.kappas[ki]);
        cfg.large_scale = betas[j];
        RandomStream trng = root.split("cdf-trials").split(j);
        const TrialSet trials = generate_trials(cfg, spec.cdf_trials, trng, inner);
        // the LMMSE statistics are averaged over the profile's own trials
        std::optional<DaLmmseStatistics> stats;
        if (spec.uses(kDaLmmse))
            stats = fit_da_lmmse(cfg, trials);
        EstimatorSet set;
        set.da = stats ? &*stats : nullptr;
        set.du = spec.uses(kDuLmmse);
        set.nn = spec.uses(kNeural) ? &nets[ki].estimator : nullptr;
        reports[job] = evaluate_estimators(cfg, trials, set, inner);
        if ((j + 1) % 10 == 0 || j + 1 == P)
            log("kappa " + fmt_g(spec.kappas[ki]) + " profile " + std::to_string(j + 1) + "/" + std::to_string(P));
    });

    for (std::size_t ki = 0; ki < nk; ++ki)
    {
        const double kappa = spec.kappas[ki];
        for (std::size_t j = 0; j < P; ++j)
        {
            double lo = INFINITY, hi = -INFINITY;
            for (std::size_t k = 0; k < betas[j].size(); ++k)
            {
                const double snr = 10.0 * std::log10(betas[j][k] * base.ue_power[k] / base.noise_power);
                lo = std::min(lo, snr);
                hi = std::max(hi, snr);
            }
            for (const auto &name : spec.estimators)
            {
                const NmseReport &r = reports[ki * P + j].at(name);
                result.profiles.append({kappa, static_cast<std::int64_t>(j), name, r.nmse, r.nmse_db, r.std_error,
                                        static_cast<std::int64_t>(r.records), lo, hi,
                                        static_cast<std::int64_t>(ctx.seed), fp});
            }
        }
        for (const auto &name : spec.estimators)
        {
            std::vector<double> db(P);
            for (std::size_t j = 0; j < P; ++j)
                db[j] = reports[ki * P + j].at(name).nmse_db;
            std::sort(db.begin(), db.end());
            for (std::size_t j = 0; j < P; ++j)
                result.cdf.append({kappa, name, static_cast<std::int64_t>(j),
                                   static_cast<double>(j + 1) / static_cast<double>(P), db[j],
                                   static_cast<std::int64_t>(ctx.seed), fp});
        }
    }
    return result;
}

std::string hash_file(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return fnv_hex(ss.str());
}

std::string version_string()
{
    return EFFCHAN_VERSION;
}

RunOutcome run_command(const RunRequest &request, const std::string &out_dir, const LogFn &log_fn)
{
    const SyncLog log(log_fn);
    const SystemConfig config = load_config(request.config_text);
    ExperimentSpec spec = load_experiment(request.config_text);
    const int threads = request.deterministic ? 1 : std::max(1, request.threads);
    if (request.deterministic)
        spec.training.threads = 1;
    if (out_dir.empty())
        throw std::invalid_argument("an output directory is required");
    const fs::path out(out_dir);
    fs::create_directories(out);

    RunContext ctx;
    ctx.seed = request.seed;
    ctx.threads = threads;
    ctx.out_dir = out_dir;
    ctx.log = [&log](const std::string &m) { log(m); };
    const RandomStream root(request.seed);
    std::vector<std::string> files;
    auto emit = [&](const ResultTable &t, const std::string &name) {
        if (t.empty())
            return;
        emit_csv(t, (out / name).string());
        files.push_back(name);
    };
    auto input = [&request](const std::string &key) -> std::optional<std::string> {
        const auto it = request.inputs.find(key);
        if (it == request.inputs.end() || it->second.empty())
            return std::nullopt;
        return it->second;
    };

    const std::string &cmd = request.command;
    if (cmd == "tables")
    {
        const std::string clr_name = "clr_L" + std::to_string(config.poly_order) + ".txt";
        std::ostringstream clr, mom;
        write_clr_table(clr, build_clr_table(config.poly_order));
        write_moment_table(mom, MomentTable(config.constellation, 2 * config.poly_order + 1));
        write_text(out / clr_name, clr.str());
        write_text(out / "moments.txt", mom.str());
        files = {clr_name, "moments.txt"};
    }
    else if (cmd == "oracle-check")
    {
        const std::size_t n = request.trials.value_or(200000);
        RandomStream crng = root.split("oracle-channel");
        const ChannelRealization ch = sample_channel(config, crng);
        const EffectiveChannelRow closed = effective_channel_row(ch.row(), config);
        RandomStream mrng = root.split("oracle-mc");
        const OracleEstimate mc = effective_channel_mc_oracle(ch.row(), config, n, mrng);
        std::optional<EffectiveChannelRow> exhaustive;
        const bool ideal_ue = std::all_of(config.ue_kappa.begin(), config.ue_kappa.end(), [](double k) { return k == 1.0; });
        if (ideal_ue && std::pow(static_cast<double>(config.constellation.size()), config.num_users) <= 1048576.0)
            exhaustive = effective_channel_exhaustive(ch.row(), config);
        ResultTable t({"user", "closed_re", "closed_im", "mc_re", "mc_im", "mc_std_error", "z_score", "exhaustive_re",
                       "exhaustive_im", "exhaustive_abs_diff"});
        double worst_z = 0.0;
        for (Eigen::Index k = 0; k < closed.size(); ++k)
        {
            const cplx c = closed.values(k), m = mc.mean.values(k);
            const double se = mc.std_error(k);
            const double z = se > 0.0 ? std::abs(c - m) / se : (std::abs(c - m) == 0.0 ? 0.0 : INFINITY);
            worst_z = std::max(worst_z, z);
            const cplx e = exhaustive ? exhaustive->values(k) : cplx{NAN, NAN};
            t.append({static_cast<std::int64_t>(k), c.real(), c.imag(), m.real(), m.imag(), se, z, e.real(), e.imag(),
                      exhaustive ? std::abs(e - c) : NAN});
        }
        emit(t, "oracle.csv");
        log("oracle-check: max |closed - mc| / se = " + fmt_g(worst_z) + " over " + std::to_string(n) + " samples");
    }
    else if (cmd == "fit-lmmse")
    {
        RandomStream r = root.split("lmmse");
        const DaLmmseStatistics stats = fit_da_lmmse(config, request.trials.value_or(spec.stat_trials), r, threads);
        save_statistics(stats, (out / "lmmse_stats.json").string());
        files.push_back("lmmse_stats.json");
    }
    else if (cmd == "train")
    {
        const LargeScaleProfile profile = spec.random_snr_training ? cdf_profile(spec) : LargeScaleProfile::fixed();
        RandomStream r = root.split("train");
        const TrainingResult res = train(config, profile, spec.train_samples, spec.val_samples, spec.training, r,
                                         [&log](const EpochRecord &e) {
                                             char buf[128];
                                             std::snprintf(buf, sizeof buf, "epoch %d train %.4g val %.4g lr %.3g",
                                                           e.epoch, e.train_mse, e.val_mse, e.learning_rate);
                                             log(buf);
                                         });
        save_model((out / "model.json").string(), res.estimator, &res.log);
        files.push_back("model.json");
        ResultTable t = make_training_table();
        for (const auto &e : res.log.epochs)
            t.append({std::string("train"), profile.describe(), std::int64_t{e.epoch}, e.train_mse, e.val_mse,
                      e.learning_rate, static_cast<std::int64_t>(request.seed)});
        emit(t, "training_log.csv");
    }
    else if (cmd == "eval")
    {
        std::optional<DaLmmseStatistics> stats;
        if (spec.uses(kDaLmmse))
        {
            if (const auto p = input("stats"))
            {
                stats = load_statistics(*p);
                if (stats->fingerprint != config.fingerprint())
                    throw std::runtime_error("statistics file '" + *p + "' was fitted for another configuration");
            }
            else
            {
                RandomStream r = root.split("lmmse");
                stats = fit_da_lmmse(config, spec.stat_trials, r, threads);
            }
        }
        std::optional<NeuralEstimator> nn;
        if (spec.uses(kNeural))
        {
            const auto p = input("model");
            if (!p)
                throw std::runtime_error("eval needs --model PATH when the network is among the estimators");
            nn = load_model(*p, config.num_users).estimator;
        }
        RandomStream r = root.split("eval");
        const TrialSet trials = generate_trials(config, request.trials.value_or(spec.eval_trials), r, threads);
        EstimatorSet set;
        set.da = stats ? &*stats : nullptr;
        set.du = spec.uses(kDuLmmse);
        set.nn = nn ? &*nn : nullptr;
        const auto reports = evaluate_estimators(config, trials, set, threads);
        ResultTable t = make_nmse_table();
        ResultTable per_user({"estimator", "user", "nmse", "nmse_db"});
        for (const auto &name : spec.estimators)
        {
            const NmseReport &rep = reports.at(name);
            t.append(nmse_row("eval", "config", NAN, NAN, name, rep, request.seed, config.fingerprint()));
            for (Eigen::Index k = 0; k < rep.per_user.size(); ++k)
                per_user.append({name, static_cast<std::int64_t>(k), rep.per_user(k), to_db(rep.per_user(k))});
        }
        emit(t, "eval.csv");
        emit(per_user, "eval_per_user.csv");
    }
    else if (cmd == "sweep")
    {
        if (request.trials)
            spec.eval_trials = *request.trials;
        if (const auto m = input("models"))
        {
            spec.model_dir = *m;
            spec.train_networks = false;
        }
        const SweepResult r = run_equal_snr(config, spec, ctx);
        emit(r.nmse, "sweep.csv");
        emit(r.training, "sweep_training.csv");
    }
    else if (cmd == "cdf")
    {
        if (request.trials)
            spec.cdf_trials = *request.trials;
        if (const auto m = input("models"))
        {
            spec.model_dir = *m;
            spec.train_networks = false;
        }
        const CdfResult r = run_random_snr_cdf(config, spec, ctx);
        emit(r.profiles, "cdf_profiles.csv");
        emit(r.cdf, "cdf.csv");
        emit(r.training, "cdf_training.csv");
    }
    else
        throw std::invalid_argument("unknown command '" + cmd + "'");

    // networks written during the run
    if (fs::exists(out / "models") && cmd != "eval")
    {
        std::vector<std::string> models;
        for (const auto &e : fs::directory_iterator(out / "models"))
            if (e.is_regular_file())
                models.push_back("models/" + e.path().filename().string());
        std::sort(models.begin(), models.end());
        files.insert(files.end(), models.begin(), models.end());
    }

    RunOutcome outcome;
    json outputs = json::array();
    for (const auto &name : files)
    {
        const fs::path p = out / name;
        OutputFile f{name, hash_file(p.string()), fs::file_size(p)};
        outputs.push_back({{"name", f.name}, {"hash", f.hash}, {"bytes", f.bytes}});
        outcome.outputs.push_back(std::move(f));
    }
    json inputs = json::object();
    for (const auto &[key, path] : request.inputs)
        if (!path.empty())
            inputs[key] = {{"path", fs::absolute(path).string()}, {"hash", hash_path(path)}};

    json m;
    m["format"] = kManifestFormat;
    m["version"] = kManifestVersion;
    m["command"] = request.command;
    m["seed"] = request.seed;
    m["threads"] = threads;
    m["deterministic"] = request.deterministic;
    m["trials"] = request.trials ? json(*request.trials) : json(nullptr);
    m["inputs"] = inputs;
    m["config_fingerprint"] = config.fingerprint();
    m["config_text"] = request.config_text;
    m["experiment"] = spec_to_json(spec);
    m["versions"] = {{"effchan", version_string()},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                     {"compiler", __VERSION__}};
    m["outputs"] = outputs;
    outcome.manifest_path = (out / "manifest.json").string();
    write_text(outcome.manifest_path, m.dump(2) + "\n");
    return outcome;
}

bool ReplayReport::ok() const
{
    if (entries.empty())
        return false;
    return std::all_of(entries.begin(), entries.end(), [](const ReplayEntry &e) { return e.matches(); });
}

ReplayReport replay(const std::string &manifest_path, const std::string &out_dir, const LogFn &log)
{
    std::ifstream in(manifest_path);
    if (!in)
        throw std::runtime_error("cannot open manifest '" + manifest_path + "'");
    json m;
    try
    {
        in >> m;
    }
    catch (const json::exception &e)
    {
        throw std::runtime_error("manifest '" + manifest_path + "' is corrupt: " + e.what());
    }
    if (m.value("format", "") != kManifestFormat || m.value("version", 0) != kManifestVersion)
        throw std::runtime_error("'" + manifest_path + "' is not a supported run manifest");

    RunRequest req;
    req.command = m.at("command").get<std::string>();
    req.config_text = m.at("config_text").get<std::string>();
    req.seed = m.at("seed").get<std::uint64_t>();
    if (!m.at("trials").is_null())
        req.trials = m.at("trials").get<std::size_t>();
    req.threads = 1;
    req.deterministic = true;
    for (const auto &[key, v] : m.at("inputs").items())
    {
        const std::string path = v.at("path").get<std::string>();
        if (!fs::exists(path) || hash_path(path) != v.at("hash").get<std::string>())
            throw std::runtime_error("replay input '" + key + "' (" + path + ") is missing or changed");
        req.inputs[key] = path;
    }
    if (fs::weakly_canonical(fs::path(out_dir)) == fs::weakly_canonical(fs::path(manifest_path).parent_path()))
        throw std::invalid_argument("replay needs an output directory different from the original run");

    const RunOutcome outcome = run_command(req, out_dir, log);
    ReplayReport report;
    report.command = req.command;
    for (const auto &o : m.at("outputs"))
    {
        ReplayEntry e;
        e.name = o.at("name").get<std::string>();
        e.expected = o.at("hash").get<std::string>();
        e.actual = "missing";
        for (const auto &f : outcome.outputs)
            if (f.name == e.name)
                e.actual = f.hash;
        report.entries.push_back(std::move(e));
    }
    for (const auto &f : outcome.outputs)
    {
        const bool known = std::any_of(report.entries.begin(), report.entries.end(),
                                       [&f](const ReplayEntry &e) { return e.name == f.name; });
        if (!known)
            report.entries.push_back({f.name, "absent", f.hash});
    }
    return report;
}

} // namespace effchan
