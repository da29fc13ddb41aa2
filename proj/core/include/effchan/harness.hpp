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

#ifndef EFFCHAN_HARNESS_HPP
#define EFFCHAN_HARNESS_HPP

#include "effchan/config.hpp"
#include "effchan/csv.hpp"
#include "effchan/estimators.hpp"
#include "effchan/training.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace effchan
{

inline constexpr const char *kDaLmmse = "da-lmmse";
inline constexpr const char *kDuLmmse = "du-lmmse";
inline constexpr const char *kNeural = "nn";

// Experiment and training settings; read from the `experiment:` and `training:` sections of a config document.
struct ExperimentSpec
{
    // equal-SNR sweep
    std::vector<double> snr_db{0.0, 5.0, 10.0, 15.0, 20.0};
    std::vector<double> kappas{1.0, 0.98};
    std::size_t stat_trials = 20000;
    std::size_t eval_trials = 20000;
    bool per_point_networks = true; // false: one network per kappa over the SNR range of the grid

    // random-SNR CDF: sqrt(snr_k) ~ U[sqrt(snr_min), sqrt(snr_max)], linear SNRs
    std::size_t cdf_profiles = 100;
    std::size_t cdf_trials = 2000;
    double cdf_snr_min = 0.1;
    double cdf_snr_max = 100.0;

    std::vector<std::string> estimators{kDaLmmse, kDuLmmse, kNeural};

    // networks
    std::size_t train_samples = 300000;
    std::size_t val_samples = 30000;
    TrainingParams training;
    bool random_snr_training = false; // `train` subcommand: fixed profile or the CDF distribution
    bool train_networks = true;       // false: load every network from model_dir
    std::string model_dir;

    // Throws ConfigError naming the offending field.
    void validate() const;
    [[nodiscard]] bool uses(const std::string &estimator) const;
};

// Missing sections and keys keep their defaults.
ExperimentSpec load_experiment(const std::string &yaml_text);

using LogFn = std::function<void(const std::string &)>;

struct RunContext
{
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out_dir; // networks are saved under out_dir/models when set
    LogFn log;
};

// Held trials of one large-scale profile: truth rows with their pilot observations.
struct TrialSet
{
    std::vector<EffectiveChannelRow> truth;
    std::vector<PilotObservation> obs;
    [[nodiscard]] std::size_t size() const { return truth.size(); }
};

TrialSet generate_trials(const SystemConfig &config, std::size_t n, RandomStream &rng, int threads = 1);
DaLmmseStatistics fit_da_lmmse(const SystemConfig &config, const TrialSet &trials);

struct EstimatorSet
{
    const DaLmmseStatistics *da = nullptr;
    bool du = false;
    const NeuralEstimator *nn = nullptr;
};

std::map<std::string, NmseReport> evaluate_estimators(const SystemConfig &config, const TrialSet &trials,
                                                      const EstimatorSet &estimators, int threads = 1);

// Column layout shared by every NMSE table.
ResultTable make_nmse_table();
ResultTable make_training_table();

struct SweepResult
{
    ResultTable nmse = make_nmse_table();
    ResultTable training = make_training_table();
};

struct CdfResult
{
    ResultTable profiles; // one NMSE row per (kappa, profile, estimator)
    ResultTable cdf;      // per (kappa, estimator): NMSE samples sorted ascending with empirical quantiles
    ResultTable training = make_training_table();
};

SweepResult run_equal_snr(const SystemConfig &base, const ExperimentSpec &spec, const RunContext &ctx);
CdfResult run_random_snr_cdf(const SystemConfig &base, const ExperimentSpec &spec, const RunContext &ctx);

// One CLI invocation, everything needed to reproduce it.
struct RunRequest
{
    std::string command;
    std::string config_text;
    std::uint64_t seed = 0;
    std::optional<std::size_t> trials;
    int threads = 1;
    bool deterministic = false;
    std::map<std::string, std::string> inputs; // named input files, e.g. "model", "stats"
};

struct OutputFile
{
    std::string name; // relative to the output directory
    std::string hash;
    std::uintmax_t bytes = 0;
};

struct RunOutcome
{
    std::vector<OutputFile> outputs;
    std::string manifest_path;
};

// Commands: tables, oracle-check, fit-lmmse, train, eval, sweep, cdf. Writes outputs plus manifest.json.
RunOutcome run_command(const RunRequest &request, const std::string &out_dir, const LogFn &log = {});

struct ReplayEntry
{
    std::string name;
    std::string expected;
    std::string actual;
    [[nodiscard]] bool matches() const { return expected == actual; }
};

struct ReplayReport
{
    std::string command;
    std::vector<ReplayEntry> entries;
    [[nodiscard]] bool ok() const;
};

// Re-runs the manifest's command single-threaded into out_dir and compares every recorded output hash.
ReplayReport replay(const std::string &manifest_path, const std::string &out_dir, const LogFn &log = {});

// 64-bit FNV-1a of the file contents, 16 hex digits.
std::string hash_file(const std::string &path);

std::string version_string();

} // namespace effchan

#endif
