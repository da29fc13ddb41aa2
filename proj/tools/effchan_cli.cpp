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
#include "effchan/harness.hpp"
#include "effchan/impairments.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace
{

struct CommonOptions
{
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::string out = "effchan-out";
    int threads = 1;
    bool deterministic = false;
    bool quiet = false;
};

void add_common(CLI::App *cmd, CommonOptions &o, bool needs_config = true)
{
    auto *c = cmd->add_option("--config", o.config, "configuration file (YAML)")->check(CLI::ExistingFile);
    if (needs_config)
        c->required();
    cmd->add_option("--seed", o.seed, "64-bit seed; defaults to rng_seed from the configuration");
    cmd->add_option("--trials", o.trials, "trial count override for the command")->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out, "output directory")->capture_default_str();
    cmd->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_flag("--deterministic", o.deterministic, "single-threaded, bit-reproducible mode");
    cmd->add_flag("-q,--quiet", o.quiet, "suppress progress messages");
}

std::string read_file(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

effchan::LogFn make_log(bool quiet)
{
    if (quiet)
        return {};
    return [](const std::string &m) { std::cerr << m << std::endl; };
}

void print_outcome(const effchan::RunOutcome &o)
{
    for (const auto &f : o.outputs)
        std::cout << f.name << "  " << f.hash << "  " << f.bytes << " bytes\n";
    std::cout << "manifest: " << o.manifest_path << "\n";
}

int validate(const CommonOptions &o)
{
    const std::string text = read_file(o.config);
    const effchan::SystemConfig c = effchan::load_config(text);
    const effchan::ExperimentSpec spec = effchan::load_experiment(text);
    const effchan::ScaledPolynomial poly = effchan::scale_coefficients(c, 0);
    std::cout << "valid configuration\n"
              << "  fingerprint       " << c.fingerprint() << "\n"
              << "  users K           " << c.num_users << "\n"
              << "  poly order L      " << c.poly_order << "\n"
              << "  pilot length      " << c.pilot_len << "\n"
              << "  constellation     " << c.constellation.name() << " (" << c.constellation.size() << " points)\n"
              << "  backoff           " << c.backoff_db << " dB\n"
              << "  amplifier input   " << poly.input_power << "\n";
    for (std::size_t l = 0; l < poly.coeffs.size(); ++l)
        std::cout << "  scaled a~_" << l << "        " << poly.coeffs[l].real() << " " << std::showpos
                  << poly.coeffs[l].imag() << std::noshowpos << "j\n";
    std::cout << "  estimators        ";
    for (std::size_t i = 0; i < spec.estimators.size(); ++i)
        std::cout << (i ? " " : "") << spec.estimators[i];
    std::cout << "\n  sweep points      " << spec.snr_db.size() * spec.kappas.size() << "\n"
              << "  cdf profiles      " << spec.cdf_profiles << " x " << spec.cdf_trials << " trials\n";
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"effchan: effective-channel estimation for impaired multi-user MIMO uplinks"};
    app.require_subcommand(1);
    app.set_version_flag("--version", effchan::version_string());

    CommonOptions opt;
    std::string model, stats, models, manifest;

    auto *validate_cmd = app.add_subcommand("validate-config", "check a configuration and print derived values");
    add_common(validate_cmd, opt);
    auto *tables = app.add_subcommand("tables", "write the c_lr and constellation-moment golden files");
    add_common(tables, opt);
    auto *oracle = app.add_subcommand("oracle-check", "closed-form effective channel vs Monte-Carlo and exhaustive oracles");
    add_common(oracle, opt);
    auto *fit = app.add_subcommand("fit-lmmse", "fit distortion-aware LMMSE statistics for the configured profile");
    add_common(fit, opt);
    auto *train = app.add_subcommand("train", "train the neural estimator");
    add_common(train, opt);
    auto *eval = app.add_subcommand("eval", "evaluate estimators on fresh trials of the configured profile");
    add_common(eval, opt);
    eval->add_option("--model", model, "trained network file")->check(CLI::ExistingFile);
    eval->add_option("--stats", stats, "LMMSE statistics file (fitted when absent)")->check(CLI::ExistingFile);
    auto *sweep = app.add_subcommand("sweep", "equal-SNR NMSE sweep over SNR and kappa");
    add_common(sweep, opt);
    sweep->add_option("--models", models, "load networks from this directory instead of training")
        ->check(CLI::ExistingDirectory);
    auto *cdf = app.add_subcommand("cdf", "random-SNR NMSE distribution");
    add_common(cdf, opt);
    cdf->add_option("--models", models, "load networks from this directory instead of training")
        ->check(CLI::ExistingDirectory);
    auto *replay = app.add_subcommand("replay", "re-run a manifest and compare every output byte for byte");
    add_common(replay, opt, false);
    replay->add_option("manifest", manifest, "manifest.json of the original run")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);
    CLI::App *cmd = app.get_subcommands().front();
    const std::string name = cmd->get_name();

    try
    {
        if (name == "validate-config")
            return validate(opt);
        if (name == "replay")
        {
            const effchan::ReplayReport r = effchan::replay(manifest, opt.out, make_log(opt.quiet));
            for (const auto &e : r.entries)
                std::cout << (e.matches() ? "MATCH    " : "MISMATCH ") << e.name << "  " << e.expected << "  "
                          << e.actual << "\n";
            std::cout << (r.ok() ? "replay reproduced every output\n" : "replay FAILED\n");
            return r.ok() ? 0 : 3;
        }

        effchan::RunRequest req;
        req.command = name;
        req.config_text = read_file(opt.config);
        req.seed = opt.seed ? *opt.seed : effchan::load_config(req.config_text).rng_seed;
        req.trials = opt.trials;
        req.threads = opt.threads;
        req.deterministic = opt.deterministic;
        if (!model.empty())
            req.inputs["model"] = model;
        if (!stats.empty())
            req.inputs["stats"] = stats;
        if (!models.empty())
            req.inputs["models"] = models;
        print_outcome(effchan::run_command(req, opt.out, make_log(opt.quiet)));
        return 0;
    }
    catch (const effchan::ConfigError &e)
    {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
