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

#include "effchan/csv.hpp"
#include "effchan/harness.hpp"

#include "helpers.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace effchan;
namespace fs = std::filesystem;

namespace
{

const char *kSmallConfig = R"(num_users: 2
poly_order: 3
backoff_db: 7
noise_power: 1.0
pilot_len: 2
rng_seed: 5
constellation: qpsk
amplifier:
  coefficients: [[1.0, 0.0], [-0.35, 0.12], [0.20, -0.06], [-0.05, 0.015]]
users:
  kappa: 0.98
  power: 1.0
  large_scale: 10.0
experiment:
  snr_db: [5, 20]
  kappa: [1.0, 0.9]
  stat_trials: 3000
  eval_trials: 3000
  cdf:
    profiles: 6
    trials: 400
    snr_min: 0.1
    snr_max: 100
training:
  train_samples: 2000
  val_samples: 400
  hidden: [16, 16]
  batch_size: 256
  max_epochs: 2
)";

std::string scratch(const std::string &name)
{
    const fs::path p = fs::path(::testing::TempDir()) / ("effchan_harness_" + name);
    fs::remove_all(p);
    return p.string();
}

double cell(const ParsedCsv &csv, std::size_t row, const std::string &col)
{
    for (std::size_t i = 0; i < csv.header.size(); ++i)
        if (csv.header[i] == col)
            return std::stod(csv.rows[row][i]);
    throw std::out_of_range(col);
}

std::string text_cell(const ParsedCsv &csv, std::size_t row, const std::string &col)
{
    for (std::size_t i = 0; i < csv.header.size(); ++i)
        if (csv.header[i] == col)
            return csv.rows[row][i];
    throw std::out_of_range(col);
}

} // namespace

TEST(ExperimentSpec, ParsesSections)
{
    const ExperimentSpec s = load_experiment(kSmallConfig);
    EXPECT_EQ(s.snr_db, (std::vector<double>{5, 20}));
    EXPECT_EQ(s.kappas, (std::vector<double>{1.0, 0.9}));
    EXPECT_EQ(s.stat_trials, 3000u);
    EXPECT_EQ(s.cdf_profiles, 6u);
    EXPECT_EQ(s.cdf_trials, 400u);
    EXPECT_EQ(s.training.hidden, (std::vector<int>{16, 16}));
    EXPECT_EQ(s.training.batch_size, 256u);
    EXPECT_TRUE(s.uses(kNeural));
}

TEST(ExperimentSpec, DefaultsWithoutSections)
{
    const ExperimentSpec s = load_experiment("num_users: 1\n");
    EXPECT_EQ(s.snr_db.size(), 5u);
    EXPECT_EQ(s.train_samples, 300000u);
    EXPECT_EQ(s.training.hidden, (std::vector<int>{300, 300}));
}

TEST(ExperimentSpec, ErrorsNameTheField)
{
    try
    {
        (void)load_experiment("experiment:\n  estimators: [da-lmmse, magic]\n");
        FAIL();
    }
    catch (const ConfigError &e)
    {
        EXPECT_EQ(e.field(), "experiment.estimators");
    }
    try
    {
        (void)load_experiment("training:\n  batch_size: 0\n");
        FAIL();
    }
    catch (const ConfigError &e)
    {
        EXPECT_EQ(e.field(), "training.batch_size");
    }
    EXPECT_THROW((void)load_experiment("experiment:\n  kappa: [1.5]\n"), ConfigError);
    EXPECT_THROW((void)load_experiment("experiment:\n  snr_db: fast\n"), ConfigError);
}

TEST(ResultTable, FormatsAndParses)
{
    ResultTable t({"name", "count", "value"});
    t.append({std::string("plain"), std::int64_t{3}, 0.125});
    t.append({std::string("with,comma \"q\""), std::int64_t{-1}, std::numeric_limits<double>::quiet_NaN()});
    EXPECT_THROW(t.append({std::string("short")}), std::invalid_argument);
    const std::string text = format_csv(t);
    EXPECT_EQ(text, "name,count,value\nplain,3,0.125\n\"with,comma \"\"q\"\"\",-1,nan\n");
    const ParsedCsv back = parse_csv(text);
    EXPECT_EQ(back.header, t.columns());
    ASSERT_EQ(back.rows.size(), 2u);
    EXPECT_EQ(back.rows[1][0], "with,comma \"q\"");
    EXPECT_EQ(t.column_index("value"), 2u);
}

TEST(ResultTable, EmptyTableIsRejectedWithoutAFile)
{
    const std::string dir = scratch("empty");
    fs::create_directories(dir);
    const ResultTable t({"a"});
    EXPECT_THROW(emit_csv(t, dir + "/x.csv"), std::invalid_argument);
    EXPECT_FALSE(fs::exists(dir + "/x.csv"));
}

TEST(ResultTable, SignificantDigits)
{
    EXPECT_EQ(format_cell(1.0 / 3.0), "0.333333");
    EXPECT_EQ(format_cell(-INFINITY), "-inf");
    EXPECT_EQ(format_cell(std::int64_t{42}), "42");
}

TEST(Sweep, SmallRunOrdersImpairments)
{
    const SystemConfig c = load_config(kSmallConfig);
    ExperimentSpec s = load_experiment(kSmallConfig);
    s.estimators = {kDaLmmse, kDuLmmse};
    RunContext ctx;
    ctx.seed = 11;
    const SweepResult r = run_equal_snr(c, s, ctx);
    ASSERT_EQ(r.nmse.size(), 2u * 2u * 2u);
    EXPECT_TRUE(r.training.empty());
    const ParsedCsv csv = parse_csv(format_csv(r.nmse));
    // rows: snr-major, then kappa, then estimator
    for (std::size_t si = 0; si < 2; ++si)
        for (std::size_t e = 0; e < 2; ++e)
        {
            const std::size_t ideal = si * 4 + e, impaired = si * 4 + 2 + e;
            EXPECT_EQ(text_cell(csv, ideal, "estimator"), text_cell(csv, impaired, "estimator"));
            EXPECT_GT(cell(csv, impaired, "nmse"), cell(csv, ideal, "nmse"));
            EXPECT_NEAR(cell(csv, ideal, "nmse_db"), 10.0 * std::log10(cell(csv, ideal, "nmse")), 1e-4);
        }
    // more SNR, lower error for the same estimator and kappa
    EXPECT_LT(cell(csv, 4, "nmse"), cell(csv, 0, "nmse"));
}

TEST(Sweep, WorkerCountDoesNotChangeTables)
{
    const SystemConfig c = load_config(kSmallConfig);
    const ExperimentSpec s = load_experiment(kSmallConfig);
    RunContext one, many;
    one.seed = many.seed = 12;
    many.threads = 4;
    const SweepResult a = run_equal_snr(c, s, one);
    const SweepResult b = run_equal_snr(c, s, many);
    EXPECT_EQ(format_csv(a.nmse), format_csv(b.nmse));
    EXPECT_EQ(format_csv(a.training), format_csv(b.training));
}

TEST(Cdf, SortedQuantilesPerEstimator)
{
    const SystemConfig c = load_config(kSmallConfig);
    ExperimentSpec s = load_experiment(kSmallConfig);
    RunContext ctx;
    ctx.seed = 13;
    const CdfResult r = run_random_snr_cdf(c, s, ctx);
    EXPECT_EQ(r.profiles.size(), 2u * 6u * 3u);
    const ParsedCsv cdf = parse_csv(format_csv(r.cdf));
    ASSERT_EQ(cdf.rows.size(), 2u * 3u * 6u);
    for (std::size_t block = 0; block < 6; ++block)
        for (std::size_t j = 0; j < 6; ++j)
        {
            const std::size_t row = block * 6 + j;
            EXPECT_NEAR(cell(cdf, row, "quantile"), double(j + 1) / 6.0, 1e-6);
            if (j > 0)
                EXPECT_GE(cell(cdf, row, "nmse_db"), cell(cdf, row - 1, "nmse_db"));
        }
    EXPECT_FALSE(r.training.empty());
}

TEST(Cdf, NarrowProfileMatchesEqualSnrPoint)
{
    // a random-SNR profile squeezed onto one SNR is an equal-SNR point with its own draws
    const SystemConfig c = load_config(kSmallConfig);
    ExperimentSpec s = load_experiment(kSmallConfig);
    s.estimators = {kDuLmmse};
    s.cdf_snr_min = s.cdf_snr_max = 100.0;
    s.cdf_profiles = 1;
    s.cdf_trials = 20000;
    s.snr_db = {20.0};
    s.kappas = {0.98};
    s.eval_trials = 20000;
    RunContext ctx;
    ctx.seed = 14;
    const ParsedCsv a = parse_csv(format_csv(run_random_snr_cdf(c, s, ctx).profiles));
    const ParsedCsv b = parse_csv(format_csv(run_equal_snr(c, s, ctx).nmse));
    const double se = std::hypot(cell(a, 0, "std_error"), cell(b, 0, "std_error"));
    EXPECT_LT(std::abs(cell(a, 0, "nmse") - cell(b, 0, "nmse")), 3.0 * se);
    EXPECT_NEAR(cell(a, 0, "min_snr_db"), 20.0, 1e-9);
}

TEST(Sweep, StandardErrorScalesWithTrials)
{
    const SystemConfig c = load_config(kSmallConfig);
    ExperimentSpec s = load_experiment(kSmallConfig);
    s.estimators = {kDuLmmse};
    s.snr_db = {10.0};
    s.kappas = {0.98};
    RunContext ctx;
    ctx.seed = 15;
    const std::size_t se_col = make_nmse_table().column_index("std_error");
    s.eval_trials = 4000;
    const double a = std::get<double>(run_equal_snr(c, s, ctx).nmse.rows()[0][se_col]);
    s.eval_trials = 16000;
    const double b = std::get<double>(run_equal_snr(c, s, ctx).nmse.rows()[0][se_col]);
    EXPECT_NEAR(b / a, 0.5, 0.1);
}

TEST(RunCommand, ReplayIsByteIdentical)
{
    const std::string first = scratch("run"), second = scratch("replay");
    RunRequest req;
    req.command = "sweep";
    req.config_text = kSmallConfig;
    req.seed = 16;
    req.threads = 2;
    const RunOutcome out = run_command(req, first);
    ASSERT_TRUE(fs::exists(out.manifest_path));
    std::vector<std::string> names;
    for (const auto &o : out.outputs)
        names.push_back(o.name);
    EXPECT_NE(std::find(names.begin(), names.end(), "sweep.csv"), names.end());
    EXPECT_NE(std::find(names.begin(), names.end(), "models/sweep_snr20_kappa0.9.json"), names.end());

    const ReplayReport rep = replay(out.manifest_path, second);
    EXPECT_TRUE(rep.ok());
    EXPECT_EQ(rep.entries.size(), out.outputs.size());
    for (const auto &e : rep.entries)
        EXPECT_TRUE(e.matches()) << e.name;
    EXPECT_EQ(test::read_text(first + "/sweep.csv"), test::read_text(second + "/sweep.csv"));
    EXPECT_THROW((void)replay(out.manifest_path, first), std::invalid_argument);
}

TEST(RunCommand, TablesMatchGoldenFile)
{
    const std::string dir = scratch("tables");
    RunRequest req;
    req.command = "tables";
    req.config_text = kSmallConfig;
    (void)run_command(req, dir);
    std::istringstream produced(test::read_text(dir + "/clr_L3.txt"));
    std::istringstream golden(test::read_text(std::string(EFFCHAN_TEST_DATA) + "/clr_L3.txt"));
    EXPECT_EQ(read_clr_table(produced), read_clr_table(golden));
}

TEST(RunCommand, EvalNeedsAModel)
{
    RunRequest req;
    req.command = "eval";
    req.config_text = kSmallConfig;
    EXPECT_THROW((void)run_command(req, scratch("eval")), std::runtime_error);
}

TEST(RunCommand, TrainThenEvalWithWrongUserCount)
{
    const std::string dir = scratch("train");
    RunRequest req;
    req.command = "train";
    req.config_text = kSmallConfig;
    (void)run_command(req, dir);
    ASSERT_TRUE(fs::exists(dir + "/model.json"));
    ASSERT_TRUE(fs::exists(dir + "/training_log.csv"));

    std::string three = kSmallConfig;
    three.replace(three.find("num_users: 2"), 12, "num_users: 3");
    three.replace(three.find("pilot_len: 2"), 12, "pilot_len: 3");
    RunRequest ev;
    ev.command = "eval";
    ev.config_text = three;
    ev.inputs["model"] = dir + "/model.json";
    try
    {
        (void)run_command(ev, scratch("eval3"));
        FAIL();
    }
    catch (const std::exception &e)
    {
        EXPECT_NE(std::string(e.what()).find("dimension mismatch"), std::string::npos);
    }
}

TEST(RunCommand, UnknownCommand)
{
    RunRequest req;
    req.command = "frobnicate";
    req.config_text = kSmallConfig;
    EXPECT_THROW((void)run_command(req, scratch("unknown")), std::invalid_argument);
}

TEST(Hashing, FnvOfKnownContent)
{
    const std::string path = scratch("hash.txt");
    std::ofstream(path) << "a";
    // 64-bit FNV-1a of "a"
    EXPECT_EQ(hash_file(path), "af63dc4c8601ec8c");
}
