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

#include "effchan/model_io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace effchan
{

namespace
{

using nlohmann::json;

constexpr const char *kModelFormat = "effchan-mlp";

json vec_to_json(const Eigen::VectorXd &v)
{
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vec_from_json(const json &j, Eigen::Index expected, const std::string &what)
{
    const auto v = j.get<std::vector<double>>();
    if (static_cast<Eigen::Index>(v.size()) != expected)
        throw ModelFormatError("model file: '" + what + "' has " + std::to_string(v.size()) + " entries, expected " +
                               std::to_string(expected));
    return Eigen::Map<const Eigen::VectorXd>(v.data(), expected);
}

json flags_to_json(const std::vector<bool> &f)
{
    return json(std::vector<bool>(f.begin(), f.end()));
}

json standard_to_json(const StandardScaler &s)
{
    return {{"mean", vec_to_json(s.mean)}, {"stddev", vec_to_json(s.stddev)}, {"passthrough", flags_to_json(s.passthrough)}};
}

json minmax_to_json(const MinMaxScaler &s)
{
    return {{"min", vec_to_json(s.min)}, {"max", vec_to_json(s.max)}, {"passthrough", flags_to_json(s.passthrough)}};
}

StandardScaler standard_from_json(const json &j, Eigen::Index n, const std::string &what)
{
    StandardScaler s;
    s.mean = vec_from_json(j.at("mean"), n, what + ".mean");
    s.stddev = vec_from_json(j.at("stddev"), n, what + ".stddev");
    s.passthrough = j.at("passthrough").get<std::vector<bool>>();
    if (static_cast<Eigen::Index>(s.passthrough.size()) != n)
        throw ModelFormatError("model file: '" + what + ".passthrough' has the wrong length");
    return s;
}

MinMaxScaler minmax_from_json(const json &j, Eigen::Index n, const std::string &what)
{
    MinMaxScaler s;
    s.min = vec_from_json(j.at("min"), n, what + ".min");
    s.max = vec_from_json(j.at("max"), n, what + ".max");
    s.passthrough = j.at("passthrough").get<std::vector<bool>>();
    if (static_cast<Eigen::Index>(s.passthrough.size()) != n)
        throw ModelFormatError("model file: '" + what + ".passthrough' has the wrong length");
    return s;
}

json log_to_json(const TrainingLog &log)
{
    json epochs = json::array();
    for (const auto &e : log.epochs)
        epochs.push_back({{"epoch", e.epoch}, {"train_mse", e.train_mse}, {"val_mse", e.val_mse},
                          {"learning_rate", e.learning_rate}});
    const TrainingParams &p = log.params;
    return {{"seed", log.seed},
            {"params",
             {{"hidden", p.hidden},
              {"learning_rate", p.adam.learning_rate},
              {"beta1", p.adam.beta1},
              {"beta2", p.adam.beta2},
              {"epsilon", p.adam.epsilon},
              {"batch_size", p.batch_size},
              {"max_epochs", p.max_epochs},
              {"patience", p.patience},
              {"lr_decay", p.lr_decay},
              {"lr_patience", p.lr_patience},
              {"min_learning_rate", p.min_learning_rate},
              {"threads", p.threads}}},
            {"initial_val_mse", log.initial_val_mse},
            {"best_epoch", log.best_epoch},
            {"best_val_mse", log.best_val_mse},
            {"train_samples", log.train_samples},
            {"val_samples", log.val_samples},
            {"epochs", epochs}};
}

TrainingLog log_from_json(const json &j)
{
    TrainingLog log;
    log.seed = j.at("seed").get<std::uint64_t>();
    const json &p = j.at("params");
    log.params.hidden = p.at("hidden").get<std::vector<int>>();
    log.params.adam.learning_rate = p.at("learning_rate").get<double>();
    log.params.adam.beta1 = p.at("beta1").get<double>();
    log.params.adam.beta2 = p.at("beta2").get<double>();
    log.params.adam.epsilon = p.at("epsilon").get<double>();
    log.params.batch_size = p.at("batch_size").get<std::size_t>();
    log.params.max_epochs = p.at("max_epochs").get<int>();
    log.params.patience = p.at("patience").get<int>();
    log.params.lr_decay = p.at("lr_decay").get<double>();
    log.params.lr_patience = p.at("lr_patience").get<int>();
    log.params.min_learning_rate = p.at("min_learning_rate").get<double>();
    log.params.threads = p.at("threads").get<int>();
    log.initial_val_mse = j.at("initial_val_mse").get<double>();
    log.best_epoch = j.at("best_epoch").get<int>();
    log.best_val_mse = j.at("best_val_mse").get<double>();
    log.train_samples = j.at("train_samples").get<std::size_t>();
    log.val_samples = j.at("val_samples").get<std::size_t>();
    for (const auto &e : j.at("epochs"))
        log.epochs.push_back({e.at("epoch").get<int>(), e.at("train_mse").get<double>(), e.at("val_mse").get<double>(),
                              e.at("learning_rate").get<double>()});
    return log;
}

} // namespace

std::string serialize_model(const NeuralEstimator &est, const TrainingLog *log)
{
    const MlpModel &net = est.model;
    if (net.layers.empty())
        throw std::invalid_argument("serialize_model: network has no layers");
    const int K = est.scalers.num_users;
    if (net.input_dim() != 3 * K || net.output_dim() != 2 * K)
        throw std::invalid_argument("serialize_model: network and scalers disagree on K");

    json layers = json::array();
    for (const auto &l : net.layers)
    {
        std::vector<float> w;
        w.reserve(static_cast<std::size_t>(l.weights.size()));
        for (Eigen::Index i = 0; i < l.weights.rows(); ++i)
            for (Eigen::Index c = 0; c < l.weights.cols(); ++c)
                w.push_back(l.weights(i, c));
        layers.push_back({{"rows", l.weights.rows()},
                          {"cols", l.weights.cols()},
                          {"relu", l.relu},
                          {"weights", w},
                          {"bias", std::vector<float>(l.bias.data(), l.bias.data() + l.bias.size())}});
    }

    json j;
    j["format"] = kModelFormat;
    j["version"] = model_format_version;
    j["scalar"] = "float32";
    j["num_users"] = K;
    j["widths"] = net.widths();
    j["fingerprint"] = est.fingerprint;
    j["layers"] = std::move(layers);
    j["scalers"] = {{"iq", standard_to_json(est.scalers.iq)},
                    {"power", minmax_to_json(est.scalers.power)},
                    {"targets", standard_to_json(est.scalers.targets)},
                    {"fitted_on", est.scalers.fitted_on},
                    {"warnings", est.scalers.warnings}};
    if (log)
        j["training"] = log_to_json(*log);
    return j.dump() + "\n";
}

void save_model(const std::string &path, const NeuralEstimator &est, const TrainingLog *log)
{
    const std::string text = serialize_model(est, log);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write model file '" + path + "'");
    out << text;
    if (!out)
        throw std::runtime_error("failed writing model file '" + path + "'");
}

ModelFile parse_model(const std::string &text, int expected_users)
{
    json j;
    try
    {
        j = json::parse(text);
    }
    catch (const json::exception &e)
    {
        throw ModelFormatError(std::string("model file is corrupt: ") + e.what());
    }
    if (!j.is_object() || j.value("format", "") != kModelFormat)
        throw ModelFormatError("not an effchan model file");
    const int version = j.value("version", -1);
    if (version != model_format_version)
        throw ModelFormatError("unsupported model file version " + std::to_string(version) + " (expected " +
                               std::to_string(model_format_version) + ")");

    ModelFile out;
    try
    {
        const int K = j.at("num_users").get<int>();
        if (K < 1)
            throw ModelFormatError("model file: num_users must be positive");
        if (expected_users > 0 && K != expected_users)
            throw ModelFormatError("model dimension mismatch: network was trained for K=" + std::to_string(K) +
                                   " users, configuration has K=" + std::to_string(expected_users));
        const auto widths = j.at("widths").get<std::vector<int>>();
        if (widths.size() < 2 || widths.front() != 3 * K || widths.back() != 2 * K)
            throw ModelFormatError("model file: widths do not match 3K inputs and 2K outputs");

        MlpModel net(widths);
        const json &layers = j.at("layers");
        if (layers.size() != net.layers.size())
            throw ModelFormatError("model file: layer count does not match widths");
        for (std::size_t p = 0; p < net.layers.size(); ++p)
        {
            auto &l = net.layers[p];
            const json &jl = layers[p];
            if (jl.at("rows").get<Eigen::Index>() != l.weights.rows() ||
                jl.at("cols").get<Eigen::Index>() != l.weights.cols())
                throw ModelFormatError("model file: layer " + std::to_string(p) + " shape does not match widths");
            l.relu = jl.at("relu").get<bool>();
            const auto w = jl.at("weights").get<std::vector<float>>();
            const auto b = jl.at("bias").get<std::vector<float>>();
            if (static_cast<Eigen::Index>(w.size()) != l.weights.size() ||
                static_cast<Eigen::Index>(b.size()) != l.bias.size())
                throw ModelFormatError("model file: layer " + std::to_string(p) + " parameter count is wrong");
            std::size_t idx = 0;
            for (Eigen::Index i = 0; i < l.weights.rows(); ++i)
                for (Eigen::Index c = 0; c < l.weights.cols(); ++c)
                    l.weights(i, c) = w[idx++];
            l.bias = Eigen::Map<const VectorT<float>>(b.data(), l.bias.size());
        }
        out.estimator.model = std::move(net);
        out.estimator.fingerprint = j.at("fingerprint").get<std::string>();

        const json &s = j.at("scalers");
        ScalerSet &sc = out.estimator.scalers;
        sc.num_users = K;
        sc.iq = standard_from_json(s.at("iq"), 2 * K, "scalers.iq");
        sc.power = minmax_from_json(s.at("power"), K, "scalers.power");
        sc.targets = standard_from_json(s.at("targets"), 2 * K, "scalers.targets");
        sc.fitted_on = s.at("fitted_on").get<std::string>();
        sc.warnings = s.at("warnings").get<std::vector<std::string>>();

        if (j.contains("training"))
            out.log = log_from_json(j.at("training"));
    }
    catch (const json::exception &e)
    {
        throw ModelFormatError(std::string("model file is corrupt: ") + e.what());
    }
    return out;
}

ModelFile load_model(const std::string &path, int expected_users)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ModelFormatError("cannot open model file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str(), expected_users);
}

} // namespace effchan
