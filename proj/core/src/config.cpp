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

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace effchan
{

namespace
{

std::string hex64(std::uint64_t h)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::uint64_t fnv1a(const std::string &s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s)
    {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string exact(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

std::string decimal(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <typename T>
T scalar(const YAML::Node &node, const std::string &field)
{
    try
    {
        return node.as<T>();
    }
    catch (const YAML::Exception &)
    {
        throw ConfigError(field, "expected a scalar of the right type");
    }
}

cplx complex_pair(const YAML::Node &node, const std::string &field)
{
    if (node.IsScalar())
        return {scalar<double>(node, field), 0.0};
    if (!node.IsSequence() || node.size() != 2)
        throw ConfigError(field, "complex numbers are written as [re, im]");
    return {scalar<double>(node[0], field + "[0]"), scalar<double>(node[1], field + "[1]")};
}

std::vector<cplx> complex_list(const YAML::Node &node, const std::string &field)
{
    if (!node.IsSequence())
        throw ConfigError(field, "expected a list of [re, im] pairs");
    std::vector<cplx> out;
    for (std::size_t i = 0; i < node.size(); ++i)
        out.push_back(complex_pair(node[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

// A scalar broadcasts to all K users; a list must have exactly K entries.
std::vector<double> per_user(const YAML::Node &node, int K, const std::string &field)
{
    if (!node)
        throw ConfigError(field, "missing");
    if (node.IsScalar())
        return std::vector<double>(static_cast<std::size_t>(K), scalar<double>(node, field));
    if (!node.IsSequence())
        throw ConfigError(field, "expected a number or a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < node.size(); ++i)
        out.push_back(scalar<double>(node[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

void append_complex_list(std::ostringstream &os, const std::vector<cplx> &v)
{
    os << "[";
    for (std::size_t i = 0; i < v.size(); ++i)
        os << (i ? ", " : "") << "[" << decimal(v[i].real()) << ", " << decimal(v[i].imag()) << "]";
    os << "]";
}

void append_list(std::ostringstream &os, const std::vector<double> &v)
{
    os << "[";
    for (std::size_t i = 0; i < v.size(); ++i)
        os << (i ? ", " : "") << decimal(v[i]);
    os << "]";
}

} // namespace

const std::vector<cplx> &SystemConfig::coefficients(std::size_t antenna) const
{
    if (antenna < antenna_coefficients.size())
        return antenna_coefficients[antenna];
    return ref_coefficients;
}

double SystemConfig::backoff_linear() const
{
    return std::pow(10.0, backoff_db / 10.0);
}

double SystemConfig::received_power() const
{
    double s = 0.0;
    for (std::size_t k = 0; k < large_scale.size() && k < ue_power.size(); ++k)
        s += large_scale[k] * ue_power[k];
    return s;
}

void SystemConfig::validate() const
{
    if (num_users < 1)
        throw ConfigError("num_users", "must be a positive integer");
    if (poly_order < 0)
        throw ConfigError("poly_order", "must be non-negative");
    const auto K = static_cast<std::size_t>(num_users);
    const auto ncoef = static_cast<std::size_t>(poly_order) + 1;
    if (ref_coefficients.size() != ncoef)
        throw ConfigError("amplifier.coefficients", "expected poly_order + 1 = " + std::to_string(ncoef) +
                                                        " entries, got " + std::to_string(ref_coefficients.size()));
    for (std::size_t m = 0; m < antenna_coefficients.size(); ++m)
        if (antenna_coefficients[m].size() != ncoef)
            throw ConfigError("amplifier.antennas[" + std::to_string(m) + "]",
                              "expected poly_order + 1 = " + std::to_string(ncoef) + " entries");
    if (!std::isfinite(backoff_db))
        throw ConfigError("backoff_db", "must be finite");
    if (!(noise_power > 0.0) || !std::isfinite(noise_power))
        throw ConfigError("noise_power", "must be positive");

    auto check_list = [K](const std::vector<double> &v, const std::string &name) {
        if (v.size() != K)
            throw ConfigError(name, "expected " + std::to_string(K) + " entries, got " + std::to_string(v.size()));
    };
    check_list(ue_kappa, "users.kappa");
    check_list(ue_power, "users.power");
    check_list(large_scale, "users.large_scale");
    for (std::size_t k = 0; k < K; ++k)
    {
        const std::string idx = "[" + std::to_string(k) + "]";
        if (!(ue_kappa[k] >= 0.0 && ue_kappa[k] <= 1.0))
            throw ConfigError("users.kappa" + idx, "must lie in [0, 1]");
        if (!(ue_power[k] > 0.0) || !std::isfinite(ue_power[k]))
            throw ConfigError("users.power" + idx, "must be positive");
        if (!(large_scale[k] > 0.0) || !std::isfinite(large_scale[k]))
            throw ConfigError("users.large_scale" + idx, "must be positive");
    }
    if (pilot_len < num_users)
        throw ConfigError("pilot_len", "must be at least num_users (" + std::to_string(num_users) + ")");
}

std::string SystemConfig::fingerprint() const
{
    std::ostringstream os;
    os << "K=" << num_users << ";L=" << poly_order << ";a=";
    for (const cplx &c : ref_coefficients)
        os << exact(c.real()) << "," << exact(c.imag()) << ";";
    for (const auto &ant : antenna_coefficients)
    {
        os << "ant=";
        for (const cplx &c : ant)
            os << exact(c.real()) << "," << exact(c.imag()) << ";";
    }
    os << "boff=" << exact(backoff_db) << ";s2=" << exact(noise_power) << ";";
    for (std::size_t k = 0; k < ue_kappa.size(); ++k)
        os << "u" << k << "=" << exact(ue_kappa[k]) << "," << exact(ue_power[k]) << "," << exact(large_scale[k])
           << ";";
    os << "tau=" << pilot_len << ";c=" << constellation.name() << ":";
    for (const cplx &p : constellation.points())
        os << exact(p.real()) << "," << exact(p.imag()) << ";";
    return hex64(fnv1a(os.str()));
}

void SystemConfig::set_equal_snr(double snr_linear)
{
    for (std::size_t k = 0; k < large_scale.size(); ++k)
        large_scale[k] = snr_linear * noise_power / ue_power[k];
}

void SystemConfig::set_kappa(double kappa)
{
    for (double &k : ue_kappa)
        k = kappa;
}

SystemConfig load_config(const std::string &text)
{
    YAML::Node root;
    try
    {
        root = YAML::Load(text);
    }
    catch (const YAML::Exception &e)
    {
        throw ConfigError("", std::string("parse error: ") + e.what());
    }
    if (!root.IsMap())
        throw ConfigError("", "configuration must be a mapping");

    SystemConfig c;
    auto require = [&root](const char *key) {
        if (!root[key])
            throw ConfigError(key, "missing");
        return root[key];
    };
    c.num_users = scalar<int>(require("num_users"), "num_users");
    c.poly_order = scalar<int>(require("poly_order"), "poly_order");
    c.backoff_db = scalar<double>(require("backoff_db"), "backoff_db");
    c.noise_power = scalar<double>(require("noise_power"), "noise_power");
    c.pilot_len = root["pilot_len"] ? scalar<int>(root["pilot_len"], "pilot_len") : c.num_users;
    c.rng_seed = root["rng_seed"] ? scalar<std::uint64_t>(root["rng_seed"], "rng_seed") : 0;

    const YAML::Node amp = require("amplifier");
    if (!amp.IsMap() || !amp["coefficients"])
        throw ConfigError("amplifier.coefficients", "missing");
    c.ref_coefficients = complex_list(amp["coefficients"], "amplifier.coefficients");
    if (amp["antennas"])
    {
        const YAML::Node ants = amp["antennas"];
        if (!ants.IsSequence())
            throw ConfigError("amplifier.antennas", "expected a list of coefficient lists");
        for (std::size_t m = 0; m < ants.size(); ++m)
            c.antenna_coefficients.push_back(
                complex_list(ants[m], "amplifier.antennas[" + std::to_string(m) + "]"));
    }

    const YAML::Node users = require("users");
    if (c.num_users < 1)
        throw ConfigError("num_users", "must be a positive integer");
    c.ue_kappa = per_user(users["kappa"], c.num_users, "users.kappa");
    c.ue_power = per_user(users["power"], c.num_users, "users.power");
    c.large_scale = per_user(users["large_scale"], c.num_users, "users.large_scale");

    if (root["constellation"])
    {
        const YAML::Node con = root["constellation"];
        try
        {
            if (con.IsScalar())
                c.constellation = Constellation::from_name(con.as<std::string>());
            else if (con["points"])
                c.constellation = Constellation(con["name"] ? con["name"].as<std::string>() : std::string("custom"),
                                                complex_list(con["points"], "constellation.points"));
            else if (con["name"])
                c.constellation = Constellation::from_name(con["name"].as<std::string>());
            else
                throw ConfigError("constellation", "needs a name or a list of points");
        }
        catch (const std::invalid_argument &e)
        {
            throw ConfigError("constellation", e.what());
        }
    }

    c.validate();
    return c;
}

SystemConfig load_config_file(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("", "cannot open configuration file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_config(ss.str());
}

std::string dump_config(const SystemConfig &c)
{
    std::ostringstream os;
    os << "num_users: " << c.num_users << "\n"
       << "poly_order: " << c.poly_order << "\n"
       << "backoff_db: " << decimal(c.backoff_db) << "\n"
       << "noise_power: " << decimal(c.noise_power) << "\n"
       << "pilot_len: " << c.pilot_len << "\n"
       << "rng_seed: " << c.rng_seed << "\n"
       << "constellation:\n  name: " << c.constellation.name() << "\n  points: ";
    append_complex_list(os, c.constellation.points());
    os << "\namplifier:\n  coefficients: ";
    append_complex_list(os, c.ref_coefficients);
    if (!c.antenna_coefficients.empty())
    {
        os << "\n  antennas:";
        for (const auto &ant : c.antenna_coefficients)
        {
            os << "\n    - ";
            append_complex_list(os, ant);
        }
    }
    os << "\nusers:\n  kappa: ";
    append_list(os, c.ue_kappa);
    os << "\n  power: ";
    append_list(os, c.ue_power);
    os << "\n  large_scale: ";
    append_list(os, c.large_scale);
    os << "\n";
    return os.str();
}

std::vector<cplx> illustrative_coefficients()
{
    return {{1.0, 0.0}, {-0.35, 0.12}, {0.20, -0.06}, {-0.05, 0.015}};
}

} // namespace effchan
