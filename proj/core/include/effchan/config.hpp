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

#ifndef EFFCHAN_CONFIG_HPP
#define EFFCHAN_CONFIG_HPP

#include "effchan/constellation.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace effchan
{

// Raised for malformed or invalid configuration; field() names the offending key.
class ConfigError : public std::runtime_error
{
public:
    ConfigError(std::string field, const std::string &what)
        : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field))
    {
    }
    [[nodiscard]] const std::string &field() const noexcept { return field_; }

private:
    std::string field_;
};

struct SystemConfig
{
    int num_users = 1;  // K
    int poly_order = 0; // L; the amplifier polynomial has odd order 2L+1

    // Reference polynomial coefficients a_0..a_L, shared by every antenna.
    std::vector<cplx> ref_coefficients{cplx{1.0, 0.0}};
    // Optional per-antenna override; entry m replaces ref_coefficients for antenna m.
    std::vector<std::vector<cplx>> antenna_coefficients;

    double backoff_db = 7.0;
    double noise_power = 1.0; // sigma^2, linear

    std::vector<double> ue_kappa{1.0};       // per-user hardware quality in [0, 1]
    std::vector<double> ue_power{1.0};       // p_k
    std::vector<double> large_scale{1.0};    // beta_k

    int pilot_len = 1; // tau_p >= K
    Constellation constellation = Constellation::qpsk();
    std::uint64_t rng_seed = 0;

    [[nodiscard]] const std::vector<cplx> &coefficients(std::size_t antenna = 0) const;
    [[nodiscard]] double backoff_linear() const;
    [[nodiscard]] double received_power() const; // sum_k beta_k p_k

    // Throws ConfigError naming the first violated field.
    void validate() const;

    // Stable 16-hex-digit hash of every physical field (everything except rng_seed).
    [[nodiscard]] std::string fingerprint() const;

    // Equal-SNR helper: beta_k = snr * sigma^2 / p_k for all users.
    void set_equal_snr(double snr_linear);
    void set_kappa(double kappa);
};

// Parses a YAML document (see configs/default.yaml) and validates it.
SystemConfig load_config(const std::string &text);
SystemConfig load_config_file(const std::string &path);

// Writes a YAML document that load_config() maps back to an identical SystemConfig.
std::string dump_config(const SystemConfig &config);

// Illustrative amplifier coefficients a_0..a_3 for a 7th-order model. These are not measured data; they
// produce a few percent of AM/AM compression plus AM/PM rotation at 7 dB backoff.
std::vector<cplx> illustrative_coefficients();

} // namespace effchan

#endif
