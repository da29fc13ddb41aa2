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

#ifndef EFFCHAN_TEST_HELPERS_HPP
#define EFFCHAN_TEST_HELPERS_HPP

#include "effchan/config.hpp"

#include <fstream>
#include <sstream>
#include <string>

namespace effchan::test
{

inline SystemConfig ideal_config(int K, double snr = 10.0)
{
    SystemConfig c;
    c.num_users = K;
    c.poly_order = 0;
    c.ref_coefficients = {cplx{1.0, 0.0}};
    c.noise_power = 1.0;
    c.ue_kappa.assign(static_cast<std::size_t>(K), 1.0);
    c.ue_power.assign(static_cast<std::size_t>(K), 1.0);
    c.large_scale.assign(static_cast<std::size_t>(K), snr);
    c.pilot_len = K;
    return c;
}

inline SystemConfig impaired_config(int K, int L, double kappa, double snr = 10.0)
{
    SystemConfig c = ideal_config(K, snr);
    c.poly_order = L;
    const auto coeffs = illustrative_coefficients();
    c.ref_coefficients.assign(coeffs.begin(), coeffs.begin() + L + 1);
    c.set_kappa(kappa);
    return c;
}

inline std::string read_text(const std::string &path)
{
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace effchan::test

#endif
