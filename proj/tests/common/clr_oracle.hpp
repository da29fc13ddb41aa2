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

#ifndef EFFCHAN_TEST_CLR_ORACLE_HPP
#define EFFCHAN_TEST_CLR_ORACLE_HPP

#include <cstdint>
#include <vector>

namespace effchan::test
{

inline std::uint64_t factorial(int n)
{
    std::uint64_t f = 1;
    for (int i = 2; i <= n; ++i)
        f *= static_cast<std::uint64_t>(i);
    return f;
}

// Expands u |u|^(2l) with u = t + v and |u|^2 = |t|^2 + |v|^2 + t v* + t* v, keeping the terms whose v-powers
// balance (circular v). Result[l][r] collects the multinomial weights of mu_(l-r) |t|^(2r) t.
inline std::vector<std::vector<std::uint64_t>> brute_force_clr(int L)
{
    std::vector<std::vector<std::uint64_t>> c(static_cast<std::size_t>(L + 1),
                                              std::vector<std::uint64_t>(static_cast<std::size_t>(L + 1), 0));
    for (int l = 0; l <= L; ++l)
        for (int l1 = 0; l1 <= l; ++l1)
            for (int l2 = 0; l1 + l2 <= l; ++l2)
                for (int l3 = 0; l1 + l2 + l3 <= l; ++l3)
                {
                    const int l4 = l - l1 - l2 - l3;
                    const std::uint64_t m = factorial(l) / (factorial(l1) * factorial(l2) * factorial(l3) * factorial(l4));
                    // leading factor t: v^l4 v*^l3 must balance
                    if (l3 == l4)
                        c[static_cast<std::size_t>(l)][static_cast<std::size_t>(l1 + l3)] += m;
                    // leading factor v: v^(l4+1) v*^l3 must balance
                    if (l3 == l4 + 1)
                        c[static_cast<std::size_t>(l)][static_cast<std::size_t>(l1 + l3 - 1)] += m;
                }
    return c;
}

inline std::uint64_t binomial(int n, int k)
{
    return factorial(n) / (factorial(k) * factorial(n - k));
}

} // namespace effchan::test

#endif
