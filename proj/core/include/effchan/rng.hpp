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

#ifndef EFFCHAN_RNG_HPP
#define EFFCHAN_RNG_HPP

#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

namespace effchan
{

// Seedable, splittable random stream.
//
// A stream is identified by a 64-bit key; split(k) derives an independent child stream whose key is a
// SplitMix64 hash of (parent key, k). Workers and experiment points each own a split stream, so results do
// not depend on scheduling. Draws are bit-reproducible for a given key on one platform/standard library.
class RandomStream
{
public:
    explicit RandomStream(std::uint64_t seed);

    [[nodiscard]] RandomStream split(std::uint64_t key) const;
    [[nodiscard]] RandomStream split(std::string_view label) const;

    [[nodiscard]] std::uint64_t key() const noexcept { return key_; }

    double normal();                             // N(0, 1)
    std::complex<double> complex_normal(double variance); // CN(0, variance), circularly symmetric
    double uniform(double lo, double hi);
    std::size_t index(std::size_t n); // uniform on [0, n)

    std::mt19937_64 &engine() noexcept { return engine_; }

private:
    std::uint64_t key_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

} // namespace effchan

#endif
