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

#include "effchan/constellation.hpp"

#include <cmath>
#include <stdexcept>

namespace effchan
{

namespace
{

cplx ipow(cplx z, int n)
{
    cplx r{1.0, 0.0};
    for (int i = 0; i < n; ++i)
        r *= z;
    return r;
}

} // namespace

bool has_quarter_turn_symmetry(const std::vector<cplx> &points, double tol)
{
    static const cplx turns[3] = {{0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
    for (const cplx &p : points)
        for (const cplx &t : turns)
        {
            const cplx q = p * t;
            bool found = false;
            for (const cplx &c : points)
                if (std::abs(c - q) <= tol)
                {
                    found = true;
                    break;
                }
            if (!found)
                return false;
        }
    return true;
}

Constellation::Constellation(std::string name, std::vector<cplx> points)
    : name_(std::move(name)), points_(std::move(points))
{
    if (points_.empty())
        throw std::invalid_argument("constellation '" + name_ + "' has no points");
    double energy = 0.0;
    for (const cplx &p : points_)
    {
        if (!std::isfinite(p.real()) || !std::isfinite(p.imag()))
            throw std::invalid_argument("constellation '" + name_ + "' has a non-finite point");
        energy += std::norm(p);
    }
    energy /= static_cast<double>(points_.size());
    if (std::abs(energy - 1.0) > 1e-9)
        throw std::invalid_argument("constellation '" + name_ + "' average energy is " + std::to_string(energy) +
                                    ", expected 1");
    if (!has_quarter_turn_symmetry(points_))
        throw std::invalid_argument("constellation '" + name_ + "' lacks 90-degree rotation symmetry");
}

Constellation Constellation::qpsk()
{
    const double s = 1.0 / std::sqrt(2.0);
    return Constellation("qpsk", {{s, s}, {-s, s}, {-s, -s}, {s, -s}});
}

Constellation Constellation::square_qam(int order)
{
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
    if (order < 4 || side * side != order || side % 2 != 0)
        throw std::invalid_argument("square QAM order must be an even square >= 4, got " + std::to_string(order));

    // levels +-1, +-3, ..., average energy 2(M-1)/3
    const double scale = 1.0 / std::sqrt(2.0 * (order - 1) / 3.0);
    std::vector<cplx> pts;
    pts.reserve(static_cast<std::size_t>(order));
    for (int i = 0; i < side; ++i)
        for (int q = 0; q < side; ++q)
            pts.emplace_back(scale * (2 * i - side + 1), scale * (2 * q - side + 1));
    return Constellation(order == 4 ? "qpsk" : "qam" + std::to_string(order), std::move(pts));
}

Constellation Constellation::from_name(const std::string &name)
{
    if (name == "qpsk")
        return qpsk();
    if (name.rfind("qam", 0) == 0 && name.size() > 3)
    {
        int order = 0;
        try
        {
            order = std::stoi(name.substr(3));
        }
        catch (const std::exception &)
        {
            throw std::invalid_argument("unknown constellation '" + name + "'");
        }
        return square_qam(order);
    }
    throw std::invalid_argument("unknown constellation '" + name + "'");
}

cplx Constellation::moment(int a, int b) const
{
    if (a < 0 || b < 0)
        throw std::invalid_argument("constellation moment orders must be non-negative");
    cplx acc{0.0, 0.0};
    for (const cplx &p : points_)
        acc += ipow(p, a) * ipow(std::conj(p), b);
    return acc / static_cast<double>(points_.size());
}

} // namespace effchan
