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

#ifndef EFFCHAN_CONSTELLATION_HPP
#define EFFCHAN_CONSTELLATION_HPP

#include <complex>
#include <string>
#include <vector>

namespace effchan
{

using cplx = std::complex<double>;

// Finite, equiprobable signal constellation with unit average energy and 90-degree rotation symmetry.
class Constellation
{
public:
    // Validates unit energy and rotation symmetry; throws std::invalid_argument otherwise.
    Constellation(std::string name, std::vector<cplx> points);

    static Constellation qpsk();
    static Constellation square_qam(int order); // order = 4, 16, 64, 256, ...
    static Constellation from_name(const std::string &name); // "qpsk", "qam16", ...

    [[nodiscard]] const std::string &name() const noexcept { return name_; }
    [[nodiscard]] const std::vector<cplx> &points() const noexcept { return points_; }
    [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
    [[nodiscard]] const cplx &operator[](std::size_t i) const { return points_[i]; }

    // Exact E{s^a conj(s)^b} averaged over the points.
    [[nodiscard]] cplx moment(int a, int b) const;

private:
    std::string name_;
    std::vector<cplx> points_;
};

// True when every point rotated by j, -1, -j is again a point (to within tol).
bool has_quarter_turn_symmetry(const std::vector<cplx> &points, double tol = 1e-9);

} // namespace effchan

#endif
