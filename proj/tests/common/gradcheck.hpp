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

#ifndef EFFCHAN_TEST_GRADCHECK_HPP
#define EFFCHAN_TEST_GRADCHECK_HPP

#include "effchan/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace effchan::test
{

struct GradCheck
{
    double max_rel_error = 0.0;
    std::size_t checked = 0;
};

// Central differences on the double-precision network. Entries are compared with
// |a - b| / max(|a|, |b|, floor), floor = 1e-4 max|g|, so entries far below the gradient scale do not dominate.
inline GradCheck check_gradients(const BasicMlp<double> &net, const MatrixT<double> &x, const MatrixT<double> &y,
                                 double h = 1e-6)
{
    MlpGradients<double> g(net);
    backward(net, x, y, g);
    double gmax = 0.0;
    for (std::size_t p = 0; p < net.layers.size(); ++p)
        gmax = std::max({gmax, g.weights[p].cwiseAbs().maxCoeff(), g.bias[p].cwiseAbs().maxCoeff()});
    const double floor = std::max(1e-4 * gmax, 1e-300);

    BasicMlp<double> probe = net;
    MlpGradients<double> scratch(net);
    auto loss = [&] { return backward(probe, x, y, scratch); };
    GradCheck out;
    auto visit = [&](double &param, double analytic) {
        const double saved = param;
        param = saved + h;
        const double up = loss();
        param = saved - h;
        const double down = loss();
        param = saved;
        const double numeric = (up - down) / (2 * h);
        const double rel = std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), floor});
        out.max_rel_error = std::max(out.max_rel_error, rel);
        ++out.checked;
    };
    for (std::size_t p = 0; p < probe.layers.size(); ++p)
    {
        auto &l = probe.layers[p];
        for (Eigen::Index j = 0; j < l.weights.cols(); ++j)
            for (Eigen::Index i = 0; i < l.weights.rows(); ++i)
                visit(l.weights(i, j), g.weights[p](i, j));
        for (Eigen::Index i = 0; i < l.bias.size(); ++i)
            visit(l.bias(i), g.bias[p](i));
    }
    return out;
}

// Random small network with a random batch; biases are randomized too so ReLU kinks are not hit exactly.
inline GradCheck random_gradcheck(RandomStream &rng)
{
    const int depth = 1 + static_cast<int>(rng.index(3));
    std::vector<int> widths{1 + static_cast<int>(rng.index(6))};
    for (int d = 0; d < depth; ++d)
        widths.push_back(2 + static_cast<int>(rng.index(8)));
    widths.push_back(1 + static_cast<int>(rng.index(5)));
    BasicMlp<double> net = BasicMlp<double>::he_uniform(widths, rng);
    for (auto &l : net.layers)
        for (Eigen::Index i = 0; i < l.bias.size(); ++i)
            l.bias(i) = rng.uniform(-0.5, 0.5);
    const Eigen::Index batch = 1 + static_cast<Eigen::Index>(rng.index(8));
    MatrixT<double> x(widths.front(), batch), y(widths.back(), batch);
    for (Eigen::Index j = 0; j < batch; ++j)
    {
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            x(i, j) = rng.normal();
        for (Eigen::Index i = 0; i < y.rows(); ++i)
            y(i, j) = rng.normal();
    }
    return check_gradients(net, x, y);
}

} // namespace effchan::test

#endif
