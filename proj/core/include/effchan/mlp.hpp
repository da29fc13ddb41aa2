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

#ifndef EFFCHAN_MLP_HPP
#define EFFCHAN_MLP_HPP

#include "effchan/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace effchan
{

// Signals non-finite losses, activations or gradients during training.
class TrainingDiverged : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

template <typename T>
using MatrixT = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using VectorT = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <typename T>
struct DenseLayer
{
    MatrixT<T> weights; // N_out x N_in
    VectorT<T> bias;    // N_out
    bool relu = true;   // identity when false
};

// Fully connected feedforward network r_p = act_p(W_p r_{p-1} + b_p): ReLU on hidden layers, identity output.
// Batches are column-major: one sample per column.
template <typename T>
class BasicMlp
{
public:
    BasicMlp() = default;

    // widths = {N_0, N_1, ..., N_P}; all parameters zero.
    explicit BasicMlp(const std::vector<int> &widths)
    {
        if (widths.size() < 2)
            throw std::invalid_argument("MLP needs at least an input and an output width");
        for (std::size_t p = 1; p < widths.size(); ++p)
        {
            if (widths[p] < 1 || widths[p - 1] < 1)
                throw std::invalid_argument("MLP widths must be positive");
            DenseLayer<T> layer;
            layer.weights = MatrixT<T>::Zero(widths[p], widths[p - 1]);
            layer.bias = VectorT<T>::Zero(widths[p]);
            layer.relu = p + 1 < widths.size();
            layers.push_back(std::move(layer));
        }
    }

    // He-style uniform fan-in initialisation: W ~ U(-sqrt(6/fan_in), sqrt(6/fan_in)), b = 0.
    static BasicMlp he_uniform(const std::vector<int> &widths, RandomStream &rng)
    {
        BasicMlp net(widths);
        for (auto &layer : net.layers)
        {
            const double limit = std::sqrt(6.0 / static_cast<double>(layer.weights.cols()));
            for (Eigen::Index j = 0; j < layer.weights.cols(); ++j)
                for (Eigen::Index i = 0; i < layer.weights.rows(); ++i)
                    layer.weights(i, j) = static_cast<T>(rng.uniform(-limit, limit));
        }
        return net;
    }

    std::vector<DenseLayer<T>> layers;

    [[nodiscard]] int input_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.front().weights.cols()); }
    [[nodiscard]] int output_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.back().weights.rows()); }

    [[nodiscard]] std::vector<int> widths() const
    {
        std::vector<int> w;
        if (layers.empty())
            return w;
        w.push_back(input_dim());
        for (const auto &l : layers)
            w.push_back(static_cast<int>(l.weights.rows()));
        return w;
    }

    [[nodiscard]] std::size_t parameter_count() const
    {
        std::size_t n = 0;
        for (const auto &l : layers)
            n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
        return n;
    }

    [[nodiscard]] MatrixT<T> forward_batch(const MatrixT<T> &inputs) const
    {
        if (layers.empty())
            throw std::logic_error("MLP has no layers");
        if (inputs.rows() != input_dim())
            throw std::invalid_argument("MLP input has " + std::to_string(inputs.rows()) + " features, expected " +
                                        std::to_string(input_dim()));
        MatrixT<T> a = inputs;
        for (const auto &layer : layers)
        {
            MatrixT<T> z = layer.weights * a;
            z.colwise() += layer.bias;
            if (layer.relu)
                z = z.cwiseMax(T(0));
            a = std::move(z);
        }
        return a;
    }

    [[nodiscard]] VectorT<T> forward(const VectorT<T> &input) const
    {
        return forward_batch(MatrixT<T>(input)).col(0);
    }
};

template <typename T>
struct MlpGradients
{
    std::vector<MatrixT<T>> weights;
    std::vector<VectorT<T>> bias;

    explicit MlpGradients(const BasicMlp<T> &net = {})
    {
        for (const auto &l : net.layers)
        {
            weights.push_back(MatrixT<T>::Zero(l.weights.rows(), l.weights.cols()));
            bias.push_back(VectorT<T>::Zero(l.bias.size()));
        }
    }

    void set_zero()
    {
        for (auto &w : weights)
            w.setZero();
        for (auto &b : bias)
            b.setZero();
    }

    [[nodiscard]] bool all_finite() const
    {
        for (const auto &w : weights)
            if (!w.allFinite())
                return false;
        for (const auto &b : bias)
            if (!b.allFinite())
                return false;
        return true;
    }
};

// Batch-mean MSE, mean taken over samples and output entries: sum (o - y)^2 / (B * N_P).
// Fills grads with exact gradients of that loss and returns the loss.
template <typename T>
T backward(const BasicMlp<T> &net, const MatrixT<T> &inputs, const MatrixT<T> &targets, MlpGradients<T> &grads)
{
    const auto P = net.layers.size();
    if (inputs.cols() != targets.cols() || targets.rows() != net.output_dim())
        throw std::invalid_argument("backward: batch shapes do not match the network");
    if (grads.weights.size() != P)
        grads = MlpGradients<T>(net);

    // activations[p] is the input of layer p
    std::vector<MatrixT<T>> activations;
    activations.reserve(P + 1);
    activations.push_back(inputs);
    for (const auto &layer : net.layers)
    {
        MatrixT<T> z = layer.weights * activations.back();
        z.colwise() += layer.bias;
        if (layer.relu)
            z = z.cwiseMax(T(0));
        activations.push_back(std::move(z));
    }

    const T scale = T(1) / static_cast<T>(targets.size());
    MatrixT<T> delta = activations.back() - targets;
    const T loss = delta.squaredNorm() * scale;
    delta *= T(2) * scale;

    for (std::size_t p = P; p-- > 0;)
    {
        const auto &layer = net.layers[p];
        if (layer.relu)
            delta = (activations[p + 1].array() > T(0)).select(delta, T(0));
        grads.weights[p].noalias() = delta * activations[p].transpose();
        grads.bias[p] = delta.rowwise().sum();
        if (p > 0)
        {
            MatrixT<T> prev = layer.weights.transpose() * delta;
            delta = std::move(prev);
        }
    }
    return loss;
}

struct AdamParams
{
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

template <typename T>
struct AdamState
{
    std::vector<MatrixT<T>> m_w, v_w;
    std::vector<VectorT<T>> m_b, v_b;
    long step = 0;

    explicit AdamState(const BasicMlp<T> &net = {})
    {
        for (const auto &l : net.layers)
        {
            m_w.push_back(MatrixT<T>::Zero(l.weights.rows(), l.weights.cols()));
            v_w.push_back(MatrixT<T>::Zero(l.weights.rows(), l.weights.cols()));
            m_b.push_back(VectorT<T>::Zero(l.bias.size()));
            v_b.push_back(VectorT<T>::Zero(l.bias.size()));
        }
    }
};

// One bias-corrected Adam update. Throws TrainingDiverged on non-finite gradients.
template <typename T>
void adam_step(BasicMlp<T> &net, const MlpGradients<T> &grads, AdamState<T> &state, const AdamParams &params)
{
    if (!grads.all_finite())
        throw TrainingDiverged("non-finite gradient at Adam step " + std::to_string(state.step + 1));
    if (state.m_w.size() != net.layers.size())
        state = AdamState<T>(net);
    ++state.step;
    const T b1 = static_cast<T>(params.beta1);
    const T b2 = static_cast<T>(params.beta2);
    const T c1 = static_cast<T>(1.0 - std::pow(params.beta1, static_cast<double>(state.step)));
    const T c2 = static_cast<T>(1.0 - std::pow(params.beta2, static_cast<double>(state.step)));
    const T lr = static_cast<T>(params.learning_rate);
    const T eps = static_cast<T>(params.epsilon);

    auto update = [&](auto &param, const auto &grad, auto &m, auto &v) {
        m = b1 * m + (T(1) - b1) * grad;
        v = b2 * v + (T(1) - b2) * grad.cwiseAbs2();
        param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    };
    for (std::size_t p = 0; p < net.layers.size(); ++p)
    {
        update(net.layers[p].weights, grads.weights[p], state.m_w[p], state.v_w[p]);
        update(net.layers[p].bias, grads.bias[p], state.m_b[p], state.v_b[p]);
    }
}

using MlpModel = BasicMlp<float>;

} // namespace effchan

#endif
