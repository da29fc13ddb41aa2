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

#ifndef EFFCHAN_MODEL_IO_HPP
#define EFFCHAN_MODEL_IO_HPP

#include "effchan/training.hpp"

#include <optional>
#include <stdexcept>
#include <string>

namespace effchan
{

// Unreadable, corrupt, wrong-version or wrong-shape model files.
class ModelFormatError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int model_format_version = 1;

struct ModelFile
{
    NeuralEstimator estimator;
    std::optional<TrainingLog> log;
};

// JSON container: format tag, version, widths, row-major layer parameters, scalers, fingerprint, optional log.
void save_model(const std::string &path, const NeuralEstimator &est, const TrainingLog *log = nullptr);
std::string serialize_model(const NeuralEstimator &est, const TrainingLog *log = nullptr);

// expected_users > 0 rejects a network built for a different K.
ModelFile load_model(const std::string &path, int expected_users = 0);
ModelFile parse_model(const std::string &text, int expected_users = 0);

} // namespace effchan

#endif
