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

#ifndef EFFCHAN_CSV_HPP
#define EFFCHAN_CSV_HPP

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace effchan
{

// Append-only table with a fixed column order.
class ResultTable
{
public:
    using Cell = std::variant<std::string, std::int64_t, double>;

    ResultTable() = default;
    explicit ResultTable(std::vector<std::string> columns);

    // Throws std::invalid_argument when the row width differs from the header.
    void append(std::vector<Cell> row);
    void append(const ResultTable &other);

    [[nodiscard]] const std::vector<std::string> &columns() const noexcept { return columns_; }
    [[nodiscard]] const std::vector<std::vector<Cell>> &rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t size() const noexcept { return rows_.size(); }
    [[nodiscard]] bool empty() const noexcept { return rows_.empty(); }
    [[nodiscard]] std::size_t column_index(const std::string &name) const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

// Reals use 6 significant digits.
std::string format_cell(const ResultTable::Cell &c);

// Header plus rows, '\n' line endings. Throws std::invalid_argument on an empty table.
std::string format_csv(const ResultTable &table);
// Writes format_csv(table) to path; an empty table is rejected before the file is created.
void emit_csv(const ResultTable &table, const std::string &path);

struct ParsedCsv
{
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Reader for the files emit_csv writes (double-quoted fields with "" escapes).
ParsedCsv parse_csv(const std::string &text);
ParsedCsv read_csv(const std::string &path);

} // namespace effchan

#endif
