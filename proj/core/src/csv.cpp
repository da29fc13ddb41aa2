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

#include "effchan/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace effchan
{

ResultTable::ResultTable(std::vector<std::string> columns) : columns_(std::move(columns))
{
    if (columns_.empty())
        throw std::invalid_argument("ResultTable needs at least one column");
}

void ResultTable::append(std::vector<Cell> row)
{
    if (row.size() != columns_.size())
        throw std::invalid_argument("ResultTable row has " + std::to_string(row.size()) + " cells, expected " +
                                    std::to_string(columns_.size()));
    rows_.push_back(std::move(row));
}

void ResultTable::append(const ResultTable &other)
{
    if (other.columns_ != columns_)
        throw std::invalid_argument("ResultTable: cannot append a table with different columns");
    rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
}

std::size_t ResultTable::column_index(const std::string &name) const
{
    for (std::size_t i = 0; i < columns_.size(); ++i)
        if (columns_[i] == name)
            return i;
    throw std::out_of_range("ResultTable has no column '" + name + "'");
}

namespace
{

std::string quote(const std::string &s)
{
    if (s.find_first_of(",\"\n\r") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char ch : s)
    {
        if (ch == '"')
            out += '"';
        out += ch;
    }
    return out + "\"";
}

} // namespace

std::string format_cell(const ResultTable::Cell &c)
{
    if (const auto *s = std::get_if<std::string>(&c))
        return quote(*s);
    if (const auto *i = std::get_if<std::int64_t>(&c))
        return std::to_string(*i);
    const double v = std::get<double>(c);
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string format_csv(const ResultTable &table)
{
    if (table.empty())
        throw std::invalid_argument("refusing to emit an empty result table");
    std::string out;
    for (std::size_t i = 0; i < table.columns().size(); ++i)
        out += (i ? "," : "") + quote(table.columns()[i]);
    out += '\n';
    for (const auto &row : table.rows())
    {
        for (std::size_t i = 0; i < row.size(); ++i)
            out += (i ? "," : "") + format_cell(row[i]);
        out += '\n';
    }
    return out;
}

void emit_csv(const ResultTable &table, const std::string &path)
{
    const std::string text = format_csv(table);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write '" + path + "'");
    out << text;
    out.close();
    if (!out)
        throw std::runtime_error("failed writing '" + path + "'");
}

ParsedCsv parse_csv(const std::string &text)
{
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i)
    {
        const char ch = text[i];
        if (quoted)
        {
            if (ch == '"' && i + 1 < text.size() && text[i + 1] == '"')
            {
                field += '"';
                ++i;
            }
            else if (ch == '"')
                quoted = false;
            else
                field += ch;
            continue;
        }
        if (ch == '"')
        {
            quoted = true;
            any = true;
        }
        else if (ch == ',')
        {
            record.push_back(std::move(field));
            field.clear();
            any = true;
        }
        else if (ch == '\n')
        {
            record.push_back(std::move(field));
            field.clear();
            records.push_back(std::move(record));
            record.clear();
            any = false;
        }
        else if (ch != '\r')
        {
            field += ch;
            any = true;
        }
    }
    if (quoted)
        throw std::runtime_error("CSV: unterminated quoted field");
    if (any)
    {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
    }
    if (records.empty())
        throw std::runtime_error("CSV: no header");
    ParsedCsv out;
    out.header = std::move(records.front());
    for (std::size_t r = 1; r < records.size(); ++r)
    {
        if (records[r].size() != out.header.size())
            throw std::runtime_error("CSV: row " + std::to_string(r) + " has the wrong number of fields");
        out.rows.push_back(std::move(records[r]));
    }
    return out;
}

ParsedCsv read_csv(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
}

} // namespace effchan
