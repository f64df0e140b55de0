// SPDX-License-Identifier: Apache-2.0
//
// linklab: link-level analysis of IOS-aided MIMO uplinks
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

#include "linklab/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace linklab
{

using nlohmann::json;

namespace
{

json number_json(double v)
{
    if (std::isfinite(v))
        return v;
    return format_number(v);
}

double number_from(const json &j)
{
    if (j.is_number())
        return j.get<double>();
    const std::string s = j.get<std::string>();
    if (s == "inf")
        return std::numeric_limits<double>::infinity();
    if (s == "-inf")
        return -std::numeric_limits<double>::infinity();
    if (s == "nan")
        return std::numeric_limits<double>::quiet_NaN();
    throw std::invalid_argument("report: malformed number '" + s + "'");
}

std::string hex64(std::uint64_t v)
{
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace

std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void write_csv(const SweepReport &r, std::ostream &out)
{
    out << kCsvHeader << '\n';
    for (const SweepRow &row : r.rows)
    {
        out << row.axis;
        for (double v : {row.value, row.sum_rate_sim, row.rate_r_sim, row.rate_t_sim, row.ub_thm3_r, row.ub_thm3_t,
                         row.ub_thm5_r, row.ub_thm5_t, row.nmse_theory, row.nmse_sim})
            out << ',' << format_number(v);
        out << ',' << r.seed << '\n';
    }
}

std::string to_csv(const SweepReport &r)
{
    std::ostringstream s;
    write_csv(r, s);
    return s.str();
}

json to_json(const SweepReport &r)
{
    json rows = json::array();
    for (const SweepRow &row : r.rows)
    {
        json extras = json::object();
        for (const auto &[k, v] : row.extras)
            extras[k] = number_json(v);
        rows.push_back({{"axis", row.axis},
                        {"value", number_json(row.value)},
                        {"sum_rate_sim", number_json(row.sum_rate_sim)},
                        {"rate_r_sim", number_json(row.rate_r_sim)},
                        {"rate_t_sim", number_json(row.rate_t_sim)},
                        {"ub_thm3_r", number_json(row.ub_thm3_r)},
                        {"ub_thm3_t", number_json(row.ub_thm3_t)},
                        {"ub_thm5_r", number_json(row.ub_thm5_r)},
                        {"ub_thm5_t", number_json(row.ub_thm5_t)},
                        {"nmse_theory", number_json(row.nmse_theory)},
                        {"nmse_sim", number_json(row.nmse_sim)},
                        {"extras", extras}});
    }
    return {{"metadata",
             {{"command", r.command},
              {"seed", r.seed},
              {"config_hash", hex64(r.config_hash)},
              {"blocks", r.blocks},
              {"trials_per_block", r.trials_per_block},
              {"config", r.config}}},
            {"rows", rows}};
}

SweepReport report_from_json(const json &j)
{
    SweepReport r;
    try
    {
        const json &m = j.at("metadata");
        r.command = m.at("command").get<std::string>();
        r.seed = m.at("seed").get<std::uint64_t>();
        r.config_hash = std::stoull(m.at("config_hash").get<std::string>(), nullptr, 16);
        r.blocks = m.at("blocks").get<int>();
        r.trials_per_block = m.at("trials_per_block").get<int>();
        r.config = m.at("config");
        for (const json &row : j.at("rows"))
        {
            SweepRow s;
            s.axis = row.at("axis").get<std::string>();
            s.value = number_from(row.at("value"));
            s.sum_rate_sim = number_from(row.at("sum_rate_sim"));
            s.rate_r_sim = number_from(row.at("rate_r_sim"));
            s.rate_t_sim = number_from(row.at("rate_t_sim"));
            s.ub_thm3_r = number_from(row.at("ub_thm3_r"));
            s.ub_thm3_t = number_from(row.at("ub_thm3_t"));
            s.ub_thm5_r = number_from(row.at("ub_thm5_r"));
            s.ub_thm5_t = number_from(row.at("ub_thm5_t"));
            s.nmse_theory = number_from(row.at("nmse_theory"));
            s.nmse_sim = number_from(row.at("nmse_sim"));
            for (auto it = row.at("extras").begin(); it != row.at("extras").end(); ++it)
                s.extras[it.key()] = number_from(it.value());
            r.rows.push_back(std::move(s));
        }
    }
    catch (const json::exception &e)
    {
        throw std::invalid_argument(std::string("report: malformed JSON report: ") + e.what());
    }
    return r;
}

void emit_report(const SweepReport &r, ReportFormat format, const std::string &path)
{
    const std::string text = format == ReportFormat::csv ? to_csv(r) : to_json(r).dump(2) + "\n";
    if (path.empty() || path == "-")
    {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("report: cannot open '" + path + "' for writing");
    out << text;
    if (!out)
        throw std::runtime_error("report: write to '" + path + "' failed");
}

} // namespace linklab
