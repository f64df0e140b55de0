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

#ifndef LINKLAB_REPORT_HPP
#define LINKLAB_REPORT_HPP

#include "linklab/engine.hpp"

#include <iosfwd>
#include <string>

namespace linklab
{

enum class ReportFormat
{
    csv,
    json
};

inline constexpr const char *kCsvHeader =
    "axis,value,sum_rate_sim,rate_r_sim,rate_t_sim,ub_thm3_r,ub_thm3_t,ub_thm5_r,ub_thm5_t,nmse_theory,nmse_sim,seed";

// %.9g; non-finite values print as inf, -inf and nan.
std::string format_number(double v);

void write_csv(const SweepReport &report, std::ostream &out);
std::string to_csv(const SweepReport &report);

nlohmann::json to_json(const SweepReport &report);
SweepReport report_from_json(const nlohmann::json &j);

// Writes to `path`, or to stdout when path is empty or "-".
void emit_report(const SweepReport &report, ReportFormat format, const std::string &path);

} // namespace linklab

#endif
