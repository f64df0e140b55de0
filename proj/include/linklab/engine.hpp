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

#ifndef LINKLAB_ENGINE_HPP
#define LINKLAB_ENGINE_HPP

#include "linklab/config.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace linklab
{

// Numeric failure inside a sweep, tagged with its Monte Carlo coordinates.
class EngineError : public std::runtime_error
{
public:
    EngineError(const std::string &what, int block, int trial)
        : std::runtime_error(what), block_(block), trial_(trial) {}
    int block() const { return block_; }
    int trial() const { return trial_; } // -1 for block-level setup

private:
    int block_;
    int trial_;
};

enum class Protocol
{
    ms, // both users share the coherence interval
    ts  // each user alone for half of it
};

struct RunControl
{
    std::uint64_t seed = 1;
    int blocks = 20;
    int trials_per_block = 500;
    int workers = 1;
};

// Ergodic averages at one scenario point.
struct PointResult
{
    double rate_r = 0.0; // configured combiner
    double rate_t = 0.0;
    double sum_mmse = 0.0;
    double sum_mr = 0.0;
    double sum_zf = 0.0;
    double ub_thm3_r = 0.0; // tight bound, averaged over blocks
    double ub_thm3_t = 0.0;
    double ub_thm5_r = 0.0; // loose bound
    double ub_thm5_t = 0.0;
    double nmse_theory = 0.0;
    double nmse_sim = 0.0;
    double cross_term_ratio = 0.0; // UE-R interference share, ratio of means
    int ub_condition_violated_blocks = 0;
    long trials = 0;

    double sum_rate() const { return rate_r + rate_t; }
};

PointResult evaluate_point(const SystemConfig &cfg, Protocol protocol, const RunControl &run);

enum class Baseline
{
    ts,
    no_ios,
    ignore_hwi,
    random_phases
};

const char *baseline_suffix(Baseline b);

struct ExperimentPlan
{
    SystemConfig scenario;
    std::string axis = "rho_dbm";
    std::vector<double> values;
    int blocks = 20;
    int trials_per_block = 500;
    std::uint64_t seed = 1;
    int workers = 1;
    std::vector<Baseline> baselines;

    void validate() const;
};

struct SweepRow
{
    std::string axis;
    double value = 0.0;
    double sum_rate_sim = 0.0;
    double rate_r_sim = 0.0;
    double rate_t_sim = 0.0;
    double ub_thm3_r = 0.0;
    double ub_thm3_t = 0.0;
    double ub_thm5_r = 0.0;
    double ub_thm5_t = 0.0;
    double nmse_theory = 0.0;
    double nmse_sim = 0.0;
    std::map<std::string, double> extras;
};

struct SweepReport
{
    std::string command;
    std::vector<SweepRow> rows;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    int blocks = 0;
    int trials_per_block = 0;
    nlohmann::json config; // resolved scenario
};

SweepRow make_row(const std::string &axis, double value, const SystemConfig &cfg, const PointResult &p);

// Main rows over the sweep, then one block of rows per requested baseline.
SweepReport run_ergodic(const ExperimentPlan &plan);
// As run_ergodic, always including the estimator-ignores-HWI rows.
SweepReport run_nmse(const ExperimentPlan &plan);

std::vector<SweepRow> ts_protocol_rate(const ExperimentPlan &plan);
std::vector<SweepRow> no_ios_baseline(const ExperimentPlan &plan);

// Worker count from LINKLAB_WORKERS, else the hardware concurrency.
int default_workers();

} // namespace linklab

#endif
