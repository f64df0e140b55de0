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

#ifndef LINKLAB_VALIDATE_HPP
#define LINKLAB_VALIDATE_HPP

#include "linklab/beamforming.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace linklab
{

struct OracleResult
{
    std::string name;
    double value = 0.0;     // measured discrepancy (or the checked statistic)
    double tolerance = 0.0; // pass when value <= tolerance
    bool pass = false;
    std::string detail;
};

struct ValidateOptions
{
    std::uint64_t seed = 7;
    RMatrixVariant variant = RMatrixVariant::full_error;
    int moment_draws = 100000;
    int workers = 1;
    // Monte Carlo size of the sweep-based checks (bound ordering, cross-term decay)
    int blocks = 4;
    int trials_per_block = 250;
};

std::vector<OracleResult> run_oracles(const ValidateOptions &opt);

// One line per oracle: name, PASS/FAIL, value, tolerance, detail. Tab separated.
void print_oracle_table(const std::vector<OracleResult> &results, std::ostream &out);

bool all_passed(const std::vector<OracleResult> &results);

// Individual oracles, exposed for the test suite.
OracleResult oracle_covariance_split(std::uint64_t seed);
OracleResult oracle_rank_two_update(std::uint64_t seed);
OracleResult oracle_sinr_equivalence(std::uint64_t seed);
OracleResult oracle_pilot_covariance(std::uint64_t seed, int draws);
OracleResult oracle_data_autocorrelation(std::uint64_t seed, int draws, RMatrixVariant variant);
OracleResult oracle_phase_bruteforce(std::uint64_t seed);
OracleResult oracle_phase_n_squared(std::uint64_t seed);
OracleResult oracle_random_phase_mean(std::uint64_t seed);
OracleResult oracle_bound_ordering(const ValidateOptions &opt);
OracleResult oracle_cross_term_decay(const ValidateOptions &opt);

// Exhaustive search of max_theta |a^H Theta g|^2 for tiny N: 64^(N-1) grid with
// the first phase pinned, then coordinate refinement.
double brute_force_los_gain(const CVec &a_ios, const CVec &gbar);

// Small unit-gain deployment used by the moment oracles.
struct OracleScenario
{
    ChannelStatistics stats;
    HardwareProfile hw;
    PowerProfile pw;
    int k = 4;
};

OracleScenario moment_scenario(std::uint64_t seed);

} // namespace linklab

#endif
