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

#ifndef LINKLAB_CONFIG_HPP
#define LINKLAB_CONFIG_HPP

#include "linklab/beamforming.hpp"

#include <json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace linklab
{

class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

enum class PhaseMode
{
    optimal,
    random
};

// Linear Rician factors of the four Rician links.
struct KappaSet
{
    double a_r = 1.0;
    double a_t = 1.0;
    double g_r = 1.0;
    double g_t = 1.0;
};

// Complete scenario. Field defaults are the reference deployment.
struct SystemConfig
{
    int m_ap = 100;
    double d0 = 0.5;
    SurfaceGrid ios_r{20, 20, 0.5, 0.5};
    SurfaceGrid ios_t{20, 20, 0.5, 0.5};
    SteeringSign steering_sign = SteeringSign::positive;
    Positions coords;
    double delta_psi_rad = 0.1 * kPi;

    KappaSet kappa;
    double alpha_a = 2.2; // IOS -> AP
    double alpha_g = 2.2; // UE -> IOS
    double alpha_b = 4.8; // UE -> AP
    double c0_db = -30.0;

    int k_pilots = 16;
    HardwareProfile hw;
    double rho_r_dbm = 20.0;
    double rho_t_dbm = 20.0;
    double noise_dbm = -90.0;
    bool estimator_ignores_hwi = false;

    Combiner combiner = Combiner::mmse;
    PhaseMode ios_phases = PhaseMode::optimal;
    RMatrixVariant r_matrix_variant = RMatrixVariant::full_error;
    ChannelSampler channel_sampler = ChannelSampler::conditional;
    PilotSampler pilot_sampler = PilotSampler::slots;
    bool direct_link = true;
    bool ios_enabled = true;

    int blocks = 20;
    int trials_per_block = 500;

    void validate() const;

    ArrayGeometry geometry() const;
    LinkBudget link_budget() const;
    PowerProfile powers() const;
};

// Overlays the keys present in `j` on `base`. Unknown keys and out-of-range
// values raise ConfigError.
SystemConfig config_from_json(const nlohmann::json &j, const SystemConfig &base = {});
SystemConfig load_config(const std::string &path, const SystemConfig &base = {});

// Canonical resolved form: every field present, Rician factors in linear units.
nlohmann::json config_to_json(const SystemConfig &cfg);

// FNV-1a of the canonical dump.
std::uint64_t config_hash(const SystemConfig &cfg);

inline const std::vector<std::string> &sweep_axes()
{
    static const std::vector<std::string> axes{"rho_dbm", "m_ap",   "n_elements_per_side", "kappa_db", "delta_psi_rad",
                                               "alpha_b", "eps_u", "eps_v",               "k_pilots"};
    return axes;
}

// Returns `cfg` with the named sweep axis set to `value`.
SystemConfig apply_axis(const SystemConfig &cfg, const std::string &axis, double value);

// nx x ny with nx * ny == n: s x s for perfect squares, 2s x s when n = 2 s^2,
// otherwise the divisor pair closest to square.
SurfaceGrid factor_surface(int n, double dx, double dy);

const char *to_string(Combiner c);
const char *to_string(PhaseMode p);
const char *to_string(RMatrixVariant v);
const char *to_string(ChannelSampler s);
const char *to_string(PilotSampler s);
const char *to_string(SteeringSign s);

} // namespace linklab

#endif
