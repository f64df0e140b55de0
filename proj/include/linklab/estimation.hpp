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

#ifndef LINKLAB_ESTIMATION_HPP
#define LINKLAB_ESTIMATION_HPP

#include "linklab/channel.hpp"

#include <utility>

namespace linklab
{

// Quality factors in [0,1]; 1 is ideal hardware.
struct HardwareProfile
{
    double eps_v = 1.0;  // AP
    double eps_ur = 1.0; // UE-R
    double eps_ut = 1.0; // UE-T

    double eps_u(Side s) const { return s == Side::R ? eps_ur : eps_ut; }
    void validate() const;
    static HardwareProfile ideal() { return {}; }
};

// Linear transmit powers (normalised by nothing; the channel gains carry the path loss)
// and the per-antenna noise variance, all in watts.
struct PowerProfile
{
    double rho_r = 0.0;
    double rho_t = 0.0;
    double noise_var = 0.0;

    double rho(Side s) const { return s == Side::R ? rho_r : rho_t; }
    double &rho(Side s) { return s == Side::R ? rho_r : rho_t; }
    void validate() const;
};

struct PilotBook
{
    int k = 0;
    CVec tau_r;
    CVec tau_t;

    const CVec &tau(Side s) const { return s == Side::R ? tau_r : tau_t; }
};

// First two rows of the K-point DFT matrix.
PilotBook make_pilots(int k);

// K pilot observations, one column per slot (M x K).
CMat simulate_pilot_rx(const CVec &h_r, const CVec &h_t, const HardwareProfile &hw, const PilotBook &pilots,
                       const PowerProfile &pw, Rng &rng);

// x_i = K^-1/2 sum_k x^(k) conj(tau_i^(k))
CVec despread(const CMat &observations, const PilotBook &pilots, Side side);

// Draws the despread pair (x_r, x_t) directly. Equal in distribution to
// simulate_pilot_rx followed by despread, at O(M) cost instead of O(MK).
std::pair<CVec, CVec> sample_despread(const CVec &h_r, const CVec &h_t, const HardwareProfile &hw, int k,
                                      const PowerProfile &pw, Rng &rng);

enum class PilotSampler
{
    slots,   // K explicit pilot slots, then despreading
    despread // direct draw of the despread observations
};

// Second-order description of the LMMSE estimator of one side.
struct EstimatorModel
{
    CVec hbar;   // prior mean
    CVec x_mean; // E[x_i]
    CMat c_hh;
    CMat c_hx;
    CMat c_xx;
    CMat gain;   // C_hx C_xx^-1
    CMat c_hat;  // covariance of the estimate
    CMat c_err;  // covariance of the estimation error
};

struct EstimatorPair
{
    EstimatorModel r;
    EstimatorModel t;

    const EstimatorModel &side(Side s) const { return s == Side::R ? r : t; }
};

// C_xx of side i, exact under the receive model (including the AP-distortion
// diagonal and the mean-dependent terms).
CMat pilot_covariance(const ChannelStatistics &stats, const HardwareProfile &hw, const PowerProfile &pw, int k,
                      Side side);

// A side with zero pilot power gets a zero gain and returns its prior mean.
EstimatorPair build_estimator(const ChannelStatistics &stats, const HardwareProfile &hw, const PowerProfile &pw,
                              int k);

CVec lmmse_estimate(const EstimatorModel &model, const CVec &x);

struct ChannelEstimate
{
    CVec h_hat_r;
    CVec h_hat_t;

    const CVec &h_hat(Side s) const { return s == Side::R ? h_hat_r : h_hat_t; }
};

ChannelEstimate estimate_channels(const EstimatorPair &models, const CVec &x_r, const CVec &x_t);

// Tr[C_err] / Tr[C_hh] for one side.
double nmse_side(const EstimatorModel &model);
// Mean of the two per-side ratios.
double nmse_theoretical(const EstimatorPair &models);

struct NmseScenario
{
    const ChannelStatistics *stats = nullptr;
    HardwareProfile truth;       // impairments applied to the simulated pilots
    PowerProfile powers;
    int k = 2;
    const EstimatorPair *models = nullptr; // estimator actually used (may ignore HWI)
    ChannelSampler channel_sampler = ChannelSampler::composed;
    PilotSampler pilot_sampler = PilotSampler::slots;
};

// Average of 0.5 * sum_i ||h_i - h_hat_i||^2 / Tr[C_hh,i] over fresh channel and pilot draws.
double nmse_monte_carlo(const NmseScenario &scenario, int trials, Rng &rng);

} // namespace linklab

#endif
