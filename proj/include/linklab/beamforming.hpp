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

#ifndef LINKLAB_BEAMFORMING_HPP
#define LINKLAB_BEAMFORMING_HPP

#include "linklab/estimation.hpp"

#include <array>

namespace linklab
{

// Coefficient on the error covariances inside R.
enum class RMatrixVariant
{
    full_error,      // rho_i eps_v, consistent with the data-phase autocorrelation
    ue_scaled_error  // rho_i eps_v (1 - eps_u,i)
};

struct InterferenceModel
{
    HermitianPD r;
    RMatrixVariant variant;

    const CMat &matrix() const { return r.matrix(); }
};

// E|h_i,m|^2, the per-antenna power multiplying the AP distortion of side i.
double ap_distortion_scalar(const SideStatistics &side);

InterferenceModel interference_matrix(const ChannelStatistics &stats, const EstimatorPair &models,
                                      const HardwareProfile &hw, const PowerProfile &pw,
                                      RMatrixVariant variant = RMatrixVariant::full_error);

enum class Combiner
{
    mmse,
    mr,
    zf
};

struct CombinerSet
{
    CVec q_r;
    CVec q_t;
    Combiner method = Combiner::mmse;

    const CVec &q(Side s) const { return s == Side::R ? q_r : q_t; }
};

// q_i = rho_i eps_v eps_u,i (rho_r eps_v h_r h_r^H + rho_t eps_v h_t h_t^H + R)^-1 h_i
CombinerSet mmse_combiners(const ChannelEstimate &est, const InterferenceModel &r, const HardwareProfile &hw,
                           const PowerProfile &pw);
// Same combiners through the rank-two inverse update of R^-1.
CombinerSet mmse_combiners_woodbury(const ChannelEstimate &est, const InterferenceModel &r,
                                    const HardwareProfile &hw, const PowerProfile &pw);

// MR: q_i = h_i. ZF: columns of H (H^H H)^-1 over the transmitting users; a
// silent user (zero power) is excluded from the nulling set when `pw` is given.
CombinerSet mr_zf_combiners(const ChannelEstimate &est, Combiner method, const PowerProfile *pw = nullptr);

// Largest Gram-matrix condition number accepted by ZF.
inline constexpr double kZfConditionLimit = 1e12;

double sinr(const CVec &q, Side side, const ChannelEstimate &est, const InterferenceModel &r,
            const HardwareProfile &hw, const PowerProfile &pw);

struct SideRate
{
    double sinr = 0.0;
    double se = 0.0;
    double zeta = 0.0;
};

struct RateReport
{
    SideRate r;
    SideRate t;
    std::array<double, 2> se_ub{0.0, 0.0};       // tight ergodic bound per side
    std::array<double, 2> se_loose_ub{0.0, 0.0}; // loose ergodic bound per side
    std::array<double, 2> eta{0.0, 0.0};
    bool ub_condition_violated = false; // cos(psi_r) == cos(psi_t)

    const SideRate &side(Side s) const { return s == Side::R ? r : t; }
    double sum_se() const { return r.se + t.se; }
};

// zeta_i = h_i^H R^-1 h_i - rho_j eps_v |h_i^H R^-1 h_j|^2 / (1 + rho_j eps_v h_j^H R^-1 h_j)
std::array<double, 2> zeta(const ChannelEstimate &est, const InterferenceModel &r, const HardwareProfile &hw,
                           const PowerProfile &pw);

// SE from zeta: log2(1 + rho eps_v eps_u zeta / (1 + rho eps_v (1 - eps_u) zeta)).
double se_from_zeta(double zeta, double rho, double eps_v, double eps_u);

// Instantaneous SE with MMSE combining in closed form.
RateReport se_instantaneous(const ChannelEstimate &est, const InterferenceModel &r, const HardwareProfile &hw,
                            const PowerProfile &pw);

// Instantaneous SE of an arbitrary combiner set, log2(1 + sinr(q_i)).
RateReport se_with_combiners(const CombinerSet &q, const ChannelEstimate &est, const InterferenceModel &r,
                             const HardwareProfile &hw, const PowerProfile &pw);

// Phases aligning the surface cascade of each side (maximises the LoS gain to N^2).
IosPhases optimal_ios_phases(const AngleSet &angles, const ArrayGeometry &geometry);
IosPhases random_ios_phases(const ArrayGeometry &geometry, Rng &rng);

struct BoundResult
{
    double se = 0.0;
    double zeta = 0.0;
    bool condition_violated = false;
};

BoundResult ergodic_se_upper_bound(const ChannelStatistics &stats, const EstimatorPair &models,
                                   const InterferenceModel &r, const HardwareProfile &hw, const PowerProfile &pw,
                                   Side side);

struct LooseBound
{
    double se = 0.0;
    double eta = 0.0;
};

// eta_i = rho_a rho_g (kappa_a kappa_g N^2 + (1+kappa_g+kappa_a) N) / ((1+kappa_a)(1+kappa_g)) + rho_b
double loose_bound_eta(const SideGains &g);

LooseBound loose_upper_bound(const std::array<SideGains, 2> &gains, const HardwareProfile &hw,
                             const PowerProfile &pw, int m, Side side);

struct ScalingHelpers
{
    double extra_antennas = 0.0;
    double ue_saturation_r = 0.0;
    double ue_saturation_t = 0.0;
};

ScalingHelpers scaling_helpers(const HardwareProfile &hw, int m);

// log2(1 + eps_u / (1 - eps_u)); +inf at eps_u = 1.
double ue_saturation(double eps_u);

// Numerator and denominator of the cross-term ratio for UE-R:
// rho_t eps_v |h_r^H R^-1 h_t|^2 / (1 + rho_t eps_v h_t^H R^-1 h_t)  and  h_r^H R^-1 h_r.
std::pair<double, double> cross_term_parts(const ChannelEstimate &est, const InterferenceModel &r,
                                           const HardwareProfile &hw, const PowerProfile &pw);

} // namespace linklab

#endif
