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

#ifndef LINKLAB_CHANNEL_HPP
#define LINKLAB_CHANNEL_HPP

#include "linklab/linalg.hpp"

#include <array>
#include <string>
#include <vector>

namespace linklab
{

// UE-R sits on the reflecting side of the surface, UE-T on the transmitting side.
enum class Side
{
    R,
    T
};

inline constexpr std::array<Side, 2> kSides{Side::R, Side::T};

inline Side other(Side s) { return s == Side::R ? Side::T : Side::R; }
inline const char *side_name(Side s) { return s == Side::R ? "r" : "t"; }

// Global sign of steering-vector phases. Every rate quantity is invariant to it.
enum class SteeringSign
{
    positive, // entries exp(+j 2 pi ...)
    negative  // entries exp(-j 2 pi ...)
};

// Surface sub-array of one side (uniform rectangular grid). Spacings in wavelengths.
struct SurfaceGrid
{
    int nx = 1;
    int ny = 1;
    double dx = 0.5;
    double dy = 0.5;

    int size() const { return nx * ny; }
};

struct ArrayGeometry
{
    int m_ap = 1;
    double d0 = 0.5; // AP element spacing in wavelengths
    SurfaceGrid grid_r;
    SurfaceGrid grid_t;
    SteeringSign sign = SteeringSign::positive;

    const SurfaceGrid &grid(Side s) const { return s == Side::R ? grid_r : grid_t; }
    SurfaceGrid &grid(Side s) { return s == Side::R ? grid_r : grid_t; }
    void validate() const;
};

// Angles of one side, radians.
struct SideAngles
{
    double elev_in = 0.0;  // elevation AoA at the surface (from the UE)
    double azim_in = 0.0;  // azimuth AoA at the surface
    double elev_out = 0.0; // elevation AoD from the surface toward the AP
    double azim_out = 0.0; // azimuth AoD
    double psi = 0.0;      // AoA at the AP array
};

struct AngleSet
{
    SideAngles r;
    SideAngles t;

    const SideAngles &side(Side s) const { return s == Side::R ? r : t; }
    SideAngles &side(Side s) { return s == Side::R ? r : t; }
};

// Large-scale parameters of one propagation link.
struct LinkParams
{
    double distance_m = 1.0;
    double alpha = 2.0;
    double c0 = 1.0;     // linear loss at 1 m
    double kappa = 0.0;  // linear Rician factor (ignored on Rayleigh links)
    bool blocked = false; // gain forced to zero

    double gain() const;
};

struct SideLinks
{
    LinkParams surface_ap; // IOS -> AP (A_i)
    LinkParams ue_surface; // UE -> IOS (g_i)
    LinkParams direct;     // UE -> AP (b_i), Rayleigh
};

struct LinkBudget
{
    SideLinks r;
    SideLinks t;

    const SideLinks &side(Side s) const { return s == Side::R ? r : t; }
    SideLinks &side(Side s) { return s == Side::R ? r : t; }
    void validate() const;
};

// Scalar large-scale quantities of one side after path loss is applied.
struct SideGains
{
    double rho_a = 0.0; // IOS -> AP path gain
    double rho_g = 0.0; // UE -> IOS path gain
    double rho_b = 0.0; // direct path gain
    double kappa_a = 0.0;
    double kappa_g = 0.0;
    int n_elements = 1;

    // rho_a rho_g kappa_a kappa_g / ((1+kappa_a)(1+kappa_g))
    double los_scale() const;
    // Per-antenna power of the zero-mean part: diagonal of the channel covariance.
    double nlos_power() const;
};

SideGains side_gains(const LinkBudget &budget, const ArrayGeometry &geometry, Side side);

struct IosPhases
{
    std::vector<double> r;
    std::vector<double> t;

    const std::vector<double> &side(Side s) const { return s == Side::R ? r : t; }
    std::vector<double> &side(Side s) { return s == Side::R ? r : t; }
};

CVec phase_diagonal(const std::vector<double> &theta);

// Exact first/second-order statistics of one side's equivalent channel.
struct SideStatistics
{
    SideGains gains;
    CVec a_ap;     // AP steering vector, length M
    CVec a_ios;    // surface departure steering vector, length N
    CVec gbar;     // surface arrival steering vector, length N
    CVec theta;    // diagonal of the phase matrix, exp(j theta_n)
    double los_gain = 0.0; // |a_ios^H Theta gbar|^2
    CVec hbar;     // mean of the equivalent channel
    CMat c_hh;     // covariance of the equivalent channel
};

struct ChannelStatistics
{
    SideStatistics r;
    SideStatistics t;
    int m_ap = 1;
    double d0 = 0.5;
    double psi_r = 0.0;
    double psi_t = 0.0;

    const SideStatistics &side(Side s) const { return s == Side::R ? r : t; }
    // cos(psi_r) != cos(psi_t), required for the tight ergodic bound's attainability claim.
    bool aoa_separable(double tol = 1e-12) const;
};

double path_loss(double c0, double distance_m, double alpha);

CVec ios_steering(double elev, double azim, const SurfaceGrid &grid,
                  SteeringSign sign = SteeringSign::positive);
CVec ap_steering(double psi, int m, double d0, SteeringSign sign = SteeringSign::positive);

double los_gain(const CVec &a_ios, const CVec &gbar, const std::vector<double> &theta);

CVec channel_mean(const LinkBudget &budget, const AngleSet &angles, const ArrayGeometry &geometry,
                  const IosPhases &phases, Side side);
CMat channel_covariance(const LinkBudget &budget, const AngleSet &angles, const ArrayGeometry &geometry,
                        const IosPhases &phases, Side side);

ChannelStatistics build_statistics(const LinkBudget &budget, const AngleSet &angles,
                                   const ArrayGeometry &geometry, const IosPhases &phases);

// Constituent draws of one side, kept for diagnostics.
struct SideDraws
{
    CVec g_tilde; // NLoS UE -> IOS, length N
    CMat a_tilde; // NLoS IOS -> AP, M x N (empty for the conditional sampler)
    CVec b;       // direct link, length M
};

struct ChannelRealization
{
    CVec h_r;
    CVec h_t;
    SideDraws draws_r;
    SideDraws draws_t;

    const CVec &h(Side s) const { return s == Side::R ? h_r : h_t; }
};

enum class ChannelSampler
{
    composed,   // draws A_tilde explicitly and composes sqrt(rho_a rho_g) A Theta g + sqrt(rho_b) b
    conditional // exact in distribution: A_tilde Theta g given g is CN(0, ||g||^2 I_M)
};

ChannelRealization sample_channels(const ChannelStatistics &stats, Rng &rng,
                                   ChannelSampler sampler = ChannelSampler::composed);

// Rebuilds h_i from the constituent draws of a composed realization.
CVec compose_channel(const SideStatistics &stats, const SideDraws &draws);

struct Point3
{
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

double distance(const Point3 &a, const Point3 &b);

// Node placement: AP, both UEs and the two halves of the surface.
struct Positions
{
    Point3 ap{0.0, -100.0, 20.0};
    Point3 ue_r{0.0, -20.0, 5.0};
    Point3 ue_t{0.0, 20.0, 5.0};
    Point3 ios_r{2.0, 0.0, 15.0};
    Point3 ios_t{-2.0, 0.0, 15.0};
};

struct LinkDistances
{
    double surface_ap_r, surface_ap_t;
    double ue_surface_r, ue_surface_t;
    double direct_r, direct_t;
};

LinkDistances distances_from_positions(const Positions &pos);

// Uniform angle draw for one statistical block. psi_r - psi_t is pinned to delta_psi.
AngleSet angles_from_scenario(const Positions &pos, double delta_psi, Rng &rng);

double wrap_two_pi(double x);

} // namespace linklab

#endif
