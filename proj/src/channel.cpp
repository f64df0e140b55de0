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

#include "linklab/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace linklab
{

void ArrayGeometry::validate() const
{
    if (m_ap < 1)
        throw std::invalid_argument("ArrayGeometry: m_ap must be >= 1");
    if (!(d0 > 0.0))
        throw std::invalid_argument("ArrayGeometry: d0 must be > 0");
    for (Side s : kSides)
    {
        const SurfaceGrid &g = grid(s);
        if (g.nx < 1 || g.ny < 1)
            throw std::invalid_argument("ArrayGeometry: surface grid counts must be >= 1");
        if (!(g.dx > 0.0) || !(g.dy > 0.0))
            throw std::invalid_argument("ArrayGeometry: surface spacings must be > 0");
    }
}

double LinkParams::gain() const
{
    if (blocked)
        return 0.0;
    return path_loss(c0, distance_m, alpha);
}

void LinkBudget::validate() const
{
    for (Side s : kSides)
    {
        const SideLinks &l = side(s);
        for (const LinkParams *p : {&l.surface_ap, &l.ue_surface, &l.direct})
        {
            if (!(p->distance_m > 0.0))
                throw std::invalid_argument("LinkBudget: distances must be > 0");
            if (!(p->alpha > 0.0))
                throw std::invalid_argument("LinkBudget: path-loss exponents must be > 0");
            if (!(p->c0 > 0.0))
                throw std::invalid_argument("LinkBudget: reference loss c0 must be > 0");
            if (!(p->kappa >= 0.0) || !std::isfinite(p->kappa))
                throw std::invalid_argument("LinkBudget: Rician factors must be finite and >= 0");
        }
    }
}

double SideGains::los_scale() const
{
    return rho_a * rho_g * kappa_a * kappa_g / ((1.0 + kappa_a) * (1.0 + kappa_g));
}

double SideGains::nlos_power() const
{
    return rho_a * rho_g * (1.0 + kappa_g + kappa_a) * n_elements / ((1.0 + kappa_a) * (1.0 + kappa_g)) + rho_b;
}

SideGains side_gains(const LinkBudget &budget, const ArrayGeometry &geometry, Side side)
{
    const SideLinks &l = budget.side(side);
    SideGains g;
    g.rho_a = l.surface_ap.gain();
    g.rho_g = l.ue_surface.gain();
    g.rho_b = l.direct.gain();
    g.kappa_a = l.surface_ap.kappa;
    g.kappa_g = l.ue_surface.kappa;
    g.n_elements = geometry.grid(side).size();
    return g;
}

CVec phase_diagonal(const std::vector<double> &theta)
{
    CVec d(static_cast<Eigen::Index>(theta.size()));
    for (std::size_t n = 0; n < theta.size(); ++n)
        d[static_cast<Eigen::Index>(n)] = std::polar(1.0, theta[n]);
    return d;
}

bool ChannelStatistics::aoa_separable(double tol) const
{
    return std::abs(std::cos(psi_r) - std::cos(psi_t)) > tol;
}

double path_loss(double c0, double distance_m, double alpha)
{
    if (!(distance_m > 0.0))
        throw std::invalid_argument("path_loss: distance must be > 0");
    return c0 * std::pow(distance_m, -alpha);
}

CVec ios_steering(double elev, double azim, const SurfaceGrid &grid, SteeringSign sign)
{
    if (grid.nx < 1 || grid.ny < 1)
        throw std::invalid_argument("ios_steering: grid counts must be >= 1");
    const double s = sign == SteeringSign::positive ? 1.0 : -1.0;
    const double ux = std::sin(elev) * std::cos(azim);
    const double uy = std::cos(elev);
    CVec v(grid.size());
    for (int ny = 0; ny < grid.ny; ++ny)
        for (int nx = 0; nx < grid.nx; ++nx)
        {
            const double phase = kTwoPi * (grid.dx * nx * ux + grid.dy * ny * uy);
            v[ny * grid.nx + nx] = std::polar(1.0, s * phase);
        }
    return v;
}

CVec ap_steering(double psi, int m, double d0, SteeringSign sign)
{
    if (m < 1)
        throw std::invalid_argument("ap_steering: m must be >= 1");
    const double s = sign == SteeringSign::positive ? 1.0 : -1.0;
    const double c = std::cos(psi);
    CVec v(m);
    for (int k = 0; k < m; ++k)
        v[k] = std::polar(1.0, s * kTwoPi * d0 * k * c);
    return v;
}

double los_gain(const CVec &a_ios, const CVec &gbar, const std::vector<double> &theta)
{
    if (a_ios.size() != gbar.size() || static_cast<std::size_t>(a_ios.size()) != theta.size())
        throw std::invalid_argument("los_gain: length mismatch");
    cd acc = 0.0;
    for (Eigen::Index n = 0; n < a_ios.size(); ++n)
        acc += std::conj(a_ios[n]) * std::polar(1.0, theta[static_cast<std::size_t>(n)]) * gbar[n];
    return std::norm(acc);
}

namespace
{

SideStatistics side_statistics(const LinkBudget &budget, const AngleSet &angles,
                               const ArrayGeometry &geometry, const IosPhases &phases, Side side)
{
    geometry.validate();
    const SurfaceGrid &grid = geometry.grid(side);
    const SideAngles &ang = angles.side(side);
    const std::vector<double> &theta = phases.side(side);
    if (theta.size() != static_cast<std::size_t>(grid.size()))
        throw std::invalid_argument("channel statistics: phase count does not match the surface size");

    SideStatistics st;
    st.gains = side_gains(budget, geometry, side);
    st.a_ap = ap_steering(ang.psi, geometry.m_ap, geometry.d0, geometry.sign);
    st.a_ios = ios_steering(ang.elev_out, ang.azim_out, grid, geometry.sign);
    st.gbar = ios_steering(ang.elev_in, ang.azim_in, grid, geometry.sign);
    st.theta = phase_diagonal(theta);
    st.los_gain = los_gain(st.a_ios, st.gbar, theta);

    const SideGains &g = st.gains;
    const cd inner = st.a_ios.adjoint() * st.theta.cwiseProduct(st.gbar);
    st.hbar = std::sqrt(g.los_scale()) * inner * st.a_ap;

    const int m = geometry.m_ap;
    const double denom = (1.0 + g.kappa_a) * (1.0 + g.kappa_g);
    const double scale = g.rho_a * g.rho_g * g.n_elements / denom;
    st.c_hh = (scale * g.kappa_a) * (st.a_ap * st.a_ap.adjoint());
    st.c_hh.diagonal().array() += scale * (1.0 + g.kappa_g) + g.rho_b;
    (void)m;
    return st;
}

} // namespace

CVec channel_mean(const LinkBudget &budget, const AngleSet &angles, const ArrayGeometry &geometry,
                  const IosPhases &phases, Side side)
{
    return side_statistics(budget, angles, geometry, phases, side).hbar;
}

CMat channel_covariance(const LinkBudget &budget, const AngleSet &angles, const ArrayGeometry &geometry,
                        const IosPhases &phases, Side side)
{
    return side_statistics(budget, angles, geometry, phases, side).c_hh;
}

ChannelStatistics build_statistics(const LinkBudget &budget, const AngleSet &angles,
                                   const ArrayGeometry &geometry, const IosPhases &phases)
{
    budget.validate();
    ChannelStatistics cs;
    cs.r = side_statistics(budget, angles, geometry, phases, Side::R);
    cs.t = side_statistics(budget, angles, geometry, phases, Side::T);
    cs.m_ap = geometry.m_ap;
    cs.d0 = geometry.d0;
    cs.psi_r = angles.r.psi;
    cs.psi_t = angles.t.psi;
    return cs;
}

namespace
{

// sqrt(kappa/(1+kappa)) and sqrt(1/(1+kappa))
std::pair<double, double> rician_weights(double kappa)
{
    return {std::sqrt(kappa / (1.0 + kappa)), std::sqrt(1.0 / (1.0 + kappa))};
}

CVec sample_side(const SideStatistics &st, int m, Rng &rng, ChannelSampler sampler, SideDraws &draws)
{
    const SideGains &g = st.gains;
    const Eigen::Index n = st.gbar.size();

    draws.g_tilde = standard_cn(n, rng);
    const auto [wg_los, wg_nlos] = rician_weights(g.kappa_g);
    const auto [wa_los, wa_nlos] = rician_weights(g.kappa_a);
    const CVec theta_g = st.theta.cwiseProduct(wg_los * st.gbar + wg_nlos * draws.g_tilde);

    CVec via_surface;
    if (sampler == ChannelSampler::composed)
    {
        draws.a_tilde = standard_cn(m, n, rng);
        via_surface = (wa_los * cd(st.a_ios.adjoint() * theta_g)) * st.a_ap + wa_nlos * (draws.a_tilde * theta_g);
    }
    else
    {
        draws.a_tilde.resize(0, 0);
        const CVec z = standard_cn(m, rng);
        via_surface = (wa_los * cd(st.a_ios.adjoint() * theta_g)) * st.a_ap + (wa_nlos * theta_g.norm()) * z;
    }

    draws.b = standard_cn(m, rng);
    return std::sqrt(g.rho_a * g.rho_g) * via_surface + std::sqrt(g.rho_b) * draws.b;
}

} // namespace

ChannelRealization sample_channels(const ChannelStatistics &stats, Rng &rng, ChannelSampler sampler)
{
    ChannelRealization out;
    out.h_r = sample_side(stats.r, stats.m_ap, rng, sampler, out.draws_r);
    out.h_t = sample_side(stats.t, stats.m_ap, rng, sampler, out.draws_t);
    return out;
}

CVec compose_channel(const SideStatistics &st, const SideDraws &draws)
{
    if (draws.a_tilde.size() == 0)
        throw std::invalid_argument("compose_channel: realization has no A_tilde draw");
    const SideGains &g = st.gains;
    const auto [wg_los, wg_nlos] = rician_weights(g.kappa_g);
    const auto [wa_los, wa_nlos] = rician_weights(g.kappa_a);
    const CVec gi = wg_los * st.gbar + wg_nlos * draws.g_tilde;
    const CMat a_bar = st.a_ap * st.a_ios.adjoint();
    const CMat ai = wa_los * a_bar + wa_nlos * draws.a_tilde;
    const CMat theta = st.theta.asDiagonal();
    return std::sqrt(g.rho_a * g.rho_g) * (ai * theta * gi) + std::sqrt(g.rho_b) * draws.b;
}

double distance(const Point3 &a, const Point3 &b)
{
    const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

LinkDistances distances_from_positions(const Positions &p)
{
    LinkDistances d{};
    d.surface_ap_r = distance(p.ios_r, p.ap);
    d.surface_ap_t = distance(p.ios_t, p.ap);
    d.ue_surface_r = distance(p.ue_r, p.ios_r);
    d.ue_surface_t = distance(p.ue_t, p.ios_t);
    d.direct_r = distance(p.ue_r, p.ap);
    d.direct_t = distance(p.ue_t, p.ap);
    for (double v : {d.surface_ap_r, d.surface_ap_t, d.ue_surface_r, d.ue_surface_t, d.direct_r, d.direct_t})
        if (!(v > 0.0))
            throw std::invalid_argument("positions: coincident nodes");
    return d;
}

double wrap_two_pi(double x)
{
    double r = std::fmod(x, kTwoPi);
    if (r < 0.0)
        r += kTwoPi;
    if (r >= kTwoPi)
        r = 0.0;
    return r;
}

AngleSet angles_from_scenario(const Positions &pos, double delta_psi, Rng &rng)
{
    distances_from_positions(pos); // rejects coincident nodes
    if (!std::isfinite(delta_psi))
        throw std::invalid_argument("angles_from_scenario: delta_psi must be finite");

    std::uniform_real_distribution<double> half(0.0, kPi);
    std::uniform_real_distribution<double> full(0.0, kTwoPi);
    AngleSet a;
    for (Side s : kSides)
    {
        SideAngles &sa = a.side(s);
        sa.elev_in = half(rng);
        sa.azim_in = full(rng);
        sa.elev_out = half(rng);
        sa.azim_out = full(rng);
    }
    a.t.psi = half(rng);
    a.r.psi = wrap_two_pi(a.t.psi + delta_psi);
    return a;
}

} // namespace linklab
