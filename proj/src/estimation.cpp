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

#include "linklab/estimation.hpp"

#include <cmath>
#include <stdexcept>
#include <tuple>

namespace linklab
{

namespace
{

bool in_unit_interval(double x) { return x >= 0.0 && x <= 1.0; }

} // namespace

void HardwareProfile::validate() const
{
    if (!in_unit_interval(eps_v) || !in_unit_interval(eps_ur) || !in_unit_interval(eps_ut))
        throw std::invalid_argument("HardwareProfile: quality factors must lie in [0,1]");
}

void PowerProfile::validate() const
{
    if (!(rho_r >= 0.0) || !(rho_t >= 0.0) || !std::isfinite(rho_r) || !std::isfinite(rho_t))
        throw std::invalid_argument("PowerProfile: transmit powers must be finite and >= 0");
    if (!(noise_var >= 0.0) || !std::isfinite(noise_var))
        throw std::invalid_argument("PowerProfile: noise variance must be finite and >= 0");
}

PilotBook make_pilots(int k)
{
    if (k < 2)
        throw std::invalid_argument("make_pilots: pilot length must be >= 2");
    PilotBook p;
    p.k = k;
    p.tau_r = CVec::Ones(k);
    p.tau_t.resize(k);
    for (int n = 0; n < k; ++n)
    {
        // exact values at the quarter points keep the k=2 and k=4 books integral
        const int q = (4 * n) % (4 * k);
        if (q % k == 0)
        {
            static const cd quarter[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
            p.tau_t[n] = quarter[q / k];
        }
        else
            p.tau_t[n] = std::polar(1.0, -kTwoPi * n / k);
    }
    return p;
}

CMat simulate_pilot_rx(const CVec &h_r, const CVec &h_t, const HardwareProfile &hw, const PilotBook &pilots,
                       const PowerProfile &pw, Rng &rng)
{
    hw.validate();
    pw.validate();
    if (h_r.size() != h_t.size())
        throw std::invalid_argument("simulate_pilot_rx: channel lengths differ");
    const Eigen::Index m = h_r.size();
    const double a_r = std::sqrt(pw.rho_r * hw.eps_v * hw.eps_ur);
    const double a_t = std::sqrt(pw.rho_t * hw.eps_v * hw.eps_ut);
    const double u_r = std::sqrt(pw.rho_r * hw.eps_v * (1.0 - hw.eps_ur));
    const double u_t = std::sqrt(pw.rho_t * hw.eps_v * (1.0 - hw.eps_ut));
    const double v_r = std::sqrt(pw.rho_r * (1.0 - hw.eps_v));
    const double v_t = std::sqrt(pw.rho_t * (1.0 - hw.eps_v));
    const double sw = std::sqrt(pw.noise_var);

    CMat x(m, pilots.k);
    for (int k = 0; k < pilots.k; ++k)
    {
        const cd ur = standard_cn(rng);
        const cd ut = standard_cn(rng);
        const CVec vr = standard_cn(m, rng);
        const CVec vt = standard_cn(m, rng);
        const CVec w = standard_cn(m, rng);
        x.col(k) = (a_r * pilots.tau_r[k] + u_r * ur) * h_r + (a_t * pilots.tau_t[k] + u_t * ut) * h_t +
                   v_r * h_r.cwiseProduct(vr) + v_t * h_t.cwiseProduct(vt) + sw * w;
    }
    return x;
}

CVec despread(const CMat &observations, const PilotBook &pilots, Side side)
{
    if (observations.cols() != pilots.k)
        throw std::invalid_argument("despread: observation count does not match the pilot length");
    return observations * pilots.tau(side).conjugate() / std::sqrt(static_cast<double>(pilots.k));
}

std::pair<CVec, CVec> sample_despread(const CVec &h_r, const CVec &h_t, const HardwareProfile &hw, int k,
                                      const PowerProfile &pw, Rng &rng)
{
    hw.validate();
    pw.validate();
    if (k < 2)
        throw std::invalid_argument("sample_despread: pilot length must be >= 2");
    if (h_r.size() != h_t.size())
        throw std::invalid_argument("sample_despread: channel lengths differ");
    const Eigen::Index m = h_r.size();
    const double u_r = std::sqrt(pw.rho_r * hw.eps_v * (1.0 - hw.eps_ur));
    const double u_t = std::sqrt(pw.rho_t * hw.eps_v * (1.0 - hw.eps_ut));
    const double v_r = std::sqrt(pw.rho_r * (1.0 - hw.eps_v));
    const double v_t = std::sqrt(pw.rho_t * (1.0 - hw.eps_v));
    const double sw = std::sqrt(pw.noise_var);

    // Projections of the i.i.d. per-slot terms on the two orthonormal pilot
    // directions are independent standard draws.
    auto one = [&](const CVec &h_own, const CVec &h_other, double rho_own, double eps_u_own,
                   double u_own, double u_other, double v_own, double v_other) {
        const double a = std::sqrt(k * rho_own * hw.eps_v * eps_u_own);
        const cd uo = standard_cn(rng);
        const cd ux = standard_cn(rng);
        const CVec vo = standard_cn(m, rng);
        const CVec vx = standard_cn(m, rng);
        const CVec w = standard_cn(m, rng);
        return CVec((a + u_own * uo) * h_own + (u_other * ux) * h_other + v_own * h_own.cwiseProduct(vo) +
                    v_other * h_other.cwiseProduct(vx) + sw * w);
    };
    CVec x_r = one(h_r, h_t, pw.rho_r, hw.eps_ur, u_r, u_t, v_r, v_t);
    CVec x_t = one(h_t, h_r, pw.rho_t, hw.eps_ut, u_t, u_r, v_t, v_r);
    return {std::move(x_r), std::move(x_t)};
}

CMat pilot_covariance(const ChannelStatistics &stats, const HardwareProfile &hw, const PowerProfile &pw, int k,
                      Side side)
{
    if (k < 2)
        throw std::invalid_argument("pilot_covariance: pilot length must be >= 2");
    const SideStatistics &si = stats.side(side);
    const SideStatistics &sj = stats.side(other(side));
    const double rho_i = pw.rho(side), rho_j = pw.rho(other(side));
    const double eu_i = hw.eps_u(side), eu_j = hw.eps_u(other(side));
    const double ev = hw.eps_v;

    const double mean_pow_i = si.gains.los_scale() * si.los_gain;
    const double mean_pow_j = sj.gains.los_scale() * sj.los_gain;

    CMat c = (rho_i * ev * (1.0 + (k - 1) * eu_i)) * si.c_hh + (rho_j * ev * (1.0 - eu_j)) * sj.c_hh;
    c.diagonal() += (rho_i * (1.0 - ev)) * si.c_hh.diagonal() + (rho_j * (1.0 - ev)) * sj.c_hh.diagonal();
    c += (rho_i * ev * (1.0 - eu_i)) * (si.hbar * si.hbar.adjoint()) +
         (rho_j * ev * (1.0 - eu_j)) * (sj.hbar * sj.hbar.adjoint());
    c.diagonal().array() += rho_i * (1.0 - ev) * mean_pow_i + rho_j * (1.0 - ev) * mean_pow_j + pw.noise_var;
    return hermitian_part(c);
}

namespace
{

EstimatorModel build_side(const ChannelStatistics &stats, const HardwareProfile &hw, const PowerProfile &pw, int k,
                          Side side)
{
    const SideStatistics &si = stats.side(side);
    const double amp = std::sqrt(k * pw.rho(side) * hw.eps_v * hw.eps_u(side));
    const Eigen::Index m = si.hbar.size();

    EstimatorModel e;
    e.hbar = si.hbar;
    e.c_hh = si.c_hh;
    e.x_mean = amp * si.hbar;
    e.c_hx = amp * si.c_hh;
    e.c_xx = pilot_covariance(stats, hw, pw, k, side);

    if (amp == 0.0 || e.c_hh.cwiseAbs().maxCoeff() == 0.0)
    {
        e.gain = CMat::Zero(m, m);
        e.c_hat = CMat::Zero(m, m);
        e.c_err = e.c_hh;
        return e;
    }

    const HermitianPD cxx = HermitianPD::factor(e.c_xx);
    // gain = C_hx C_xx^-1 = (C_xx^-1 C_hx^H)^H
    e.gain = herm_solve(cxx, CMat(e.c_hx.adjoint())).adjoint();
    e.c_hat = hermitian_part(e.gain * e.c_hx.adjoint());
    e.c_err = hermitian_part(e.c_hh - e.c_hat);
    return e;
}

} // namespace

EstimatorPair build_estimator(const ChannelStatistics &stats, const HardwareProfile &hw, const PowerProfile &pw,
                              int k)
{
    hw.validate();
    pw.validate();
    return {build_side(stats, hw, pw, k, Side::R), build_side(stats, hw, pw, k, Side::T)};
}

CVec lmmse_estimate(const EstimatorModel &model, const CVec &x)
{
    if (x.size() != model.x_mean.size())
        throw std::invalid_argument("lmmse_estimate: observation length mismatch");
    return model.hbar + model.gain * (x - model.x_mean);
}

ChannelEstimate estimate_channels(const EstimatorPair &models, const CVec &x_r, const CVec &x_t)
{
    return {lmmse_estimate(models.r, x_r), lmmse_estimate(models.t, x_t)};
}

double nmse_side(const EstimatorModel &model)
{
    const double prior = model.c_hh.trace().real();
    if (!(prior > 0.0))
        throw std::domain_error("nmse: prior covariance has zero trace");
    return model.c_err.trace().real() / prior;
}

double nmse_theoretical(const EstimatorPair &models)
{
    return 0.5 * (nmse_side(models.r) + nmse_side(models.t));
}

double nmse_monte_carlo(const NmseScenario &sc, int trials, Rng &rng)
{
    if (trials < 1)
        throw std::invalid_argument("nmse_monte_carlo: trials must be >= 1");
    if (sc.stats == nullptr || sc.models == nullptr)
        throw std::invalid_argument("nmse_monte_carlo: statistics and estimator models are required");
    const double tr_r = sc.stats->r.c_hh.trace().real();
    const double tr_t = sc.stats->t.c_hh.trace().real();
    if (!(tr_r > 0.0) || !(tr_t > 0.0))
        throw std::domain_error("nmse: prior covariance has zero trace");

    const PilotBook pilots = make_pilots(sc.k);
    KahanSum acc;
    for (int n = 0; n < trials; ++n)
    {
        const ChannelRealization ch = sample_channels(*sc.stats, rng, sc.channel_sampler);
        CVec x_r, x_t;
        if (sc.pilot_sampler == PilotSampler::slots)
        {
            const CMat obs = simulate_pilot_rx(ch.h_r, ch.h_t, sc.truth, pilots, sc.powers, rng);
            x_r = despread(obs, pilots, Side::R);
            x_t = despread(obs, pilots, Side::T);
        }
        else
            std::tie(x_r, x_t) = sample_despread(ch.h_r, ch.h_t, sc.truth, sc.k, sc.powers, rng);
        const ChannelEstimate est = estimate_channels(*sc.models, x_r, x_t);
        acc.add(0.5 * ((ch.h_r - est.h_hat_r).squaredNorm() / tr_r + (ch.h_t - est.h_hat_t).squaredNorm() / tr_t));
    }
    return acc.value() / trials;
}

} // namespace linklab
