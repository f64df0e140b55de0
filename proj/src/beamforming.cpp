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

#include "linklab/beamforming.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace linklab
{

double ap_distortion_scalar(const SideStatistics &s)
{
    return s.gains.nlos_power() + s.gains.los_scale() * s.los_gain;
}

InterferenceModel interference_matrix(const ChannelStatistics &stats, const EstimatorPair &models,
                                      const HardwareProfile &hw, const PowerProfile &pw, RMatrixVariant variant)
{
    hw.validate();
    pw.validate();
    const Eigen::Index m = stats.r.c_hh.rows();
    CMat r = CMat::Zero(m, m);
    double diag = pw.noise_var;
    for (Side s : kSides)
    {
        double coef = pw.rho(s) * hw.eps_v;
        if (variant == RMatrixVariant::ue_scaled_error)
            coef *= 1.0 - hw.eps_u(s);
        r += coef * models.side(s).c_err;
        diag += pw.rho(s) * (1.0 - hw.eps_v) * ap_distortion_scalar(stats.side(s));
    }
    r.diagonal().array() += diag;
    return {HermitianPD::factor(hermitian_part(r)), variant};
}

namespace
{

void check_dims(const ChannelEstimate &est, const InterferenceModel &r)
{
    if (est.h_hat_r.size() != r.r.dim() || est.h_hat_t.size() != r.r.dim())
        throw std::invalid_argument("beamforming: estimate and R dimensions differ");
}

} // namespace

CombinerSet mmse_combiners(const ChannelEstimate &est, const InterferenceModel &r, const HardwareProfile &hw,
                           const PowerProfile &pw)
{
    check_dims(est, r);
    const CVec &hr = est.h_hat_r, &ht = est.h_hat_t;
    CMat s = r.matrix();
    s += (pw.rho_r * hw.eps_v) * (hr * hr.adjoint()) + (pw.rho_t * hw.eps_v) * (ht * ht.adjoint());
    const HermitianPD sf = HermitianPD::factor(hermitian_part(s));
    CombinerSet q;
    q.method = Combiner::mmse;
    q.q_r = (pw.rho_r * hw.eps_v * hw.eps_ur) * herm_solve(sf, hr);
    q.q_t = (pw.rho_t * hw.eps_v * hw.eps_ut) * herm_solve(sf, ht);
    return q;
}

CombinerSet mmse_combiners_woodbury(const ChannelEstimate &est, const InterferenceModel &r,
                                    const HardwareProfile &hw, const PowerProfile &pw)
{
    check_dims(est, r);
    const Eigen::Index m = r.r.dim();
    CMat f1(m, 2);
    f1.col(0) = est.h_hat_r;
    f1.col(1) = est.h_hat_t;
    CMat f2 = CMat::Zero(2, 2);
    f2(0, 0) = pw.rho_r * hw.eps_v;
    f2(1, 1) = pw.rho_t * hw.eps_v;
    const CMat inv = woodbury_inverse(r.r, f1, f2, f1.adjoint());
    CombinerSet q;
    q.method = Combiner::mmse;
    q.q_r = (pw.rho_r * hw.eps_v * hw.eps_ur) * (inv * est.h_hat_r);
    q.q_t = (pw.rho_t * hw.eps_v * hw.eps_ut) * (inv * est.h_hat_t);
    return q;
}

CombinerSet mr_zf_combiners(const ChannelEstimate &est, Combiner method, const PowerProfile *pw)
{
    if (est.h_hat_r.size() != est.h_hat_t.size())
        throw std::invalid_argument("mr_zf_combiners: estimate lengths differ");
    CombinerSet q;
    q.method = method;
    if (method == Combiner::mr)
    {
        q.q_r = est.h_hat_r;
        q.q_t = est.h_hat_t;
        return q;
    }
    if (method != Combiner::zf)
        throw std::invalid_argument("mr_zf_combiners: method must be MR or ZF");

    const bool active_r = pw == nullptr || pw->rho_r > 0.0;
    const bool active_t = pw == nullptr || pw->rho_t > 0.0;
    if (active_r && active_t)
    {
        CMat h(est.h_hat_r.size(), 2);
        h.col(0) = est.h_hat_r;
        h.col(1) = est.h_hat_t;
        const CMat gram = hermitian_part(h.adjoint() * h);
        Eigen::SelfAdjointEigenSolver<CMat> es(gram, Eigen::EigenvaluesOnly);
        const double lo = es.eigenvalues()(0), hi = es.eigenvalues()(1);
        if (!(lo > 0.0) || hi / lo > kZfConditionLimit)
            throw LinalgError("ZF: estimated channel matrix is rank deficient");
        const CMat qm = h * gram.inverse();
        q.q_r = qm.col(0);
        q.q_t = qm.col(1);
        return q;
    }
    // single transmitting user: the pseudo-inverse of one column
    q.q_r = est.h_hat_r;
    q.q_t = est.h_hat_t;
    for (Side s : kSides)
    {
        if (!(s == Side::R ? active_r : active_t))
            continue;
        const CVec &h = est.h_hat(s);
        const double n2 = h.squaredNorm();
        if (!(n2 > 0.0))
            throw LinalgError("ZF: estimated channel is zero");
        (s == Side::R ? q.q_r : q.q_t) = h / n2;
    }
    return q;
}

double sinr(const CVec &q, Side side, const ChannelEstimate &est, const InterferenceModel &r,
            const HardwareProfile &hw, const PowerProfile &pw)
{
    check_dims(est, r);
    if (q.size() != r.r.dim())
        throw std::invalid_argument("sinr: combiner length mismatch");
    if (q.squaredNorm() == 0.0)
        throw std::invalid_argument("sinr: combiner is zero");
    const Side j = other(side);
    const double rho_i = pw.rho(side), rho_j = pw.rho(j);
    const double eu = hw.eps_u(side);
    const double qhi = std::norm(q.dot(est.h_hat(side)));
    const double qhj = std::norm(q.dot(est.h_hat(j)));
    const double qrq = q.dot(r.matrix() * q).real();
    const double num = rho_i * hw.eps_v * eu * qhi;
    const double den = rho_i * hw.eps_v * (1.0 - eu) * qhi + rho_j * hw.eps_v * qhj + qrq;
    if (!(den > 0.0))
        throw std::domain_error("sinr: zero interference-plus-noise power");
    return num / den;
}

std::array<double, 2> zeta(const ChannelEstimate &est, const InterferenceModel &r, const HardwareProfile &hw,
                           const PowerProfile &pw)
{
    check_dims(est, r);
    const CVec yr = r.r.solve(est.h_hat_r);
    const CVec yt = r.r.solve(est.h_hat_t);
    const double rr = est.h_hat_r.dot(yr).real();
    const double tt = est.h_hat_t.dot(yt).real();
    const double rt = std::norm(est.h_hat_r.dot(yt));
    const double zr = rr - pw.rho_t * hw.eps_v * rt / (1.0 + pw.rho_t * hw.eps_v * tt);
    const double zt = tt - pw.rho_r * hw.eps_v * rt / (1.0 + pw.rho_r * hw.eps_v * rr);
    return {std::max(zr, 0.0), std::max(zt, 0.0)};
}

double se_from_zeta(double z, double rho, double eps_v, double eps_u)
{
    const double g = rho * eps_v * eps_u * z / (1.0 + rho * eps_v * (1.0 - eps_u) * z);
    return std::log2(1.0 + g);
}

RateReport se_instantaneous(const ChannelEstimate &est, const InterferenceModel &r, const HardwareProfile &hw,
                            const PowerProfile &pw)
{
    const std::array<double, 2> z = zeta(est, r, hw, pw);
    RateReport rep;
    for (Side s : kSides)
    {
        SideRate &sr = s == Side::R ? rep.r : rep.t;
        const double rho = pw.rho(s), eu = hw.eps_u(s);
        sr.zeta = z[s == Side::R ? 0 : 1];
        sr.sinr = rho * hw.eps_v * eu * sr.zeta / (1.0 + rho * hw.eps_v * (1.0 - eu) * sr.zeta);
        sr.se = std::log2(1.0 + sr.sinr);
    }
    return rep;
}

RateReport se_with_combiners(const CombinerSet &q, const ChannelEstimate &est, const InterferenceModel &r,
                             const HardwareProfile &hw, const PowerProfile &pw)
{
    RateReport rep;
    for (Side s : kSides)
    {
        SideRate &sr = s == Side::R ? rep.r : rep.t;
        if (pw.rho(s) == 0.0 || q.q(s).squaredNorm() == 0.0)
            continue;
        sr.sinr = sinr(q.q(s), s, est, r, hw, pw);
        sr.se = std::log2(1.0 + sr.sinr);
    }
    return rep;
}

IosPhases optimal_ios_phases(const AngleSet &angles, const ArrayGeometry &geometry)
{
    const double sgn = geometry.sign == SteeringSign::positive ? 1.0 : -1.0;
    IosPhases out;
    for (Side s : kSides)
    {
        const SurfaceGrid &g = geometry.grid(s);
        const SideAngles &a = angles.side(s);
        // phase of the departure response minus phase of the arrival response
        const double ux = std::sin(a.elev_out) * std::cos(a.azim_out) - std::sin(a.elev_in) * std::cos(a.azim_in);
        const double uy = std::cos(a.elev_out) - std::cos(a.elev_in);
        std::vector<double> &th = out.side(s);
        th.resize(static_cast<std::size_t>(g.size()));
        for (int ny = 0; ny < g.ny; ++ny)
            for (int nx = 0; nx < g.nx; ++nx)
                th[static_cast<std::size_t>(ny * g.nx + nx)] =
                    wrap_two_pi(sgn * kTwoPi * (g.dx * nx * ux + g.dy * ny * uy));
    }
    return out;
}

IosPhases random_ios_phases(const ArrayGeometry &geometry, Rng &rng)
{
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    IosPhases out;
    for (Side s : kSides)
    {
        std::vector<double> &th = out.side(s);
        th.resize(static_cast<std::size_t>(geometry.grid(s).size()));
        for (double &x : th)
            x = u(rng);
    }
    return out;
}

BoundResult ergodic_se_upper_bound(const ChannelStatistics &stats, const EstimatorPair &models,
                                   const InterferenceModel &r, const HardwareProfile &hw, const PowerProfile &pw,
                                   Side side)
{
    const SideStatistics &st = stats.side(side);
    const EstimatorModel &em = models.side(side);
    if (st.a_ap.size() != r.r.dim())
        throw std::invalid_argument("ergodic_se_upper_bound: dimension mismatch");
    BoundResult b;
    b.condition_violated = !stats.aoa_separable();
    const double los = st.gains.los_scale() * st.los_gain;
    double z = 0.0;
    if (los > 0.0)
        z += los * st.a_ap.dot(r.r.solve(st.a_ap)).real();
    if (em.c_hat.cwiseAbs().maxCoeff() > 0.0)
        z += r.r.solve(em.c_hat).trace().real();
    b.zeta = z;
    b.se = se_from_zeta(z, pw.rho(side), hw.eps_v, hw.eps_u(side));
    return b;
}

double loose_bound_eta(const SideGains &g)
{
    const double n = g.n_elements;
    return g.rho_a * g.rho_g * (g.kappa_a * g.kappa_g * n * n + (1.0 + g.kappa_g + g.kappa_a) * n) /
               ((1.0 + g.kappa_a) * (1.0 + g.kappa_g)) +
           g.rho_b;
}

LooseBound loose_upper_bound(const std::array<SideGains, 2> &gains, const HardwareProfile &hw,
                             const PowerProfile &pw, int m, Side side)
{
    hw.validate();
    pw.validate();
    if (m < 1)
        throw std::invalid_argument("loose_upper_bound: m must be >= 1");
    const double eta_r = loose_bound_eta(gains[0]);
    const double eta_t = loose_bound_eta(gains[1]);
    const double eta_i = side == Side::R ? eta_r : eta_t;
    const double rho_i = pw.rho(side), eu = hw.eps_u(side);
    const double num = rho_i * hw.eps_v * eu * m * eta_i;
    const double den = rho_i * hw.eps_v * (1.0 - eu) * m * eta_i + pw.rho_r * (1.0 - hw.eps_v) * eta_r +
                       pw.rho_t * (1.0 - hw.eps_v) * eta_t + pw.noise_var;
    LooseBound lb;
    lb.eta = eta_i;
    if (num == 0.0)
        lb.se = 0.0;
    else if (!(den > 0.0))
        lb.se = std::numeric_limits<double>::infinity();
    else
        lb.se = std::log2(1.0 + num / den);
    return lb;
}

double ue_saturation(double eps_u)
{
    if (!(eps_u >= 0.0 && eps_u <= 1.0))
        throw std::invalid_argument("ue_saturation: eps_u must lie in [0,1]");
    if (eps_u == 1.0)
        return std::numeric_limits<double>::infinity();
    return std::log2(1.0 + eps_u / (1.0 - eps_u));
}

ScalingHelpers scaling_helpers(const HardwareProfile &hw, int m)
{
    hw.validate();
    if (!(hw.eps_v > 0.0))
        throw std::invalid_argument("scaling_helpers: eps_v must be > 0");
    return {(1.0 - hw.eps_v) * m / hw.eps_v, ue_saturation(hw.eps_ur), ue_saturation(hw.eps_ut)};
}

std::pair<double, double> cross_term_parts(const ChannelEstimate &est, const InterferenceModel &r,
                                           const HardwareProfile &hw, const PowerProfile &pw)
{
    check_dims(est, r);
    const CVec yr = r.r.solve(est.h_hat_r);
    const CVec yt = r.r.solve(est.h_hat_t);
    const double a = pw.rho_t * hw.eps_v;
    const double num = a * std::norm(est.h_hat_r.dot(yt)) / (1.0 + a * est.h_hat_t.dot(yt).real());
    return {num, est.h_hat_r.dot(yr).real()};
}

} // namespace linklab
