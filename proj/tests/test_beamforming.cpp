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
#include "linklab/config.hpp"
#include "linklab/validate.hpp"

#include <catch_amalgamated.hpp>

using namespace linklab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{

struct Setup
{
    SystemConfig cfg;
    ChannelStatistics stats;
    EstimatorPair models;
};

Setup make_setup(double eps, double rho_dbm, std::uint64_t seed = 1)
{
    Setup s;
    s.cfg.m_ap = 8;
    s.cfg.ios_r = s.cfg.ios_t = {4, 4, 0.5, 0.5};
    s.cfg.hw = {eps, eps, eps};
    s.cfg.rho_r_dbm = s.cfg.rho_t_dbm = rho_dbm;
    Rng rng = derive_stream(seed, {});
    const AngleSet angles = angles_from_scenario(s.cfg.coords, s.cfg.delta_psi_rad, rng);
    const ArrayGeometry geo = s.cfg.geometry();
    s.stats = build_statistics(s.cfg.link_budget(), angles, geo, optimal_ios_phases(angles, geo));
    s.models = build_estimator(s.stats, s.cfg.hw, s.cfg.powers(), s.cfg.k_pilots);
    return s;
}

InterferenceModel scaled_identity(Eigen::Index m, double s)
{
    return {HermitianPD::factor(s * CMat::Identity(m, m)), RMatrixVariant::full_error};
}

InterferenceModel random_r(Eigen::Index m, Rng &rng)
{
    const CMat b = standard_cn(m, m, rng);
    CMat r = b * b.adjoint() / static_cast<double>(m);
    r.diagonal().array() += 0.1;
    return {HermitianPD::factor(r), RMatrixVariant::full_error};
}

// Component of `v` orthogonal to `u`, relative to |v|.
double off_axis(const CVec &v, const CVec &u)
{
    const CVec resid = v - (u.dot(v) / u.squaredNorm()) * u;
    return resid.norm() / v.norm();
}

} // namespace

TEST_CASE("interference matrix with ideal hardware")
{
    const Setup s = make_setup(1.0, 10.0);
    const PowerProfile pw = s.cfg.powers();
    const InterferenceModel r = interference_matrix(s.stats, s.models, s.cfg.hw, pw);
    CMat expected = pw.rho_r * s.models.r.c_err + pw.rho_t * s.models.t.c_err;
    expected.diagonal().array() += pw.noise_var;
    CHECK((r.matrix() - expected).norm() <= 1e-12 * expected.norm());

    EstimatorPair perfect = s.models;
    for (EstimatorModel *m : {&perfect.r, &perfect.t})
        m->c_err.setZero();
    const InterferenceModel r0 = interference_matrix(s.stats, perfect, s.cfg.hw, pw);
    CHECK((r0.matrix() - pw.noise_var * CMat::Identity(8, 8)).norm() <= 1e-15 * pw.noise_var);
}

TEST_CASE("interference matrix variants differ only in the error coefficient")
{
    const Setup s = make_setup(0.9, 20.0);
    const PowerProfile pw = s.cfg.powers();
    const CMat a = interference_matrix(s.stats, s.models, s.cfg.hw, pw).matrix();
    const CMat b = interference_matrix(s.stats, s.models, s.cfg.hw, pw, RMatrixVariant::ue_scaled_error).matrix();
    const CMat diff = (pw.rho_r * 0.9 * 0.9) * s.models.r.c_err + (pw.rho_t * 0.9 * 0.9) * s.models.t.c_err;
    CHECK((a - b - diff).norm() <= 1e-12 * a.norm());
}

TEST_CASE("single-user MMSE combining is a matched filter")
{
    Rng rng = derive_stream(2, {});
    const ChannelEstimate est{standard_cn(6, rng), standard_cn(6, rng)};
    const PowerProfile pw{3.0, 0.0, 0.5};
    const CombinerSet q = mmse_combiners(est, scaled_identity(6, 0.5), HardwareProfile::ideal(), pw);
    CHECK(off_axis(q.q_r, est.h_hat_r) < 1e-10);
}

TEST_CASE("SINR is invariant to combiner scaling")
{
    Rng rng = derive_stream(3, {});
    const ChannelEstimate est{standard_cn(6, rng), standard_cn(6, rng)};
    const InterferenceModel r = random_r(6, rng);
    const HardwareProfile hw{0.95, 0.9, 0.8};
    const PowerProfile pw{2.0, 1.5, 1.0};
    const CVec q = standard_cn(6, rng);
    for (double c : {1e-3, 7.0, 1e4})
        CHECK_THAT(sinr(CVec(c * q), Side::R, est, r, hw, pw), WithinRel(sinr(q, Side::R, est, r, hw, pw), 1e-10));
}

TEST_CASE("rank-two update route gives the same MMSE combiners")
{
    Rng rng = derive_stream(4, {});
    for (int i = 0; i < 20; ++i)
    {
        const ChannelEstimate est{standard_cn(8, rng), standard_cn(8, rng)};
        const InterferenceModel r = random_r(8, rng);
        const HardwareProfile hw{0.9, 0.85, 0.95};
        const PowerProfile pw{1.0 + i, 2.0, 1.0};
        const CombinerSet a = mmse_combiners(est, r, hw, pw);
        const CombinerSet b = mmse_combiners_woodbury(est, r, hw, pw);
        CHECK((a.q_r - b.q_r).norm() <= 1e-9 * a.q_r.norm());
        CHECK((a.q_t - b.q_t).norm() <= 1e-9 * a.q_t.norm());
    }
}

TEST_CASE("MR and ZF combiners")
{
    Rng rng = derive_stream(5, {});
    const ChannelEstimate est{standard_cn(6, rng), standard_cn(6, rng)};
    const CombinerSet mr = mr_zf_combiners(est, Combiner::mr);
    CHECK(mr.q_r == est.h_hat_r);
    CHECK(mr.q_t == est.h_hat_t);

    const CombinerSet zf = mr_zf_combiners(est, Combiner::zf);
    CHECK(std::abs(zf.q_r.dot(est.h_hat_t)) < 1e-10 * zf.q_r.norm() * est.h_hat_t.norm());
    CHECK(std::abs(zf.q_t.dot(est.h_hat_r)) < 1e-10 * zf.q_t.norm() * est.h_hat_r.norm());
    CHECK(std::abs(zf.q_r.dot(est.h_hat_r) - 1.0) < 1e-10);

    CVec e1 = CVec::Zero(4), e2 = CVec::Zero(4);
    e1[0] = cd(2.0, 1.0);
    e2[2] = cd(0.0, -3.0);
    const ChannelEstimate orth{e1, e2};
    const CombinerSet zo = mr_zf_combiners(orth, Combiner::zf);
    CHECK(off_axis(zo.q_r, e1) < 1e-10);
    CHECK(off_axis(zo.q_t, e2) < 1e-10);

    CHECK_THROWS_AS(mr_zf_combiners({e1, CVec(3.0 * e1)}, Combiner::zf), LinalgError);
    CHECK_THROWS(mr_zf_combiners(est, Combiner::mmse));
}

TEST_CASE("ZF with one silent user only normalises the active one")
{
    Rng rng = derive_stream(6, {});
    const CVec h = standard_cn(5, rng);
    const ChannelEstimate est{h, CVec(2.0 * h)};
    const PowerProfile pw{1.0, 0.0, 1.0};
    const CombinerSet zf = mr_zf_combiners(est, Combiner::zf, &pw);
    CHECK((zf.q_r - h / h.squaredNorm()).norm() < 1e-14);
    CHECK(zf.q_t == est.h_hat_t);
}

TEST_CASE("matched-filter SINR of a single ideal user")
{
    Rng rng = derive_stream(7, {});
    const ChannelEstimate est{standard_cn(6, rng), standard_cn(6, rng)};
    const PowerProfile pw{2.5, 0.0, 0.4};
    const double g = sinr(est.h_hat_r, Side::R, est, scaled_identity(6, 0.4), HardwareProfile::ideal(), pw);
    CHECK_THAT(g, WithinRel(2.5 * est.h_hat_r.squaredNorm() / 0.4, 1e-12));
}

TEST_CASE("MMSE combining dominates MR and ZF")
{
    Rng rng = derive_stream(8, {});
    std::uniform_real_distribution<double> u(0.1, 10.0);
    for (int i = 0; i < 100; ++i)
    {
        const ChannelEstimate est{standard_cn(6, rng), standard_cn(6, rng)};
        const InterferenceModel r = random_r(6, rng);
        const HardwareProfile hw{0.9 + 0.1 * (i % 2), 0.9, 0.95};
        const PowerProfile pw{u(rng), u(rng), 1.0};
        const CombinerSet mmse = mmse_combiners(est, r, hw, pw);
        const CombinerSet mr = mr_zf_combiners(est, Combiner::mr);
        const CombinerSet zf = mr_zf_combiners(est, Combiner::zf);
        for (Side s : kSides)
        {
            const double best = sinr(mmse.q(s), s, est, r, hw, pw);
            CHECK(best >= sinr(mr.q(s), s, est, r, hw, pw) - 1e-12);
            CHECK(best >= sinr(zf.q(s), s, est, r, hw, pw) - 1e-12);
        }
    }
}

TEST_CASE("closed-form SE equals the SINR of the MMSE combiner")
{
    Rng rng = derive_stream(9, {});
    for (double eps : {1.0, 0.99, 0.9})
        for (int i = 0; i < 30; ++i)
        {
            const ChannelEstimate est{standard_cn(6, rng), standard_cn(6, rng)};
            const InterferenceModel r = random_r(6, rng);
            const HardwareProfile hw{eps, eps, eps};
            const PowerProfile pw{1.0 + i, 3.0, 1.0};
            const RateReport closed = se_instantaneous(est, r, hw, pw);
            const RateReport via_q = se_with_combiners(mmse_combiners(est, r, hw, pw), est, r, hw, pw);
            for (Side s : kSides)
                CHECK_THAT(via_q.side(s).se, WithinAbs(closed.side(s).se, 1e-9));
        }
}

TEST_CASE("SE without UE impairments and its saturation with them")
{
    Rng rng = derive_stream(10, {});
    const ChannelEstimate est{standard_cn(6, rng), standard_cn(6, rng)};
    const InterferenceModel r = random_r(6, rng);
    const PowerProfile pw{2.0, 3.0, 1.0};
    const HardwareProfile ideal_ue{0.95, 1.0, 1.0};
    const RateReport rep = se_instantaneous(est, r, ideal_ue, pw);
    const std::array<double, 2> z = zeta(est, r, ideal_ue, pw);
    CHECK_THAT(rep.r.se, WithinAbs(std::log2(1.0 + 2.0 * 0.95 * z[0]), 1e-12));
    CHECK_THAT(rep.t.se, WithinAbs(std::log2(1.0 + 3.0 * 0.95 * z[1]), 1e-12));

    const ChannelEstimate big{1e6 * est.h_hat_r, 1e6 * est.h_hat_t};
    const RateReport sat = se_instantaneous(big, r, {1.0, 0.9, 0.9}, pw);
    CHECK_THAT(sat.r.se, WithinAbs(std::log2(10.0), 1e-6));
    CHECK_THAT(sat.t.se, WithinAbs(std::log2(10.0), 1e-6));
}

TEST_CASE("cross-term parts reproduce zeta")
{
    Rng rng = derive_stream(11, {});
    const ChannelEstimate est{standard_cn(6, rng), standard_cn(6, rng)};
    const InterferenceModel r = random_r(6, rng);
    const HardwareProfile hw{0.9, 0.9, 0.9};
    const PowerProfile pw{2.0, 3.0, 1.0};
    const auto [cross, self] = cross_term_parts(est, r, hw, pw);
    CHECK(cross >= 0.0);
    CHECK_THAT(self - cross, WithinRel(zeta(est, r, hw, pw)[0], 1e-12));
}

TEST_CASE("SINR rejects degenerate inputs")
{
    Rng rng = derive_stream(12, {});
    const ChannelEstimate est{standard_cn(4, rng), standard_cn(4, rng)};
    const InterferenceModel r = random_r(4, rng);
    const PowerProfile pw{1.0, 1.0, 1.0};
    CHECK_THROWS(sinr(CVec::Zero(4), Side::R, est, r, HardwareProfile::ideal(), pw));
    CHECK_THROWS(sinr(CVec::Ones(5), Side::R, est, r, HardwareProfile::ideal(), pw));
}

TEST_CASE("optimal phases vanish when arrival and departure coincide")
{
    AngleSet a;
    for (Side s : kSides)
    {
        SideAngles &sa = a.side(s);
        sa.elev_in = sa.elev_out = 0.8;
        sa.azim_in = sa.azim_out = 2.1;
    }
    const ArrayGeometry geo{4, 0.5, {5, 3, 0.5, 0.5}, {2, 2, 0.5, 0.5}, SteeringSign::positive};
    const IosPhases ph = optimal_ios_phases(a, geo);
    CHECK(ph.r.size() == 15);
    CHECK(ph.t.size() == 4);
    for (Side s : kSides)
        for (double t : ph.side(s))
            CHECK(std::min(t, kTwoPi - t) < 1e-12);
}

TEST_CASE("optimal phases reach the full array gain and beat random phases")
{
    const ArrayGeometry geo{4, 0.5, {5, 4, 0.5, 0.5}, {5, 4, 0.5, 0.5}, SteeringSign::positive};
    Rng rng = derive_stream(13, {});
    for (int i = 0; i < 100; ++i)
    {
        const AngleSet a = angles_from_scenario(Positions{}, 0.1 * kPi, rng);
        const IosPhases best = optimal_ios_phases(a, geo);
        const IosPhases rnd = random_ios_phases(geo, rng);
        for (Side s : kSides)
        {
            const SideAngles &sa = a.side(s);
            const CVec ai = ios_steering(sa.elev_out, sa.azim_out, geo.grid(s));
            const CVec gi = ios_steering(sa.elev_in, sa.azim_in, geo.grid(s));
            const double opt = los_gain(ai, gi, best.side(s));
            CHECK_THAT(opt, WithinRel(400.0, 1e-9));
            CHECK(opt >= los_gain(ai, gi, rnd.side(s)));
        }
    }
}

TEST_CASE("closed-form phases match exhaustive search on tiny surfaces")
{
    Rng rng = derive_stream(14, {});
    const SurfaceGrid g{2, 2, 0.5, 0.5};
    const ArrayGeometry geo{4, 0.5, g, g, SteeringSign::positive};
    const AngleSet a = angles_from_scenario(Positions{}, 0.1 * kPi, rng);
    const CVec ai = ios_steering(a.r.elev_out, a.r.azim_out, g);
    const CVec gi = ios_steering(a.r.elev_in, a.r.azim_in, g);
    CHECK_THAT(los_gain(ai, gi, optimal_ios_phases(a, geo).r), WithinAbs(brute_force_los_gain(ai, gi), 16e-6));
}

TEST_CASE("random phases are reproducible and in range")
{
    const ArrayGeometry geo{4, 0.5, {4, 4, 0.5, 0.5}, {3, 2, 0.5, 0.5}, SteeringSign::positive};
    Rng a = derive_stream(15, {});
    Rng b = derive_stream(15, {});
    const IosPhases pa = random_ios_phases(geo, a);
    const IosPhases pb = random_ios_phases(geo, b);
    CHECK(pa.r == pb.r);
    CHECK(pa.t == pb.t);
    for (Side s : kSides)
        for (double t : pa.side(s))
            CHECK((t >= 0.0 && t < kTwoPi));
}

TEST_CASE("loose bound growth factors and saturation")
{
    SideGains g;
    g.rho_a = 2.0;
    g.rho_g = 3.0;
    g.n_elements = 100;
    CHECK_THAT(loose_bound_eta(g), WithinRel(600.0, 1e-14));
    g.kappa_a = g.kappa_g = 1e9;
    CHECK_THAT(loose_bound_eta(g), WithinRel(6.0 * 1e4, 1e-6));
    SideGains g2 = g;
    g2.n_elements = 200;
    CHECK_THAT(loose_bound_eta(g2) / loose_bound_eta(g), WithinRel(4.0, 1e-6));

    const std::array<SideGains, 2> both{g, g};
    const LooseBound lb = loose_upper_bound(both, {1.0, 0.9, 0.99}, {1e9, 1e9, 1.0}, 100, Side::R);
    CHECK_THAT(lb.se, WithinAbs(ue_saturation(0.9), 1e-6));
    const LooseBound lt = loose_upper_bound(both, {1.0, 0.9, 0.99}, {1e9, 1e9, 1.0}, 100, Side::T);
    CHECK_THAT(lt.se, WithinAbs(ue_saturation(0.99), 1e-6));
    CHECK(loose_upper_bound(both, {1.0, 0.9, 0.9}, {0.0, 1.0, 1.0}, 100, Side::R).se == 0.0);
}

TEST_CASE("tight bound without pilot power keeps only the LoS term")
{
    Setup s = make_setup(1.0, 10.0);
    PowerProfile pw = s.cfg.powers();
    pw.rho_r = 0.0;
    const EstimatorPair em = build_estimator(s.stats, s.cfg.hw, pw, s.cfg.k_pilots);
    const InterferenceModel r = interference_matrix(s.stats, em, s.cfg.hw, pw);
    const BoundResult b = ergodic_se_upper_bound(s.stats, em, r, s.cfg.hw, pw, Side::R);
    const SideStatistics &st = s.stats.r;
    const double los = st.gains.los_scale() * st.los_gain * st.a_ap.dot(r.r.solve(st.a_ap)).real();
    CHECK_THAT(b.zeta, WithinRel(los, 1e-12));
    CHECK(b.se == 0.0);
}

TEST_CASE("tight bound grows with the LoS gain")
{
    const Setup s = make_setup(1.0, 10.0);
    const PowerProfile pw = s.cfg.powers();
    const InterferenceModel r = interference_matrix(s.stats, s.models, s.cfg.hw, pw);
    const BoundResult full = ergodic_se_upper_bound(s.stats, s.models, r, s.cfg.hw, pw, Side::R);
    ChannelStatistics weaker = s.stats;
    weaker.r.los_gain *= 0.25;
    const BoundResult part = ergodic_se_upper_bound(weaker, s.models, r, s.cfg.hw, pw, Side::R);
    CHECK(full.se > part.se);
    CHECK_FALSE(full.condition_violated);
}

TEST_CASE("hardware scaling helpers")
{
    const ScalingHelpers h = scaling_helpers({0.9, 0.9, 0.99}, 100);
    CHECK_THAT(h.extra_antennas, WithinRel(100.0 / 9.0, 1e-12));
    CHECK_THAT(h.ue_saturation_r, WithinAbs(3.3219, 1e-4));
    CHECK_THAT(2.0 * ue_saturation(0.9), WithinAbs(6.644, 1e-3));
    CHECK_THAT(2.0 * ue_saturation(0.99), WithinAbs(2.0 * std::log2(100.0), 1e-9));
    CHECK_THAT(2.0 * ue_saturation(0.99), WithinAbs(13.2877, 1e-4));
    CHECK(std::isinf(ue_saturation(1.0)));
    CHECK_THROWS(scaling_helpers({0.0, 0.9, 0.9}, 100));
}

TEST_CASE("the data autocorrelation moment check separates the two R variants")
{
    const OracleResult good = oracle_data_autocorrelation(7, 20000, RMatrixVariant::full_error);
    const OracleResult bad = oracle_data_autocorrelation(7, 20000, RMatrixVariant::ue_scaled_error);
    CHECK(good.value < 0.07);
    CHECK(bad.value > 0.3);
    CHECK_FALSE(bad.pass);
}
