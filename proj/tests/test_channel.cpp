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
#include "linklab/channel.hpp"

#include <catch_amalgamated.hpp>

using namespace linklab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{

// Unit-gain links on both sides; callers adjust what they need.
LinkBudget unit_budget(double kappa)
{
    LinkBudget b;
    for (Side s : kSides)
    {
        SideLinks &l = b.side(s);
        l.surface_ap = {1.0, 2.0, 1.0, kappa, false};
        l.ue_surface = {1.0, 2.0, 1.0, kappa, false};
        l.direct = {1.0, 2.0, 1.0, 0.0, true};
    }
    return b;
}

ArrayGeometry small_geometry(int m, int nx, int ny)
{
    return {m, 0.5, {nx, ny, 0.5, 0.5}, {nx, ny, 0.5, 0.5}, SteeringSign::positive};
}

AngleSet draw_angles(std::uint64_t seed)
{
    Rng rng = derive_stream(seed, {});
    return angles_from_scenario(Positions{}, 0.1 * kPi, rng);
}

} // namespace

TEST_CASE("path loss follows the power law")
{
    CHECK_THAT(path_loss(1e-3, 1.0, 2.2), WithinRel(1e-3, 1e-14));
    CHECK_THAT(path_loss(1e-3, 100.0, 2.0), WithinRel(1e-7, 1e-12));
    CHECK_THAT(path_loss(1e-3, 10.0, 2.2), WithinRel(6.3096e-6, 1e-4));
    CHECK_THROWS(path_loss(1e-3, 0.0, 2.0));
}

TEST_CASE("surface steering vectors")
{
    const CVec one = ios_steering(0.3, 1.1, {1, 1, 0.5, 0.5});
    REQUIRE(one.size() == 1);
    CHECK(std::abs(one[0] - 1.0) < 1e-15);

    const CVec endfire = ios_steering(kPi / 2, 0.0, {2, 1, 0.5, 0.5});
    CHECK(std::abs(endfire[0] - 1.0) < 1e-15);
    CHECK(std::abs(endfire[1] + 1.0) < 1e-12);

    const CVec v = ios_steering(0.7, 2.3, {5, 4, 0.5, 0.5});
    CHECK(v.size() == 20);
    CHECK(std::abs(v[0] - 1.0) < 1e-15);
    CHECK((v.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-14);

    const CVec neg = ios_steering(0.7, 2.3, {5, 4, 0.5, 0.5}, SteeringSign::negative);
    CHECK((neg - v.conjugate()).norm() < 1e-12);
}

TEST_CASE("AP steering vectors")
{
    const CVec broadside = ap_steering(kPi / 2, 8, 0.5);
    CHECK((broadside - CVec::Ones(8)).norm() < 1e-12);

    const CVec two = ap_steering(0.0, 2, 0.5);
    CHECK(std::abs(two[0] - 1.0) < 1e-15);
    CHECK(std::abs(two[1] + 1.0) < 1e-12);

    const CVec a = ap_steering(1.234, 100, 0.5);
    CHECK_THAT(a.squaredNorm(), WithinRel(100.0, 1e-12));
    CHECK_THROWS(ap_steering(0.0, 0, 0.5));
}

TEST_CASE("channel mean without a LoS component is zero")
{
    LinkBudget b = unit_budget(1.0);
    b.r.surface_ap.kappa = 0.0;
    const ArrayGeometry geo = small_geometry(6, 3, 2);
    const AngleSet angles = draw_angles(1);
    const IosPhases ph = optimal_ios_phases(angles, geo);
    CHECK(channel_mean(b, angles, geo, ph, Side::R).norm() == 0.0);
    CHECK(channel_mean(b, angles, geo, ph, Side::T).norm() > 0.0);
}

TEST_CASE("channel mean is rank-one along the AP steering vector")
{
    LinkBudget b = unit_budget(2.0);
    b.r.surface_ap.c0 = 0.3;
    b.r.ue_surface.kappa = 0.5;
    const ArrayGeometry geo = small_geometry(12, 3, 3);
    const AngleSet angles = draw_angles(2);
    Rng rng = derive_stream(3, {});
    const IosPhases ph = random_ios_phases(geo, rng);
    const ChannelStatistics st = build_statistics(b, angles, geo, ph);
    const SideStatistics &s = st.r;
    const double expected = s.gains.los_scale() * geo.m_ap * s.los_gain;
    CHECK_THAT(s.hbar.squaredNorm(), WithinRel(expected, 1e-12));

    const cd proj = s.a_ap.dot(s.hbar) / s.a_ap.squaredNorm();
    CHECK((s.hbar - proj * s.a_ap).norm() <= 1e-12 * s.hbar.norm());
}

TEST_CASE("optimal phases give the full array gain in the channel mean")
{
    const LinkBudget b = unit_budget(1.0);
    const ArrayGeometry geo = small_geometry(10, 4, 4);
    for (std::uint64_t seed : {4, 5, 6})
    {
        const AngleSet angles = draw_angles(seed);
        const IosPhases ph = optimal_ios_phases(angles, geo);
        for (Side s : kSides)
            CHECK_THAT(channel_mean(b, angles, geo, ph, s).squaredNorm(), WithinRel(10.0 * 256.0 / 4.0, 1e-9));
    }
}

TEST_CASE("channel covariance limiting forms")
{
    const AngleSet angles = draw_angles(7);
    {
        const LinkBudget b = unit_budget(0.0);
        const ArrayGeometry geo = small_geometry(5, 1, 1);
        const CMat c = channel_covariance(b, angles, geo, optimal_ios_phases(angles, geo), Side::R);
        CHECK((c - CMat::Identity(5, 5)).norm() < 1e-14);
    }
    {
        LinkBudget b = unit_budget(1.0);
        b.r.surface_ap.blocked = true;
        b.r.direct = {1.0, 2.0, 2.0, 0.0, false};
        const ArrayGeometry geo = small_geometry(5, 2, 2);
        const CMat c = channel_covariance(b, angles, geo, optimal_ios_phases(angles, geo), Side::R);
        CHECK((c - 2.0 * CMat::Identity(5, 5)).norm() < 1e-14);
    }
}

TEST_CASE("channel covariance is Hermitian positive definite with the expected trace")
{
    LinkBudget b = unit_budget(3.0);
    b.t.direct.blocked = false;
    const ArrayGeometry geo = small_geometry(8, 4, 2);
    const AngleSet angles = draw_angles(8);
    const ChannelStatistics st = build_statistics(b, angles, geo, optimal_ios_phases(angles, geo));
    for (Side s : kSides)
    {
        const SideStatistics &ss = st.side(s);
        CHECK(is_hermitian(ss.c_hh));
        CHECK(min_eigenvalue(ss.c_hh) > 0.0);
        CHECK_THAT(ss.c_hh.trace().real(), WithinRel(geo.m_ap * ss.gains.nlos_power(), 1e-12));
    }
}

TEST_CASE("sampled channels match the analytic mean and covariance")
{
    LinkBudget b = unit_budget(1.0);
    b.r.direct.blocked = false;
    const ArrayGeometry geo = small_geometry(4, 2, 2);
    const AngleSet angles = draw_angles(9);
    const ChannelStatistics st = build_statistics(b, angles, geo, optimal_ios_phases(angles, geo));

    for (ChannelSampler sampler : {ChannelSampler::composed, ChannelSampler::conditional})
    {
        Rng rng = derive_stream(10, {static_cast<std::uint64_t>(sampler)});
        const int n = 100000;
        CVec sum = CVec::Zero(4);
        CMat outer = CMat::Zero(4, 4);
        for (int i = 0; i < n; ++i)
        {
            const CVec h = sample_channels(st, rng, sampler).h_r;
            sum += h;
            outer += h * h.adjoint();
        }
        const CVec mean = sum / n;
        const CMat cov = outer / n - mean * mean.adjoint();
        const CMat &model = st.r.c_hh;
        for (Eigen::Index i = 0; i < 4; ++i)
        {
            const double se = std::sqrt(model(i, i).real() / n);
            CHECK(std::abs(mean[i] - st.r.hbar[i]) < 4.0 * se);
            for (Eigen::Index j = 0; j < 4; ++j)
                CHECK(std::abs(cov(i, j) - model(i, j)) / std::sqrt(model(i, i).real() * model(j, j).real()) < 0.03);
        }
    }
}

TEST_CASE("composed draws rebuild the sampled channel")
{
    LinkBudget b = unit_budget(0.7);
    b.t.direct.blocked = false;
    const ArrayGeometry geo = small_geometry(6, 3, 2);
    const AngleSet angles = draw_angles(11);
    const ChannelStatistics st = build_statistics(b, angles, geo, optimal_ios_phases(angles, geo));
    Rng rng = derive_stream(12, {});
    const ChannelRealization ch = sample_channels(st, rng, ChannelSampler::composed);
    CHECK((compose_channel(st.r, ch.draws_r) - ch.h_r).norm() <= 1e-12 * ch.h_r.norm());
    CHECK((compose_channel(st.t, ch.draws_t) - ch.h_t).norm() <= 1e-12 * ch.h_t.norm());

    Rng rng2 = derive_stream(12, {});
    const ChannelRealization cond = sample_channels(st, rng2, ChannelSampler::conditional);
    CHECK_THROWS(compose_channel(st.r, cond.draws_r));
}

TEST_CASE("very large Rician factors make the channel deterministic")
{
    const LinkBudget b = unit_budget(1e12);
    const ArrayGeometry geo = small_geometry(8, 4, 4);
    const AngleSet angles = draw_angles(13);
    const ChannelStatistics st = build_statistics(b, angles, geo, optimal_ios_phases(angles, geo));
    Rng rng = derive_stream(14, {});
    for (ChannelSampler sampler : {ChannelSampler::composed, ChannelSampler::conditional})
    {
        const ChannelRealization ch = sample_channels(st, rng, sampler);
        for (Side s : kSides)
            CHECK((ch.h(s) - st.side(s).hbar).norm() < 1e-4 * st.side(s).hbar.norm());
    }
}

TEST_CASE("blocked surface links leave a zero-mean direct channel")
{
    LinkBudget b = unit_budget(1.0);
    for (Side s : kSides)
    {
        b.side(s).surface_ap.blocked = true;
        b.side(s).ue_surface.blocked = true;
        b.side(s).direct = {1.0, 2.0, 0.5, 0.0, false};
    }
    const ArrayGeometry geo = small_geometry(4, 2, 2);
    const AngleSet angles = draw_angles(15);
    const ChannelStatistics st = build_statistics(b, angles, geo, optimal_ios_phases(angles, geo));
    CHECK(st.r.hbar.norm() == 0.0);
    Rng rng = derive_stream(16, {});
    const ChannelRealization ch = sample_channels(st, rng, ChannelSampler::composed);
    CHECK((ch.h_r - std::sqrt(0.5) * ch.draws_r.b).norm() < 1e-14);
}

TEST_CASE("distances from the reference coordinates")
{
    const LinkDistances d = distances_from_positions(Positions{});
    CHECK_THAT(d.surface_ap_r, WithinAbs(std::sqrt(4.0 + 10000.0 + 25.0), 1e-12));
    CHECK_THAT(d.surface_ap_r, WithinAbs(100.14, 0.005));
    CHECK_THAT(d.direct_r, WithinAbs(std::sqrt(6400.0 + 225.0), 1e-12));

    Positions bad;
    bad.ue_r = bad.ios_r;
    CHECK_THROWS(distances_from_positions(bad));
    Rng rng = derive_stream(1, {});
    CHECK_THROWS(angles_from_scenario(bad, 0.1, rng));
}

TEST_CASE("angle draws pin the AP angle separation and are reproducible")
{
    Rng rng = derive_stream(17, {});
    const AngleSet zero = angles_from_scenario(Positions{}, 0.0, rng);
    CHECK(zero.r.psi == zero.t.psi);

    const AngleSet a = draw_angles(18);
    const AngleSet b = draw_angles(18);
    const AngleSet c = draw_angles(19);
    CHECK(a.r.elev_in == b.r.elev_in);
    CHECK(a.t.psi == b.t.psi);
    CHECK(a.r.elev_in != c.r.elev_in);
    CHECK_THAT(wrap_two_pi(a.r.psi - a.t.psi), WithinAbs(0.1 * kPi, 1e-12));

    for (std::uint64_t s = 0; s < 50; ++s)
    {
        const AngleSet x = draw_angles(100 + s);
        for (Side side : kSides)
        {
            const SideAngles &sa = x.side(side);
            CHECK((sa.elev_in >= 0.0 && sa.elev_in < kPi));
            CHECK((sa.azim_out >= 0.0 && sa.azim_out < kTwoPi));
        }
    }
}

TEST_CASE("wrap_two_pi maps into [0, 2pi)")
{
    CHECK(wrap_two_pi(0.0) == 0.0);
    CHECK_THAT(wrap_two_pi(-0.5), WithinAbs(kTwoPi - 0.5, 1e-15));
    CHECK_THAT(wrap_two_pi(7.0), WithinAbs(7.0 - kTwoPi, 1e-15));
    CHECK(wrap_two_pi(kTwoPi) == 0.0);
}

TEST_CASE("geometry and budget validation")
{
    ArrayGeometry geo = small_geometry(4, 2, 2);
    CHECK_NOTHROW(geo.validate());
    geo.grid_t.nx = 0;
    CHECK_THROWS(geo.validate());

    LinkBudget b = unit_budget(1.0);
    b.r.ue_surface.kappa = -1.0;
    CHECK_THROWS(b.validate());
}
