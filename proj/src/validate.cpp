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

#include "linklab/validate.hpp"

#include "linklab/config.hpp"
#include "linklab/engine.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace linklab
{

namespace
{

OracleResult verdict(std::string name, double value, double tol, std::string detail = {})
{
    return {std::move(name), value, tol, std::isfinite(value) && value <= tol, std::move(detail)};
}

// max_ij |a_ij - b_ij| / sqrt(b_ii b_jj)
double normalised_max_error(const CMat &empirical, const CMat &model)
{
    double worst = 0.0;
    for (Eigen::Index i = 0; i < model.rows(); ++i)
        for (Eigen::Index j = 0; j < model.cols(); ++j)
        {
            const double scale = std::sqrt(model(i, i).real() * model(j, j).real());
            worst = std::max(worst, std::abs(empirical(i, j) - model(i, j)) / scale);
        }
    return worst;
}

CMat random_pd(Eigen::Index m, Rng &rng)
{
    const CMat b = standard_cn(m, m, rng);
    CMat r = b * b.adjoint() / static_cast<double>(m);
    r.diagonal().array() += 0.1;
    return r;
}

double relative_diff(const CVec &a, const CVec &b)
{
    return (a - b).norm() / std::max(b.norm(), 1e-300);
}

double los_gain_of(const CVec &a, const CVec &g, const RVec &theta)
{
    cd acc = 0.0;
    for (Eigen::Index n = 0; n < a.size(); ++n)
        acc += std::conj(a[n]) * std::polar(1.0, theta[n]) * g[n];
    return std::norm(acc);
}

} // namespace

OracleScenario moment_scenario(std::uint64_t seed)
{
    ArrayGeometry geometry{4, 0.5, {2, 2, 0.5, 0.5}, {2, 2, 0.5, 0.5}, SteeringSign::positive};
    LinkBudget budget;
    for (Side s : kSides)
    {
        SideLinks &l = budget.side(s);
        l.surface_ap = {1.0, 2.0, 1.0, 1.0, false};
        l.ue_surface = {1.0, 2.0, 1.0, 1.0, false};
        l.direct = {1.0, 2.0, 1.0, 0.0, false};
    }
    Rng rng = derive_stream(seed, {0x0c});
    const AngleSet angles = angles_from_scenario(Positions{}, 0.1 * kPi, rng);
    const IosPhases phases = optimal_ios_phases(angles, geometry);
    OracleScenario sc;
    sc.stats = build_statistics(budget, angles, geometry, phases);
    sc.hw = {0.9, 0.8, 0.8};
    sc.pw = {1.0, 1.0, 1.0};
    sc.k = 4;
    return sc;
}

OracleResult oracle_covariance_split(std::uint64_t seed)
{
    double worst = 0.0;
    SystemConfig cfg;
    cfg.m_ap = 16;
    cfg.ios_r = cfg.ios_t = {4, 4, 0.5, 0.5};
    for (double eps : {1.0, 0.99, 0.9})
        for (double rho_dbm : {-10.0, 20.0, 40.0})
        {
            cfg.hw = {eps, eps, eps};
            cfg.rho_r_dbm = cfg.rho_t_dbm = rho_dbm;
            Rng rng = derive_stream(seed, {0x01, static_cast<std::uint64_t>(rho_dbm + 100)});
            const AngleSet angles = angles_from_scenario(cfg.coords, cfg.delta_psi_rad, rng);
            const ChannelStatistics st =
                build_statistics(cfg.link_budget(), angles, cfg.geometry(), optimal_ios_phases(angles, cfg.geometry()));
            const EstimatorPair em = build_estimator(st, cfg.hw, cfg.powers(), cfg.k_pilots);
            for (Side s : kSides)
            {
                const EstimatorModel &m = em.side(s);
                worst = std::max(worst, (m.c_hat + m.c_err - m.c_hh).norm() / m.c_hh.norm());
            }
        }
    return verdict("covariance_split", worst, 1e-9, "||C_hat + C_err - C_hh||_F / ||C_hh||_F");
}

OracleResult oracle_rank_two_update(std::uint64_t seed)
{
    Rng rng = derive_stream(seed, {0x02});
    std::uniform_real_distribution<double> u(0.1, 10.0);
    double worst = 0.0;
    for (int n = 0; n < 100; ++n)
    {
        const Eigen::Index m = 8;
        const InterferenceModel r{HermitianPD::factor(random_pd(m, rng)), RMatrixVariant::full_error};
        const ChannelEstimate est{standard_cn(m, rng), standard_cn(m, rng)};
        const HardwareProfile hw{0.95, 0.9, 0.85};
        const PowerProfile pw{u(rng), u(rng), 1.0};
        const CombinerSet a = mmse_combiners(est, r, hw, pw);
        const CombinerSet b = mmse_combiners_woodbury(est, r, hw, pw);
        worst = std::max({worst, relative_diff(b.q_r, a.q_r), relative_diff(b.q_t, a.q_t)});
    }
    return verdict("rank_two_update", worst, 1e-9, "rank-two inverse update vs direct MMSE combiner");
}

OracleResult oracle_sinr_equivalence(std::uint64_t seed)
{
    Rng rng = derive_stream(seed, {0x03});
    std::uniform_real_distribution<double> u(0.1, 10.0);
    double worst = 0.0;
    int n = 0;
    for (double eps : {1.0, 0.99, 0.9})
        for (int i = 0; i < 100; ++i, ++n)
        {
            const Eigen::Index m = 8;
            const InterferenceModel r{HermitianPD::factor(random_pd(m, rng)), RMatrixVariant::full_error};
            const ChannelEstimate est{standard_cn(m, rng), standard_cn(m, rng)};
            const HardwareProfile hw{eps, eps, eps};
            const PowerProfile pw{u(rng), u(rng), 1.0};
            const CombinerSet q = mmse_combiners(est, r, hw, pw);
            const RateReport closed = se_instantaneous(est, r, hw, pw);
            for (Side s : kSides)
            {
                const double via_sinr = std::log2(1.0 + sinr(q.q(s), s, est, r, hw, pw));
                worst = std::max(worst, std::abs(via_sinr - closed.side(s).se));
            }
        }
    return verdict("sinr_equivalence", worst, 1e-9,
                   "log2(1+SINR(q_mmse)) vs closed-form SE, " + std::to_string(n) + " instances, bits");
}

OracleResult oracle_pilot_covariance(std::uint64_t seed, int draws)
{
    const OracleScenario sc = moment_scenario(seed);
    const PilotBook pilots = make_pilots(sc.k);
    Rng rng = derive_stream(seed, {0x04});
    const Eigen::Index m = sc.stats.m_ap;
    CVec sum[2] = {CVec::Zero(m), CVec::Zero(m)};
    CMat outer[2] = {CMat::Zero(m, m), CMat::Zero(m, m)};
    for (int n = 0; n < draws; ++n)
    {
        const ChannelRealization ch = sample_channels(sc.stats, rng, ChannelSampler::composed);
        const CMat obs = simulate_pilot_rx(ch.h_r, ch.h_t, sc.hw, pilots, sc.pw, rng);
        for (Side s : kSides)
        {
            const int i = s == Side::R ? 0 : 1;
            const CVec x = despread(obs, pilots, s);
            sum[i] += x;
            outer[i] += x * x.adjoint();
        }
    }
    double worst = 0.0;
    for (Side s : kSides)
    {
        const int i = s == Side::R ? 0 : 1;
        const CVec mean = sum[i] / draws;
        const CMat cov = outer[i] / draws - mean * mean.adjoint();
        worst = std::max(worst, normalised_max_error(cov, pilot_covariance(sc.stats, sc.hw, sc.pw, sc.k, s)));
    }
    return verdict("pilot_covariance_moment", worst, 0.03,
                   "empirical despread covariance vs model, " + std::to_string(draws) + " draws");
}

OracleResult oracle_data_autocorrelation(std::uint64_t seed, int draws, RMatrixVariant variant)
{
    const OracleScenario sc = moment_scenario(seed);
    const PilotBook pilots = make_pilots(sc.k);
    const EstimatorPair em = build_estimator(sc.stats, sc.hw, sc.pw, sc.k);
    const InterferenceModel r = interference_matrix(sc.stats, em, sc.hw, sc.pw, variant);
    const HardwareProfile &hw = sc.hw;
    const PowerProfile &pw = sc.pw;
    const Eigen::Index m = sc.stats.m_ap;

    Rng rng = derive_stream(seed, {0x05});
    CMat acc = CMat::Zero(m, m);
    for (int n = 0; n < draws; ++n)
    {
        const ChannelRealization ch = sample_channels(sc.stats, rng, ChannelSampler::composed);
        const CMat obs = simulate_pilot_rx(ch.h_r, ch.h_t, hw, pilots, pw, rng);
        const ChannelEstimate est =
            estimate_channels(em, despread(obs, pilots, Side::R), despread(obs, pilots, Side::T));
        CVec y = std::sqrt(pw.noise_var) * standard_cn(m, rng);
        for (Side s : kSides)
        {
            const CVec &h = ch.h(s);
            const double rho = pw.rho(s), eu = hw.eps_u(s);
            const cd sym = standard_cn(rng);
            const cd ue_dist = standard_cn(rng);
            const CVec ap_dist = standard_cn(m, rng);
            y += (std::sqrt(rho * hw.eps_v * eu) * sym + std::sqrt(rho * hw.eps_v * (1.0 - eu)) * ue_dist) * h +
                 std::sqrt(rho * (1.0 - hw.eps_v)) * h.cwiseProduct(ap_dist);
        }
        acc += y * y.adjoint();
        for (Side s : kSides)
            acc -= (pw.rho(s) * hw.eps_v) * (est.h_hat(s) * est.h_hat(s).adjoint());
    }
    const CMat empirical = acc / draws;
    const double err = normalised_max_error(empirical, r.matrix());
    return verdict(std::string("data_autocorrelation_moment[") + to_string(variant) + "]", err, 0.03,
                   "E[yy^H] - sum rho eps_v h_hat h_hat^H vs R, " + std::to_string(draws) + " draws");
}

double brute_force_los_gain(const CVec &a, const CVec &g)
{
    const Eigen::Index n = a.size();
    constexpr int kGrid = 64;
    RVec theta = RVec::Zero(n);
    RVec best = theta;
    double best_val = los_gain_of(a, g, theta);
    if (n > 1)
    {
        long total = 1;
        for (Eigen::Index i = 1; i < n; ++i)
            total *= kGrid;
        for (long idx = 0; idx < total; ++idx)
        {
            long rem = idx;
            for (Eigen::Index i = 1; i < n; ++i)
            {
                theta[i] = kTwoPi * (rem % kGrid) / kGrid;
                rem /= kGrid;
            }
            const double v = los_gain_of(a, g, theta);
            if (v > best_val)
            {
                best_val = v;
                best = theta;
            }
        }
    }
    // coordinate pattern search around the best grid point
    double step = kTwoPi / kGrid;
    while (step > 1e-12)
    {
        bool improved = false;
        for (Eigen::Index i = 1; i < n; ++i)
            for (double dir : {1.0, -1.0})
            {
                RVec trial = best;
                trial[i] += dir * step;
                const double v = los_gain_of(a, g, trial);
                if (v > best_val)
                {
                    best_val = v;
                    best = trial;
                    improved = true;
                }
            }
        if (!improved)
            step *= 0.5;
    }
    return best_val;
}

OracleResult oracle_phase_bruteforce(std::uint64_t seed)
{
    Rng rng = derive_stream(seed, {0x06});
    double worst = 0.0;
    const SurfaceGrid grids[] = {{2, 1, 0.5, 0.5}, {3, 1, 0.5, 0.5}, {1, 3, 0.5, 0.5}, {2, 2, 0.5, 0.5}};
    for (const SurfaceGrid &g : grids)
        for (int rep = 0; rep < 3; ++rep)
        {
            const ArrayGeometry geo{4, 0.5, g, g, SteeringSign::positive};
            const AngleSet angles = angles_from_scenario(Positions{}, 0.1 * kPi, rng);
            const IosPhases ph = optimal_ios_phases(angles, geo);
            const SideAngles &sa = angles.r;
            const CVec a = ios_steering(sa.elev_out, sa.azim_out, g);
            const CVec gb = ios_steering(sa.elev_in, sa.azim_in, g);
            const double closed = los_gain(a, gb, ph.r);
            const double brute = brute_force_los_gain(a, gb);
            const double n2 = static_cast<double>(g.size()) * g.size();
            worst = std::max(worst, std::abs(closed - brute) / n2);
        }
    return verdict("phase_bruteforce", worst, 1e-6, "closed-form vs exhaustive LoS gain, N <= 4, relative to N^2");
}

OracleResult oracle_phase_n_squared(std::uint64_t seed)
{
    Rng rng = derive_stream(seed, {0x07});
    double worst = 0.0;
    for (int side : {2, 4, 8, 10, 20})
        for (SteeringSign sign : {SteeringSign::positive, SteeringSign::negative})
            for (int rep = 0; rep < 10; ++rep)
            {
                const SurfaceGrid g{side, side, 0.5, 0.5};
                const ArrayGeometry geo{4, 0.5, g, g, sign};
                const AngleSet angles = angles_from_scenario(Positions{}, 0.1 * kPi, rng);
                const IosPhases ph = optimal_ios_phases(angles, geo);
                for (Side s : kSides)
                {
                    const SideAngles &sa = angles.side(s);
                    const double lg = los_gain(ios_steering(sa.elev_out, sa.azim_out, g, sign),
                                               ios_steering(sa.elev_in, sa.azim_in, g, sign), ph.side(s));
                    const double n2 = static_cast<double>(g.size()) * g.size();
                    worst = std::max(worst, std::abs(lg / n2 - 1.0));
                }
            }
    return verdict("phase_n_squared", worst, 1e-9, "|los_gain / N^2 - 1| for N up to 400, both steering signs");
}

OracleResult oracle_random_phase_mean(std::uint64_t seed)
{
    Rng rng = derive_stream(seed, {0x08});
    const SurfaceGrid g{4, 4, 0.5, 0.5};
    const ArrayGeometry geo{4, 0.5, g, g, SteeringSign::positive};
    const AngleSet angles = angles_from_scenario(Positions{}, 0.1 * kPi, rng);
    const CVec a = ios_steering(angles.r.elev_out, angles.r.azim_out, g);
    const CVec gb = ios_steering(angles.r.elev_in, angles.r.azim_in, g);
    KahanSum acc;
    const int draws = 10000;
    for (int n = 0; n < draws; ++n)
        acc.add(los_gain(a, gb, random_ios_phases(geo, rng).r));
    const double mean = acc.value() / draws;
    return verdict("random_phase_mean", std::abs(mean / g.size() - 1.0), 0.05, "E[los_gain] / N over 1e4 draws");
}

OracleResult oracle_bound_ordering(const ValidateOptions &opt)
{
    SystemConfig cfg;
    const RunControl run{opt.seed, opt.blocks, opt.trials_per_block, opt.workers};
    const PointResult p = evaluate_point(cfg, Protocol::ms, run);

    // zeta bound: R >= c I with c the scalar part, so E[h^H R^-1 h] <= M eta / c
    const ArrayGeometry geo = cfg.geometry();
    const LinkBudget budget = cfg.link_budget();
    const std::array<SideGains, 2> gains{side_gains(budget, geo, Side::R), side_gains(budget, geo, Side::T)};
    const PowerProfile pw = cfg.powers();
    const double eta_r = loose_bound_eta(gains[0]), eta_t = loose_bound_eta(gains[1]);
    const double c = pw.rho_r * (1.0 - cfg.hw.eps_v) * eta_r + pw.rho_t * (1.0 - cfg.hw.eps_v) * eta_t + pw.noise_var;
    double zeta_excess = -1e300;
    for (int b = 0; b < opt.blocks; ++b)
    {
        Rng rng = derive_stream(opt.seed, {0, static_cast<std::uint64_t>(b)});
        const AngleSet angles = angles_from_scenario(cfg.coords, cfg.delta_psi_rad, rng);
        const ChannelStatistics st = build_statistics(budget, angles, geo, optimal_ios_phases(angles, geo));
        const EstimatorPair em = build_estimator(st, cfg.hw, pw, cfg.k_pilots);
        const InterferenceModel r = interference_matrix(st, em, cfg.hw, pw);
        for (Side s : kSides)
        {
            const double z = ergodic_se_upper_bound(st, em, r, cfg.hw, pw, s).zeta;
            const double cap = cfg.m_ap * (s == Side::R ? eta_r : eta_t) / c;
            zeta_excess = std::max(zeta_excess, z / cap - 1.0);
        }
    }

    const double slack = 1e-2;
    const double excess = std::max({p.rate_r - p.ub_thm3_r, p.rate_t - p.ub_thm3_t, p.rate_r - p.ub_thm5_r,
                                    p.rate_t - p.ub_thm5_t, p.ub_thm3_r - p.ub_thm5_r,
                                    p.ub_thm3_t - p.ub_thm5_t});
    std::ostringstream d;
    d << std::setprecision(6) << "sim r/t " << p.rate_r << "/" << p.rate_t << ", tight " << p.ub_thm3_r << "/"
      << p.ub_thm3_t << ", loose " << p.ub_thm5_r << "/" << p.ub_thm5_t << ", zeta/cap-1 " << zeta_excess;
    return verdict("bound_ordering", std::max(excess, zeta_excess), slack, d.str());
}

OracleResult oracle_cross_term_decay(const ValidateOptions &opt)
{
    const RunControl run{opt.seed, opt.blocks, opt.trials_per_block, opt.workers};
    std::vector<double> ratios;
    for (int m : {8, 32, 128, 512})
    {
        SystemConfig cfg;
        cfg.m_ap = m;
        ratios.push_back(evaluate_point(cfg, Protocol::ms, run).cross_term_ratio);
    }
    double worst_step = -1e300; // largest ratio[i+1] / ratio[i]; must stay below 1
    std::ostringstream d;
    d << std::setprecision(4) << "M=8,32,128,512:";
    for (std::size_t i = 0; i < ratios.size(); ++i)
    {
        d << ' ' << ratios[i];
        if (i > 0)
            worst_step = std::max(worst_step, ratios[i] / ratios[i - 1]);
    }
    OracleResult r = verdict("cross_term_decay", worst_step, 1.0, d.str());
    r.pass = std::isfinite(worst_step) && worst_step < 1.0;
    return r;
}

std::vector<OracleResult> run_oracles(const ValidateOptions &opt)
{
    std::vector<OracleResult> out;
    out.push_back(oracle_covariance_split(opt.seed));
    out.push_back(oracle_rank_two_update(opt.seed));
    out.push_back(oracle_sinr_equivalence(opt.seed));
    out.push_back(oracle_pilot_covariance(opt.seed, opt.moment_draws));
    out.push_back(oracle_data_autocorrelation(opt.seed, opt.moment_draws, opt.variant));
    out.push_back(oracle_phase_bruteforce(opt.seed));
    out.push_back(oracle_phase_n_squared(opt.seed));
    out.push_back(oracle_random_phase_mean(opt.seed));
    out.push_back(oracle_bound_ordering(opt));
    out.push_back(oracle_cross_term_decay(opt));
    return out;
}

void print_oracle_table(const std::vector<OracleResult> &results, std::ostream &out)
{
    out << "oracle\tstatus\tvalue\ttolerance\tdetail\n";
    for (const OracleResult &r : results)
    {
        std::ostringstream v, t;
        v << std::setprecision(6) << r.value;
        t << std::setprecision(6) << r.tolerance;
        out << r.name << '\t' << (r.pass ? "PASS" : "FAIL") << '\t' << v.str() << '\t' << t.str() << '\t' << r.detail
            << '\n';
    }
}

bool all_passed(const std::vector<OracleResult> &results)
{
    for (const OracleResult &r : results)
        if (!r.pass)
            return false;
    return true;
}

} // namespace linklab
