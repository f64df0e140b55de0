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

#include "linklab/engine.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <optional>
#include <thread>

namespace linklab
{

namespace
{

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stream domains keep block-level and trial-level draws apart.
constexpr std::uint64_t kBlockDomain = 0;
constexpr std::uint64_t kTrialDomain = 1;

struct BlockResult
{
    double rate[2]{0.0, 0.0};
    double sum_mmse = 0.0;
    double sum_mr = 0.0;
    double sum_zf = 0.0;
    double nmse_sim = 0.0;
    double cross_num = 0.0;
    double cross_den = 0.0;
    double tight_ub[2]{0.0, 0.0};
    double nmse_theory = 0.0;
    bool violated = false;
};

// Everything one protocol arm needs inside a block.
struct Arm
{
    Side side;             // user evaluated by this arm (TS); unused for MS
    PowerProfile powers;
    EstimatorPair models;  // HWI-aware
    std::optional<EstimatorPair> used; // estimator applied to the pilots, if different
    std::optional<InterferenceModel> r;

    const EstimatorPair &estimator() const { return used ? *used : models; }
};

Arm make_arm(const SystemConfig &cfg, const ChannelStatistics &stats, const PowerProfile &pw, Side side)
{
    Arm a{side, pw, build_estimator(stats, cfg.hw, pw, cfg.k_pilots), std::nullopt, std::nullopt};
    if (cfg.estimator_ignores_hwi)
        a.used = build_estimator(stats, HardwareProfile::ideal(), pw, cfg.k_pilots);
    a.r = interference_matrix(stats, a.models, cfg.hw, pw, cfg.r_matrix_variant);
    return a;
}

double safe_nmse_side(const EstimatorModel &m)
{
    try
    {
        return nmse_side(m);
    }
    catch (const std::domain_error &)
    {
        return kNaN;
    }
}

std::pair<CVec, CVec> observe(const SystemConfig &cfg, const ChannelRealization &ch, const PowerProfile &pw,
                              Rng &rng)
{
    if (cfg.pilot_sampler == PilotSampler::despread)
        return sample_despread(ch.h_r, ch.h_t, cfg.hw, cfg.k_pilots, pw, rng);
    const PilotBook pilots = make_pilots(cfg.k_pilots);
    const CMat obs = simulate_pilot_rx(ch.h_r, ch.h_t, cfg.hw, pilots, pw, rng);
    return {despread(obs, pilots, Side::R), despread(obs, pilots, Side::T)};
}

// SE per side for MMSE, MR and ZF.
struct CombinerRates
{
    RateReport mmse, mr, zf;
};

CombinerRates all_rates(const ChannelEstimate &est, const InterferenceModel &r, const HardwareProfile &hw,
                        const PowerProfile &pw)
{
    CombinerRates out;
    out.mmse = se_instantaneous(est, r, hw, pw);
    // users with a vanishing estimate cannot be combined; they neither carry rate nor need nulling
    PowerProfile active = pw;
    for (Side s : kSides)
        if (est.h_hat(s).squaredNorm() == 0.0)
            active.rho(s) = 0.0;
    out.mr = se_with_combiners(mr_zf_combiners(est, Combiner::mr, &active), est, r, hw, active);
    if (active.rho_r > 0.0 || active.rho_t > 0.0)
        out.zf = se_with_combiners(mr_zf_combiners(est, Combiner::zf, &active), est, r, hw, active);
    return out;
}

const RateReport &pick(const CombinerRates &c, Combiner m)
{
    switch (m)
    {
    case Combiner::mr:
        return c.mr;
    case Combiner::zf:
        return c.zf;
    default:
        return c.mmse;
    }
}

BlockResult run_block(const SystemConfig &cfg, Protocol protocol, const RunControl &run, int b)
{
    const ArrayGeometry geometry = cfg.geometry();
    const LinkBudget budget = cfg.link_budget();
    const PowerProfile pw = cfg.powers();

    Rng block_rng = derive_stream(run.seed, {kBlockDomain, static_cast<std::uint64_t>(b)});
    const AngleSet angles = angles_from_scenario(cfg.coords, cfg.delta_psi_rad, block_rng);
    const IosPhases phases = cfg.ios_phases == PhaseMode::optimal ? optimal_ios_phases(angles, geometry)
                                                                  : random_ios_phases(geometry, block_rng);
    const ChannelStatistics stats = build_statistics(budget, angles, geometry, phases);
    const double tr[2] = {stats.r.c_hh.trace().real(), stats.t.c_hh.trace().real()};

    BlockResult out;
    out.violated = !stats.aoa_separable();

    std::vector<Arm> arms;
    if (protocol == Protocol::ms)
    {
        arms.push_back(make_arm(cfg, stats, pw, Side::R));
        const Arm &a = arms.front();
        for (Side s : kSides)
            out.tight_ub[s == Side::R ? 0 : 1] = ergodic_se_upper_bound(stats, a.models, *a.r, cfg.hw, pw, s).se;
        out.nmse_theory = 0.5 * (safe_nmse_side(a.models.r) + safe_nmse_side(a.models.t));
    }
    else
    {
        for (Side s : kSides)
        {
            PowerProfile alone = pw;
            alone.rho(other(s)) = 0.0;
            arms.push_back(make_arm(cfg, stats, alone, s));
            const Arm &a = arms.back();
            out.tight_ub[s == Side::R ? 0 : 1] = 0.5 * ergodic_se_upper_bound(stats, a.models, *a.r, cfg.hw, alone, s).se;
        }
        out.nmse_theory = 0.5 * (safe_nmse_side(arms[0].models.r) + safe_nmse_side(arms[1].models.t));
    }

    KahanSum rate[2], mmse, mr, zf, nmse, cnum, cden;
    for (int t = 0; t < run.trials_per_block; ++t)
    {
        try
        {
            Rng rng = derive_stream(run.seed, {kTrialDomain, static_cast<std::uint64_t>(b),
                                               static_cast<std::uint64_t>(t)});
            const ChannelRealization ch = sample_channels(stats, rng, cfg.channel_sampler);
            if (protocol == Protocol::ms)
            {
                const Arm &a = arms.front();
                const auto [x_r, x_t] = observe(cfg, ch, pw, rng);
                const ChannelEstimate est = estimate_channels(a.estimator(), x_r, x_t);
                const CombinerRates cr = all_rates(est, *a.r, cfg.hw, pw);
                const RateReport &sel = pick(cr, cfg.combiner);
                rate[0].add(sel.r.se);
                rate[1].add(sel.t.se);
                mmse.add(cr.mmse.sum_se());
                mr.add(cr.mr.sum_se());
                zf.add(cr.zf.sum_se());
                nmse.add(0.5 * ((ch.h_r - est.h_hat_r).squaredNorm() / tr[0] +
                                (ch.h_t - est.h_hat_t).squaredNorm() / tr[1]));
                const auto [num, den] = cross_term_parts(est, *a.r, cfg.hw, pw);
                cnum.add(num);
                cden.add(den);
            }
            else
            {
                double nm = 0.0, s_mmse = 0.0, s_mr = 0.0, s_zf = 0.0;
                for (const Arm &a : arms)
                {
                    const int i = a.side == Side::R ? 0 : 1;
                    const auto [x_r, x_t] = observe(cfg, ch, a.powers, rng);
                    const ChannelEstimate est = estimate_channels(a.estimator(), x_r, x_t);
                    const CombinerRates cr = all_rates(est, *a.r, cfg.hw, a.powers);
                    rate[i].add(0.5 * pick(cr, cfg.combiner).side(a.side).se);
                    s_mmse += 0.5 * cr.mmse.side(a.side).se;
                    s_mr += 0.5 * cr.mr.side(a.side).se;
                    s_zf += 0.5 * cr.zf.side(a.side).se;
                    nm += 0.5 * (ch.h(a.side) - est.h_hat(a.side)).squaredNorm() / tr[i];
                }
                mmse.add(s_mmse);
                mr.add(s_mr);
                zf.add(s_zf);
                nmse.add(nm);
            }
        }
        catch (const std::exception &e)
        {
            throw EngineError(e.what(), b, t);
        }
    }

    const double n = run.trials_per_block;
    out.rate[0] = rate[0].value() / n;
    out.rate[1] = rate[1].value() / n;
    out.sum_mmse = mmse.value() / n;
    out.sum_mr = mr.value() / n;
    out.sum_zf = zf.value() / n;
    out.nmse_sim = (tr[0] > 0.0 && tr[1] > 0.0) ? nmse.value() / n : kNaN;
    out.cross_num = cnum.value() / n;
    out.cross_den = cden.value() / n;
    return out;
}

} // namespace

PointResult evaluate_point(const SystemConfig &cfg, Protocol protocol, const RunControl &run)
{
    cfg.validate();
    if (run.blocks < 1 || run.trials_per_block < 1)
        throw std::invalid_argument("evaluate_point: blocks and trials must be >= 1");

    std::vector<BlockResult> blocks(static_cast<std::size_t>(run.blocks));
    std::vector<std::exception_ptr> errors(blocks.size());
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int b = next++; b < run.blocks; b = next++)
        {
            try
            {
                blocks[static_cast<std::size_t>(b)] = run_block(cfg, protocol, run, b);
            }
            catch (const EngineError &)
            {
                errors[static_cast<std::size_t>(b)] = std::current_exception();
            }
            catch (const std::exception &e)
            {
                errors[static_cast<std::size_t>(b)] = std::make_exception_ptr(EngineError(e.what(), b, -1));
            }
        }
    };
    const int nw = std::max(1, std::min(run.workers, run.blocks));
    if (nw == 1)
        worker();
    else
    {
        std::vector<std::thread> pool;
        for (int w = 0; w < nw; ++w)
            pool.emplace_back(worker);
        for (std::thread &t : pool)
            t.join();
    }
    for (const std::exception_ptr &e : errors)
        if (e)
            std::rethrow_exception(e);

    // fixed block order keeps the result independent of scheduling
    KahanSum r[2], mmse, mr, zf, nsim, nth, u3[2], cnum, cden;
    PointResult p;
    for (const BlockResult &b : blocks)
    {
        r[0].add(b.rate[0]);
        r[1].add(b.rate[1]);
        mmse.add(b.sum_mmse);
        mr.add(b.sum_mr);
        zf.add(b.sum_zf);
        nsim.add(b.nmse_sim);
        nth.add(b.nmse_theory);
        u3[0].add(b.tight_ub[0]);
        u3[1].add(b.tight_ub[1]);
        cnum.add(b.cross_num);
        cden.add(b.cross_den);
        p.ub_condition_violated_blocks += b.violated ? 1 : 0;
    }
    const double nb = run.blocks;
    p.rate_r = r[0].value() / nb;
    p.rate_t = r[1].value() / nb;
    p.sum_mmse = mmse.value() / nb;
    p.sum_mr = mr.value() / nb;
    p.sum_zf = zf.value() / nb;
    p.nmse_sim = nsim.value() / nb;
    p.nmse_theory = nth.value() / nb;
    p.ub_thm3_r = u3[0].value() / nb;
    p.ub_thm3_t = u3[1].value() / nb;
    p.cross_term_ratio = cden.value() > 0.0 ? cnum.value() / cden.value() : kNaN;
    p.trials = static_cast<long>(run.blocks) * run.trials_per_block;

    const ArrayGeometry geometry = cfg.geometry();
    const LinkBudget budget = cfg.link_budget();
    const std::array<SideGains, 2> gains{side_gains(budget, geometry, Side::R), side_gains(budget, geometry, Side::T)};
    const PowerProfile pw = cfg.powers();
    if (protocol == Protocol::ms)
    {
        p.ub_thm5_r = loose_upper_bound(gains, cfg.hw, pw, cfg.m_ap, Side::R).se;
        p.ub_thm5_t = loose_upper_bound(gains, cfg.hw, pw, cfg.m_ap, Side::T).se;
    }
    else
    {
        PowerProfile only_r = pw, only_t = pw;
        only_r.rho_t = 0.0;
        only_t.rho_r = 0.0;
        p.ub_thm5_r = 0.5 * loose_upper_bound(gains, cfg.hw, only_r, cfg.m_ap, Side::R).se;
        p.ub_thm5_t = 0.5 * loose_upper_bound(gains, cfg.hw, only_t, cfg.m_ap, Side::T).se;
    }
    return p;
}

const char *baseline_suffix(Baseline b)
{
    switch (b)
    {
    case Baseline::ts:
        return "@ts";
    case Baseline::no_ios:
        return "@no_ios";
    case Baseline::ignore_hwi:
        return "@ignore_hwi";
    case Baseline::random_phases:
        return "@random_phases";
    }
    return "@?";
}

void ExperimentPlan::validate() const
{
    bool known = false;
    for (const std::string &a : sweep_axes())
        known = known || a == axis;
    if (!known)
        throw ConfigError("sweep: unknown axis '" + axis + "'");
    if (blocks < 1 || trials_per_block < 1)
        throw ConfigError("sweep: blocks and trials per block must be >= 1");
    if (workers < 1)
        throw ConfigError("sweep: workers must be >= 1");
    for (double v : values)
        if (!std::isfinite(v))
            throw ConfigError("sweep: values must be finite");
    scenario.validate();
}

SweepRow make_row(const std::string &axis, double value, const SystemConfig &cfg, const PointResult &p)
{
    SweepRow row;
    row.axis = axis;
    row.value = value;
    row.sum_rate_sim = p.sum_rate();
    row.rate_r_sim = p.rate_r;
    row.rate_t_sim = p.rate_t;
    row.ub_thm3_r = p.ub_thm3_r;
    row.ub_thm3_t = p.ub_thm3_t;
    row.ub_thm5_r = p.ub_thm5_r;
    row.ub_thm5_t = p.ub_thm5_t;
    row.nmse_theory = p.nmse_theory;
    row.nmse_sim = p.nmse_sim;
    row.extras["sum_rate_mmse"] = p.sum_mmse;
    row.extras["sum_rate_mr"] = p.sum_mr;
    row.extras["sum_rate_zf"] = p.sum_zf;
    row.extras["cross_term_ratio"] = p.cross_term_ratio;
    row.extras["ub_condition_violated_blocks"] = p.ub_condition_violated_blocks;
    row.extras["trials"] = static_cast<double>(p.trials);
    row.extras["ue_saturation_sum"] = ue_saturation(cfg.hw.eps_ur) + ue_saturation(cfg.hw.eps_ut);
    row.extras["extra_antennas"] =
        cfg.hw.eps_v > 0.0 ? (1.0 - cfg.hw.eps_v) * cfg.m_ap / cfg.hw.eps_v : std::numeric_limits<double>::infinity();
    return row;
}

namespace
{

RunControl control(const ExperimentPlan &plan)
{
    return {plan.seed, plan.blocks, plan.trials_per_block, plan.workers};
}

std::vector<SweepRow> sweep(const ExperimentPlan &plan, Protocol protocol, const std::string &suffix,
                            SystemConfig (*modify)(SystemConfig))
{
    std::vector<SweepRow> rows;
    const RunControl run = control(plan);
    for (double v : plan.values)
    {
        SystemConfig c = apply_axis(plan.scenario, plan.axis, v);
        if (modify != nullptr)
            c = modify(c);
        rows.push_back(make_row(plan.axis + suffix, v, c, evaluate_point(c, protocol, run)));
    }
    return rows;
}

SystemConfig without_ios(SystemConfig c)
{
    c.ios_enabled = false;
    return c;
}

SystemConfig ignoring_hwi(SystemConfig c)
{
    c.estimator_ignores_hwi = true;
    return c;
}

SystemConfig random_phases(SystemConfig c)
{
    c.ios_phases = PhaseMode::random;
    return c;
}

SweepReport header(const ExperimentPlan &plan, const std::string &command)
{
    SweepReport rep;
    rep.command = command;
    rep.seed = plan.seed;
    rep.config_hash = config_hash(plan.scenario);
    rep.blocks = plan.blocks;
    rep.trials_per_block = plan.trials_per_block;
    rep.config = config_to_json(plan.scenario);
    return rep;
}

void append(std::vector<SweepRow> &dst, std::vector<SweepRow> &&src)
{
    for (SweepRow &r : src)
        dst.push_back(std::move(r));
}

} // namespace

std::vector<SweepRow> ts_protocol_rate(const ExperimentPlan &plan)
{
    plan.validate();
    return sweep(plan, Protocol::ts, baseline_suffix(Baseline::ts), nullptr);
}

std::vector<SweepRow> no_ios_baseline(const ExperimentPlan &plan)
{
    plan.validate();
    return sweep(plan, Protocol::ms, baseline_suffix(Baseline::no_ios), without_ios);
}

SweepReport run_ergodic(const ExperimentPlan &plan)
{
    plan.validate();
    SweepReport rep = header(plan, "ergodic");
    rep.rows = sweep(plan, Protocol::ms, "", nullptr);
    for (Baseline b : plan.baselines)
    {
        switch (b)
        {
        case Baseline::ts:
            append(rep.rows, ts_protocol_rate(plan));
            break;
        case Baseline::no_ios:
            append(rep.rows, no_ios_baseline(plan));
            break;
        case Baseline::ignore_hwi:
            append(rep.rows, sweep(plan, Protocol::ms, baseline_suffix(b), ignoring_hwi));
            break;
        case Baseline::random_phases:
            append(rep.rows, sweep(plan, Protocol::ms, baseline_suffix(b), random_phases));
            break;
        }
    }
    return rep;
}

SweepReport run_nmse(const ExperimentPlan &plan)
{
    ExperimentPlan p = plan;
    bool has = false;
    for (Baseline b : p.baselines)
        has = has || b == Baseline::ignore_hwi;
    if (!has)
        p.baselines.push_back(Baseline::ignore_hwi);
    SweepReport rep = run_ergodic(p);
    rep.command = "nmse";
    return rep;
}

int default_workers()
{
    if (const char *env = std::getenv("LINKLAB_WORKERS"))
    {
        char *end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1 && v <= 1024)
            return static_cast<int>(v);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

} // namespace linklab
