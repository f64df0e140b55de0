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

// Command-line front end: parameter sweeps, baselines and the oracle suite.

#include "linklab/config.hpp"
#include "linklab/engine.hpp"
#include "linklab/report.hpp"
#include "linklab/validate.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace
{

using namespace linklab;

struct Command
{
    std::string name;
    std::string help;
    std::string axis;
    std::vector<double> values;
    std::vector<Baseline> baselines;
    bool nmse = false;
    void (*defaults)(SystemConfig &) = nullptr;
};

std::vector<double> range(double lo, double hi, double step)
{
    std::vector<double> v;
    for (int i = 0; lo + i * step <= hi + 1e-9; ++i)
        v.push_back(lo + i * step);
    return v;
}

std::vector<Command> commands()
{
    return {
        {"nmse", "Channel-estimation N-MSE versus transmit power", "rho_dbm", range(-10, 40, 5),
         {Baseline::ignore_hwi}, true,
         [](SystemConfig &c) {
             c.m_ap = 50;
             c.hw = {0.99, 0.99, 0.99};
         }},
        {"rate-vs-power", "Ergodic sum-rate versus transmit power", "rho_dbm", range(-10, 40, 5), {}, false, nullptr},
        {"rate-vs-antennas", "Ergodic sum-rate versus AP antenna count", "m_ap", {16, 32, 64, 128, 256}, {}, false,
         nullptr},
        {"rate-vs-rician", "Ergodic sum-rate versus Rician factor", "kappa_db", range(-10, 20, 5), {}, false, nullptr},
        {"rate-vs-aoa", "Ergodic sum-rate versus AoA separation, optimal and random phases", "delta_psi_rad",
         {0.02 * kPi, 0.05 * kPi, 0.1 * kPi, 0.2 * kPi, 0.3 * kPi, 0.5 * kPi}, {Baseline::random_phases}, false,
         nullptr},
        {"rate-vs-pathloss", "Ergodic sum-rate versus direct-link exponent, with and without the surface", "alpha_b",
         range(2.5, 5.5, 0.5), {Baseline::no_ios}, false, nullptr},
        {"protocol-compare", "Mode-stitching versus time-switching sum-rate", "rho_dbm", range(-10, 40, 10),
         {Baseline::ts}, false, nullptr},
    };
}

struct CommonOptions
{
    std::string config_path;
    std::uint64_t seed = 1;
    long trials = 0; // 0: keep the configured blocks x trials_per_block
    std::string out;
    std::string format = "csv";
    int workers = 0;
    std::vector<double> values;
};

void add_common(CLI::App *app, CommonOptions &o, bool sweep)
{
    app->add_option("--config", o.config_path, "JSON scenario file")->check(CLI::ExistingFile);
    app->add_option("--seed", o.seed, "64-bit master seed");
    app->add_option("--workers", o.workers, "Worker threads (default: LINKLAB_WORKERS or hardware threads)")
        ->check(CLI::PositiveNumber);
    if (!sweep)
        return;
    app->add_option("--trials", o.trials, "Total coherence intervals, split evenly over the statistical blocks")
        ->check(CLI::PositiveNumber);
    app->add_option("--out", o.out, "Output path (default: stdout)");
    app->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app->add_option("--values", o.values, "Override the sweep values")->delimiter(',');
}

SystemConfig resolve(const CommonOptions &o, const Command *cmd)
{
    SystemConfig base;
    if (cmd != nullptr && cmd->defaults != nullptr)
        cmd->defaults(base);
    if (o.config_path.empty())
        return base;
    return load_config(o.config_path, base);
}

int run_sweep(const Command &cmd, const CommonOptions &o)
{
    ExperimentPlan plan;
    plan.scenario = resolve(o, &cmd);
    plan.axis = cmd.axis;
    plan.values = o.values.empty() ? cmd.values : o.values;
    plan.blocks = plan.scenario.blocks;
    plan.trials_per_block = plan.scenario.trials_per_block;
    if (o.trials > 0)
        plan.trials_per_block = static_cast<int>(std::max<long>(1, o.trials / plan.blocks));
    plan.seed = o.seed;
    plan.workers = o.workers > 0 ? o.workers : default_workers();
    plan.baselines = cmd.baselines;

    SweepReport rep = cmd.nmse ? run_nmse(plan) : run_ergodic(plan);
    rep.command = cmd.name;
    emit_report(rep, o.format == "json" ? ReportFormat::json : ReportFormat::csv, o.out);
    return 0;
}

int run_validate(const CommonOptions &o, int draws)
{
    const SystemConfig cfg = resolve(o, nullptr);
    ValidateOptions opt;
    opt.seed = o.seed;
    opt.variant = cfg.r_matrix_variant;
    opt.workers = o.workers > 0 ? o.workers : default_workers();
    opt.moment_draws = draws;
    const std::vector<OracleResult> results = run_oracles(opt);
    print_oracle_table(results, std::cout);
    const bool ok = all_passed(results);
    std::cout << (ok ? "validate: all oracles passed" : "validate: oracle failures") << std::endl;
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"linklab: ergodic-rate and channel-estimation sweeps for surface-aided MIMO uplinks"};
    app.require_subcommand(1);

    const std::vector<Command> cmds = commands();
    std::map<std::string, CommonOptions> opts;
    std::map<std::string, CLI::App *> subs;
    for (const Command &c : cmds)
    {
        CLI::App *sub = app.add_subcommand(c.name, c.help);
        add_common(sub, opts[c.name], true);
        subs[c.name] = sub;
    }
    CLI::App *val = app.add_subcommand("validate", "Run the numerical oracle suite; exit status 1 on any failure");
    add_common(val, opts["validate"], false);
    int draws = 100000;
    val->add_option("--draws", draws, "Draws per moment oracle")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (val->parsed())
            return run_validate(opts["validate"], draws);
        for (const Command &c : cmds)
            if (subs[c.name]->parsed())
                return run_sweep(c, opts[c.name]);
    }
    catch (const ConfigError &e)
    {
        std::cerr << "linklab: " << e.what() << '\n';
        return 2;
    }
    catch (const EngineError &e)
    {
        std::cerr << "linklab: numeric failure at block " << e.block() << ", trial " << e.trial() << ": " << e.what()
                  << '\n';
        return 3;
    }
    catch (const std::exception &e)
    {
        std::cerr << "linklab: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
