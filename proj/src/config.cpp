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

#include "linklab/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace linklab
{

using nlohmann::json;

namespace
{

template <typename E>
struct EnumName
{
    E value;
    const char *name;
};

constexpr EnumName<Combiner> kCombiners[] = {{Combiner::mmse, "mmse"}, {Combiner::mr, "mr"}, {Combiner::zf, "zf"}};
constexpr EnumName<PhaseMode> kPhaseModes[] = {{PhaseMode::optimal, "optimal"}, {PhaseMode::random, "random"}};
constexpr EnumName<RMatrixVariant> kVariants[] = {{RMatrixVariant::full_error, "appendix_a"},
                                                  {RMatrixVariant::ue_scaled_error, "eq29_as_printed"}};
constexpr EnumName<ChannelSampler> kChannelSamplers[] = {{ChannelSampler::composed, "composed"},
                                                         {ChannelSampler::conditional, "conditional"}};
constexpr EnumName<PilotSampler> kPilotSamplers[] = {{PilotSampler::slots, "slots"},
                                                     {PilotSampler::despread, "despread"}};
constexpr EnumName<SteeringSign> kSigns[] = {{SteeringSign::positive, "positive"},
                                             {SteeringSign::negative, "negative"}};

template <typename E, std::size_t N>
const char *name_of(const EnumName<E> (&table)[N], E v)
{
    for (const auto &e : table)
        if (e.value == v)
            return e.name;
    return "?";
}

template <typename E, std::size_t N>
E parse_enum(const EnumName<E> (&table)[N], const json &j, const std::string &key)
{
    if (!j.is_string())
        throw ConfigError("config: '" + key + "' must be a string");
    const std::string s = j.get<std::string>();
    for (const auto &e : table)
        if (s == e.name)
            return e.value;
    throw ConfigError("config: unknown value '" + s + "' for '" + key + "'");
}

double number(const json &j, const std::string &key)
{
    if (!j.is_number())
        throw ConfigError("config: '" + key + "' must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v))
        throw ConfigError("config: '" + key + "' must be finite");
    return v;
}

int integer(const json &j, const std::string &key)
{
    if (!j.is_number_integer() && !(j.is_number() && std::floor(j.get<double>()) == j.get<double>()))
        throw ConfigError("config: '" + key + "' must be an integer");
    const double v = j.get<double>();
    if (std::abs(v) > 1e9)
        throw ConfigError("config: '" + key + "' is out of range");
    return static_cast<int>(v);
}

bool boolean(const json &j, const std::string &key)
{
    if (!j.is_boolean())
        throw ConfigError("config: '" + key + "' must be a boolean");
    return j.get<bool>();
}

void check_keys(const json &j, const std::set<std::string> &allowed, const std::string &where)
{
    if (!j.is_object())
        throw ConfigError("config: '" + where + "' must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
}

Point3 point(const json &j, const std::string &key)
{
    if (!j.is_array() || j.size() != 3)
        throw ConfigError("config: '" + key + "' must be an array of three numbers");
    return {number(j[0], key), number(j[1], key), number(j[2], key)};
}

SurfaceGrid grid(const json &j, const std::string &key, SurfaceGrid g)
{
    check_keys(j, {"nx", "ny", "dx", "dy"}, key);
    if (j.contains("nx"))
        g.nx = integer(j["nx"], key + ".nx");
    if (j.contains("ny"))
        g.ny = integer(j["ny"], key + ".ny");
    if (j.contains("dx"))
        g.dx = number(j["dx"], key + ".dx");
    if (j.contains("dy"))
        g.dy = number(j["dy"], key + ".dy");
    return g;
}

KappaSet kappa(const json &j, const std::string &key, KappaSet k, bool in_db)
{
    auto conv = [&](const json &v, const std::string &name) {
        const double x = number(v, name);
        if (in_db)
            return db_to_linear(x);
        if (x < 0.0)
            throw ConfigError("config: '" + name + "' must be >= 0");
        return x;
    };
    if (j.is_number())
    {
        const double v = conv(j, key);
        return {v, v, v, v};
    }
    check_keys(j, {"A_r", "A_t", "g_r", "g_t"}, key);
    if (j.contains("A_r"))
        k.a_r = conv(j["A_r"], key + ".A_r");
    if (j.contains("A_t"))
        k.a_t = conv(j["A_t"], key + ".A_t");
    if (j.contains("g_r"))
        k.g_r = conv(j["g_r"], key + ".g_r");
    if (j.contains("g_t"))
        k.g_t = conv(j["g_t"], key + ".g_t");
    return k;
}

json point_json(const Point3 &p) { return json::array({p.x, p.y, p.z}); }

json grid_json(const SurfaceGrid &g) { return {{"nx", g.nx}, {"ny", g.ny}, {"dx", g.dx}, {"dy", g.dy}}; }

} // namespace

const char *to_string(Combiner c) { return name_of(kCombiners, c); }
const char *to_string(PhaseMode p) { return name_of(kPhaseModes, p); }
const char *to_string(RMatrixVariant v) { return name_of(kVariants, v); }
const char *to_string(ChannelSampler s) { return name_of(kChannelSamplers, s); }
const char *to_string(PilotSampler s) { return name_of(kPilotSamplers, s); }
const char *to_string(SteeringSign s) { return name_of(kSigns, s); }

void SystemConfig::validate() const
{
    try
    {
        geometry().validate();
        link_budget().validate();
        hw.validate();
        powers().validate();
    }
    catch (const std::invalid_argument &e)
    {
        throw ConfigError(std::string("config: ") + e.what());
    }
    for (double k : {kappa.a_r, kappa.a_t, kappa.g_r, kappa.g_t})
        if (!(k >= 0.0) || !std::isfinite(k))
            throw ConfigError("config: Rician factors must be finite and >= 0");
    if (k_pilots < 2)
        throw ConfigError("config: k_pilots must be >= 2");
    if (blocks < 1 || trials_per_block < 1)
        throw ConfigError("config: blocks and trials_per_block must be >= 1");
    if (!std::isfinite(delta_psi_rad))
        throw ConfigError("config: delta_psi_rad must be finite");
}

ArrayGeometry SystemConfig::geometry() const
{
    return {m_ap, d0, ios_r, ios_t, steering_sign};
}

LinkBudget SystemConfig::link_budget() const
{
    LinkDistances d{};
    try
    {
        d = distances_from_positions(coords);
    }
    catch (const std::invalid_argument &e)
    {
        throw ConfigError(std::string("config: ") + e.what());
    }
    const double c0 = db_to_linear(c0_db);
    LinkBudget b;
    b.r.surface_ap = {d.surface_ap_r, alpha_a, c0, kappa.a_r, !ios_enabled};
    b.t.surface_ap = {d.surface_ap_t, alpha_a, c0, kappa.a_t, !ios_enabled};
    b.r.ue_surface = {d.ue_surface_r, alpha_g, c0, kappa.g_r, !ios_enabled};
    b.t.ue_surface = {d.ue_surface_t, alpha_g, c0, kappa.g_t, !ios_enabled};
    b.r.direct = {d.direct_r, alpha_b, c0, 0.0, !direct_link};
    b.t.direct = {d.direct_t, alpha_b, c0, 0.0, !direct_link};
    return b;
}

PowerProfile SystemConfig::powers() const
{
    return {dbm_to_watts(rho_r_dbm), dbm_to_watts(rho_t_dbm), dbm_to_watts(noise_dbm)};
}

SystemConfig config_from_json(const json &j, const SystemConfig &base)
{
    static const std::set<std::string> keys{
        "m_ap",      "d0",         "ios",          "steering_sign",     "coords",      "delta_psi_rad",
        "kappa_db",  "kappa_linear", "alpha",      "alpha_b",           "c0_db",       "k_pilots",
        "eps_v",     "eps_ur",     "eps_ut",       "rho_r_dbm",         "rho_t_dbm",   "noise_dbm",
        "estimator_ignores_hwi",   "combiner",     "ios_phases",        "r_matrix_variant",
        "channel_sampler",         "pilot_sampler", "direct_link",      "ios_enabled", "blocks",
        "trials_per_block"};
    check_keys(j, keys, "config");

    SystemConfig c = base;
    try
    {
        if (j.contains("m_ap"))
            c.m_ap = integer(j["m_ap"], "m_ap");
        if (j.contains("d0"))
            c.d0 = number(j["d0"], "d0");
        if (j.contains("ios"))
        {
            check_keys(j["ios"], {"r", "t"}, "ios");
            if (j["ios"].contains("r"))
                c.ios_r = grid(j["ios"]["r"], "ios.r", c.ios_r);
            if (j["ios"].contains("t"))
                c.ios_t = grid(j["ios"]["t"], "ios.t", c.ios_t);
        }
        if (j.contains("steering_sign"))
            c.steering_sign = parse_enum(kSigns, j["steering_sign"], "steering_sign");
        if (j.contains("coords"))
        {
            const json &p = j["coords"];
            check_keys(p, {"ap", "ue_r", "ue_t", "ios_r", "ios_t"}, "coords");
            if (p.contains("ap"))
                c.coords.ap = point(p["ap"], "coords.ap");
            if (p.contains("ue_r"))
                c.coords.ue_r = point(p["ue_r"], "coords.ue_r");
            if (p.contains("ue_t"))
                c.coords.ue_t = point(p["ue_t"], "coords.ue_t");
            if (p.contains("ios_r"))
                c.coords.ios_r = point(p["ios_r"], "coords.ios_r");
            if (p.contains("ios_t"))
                c.coords.ios_t = point(p["ios_t"], "coords.ios_t");
        }
        if (j.contains("delta_psi_rad"))
            c.delta_psi_rad = number(j["delta_psi_rad"], "delta_psi_rad");
        if (j.contains("kappa_db") && j.contains("kappa_linear"))
            throw ConfigError("config: give either 'kappa_db' or 'kappa_linear', not both");
        if (j.contains("kappa_db"))
            c.kappa = kappa(j["kappa_db"], "kappa_db", c.kappa, true);
        if (j.contains("kappa_linear"))
            c.kappa = kappa(j["kappa_linear"], "kappa_linear", c.kappa, false);
        if (j.contains("alpha"))
        {
            const json &a = j["alpha"];
            if (a.is_number())
                c.alpha_a = c.alpha_g = number(a, "alpha");
            else
            {
                check_keys(a, {"A", "g"}, "alpha");
                if (a.contains("A"))
                    c.alpha_a = number(a["A"], "alpha.A");
                if (a.contains("g"))
                    c.alpha_g = number(a["g"], "alpha.g");
            }
        }
        if (j.contains("alpha_b"))
            c.alpha_b = number(j["alpha_b"], "alpha_b");
        if (j.contains("c0_db"))
            c.c0_db = number(j["c0_db"], "c0_db");
        if (j.contains("k_pilots"))
            c.k_pilots = integer(j["k_pilots"], "k_pilots");
        if (j.contains("eps_v"))
            c.hw.eps_v = number(j["eps_v"], "eps_v");
        if (j.contains("eps_ur"))
            c.hw.eps_ur = number(j["eps_ur"], "eps_ur");
        if (j.contains("eps_ut"))
            c.hw.eps_ut = number(j["eps_ut"], "eps_ut");
        if (j.contains("rho_r_dbm"))
            c.rho_r_dbm = number(j["rho_r_dbm"], "rho_r_dbm");
        if (j.contains("rho_t_dbm"))
            c.rho_t_dbm = number(j["rho_t_dbm"], "rho_t_dbm");
        if (j.contains("noise_dbm"))
            c.noise_dbm = number(j["noise_dbm"], "noise_dbm");
        if (j.contains("estimator_ignores_hwi"))
            c.estimator_ignores_hwi = boolean(j["estimator_ignores_hwi"], "estimator_ignores_hwi");
        if (j.contains("combiner"))
            c.combiner = parse_enum(kCombiners, j["combiner"], "combiner");
        if (j.contains("ios_phases"))
            c.ios_phases = parse_enum(kPhaseModes, j["ios_phases"], "ios_phases");
        if (j.contains("r_matrix_variant"))
            c.r_matrix_variant = parse_enum(kVariants, j["r_matrix_variant"], "r_matrix_variant");
        if (j.contains("channel_sampler"))
            c.channel_sampler = parse_enum(kChannelSamplers, j["channel_sampler"], "channel_sampler");
        if (j.contains("pilot_sampler"))
            c.pilot_sampler = parse_enum(kPilotSamplers, j["pilot_sampler"], "pilot_sampler");
        if (j.contains("direct_link"))
            c.direct_link = boolean(j["direct_link"], "direct_link");
        if (j.contains("ios_enabled"))
            c.ios_enabled = boolean(j["ios_enabled"], "ios_enabled");
        if (j.contains("blocks"))
            c.blocks = integer(j["blocks"], "blocks");
        if (j.contains("trials_per_block"))
            c.trials_per_block = integer(j["trials_per_block"], "trials_per_block");
    }
    catch (const json::exception &e)
    {
        throw ConfigError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

SystemConfig load_config(const std::string &path, const SystemConfig &base)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config: cannot open '" + path + "'");
    json j;
    try
    {
        in >> j;
    }
    catch (const json::exception &e)
    {
        throw ConfigError("config: '" + path + "' is not valid JSON: " + e.what());
    }
    return config_from_json(j, base);
}

json config_to_json(const SystemConfig &c)
{
    json j;
    j["m_ap"] = c.m_ap;
    j["d0"] = c.d0;
    j["ios"] = {{"r", grid_json(c.ios_r)}, {"t", grid_json(c.ios_t)}};
    j["steering_sign"] = to_string(c.steering_sign);
    j["coords"] = {{"ap", point_json(c.coords.ap)},
                   {"ue_r", point_json(c.coords.ue_r)},
                   {"ue_t", point_json(c.coords.ue_t)},
                   {"ios_r", point_json(c.coords.ios_r)},
                   {"ios_t", point_json(c.coords.ios_t)}};
    j["delta_psi_rad"] = c.delta_psi_rad;
    j["kappa_linear"] = {{"A_r", c.kappa.a_r}, {"A_t", c.kappa.a_t}, {"g_r", c.kappa.g_r}, {"g_t", c.kappa.g_t}};
    j["alpha"] = {{"A", c.alpha_a}, {"g", c.alpha_g}};
    j["alpha_b"] = c.alpha_b;
    j["c0_db"] = c.c0_db;
    j["k_pilots"] = c.k_pilots;
    j["eps_v"] = c.hw.eps_v;
    j["eps_ur"] = c.hw.eps_ur;
    j["eps_ut"] = c.hw.eps_ut;
    j["rho_r_dbm"] = c.rho_r_dbm;
    j["rho_t_dbm"] = c.rho_t_dbm;
    j["noise_dbm"] = c.noise_dbm;
    j["estimator_ignores_hwi"] = c.estimator_ignores_hwi;
    j["combiner"] = to_string(c.combiner);
    j["ios_phases"] = to_string(c.ios_phases);
    j["r_matrix_variant"] = to_string(c.r_matrix_variant);
    j["channel_sampler"] = to_string(c.channel_sampler);
    j["pilot_sampler"] = to_string(c.pilot_sampler);
    j["direct_link"] = c.direct_link;
    j["ios_enabled"] = c.ios_enabled;
    j["blocks"] = c.blocks;
    j["trials_per_block"] = c.trials_per_block;
    return j;
}

std::uint64_t config_hash(const SystemConfig &cfg)
{
    const std::string s = config_to_json(cfg).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s)
    {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

SurfaceGrid factor_surface(int n, double dx, double dy)
{
    if (n < 1)
        throw ConfigError("config: element count must be >= 1");
    const int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
    if (s * s == n)
        return {s, s, dx, dy};
    if (n % 2 == 0)
    {
        const int h = static_cast<int>(std::lround(std::sqrt(n / 2.0)));
        if (2 * h * h == n)
            return {2 * h, h, dx, dy};
    }
    int ny = 1;
    for (int d = 1; static_cast<long>(d) * d <= n; ++d)
        if (n % d == 0)
            ny = d;
    return {n / ny, ny, dx, dy};
}

namespace
{

int integral(double v, const std::string &axis)
{
    if (!std::isfinite(v) || std::floor(v) != v || std::abs(v) > 1e9)
        throw ConfigError("sweep: axis '" + axis + "' needs integer values");
    return static_cast<int>(v);
}

} // namespace

SystemConfig apply_axis(const SystemConfig &cfg, const std::string &axis, double v)
{
    if (!std::isfinite(v))
        throw ConfigError("sweep: values must be finite");
    SystemConfig c = cfg;
    if (axis == "rho_dbm")
        c.rho_r_dbm = c.rho_t_dbm = v;
    else if (axis == "m_ap")
        c.m_ap = integral(v, axis);
    else if (axis == "n_elements_per_side")
    {
        const int n = integral(v, axis);
        c.ios_r = factor_surface(n, c.ios_r.dx, c.ios_r.dy);
        c.ios_t = factor_surface(n, c.ios_t.dx, c.ios_t.dy);
    }
    else if (axis == "kappa_db")
    {
        const double k = db_to_linear(v);
        c.kappa = {k, k, k, k};
    }
    else if (axis == "delta_psi_rad")
        c.delta_psi_rad = v;
    else if (axis == "alpha_b")
        c.alpha_b = v;
    else if (axis == "eps_u")
        c.hw.eps_ur = c.hw.eps_ut = v;
    else if (axis == "eps_v")
        c.hw.eps_v = v;
    else if (axis == "k_pilots")
        c.k_pilots = integral(v, axis);
    else
        throw ConfigError("sweep: unknown axis '" + axis + "'");
    c.validate();
    return c;
}

} // namespace linklab
