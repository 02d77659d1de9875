/**
 * @file config.hpp
 * @brief SimConfig: every run parameter, its key/value text form, validation
 *        and the canonical manifest serialization.
 *
 * Config files are sectioned key = value text; `[section]` prefixes keys with
 * "section.". Unknown keys are hard errors. `stimulus` and `probe` keys may
 * repeat. Every key below appears in the manifest, so two runs with equal
 * manifests are bit-identical reruns.
 */
#ifndef MOSPH_CONFIG_HPP
#define MOSPH_CONFIG_HPP

#include "aliev_panfilov.hpp"
#include "core.hpp"
#include "mechanics.hpp"
#include "netgen.hpp"
#include "version.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace mosph
{

struct StimulusSpec
{
    std::string target = "net"; ///< net | myo
    Vec3 site = Vec3::Zero();
    Real radius = 0; ///< 0: nearest particle only
    Real value = 1.0;
    Real t_begin = 0.0;
    Real t_end = 0.5;
};

struct ProbeSpec
{
    std::string name;
    std::string target = "myo"; ///< net | myo
    Vec3 site = Vec3::Zero();
};

struct SimConfig
{
    std::string scenario = "custom";
    Real t_end = 100.0;
    std::uint64_t seed = 0;
    std::string stepping = "multi"; ///< multi | single
    Real dt_safety = 1.0;
    int dt_network_dim = 1; ///< dimensionality d in the network step criterion

    // geometry
    std::string geometry_kind = "cuboid"; ///< fiber | cuboid | ellipsoid | mesh
    std::string mesh_path;
    Vec3 extent = Vec3(40.0, 1.0, 20.0);
    Real grid_spacing = 0; ///< level-set spacing; 0 = l_seg
    int grid_padding = 4;
    Vec3 endo_radii = Vec3(7.0, 7.0, 11.0);
    Vec3 epi_radii = Vec3(10.0, 10.0, 14.0);
    Real base_z = 0.0;

    // resolution
    Real dp0 = 0.2;
    Real l_seg = 0.2;
    Real h_ratio = 1.3;
    int min_axis_particles = 5;

    // network
    bool network_on = true;
    std::string network_source = "generic"; ///< generic | grown | file
    std::string network_file_prefix;
    GrowthParams growth;

    // electrophysiology
    Real d_iso_p = 0.1;
    Real d_iso_m = 0.1;
    Real d_ani_m = 0.01;
    ApParams ap_net, ap_myo;

    // mechanics
    bool mechanics_on = false;
    std::string active_mode = "ode"; ///< ode | constant
    Real ta_const = 0.1;             ///< kPa, constant active mode
    bool damping_on = true;
    Real damping_ratio = 0.2;
    HoParams ho;
    ActiveParams act;

    // stimuli & probes
    std::vector<StimulusSpec> stimuli;
    std::vector<ProbeSpec> probes;

    // output
    Real probe_every = 0.5;    ///< ms
    Real snapshot_every = 0.0; ///< ms; 0 = no snapshots
    std::string out_prefix = "run";
};

namespace detail
{

inline Real toReal(const std::string &v, const std::string &key)
{
    try
    {
        std::size_t used = 0;
        const Real r = std::stod(v, &used);
        while (used < v.size() && std::isspace(static_cast<unsigned char>(v[used])))
            ++used;
        if (used != v.size())
            throw std::invalid_argument(v);
        return r;
    }
    catch (const std::exception &)
    {
        throw ConfigError("bad numeric value for " + key + ": '" + v + "'");
    }
}

inline int toInt(const std::string &v, const std::string &key)
{
    const Real r = toReal(v, key);
    const int i = static_cast<int>(std::llround(r));
    if (std::abs(r - i) > 1e-12)
        throw ConfigError("expected integer for " + key + ": '" + v + "'");
    return i;
}

inline std::uint64_t toU64(const std::string &v, const std::string &key)
{
    try
    {
        return std::stoull(v);
    }
    catch (const std::exception &)
    {
        throw ConfigError("bad integer value for " + key + ": '" + v + "'");
    }
}

inline bool toBool(const std::string &v, const std::string &key)
{
    if (v == "true" || v == "on" || v == "1")
        return true;
    if (v == "false" || v == "off" || v == "0")
        return false;
    throw ConfigError("bad boolean value for " + key + ": '" + v + "'");
}

inline Vec3 toVec3(const std::string &v, const std::string &key)
{
    std::istringstream in(v);
    Vec3 out;
    if (!(in >> out.x() >> out.y() >> out.z()))
        throw ConfigError("expected three numbers for " + key + ": '" + v + "'");
    return out;
}

inline std::string fromVec3(const Vec3 &v)
{
    std::ostringstream out;
    out.precision(17);
    out << v.x() << ' ' << v.y() << ' ' << v.z();
    return out.str();
}

inline std::string fromReal(Real v)
{
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

struct KeyDef
{
    std::string key;
    std::function<void(SimConfig &, const std::string &)> set;
    std::function<std::string(const SimConfig &)> get;
};

inline const std::vector<KeyDef> &keyDefs()
{
    auto real_key = [](const char *k, Real SimConfig::*field) {
        return KeyDef{k,
                      [k, field](SimConfig &c, const std::string &v) { c.*field = toReal(v, k); },
                      [field](const SimConfig &c) { return fromReal(c.*field); }};
    };
    auto str_key = [](const char *k, std::string SimConfig::*field) {
        return KeyDef{k, [field](SimConfig &c, const std::string &v) { c.*field = v; },
                      [field](const SimConfig &c) { return c.*field; }};
    };
    auto bool_key = [](const char *k, bool SimConfig::*field) {
        return KeyDef{k,
                      [k, field](SimConfig &c, const std::string &v) { c.*field = toBool(v, k); },
                      [field](const SimConfig &c) { return c.*field ? "true" : "false"; }};
    };
    auto int_key = [](const char *k, int SimConfig::*field) {
        return KeyDef{k,
                      [k, field](SimConfig &c, const std::string &v) { c.*field = toInt(v, k); },
                      [field](const SimConfig &c) { return std::to_string(c.*field); }};
    };
    auto vec_key = [](const char *k, Vec3 SimConfig::*field) {
        return KeyDef{k,
                      [k, field](SimConfig &c, const std::string &v) { c.*field = toVec3(v, k); },
                      [field](const SimConfig &c) { return fromVec3(c.*field); }};
    };
    auto sub_real = [](const char *k, auto member, auto field) {
        return KeyDef{
            k, [k, member, field](SimConfig &c, const std::string &v) { c.*member.*field = toReal(v, k); },
            [member, field](const SimConfig &c) { return fromReal(c.*member.*field); }};
    };

    static const std::vector<KeyDef> defs = [&] {
        std::vector<KeyDef> d;
        d.push_back(str_key("scenario", &SimConfig::scenario));
        d.push_back(real_key("t_end", &SimConfig::t_end));
        d.push_back(KeyDef{"seed",
                           [](SimConfig &c, const std::string &v) { c.seed = toU64(v, "seed"); },
                           [](const SimConfig &c) { return std::to_string(c.seed); }});
        d.push_back(str_key("stepping", &SimConfig::stepping));
        d.push_back(real_key("dt_safety", &SimConfig::dt_safety));
        d.push_back(int_key("dt_network_dim", &SimConfig::dt_network_dim));

        d.push_back(str_key("geometry.kind", &SimConfig::geometry_kind));
        d.push_back(str_key("geometry.mesh", &SimConfig::mesh_path));
        d.push_back(vec_key("geometry.extent", &SimConfig::extent));
        d.push_back(real_key("geometry.grid_spacing", &SimConfig::grid_spacing));
        d.push_back(int_key("geometry.grid_padding", &SimConfig::grid_padding));
        d.push_back(vec_key("geometry.endo_radii", &SimConfig::endo_radii));
        d.push_back(vec_key("geometry.epi_radii", &SimConfig::epi_radii));
        d.push_back(real_key("geometry.base_z", &SimConfig::base_z));

        d.push_back(real_key("resolution.dp0", &SimConfig::dp0));
        d.push_back(real_key("resolution.l_seg", &SimConfig::l_seg));
        d.push_back(real_key("resolution.h_ratio", &SimConfig::h_ratio));
        d.push_back(int_key("resolution.min_axis_particles", &SimConfig::min_axis_particles));

        d.push_back(bool_key("network.enabled", &SimConfig::network_on));
        d.push_back(str_key("network.source", &SimConfig::network_source));
        d.push_back(str_key("network.file_prefix", &SimConfig::network_file_prefix));

        d.push_back(KeyDef{"growth.n_iterations",
                           [](SimConfig &c, const std::string &v) {
                               c.growth.n_iterations = toInt(v, "growth.n_iterations");
                           },
                           [](const SimConfig &c) { return std::to_string(c.growth.n_iterations); }});
        d.push_back(KeyDef{"growth.nodes_per_branch",
                           [](SimConfig &c, const std::string &v) {
                               c.growth.nodes_per_branch = toInt(v, "growth.nodes_per_branch");
                           },
                           [](const SimConfig &c) { return std::to_string(c.growth.nodes_per_branch); }});
        d.push_back(sub_real("growth.alpha0", &SimConfig::growth, &GrowthParams::alpha0));
        d.push_back(sub_real("growth.repulsion_weight", &SimConfig::growth, &GrowthParams::repulsion_weight));
        d.push_back(sub_real("growth.sigma", &SimConfig::growth, &GrowthParams::sigma));
        d.push_back(KeyDef{"growth.seed",
                           [](SimConfig &c, const std::string &v) {
                               c.growth.seed = toU64(v, "growth.seed");
                           },
                           [](const SimConfig &c) { return std::to_string(c.growth.seed); }});
        d.push_back(KeyDef{"growth.initial_node",
                           [](SimConfig &c, const std::string &v) {
                               c.growth.initial_node = toVec3(v, "growth.initial_node");
                           },
                           [](const SimConfig &c) { return fromVec3(c.growth.initial_node); }});
        d.push_back(KeyDef{"growth.initial_direction",
                           [](SimConfig &c, const std::string &v) {
                               c.growth.initial_direction = toVec3(v, "growth.initial_direction");
                           },
                           [](const SimConfig &c) { return fromVec3(c.growth.initial_direction); }});

        d.push_back(real_key("ep.d_iso_p", &SimConfig::d_iso_p));
        d.push_back(real_key("ep.d_iso_m", &SimConfig::d_iso_m));
        d.push_back(real_key("ep.d_ani_m", &SimConfig::d_ani_m));

        auto ap_keys = [&](const char *prefix, ApParams SimConfig::*member) {
            auto f = [&](const char *suffix, Real ApParams::*field) {
                std::string key = std::string(prefix) + "." + suffix;
                d.push_back(KeyDef{
                    key,
                    [field, member, key](SimConfig &c, const std::string &v) {
                        c.*member.*field = toReal(v, key);
                    },
                    [field, member](const SimConfig &c) { return fromReal(c.*member.*field); }});
            };
            f("k", &ApParams::k);
            f("a", &ApParams::a);
            f("b", &ApParams::b);
            f("eps0", &ApParams::eps0);
            f("mu1", &ApParams::mu1);
            f("mu2", &ApParams::mu2);
            f("cm", &ApParams::cm);
        };
        ap_keys("ap_net", &SimConfig::ap_net);
        ap_keys("ap_myo", &SimConfig::ap_myo);

        d.push_back(bool_key("mech.enabled", &SimConfig::mechanics_on));
        d.push_back(str_key("mech.active_mode", &SimConfig::active_mode));
        d.push_back(real_key("mech.ta_const", &SimConfig::ta_const));
        d.push_back(bool_key("mech.damping", &SimConfig::damping_on));
        d.push_back(real_key("mech.damping_ratio", &SimConfig::damping_ratio));

        d.push_back(sub_real("ho.a", &SimConfig::ho, &HoParams::a));
        d.push_back(sub_real("ho.b", &SimConfig::ho, &HoParams::b));
        d.push_back(sub_real("ho.a_f", &SimConfig::ho, &HoParams::a_f));
        d.push_back(sub_real("ho.b_f", &SimConfig::ho, &HoParams::b_f));
        d.push_back(sub_real("ho.a_s", &SimConfig::ho, &HoParams::a_s));
        d.push_back(sub_real("ho.b_s", &SimConfig::ho, &HoParams::b_s));
        d.push_back(sub_real("ho.a_fs", &SimConfig::ho, &HoParams::a_fs));
        d.push_back(sub_real("ho.b_fs", &SimConfig::ho, &HoParams::b_fs));
        d.push_back(sub_real("ho.lambda", &SimConfig::ho, &HoParams::lambda));
        d.push_back(sub_real("ho.rho0", &SimConfig::ho, &HoParams::rho0));
        d.push_back(sub_real("ho.sound_speed", &SimConfig::ho, &HoParams::sound_speed));
        d.push_back(KeyDef{"ho.fiber_tension_only",
                           [](SimConfig &c, const std::string &v) {
                               c.ho.fiber_tension_only = toBool(v, "ho.fiber_tension_only");
                           },
                           [](const SimConfig &c) {
                               return std::string(c.ho.fiber_tension_only ? "true" : "false");
                           }});

        d.push_back(sub_real("act.ka", &SimConfig::act, &ActiveParams::ka));
        d.push_back(sub_real("act.vr", &SimConfig::act, &ActiveParams::vr));
        d.push_back(sub_real("act.eps0", &SimConfig::act, &ActiveParams::eps0));
        d.push_back(sub_real("act.eps_inf", &SimConfig::act, &ActiveParams::eps_inf));
        d.push_back(sub_real("act.eps_neg_inf", &SimConfig::act, &ActiveParams::eps_neg_inf));
        d.push_back(sub_real("act.xi", &SimConfig::act, &ActiveParams::xi));
        d.push_back(sub_real("act.vm_bar", &SimConfig::act, &ActiveParams::vm_bar));

        d.push_back(real_key("out.probe_every", &SimConfig::probe_every));
        d.push_back(real_key("out.snapshot_every", &SimConfig::snapshot_every));
        d.push_back(str_key("out.prefix", &SimConfig::out_prefix));
        return d;
    }();
    return defs;
}

inline std::string trim(const std::string &s)
{
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos)
        return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

} // namespace detail

/// Applies one key = value assignment. Throws ConfigError on unknown keys.
inline void applyConfigKey(SimConfig &cfg, const std::string &key, const std::string &value)
{
    if (key == "stimulus")
    {
        std::istringstream in(value);
        StimulusSpec s;
        if (!(in >> s.target >> s.site.x() >> s.site.y() >> s.site.z() >> s.radius >> s.value >>
              s.t_begin >> s.t_end))
            throw ConfigError("stimulus expects: <net|myo> <x> <y> <z> <radius> <value> <t0> <t1>");
        cfg.stimuli.push_back(s);
        return;
    }
    if (key == "probe")
    {
        std::istringstream in(value);
        ProbeSpec p;
        if (!(in >> p.name >> p.target >> p.site.x() >> p.site.y() >> p.site.z()))
            throw ConfigError("probe expects: <name> <net|myo> <x> <y> <z>");
        cfg.probes.push_back(p);
        return;
    }
    for (const auto &def : detail::keyDefs())
        if (key == def.key)
        {
            def.set(cfg, value);
            return;
        }
    throw ConfigError("unknown configuration key: '" + key + "'");
}

/// Canonical serialization: every key in declaration order, then stimuli and
/// probes. Re-loading the output reproduces the config exactly.
inline std::string serializeConfig(const SimConfig &cfg)
{
    std::ostringstream out;
    for (const auto &def : detail::keyDefs())
        out << def.key << " = " << def.get(cfg) << "\n";
    out.precision(17);
    for (const auto &s : cfg.stimuli)
        out << "stimulus = " << s.target << ' ' << s.site.x() << ' ' << s.site.y() << ' '
            << s.site.z() << ' ' << s.radius << ' ' << s.value << ' ' << s.t_begin << ' ' << s.t_end
            << "\n";
    for (const auto &p : cfg.probes)
        out << "probe = " << p.name << ' ' << p.target << ' ' << p.site.x() << ' ' << p.site.y()
            << ' ' << p.site.z() << "\n";
    return out.str();
}

/// FNV-1a 64-bit hash of the canonical serialization.
inline std::string configHash(const SimConfig &cfg)
{
    const std::string text = serializeConfig(cfg);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const unsigned char c : text)
    {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Validates cross-field invariants. Throws ConfigError naming the field.
inline void validateConfig(const SimConfig &cfg)
{
    auto oneOf = [](const std::string &v, std::initializer_list<const char *> allowed,
                    const char *field) {
        for (const char *a : allowed)
            if (v == a)
                return;
        throw ConfigError(std::string("invalid value for ") + field + ": '" + v + "'");
    };
    oneOf(cfg.stepping, {"multi", "single"}, "stepping");
    oneOf(cfg.geometry_kind, {"fiber", "cuboid", "ellipsoid", "mesh"}, "geometry.kind");
    oneOf(cfg.network_source, {"generic", "grown", "file"}, "network.source");
    oneOf(cfg.active_mode, {"ode", "constant"}, "mech.active_mode");
    if (!(cfg.t_end > 0))
        throw ConfigError("t_end must be positive");
    if (!(cfg.dp0 > 0) || !(cfg.l_seg > 0))
        throw ConfigError("resolution.dp0 and resolution.l_seg must be positive");
    if (!(cfg.h_ratio > 0))
        throw ConfigError("resolution.h_ratio must be positive");
    if (!(cfg.dt_safety > 0))
        throw ConfigError("dt_safety must be positive");
    if (cfg.dt_network_dim != 1 && cfg.dt_network_dim != 3)
        throw ConfigError("dt_network_dim must be 1 or 3");

    const bool has_myo = cfg.geometry_kind != "fiber";
    const bool coupling = has_myo && cfg.network_on;
    if (coupling && std::abs(cfg.l_seg - cfg.dp0) > 1e-12)
        throw ConfigError("coupling requires resolution.l_seg = resolution.dp0 (identical smoothing length)");

    if (cfg.geometry_kind == "mesh" && !cfg.mesh_path.empty() &&
        !std::filesystem::exists(cfg.mesh_path))
        throw ConfigError("geometry.mesh path does not exist: " + cfg.mesh_path);
    if (cfg.geometry_kind == "mesh" && cfg.mesh_path.empty())
        throw ConfigError("geometry.kind = mesh requires geometry.mesh");
    if (cfg.network_on && cfg.network_source == "file")
    {
        if (cfg.network_file_prefix.empty())
            throw ConfigError("network.source = file requires network.file_prefix");
        if (!std::filesystem::exists(cfg.network_file_prefix + ".net.txt"))
            throw ConfigError("network file does not exist: " + cfg.network_file_prefix +
                              ".net.txt");
    }
    for (const auto &s : cfg.stimuli)
    {
        if (s.target != "net" && s.target != "myo")
            throw ConfigError("stimulus target must be net or myo");
        if (s.t_end < s.t_begin)
            throw ConfigError("stimulus window must satisfy t0 <= t1");
    }
    for (const auto &p : cfg.probes)
        if (p.target != "net" && p.target != "myo")
            throw ConfigError("probe target must be net or myo");
    cfg.ap_net.validate();
    cfg.ap_myo.validate();
    if (cfg.mechanics_on)
        cfg.ho.validate();
    if (!(cfg.probe_every > 0))
        throw ConfigError("out.probe_every must be positive");
}

// defined in scenarios.hpp
SimConfig scenarioConfig(const std::string &name);

/// Loads a sectioned key = value file. A `scenario` key switches the defaults
/// to that built-in before the remaining assignments apply.
inline SimConfig loadConfig(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path);

    std::vector<std::pair<std::string, std::string>> entries;
    std::string line, section;
    while (std::getline(in, line))
    {
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos)
            line = line.substr(0, comment);
        line = detail::trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[')
        {
            if (line.back() != ']')
                throw ConfigError("malformed section header: " + line);
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key = value, got: " + line);
        std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (!section.empty())
            key = section + "." + key;
        entries.emplace_back(key, value);
    }

    SimConfig cfg;
    for (const auto &[key, value] : entries)
        if (key == "scenario")
            cfg = scenarioConfig(value);
    for (const auto &[key, value] : entries)
        applyConfigKey(cfg, key, value);
    validateConfig(cfg);
    return cfg;
}

} // namespace mosph
#endif // MOSPH_CONFIG_HPP
