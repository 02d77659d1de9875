/**
 * @file mosph_main.cpp
 * @brief Command-line driver: levelset, netgen, run-ep, run-em, scenarios, validate.
 */
#include <CLI11.hpp>

#include "mosph/config.hpp"
#include "mosph/level_set.hpp"
#include "mosph/mesh.hpp"
#include "mosph/netgen.hpp"
#include "mosph/scenarios.hpp"
#include "mosph/timeloop.hpp"
#include "mosph/version.hpp"

#include <chrono>
#include <iostream>

namespace
{

using namespace mosph;

SimConfig configFromOptions(const std::string &scenario, const std::string &config_path,
                            const std::vector<std::string> &overrides)
{
    SimConfig cfg;
    if (!config_path.empty())
        cfg = loadConfig(config_path);
    else if (!scenario.empty())
        cfg = scenarioConfig(scenario);
    else
        throw ConfigError("either --scenario or --config is required");
    for (const auto &kv : overrides)
    {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        applyConfigKey(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    validateConfig(cfg);
    return cfg;
}

int runCommand(const std::string &scenario, const std::string &config_path,
               const std::vector<std::string> &overrides, const std::string &out_prefix,
               bool mechanics)
{
    SimConfig cfg = configFromOptions(scenario, config_path, overrides);
    cfg.mechanics_on = mechanics;
    if (!out_prefix.empty())
        cfg.out_prefix = out_prefix;
    Scenario sc = buildScenario(cfg);
    std::cout << "scenario " << cfg.scenario << ": "
              << (sc.network ? sc.network->size() : 0) << " network / "
              << (sc.myo ? sc.myo->size() : 0) << " myocardium particles\n";
    const RunArtifacts artifacts = runScenario(sc, cfg.stepping == "multi");
    std::cout << "finished t = " << cfg.t_end << " ms in " << artifacts.wall_run_s << " s ("
              << artifacts.outer_steps << " outer steps)\n"
              << "manifest: " << artifacts.manifest_file << "\n";
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{std::string(mosph::version_string) +
                 " - multi-order SPH cardiac electromechanics with a Purkinje network"};
    app.require_subcommand(1);

    std::string mesh_path, config_path, out_prefix, scenario;
    std::vector<std::string> overrides;
    double spacing = 0;
    int padding = 4;

    auto *cmd_levelset = app.add_subcommand("levelset", "build a level set from a surface mesh");
    cmd_levelset->add_option("--mesh", mesh_path, "STL or OBJ surface mesh")->required();
    cmd_levelset->add_option("--spacing", spacing, "grid spacing (mm)")->required();
    cmd_levelset->add_option("--padding", padding, "grid padding in cells");
    cmd_levelset->add_option("--out", out_prefix, "output file")->required();

    auto *cmd_netgen = app.add_subcommand("netgen", "grow a network on a surface mesh");
    cmd_netgen->add_option("--mesh", mesh_path, "STL or OBJ surface mesh")->required();
    cmd_netgen->add_option("--config", config_path, "run configuration")->required();
    cmd_netgen->add_option("--out", out_prefix, "output prefix")->required();
    cmd_netgen->add_option("--set", overrides, "override config keys (key=value)");

    auto *cmd_run_ep = app.add_subcommand("run-ep", "run electrophysiology");
    cmd_run_ep->add_option("--scenario", scenario, "built-in scenario name");
    cmd_run_ep->add_option("--config", config_path, "run configuration");
    cmd_run_ep->add_option("--out", out_prefix, "output prefix");
    cmd_run_ep->add_option("--set", overrides, "override config keys (key=value)");

    auto *cmd_run_em = app.add_subcommand("run-em", "run electromechanics");
    cmd_run_em->add_option("--scenario", scenario, "built-in scenario name");
    cmd_run_em->add_option("--config", config_path, "run configuration");
    cmd_run_em->add_option("--out", out_prefix, "output prefix");
    cmd_run_em->add_option("--set", overrides, "override config keys (key=value)");

    auto *cmd_scenarios = app.add_subcommand("scenarios", "list built-in scenarios");

    auto *cmd_validate = app.add_subcommand("validate", "validate a configuration file");
    cmd_validate->add_option("--config", config_path, "run configuration")->required();

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (cmd_levelset->parsed())
        {
            const mosph::TriangleSoup soup = mosph::loadMesh(mesh_path);
            const mosph::LevelSetGrid grid = mosph::buildLevelSet(soup, spacing, padding);
            mosph::saveLevelSet(grid, out_prefix);
            std::cout << "level set " << grid.dims.x() << "x" << grid.dims.y() << "x"
                      << grid.dims.z() << " -> " << out_prefix << "\n";
            return 0;
        }
        if (cmd_netgen->parsed())
        {
            mosph::SimConfig cfg = configFromOptions("", config_path, overrides);
            cfg.mesh_path = mesh_path;
            const mosph::TriangleSoup soup = mosph::loadMesh(mesh_path);
            const double grid_spacing = cfg.grid_spacing > 0 ? cfg.grid_spacing : cfg.l_seg;

            const auto t0 = std::chrono::steady_clock::now();
            const mosph::LevelSetGrid grid =
                mosph::buildLevelSet(soup, grid_spacing, cfg.grid_padding);
            const auto t1 = std::chrono::steady_clock::now();
            mosph::GrowthParams gp = cfg.growth;
            gp.l_seg = cfg.l_seg;
            const mosph::NetworkTree tree = mosph::growNetwork(grid, gp);
            const auto t2 = std::chrono::steady_clock::now();

            mosph::saveNetwork(tree, out_prefix);
            const double pre_s = std::chrono::duration<double>(t1 - t0).count();
            const double gen_s = std::chrono::duration<double>(t2 - t1).count();
            std::cout << "network: " << tree.nodeCount() << " nodes, " << tree.branches.size()
                      << " branches, " << tree.terminal_node_ids.size() << " terminals\n"
                      << "pre-processing " << pre_s << " s, generation " << gen_s << " s\n"
                      << "wrote " << out_prefix << ".net.txt / .topo.txt\n";
            return 0;
        }
        if (cmd_run_ep->parsed())
            return runCommand(scenario, config_path, overrides, out_prefix, false);
        if (cmd_run_em->parsed())
            return runCommand(scenario, config_path, overrides, out_prefix, true);
        if (cmd_scenarios->parsed())
        {
            for (const auto &name : mosph::builtinScenarios())
                std::cout << name << "\n";
            return 0;
        }
        if (cmd_validate->parsed())
        {
            mosph::loadConfig(config_path);
            std::cout << "ok\n";
            return 0;
        }
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
