// Copyright (c) 2026 the uavcov authors.
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: named experiments, LoS-table dumps, and resolved
// parameter inspection.  Exit codes: 0 ok, 2 validation error, 3 numerical
// failure, 4 analytic-vs-MC check failure.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uavcov/errors.hpp"
#include "uavcov/experiment.hpp"
#include "uavcov/scenario.hpp"
#include "uavcov/version.hpp"

namespace {

std::vector<std::pair<std::string, std::string>> parse_sets(
    const std::vector<std::string>& sets) {
    std::vector<std::pair<std::string, std::string>> kv;
    for (const std::string& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw uavcov::ConfigError("--set expects key=value, got '" + s + "'");
        kv.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    return kv;
}

uavcov::ScenarioParams resolve_params(const std::string& config_path,
                                      const std::vector<std::string>& sets) {
    std::string text;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw uavcov::ConfigError("cannot open config file '" + config_path + "'");
        text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    return uavcov::load_scenario_with_overrides(text, parse_sets(sets));
}

uavcov::LinkType parse_link(const std::string& s) {
    if (s == "gb") return uavcov::LinkType::gb;
    if (s == "ub") return uavcov::LinkType::ub;
    if (s == "uu") return uavcov::LinkType::uu;
    if (s == "gu") return uavcov::LinkType::gu;
    throw uavcov::ConfigError("unknown link type '" + s + "' (gb|ub|uu|gu)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coverage toolkit for UAV-to-UAV links underlaying a cellular uplink"};
    app.set_version_flag("--version", uavcov::version_string);
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> sets;
    app.add_option("--config", config_path, "scenario config file")->capture_default_str();
    app.add_option("--set", sets, "override a config key (key=value, repeatable)");

    // run
    auto* run = app.add_subcommand("run", "run a named experiment");
    std::string experiment, engine = "both", out_dir = "out", from_manifest;
    std::string gue_mode = "density";
    std::uint64_t seed = 1;
    int drops = 100000, jobs = 0;
    bool check = false, exact_t2 = false;
    std::vector<double> sweep_values;
    std::string sweep_key;
    double tradeoff_t = -5.0;
    run->add_option("experiment", experiment,
                    "ccdf_by_height|power_decomposition|epsilon_tradeoff|custom_sweep");
    run->add_option("--engine", engine, "analytic|mc|both")->capture_default_str();
    run->add_option("--seed", seed)->capture_default_str();
    run->add_option("--drops", drops, "Monte Carlo drops per point")->capture_default_str();
    run->add_option("--jobs", jobs, "worker threads (0 = all cores)")->capture_default_str();
    run->add_option("--out", out_dir, "output directory")->capture_default_str();
    run->add_flag("--check", check, "fail (exit 4) unless analytic and MC agree within 0.02");
    run->add_option("--sweep-key", sweep_key, "custom_sweep: config key to sweep");
    run->add_option("--grid", sweep_values, "sweep grid values")->delimiter(',');
    run->add_option("--gue-mode", gue_mode, "density|voronoi interfering-GUE placement")
        ->capture_default_str();
    run->add_flag("--exact-theorem2", exact_t2,
                  "serving GUE power without the P_max clamp in the analytic engine");
    run->add_option("--tradeoff-t-db", tradeoff_t, "epsilon_tradeoff SINR threshold [dB]")
        ->capture_default_str();
    run->add_option("--from-manifest", from_manifest,
                    "reproduce a previous run from its manifest");

    // los-table
    auto* los = app.add_subcommand("los-table", "dump a LoS step table as CSV");
    std::string link_name = "uu", los_out;
    los->add_option("--link", link_name, "gb|ub|uu|gu")->capture_default_str();
    los->add_option("--out", los_out, "output file (default stdout)");

    // print-config
    auto* pc = app.add_subcommand("print-config", "print the fully resolved configuration");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            uavcov::ExperimentSpec spec;
            uavcov::ScenarioParams params;
            if (!from_manifest.empty()) {
                std::tie(spec, params) = uavcov::load_manifest(from_manifest);
                if (run->count("--out")) spec.out_dir = out_dir;
            } else {
                if (experiment.empty())
                    throw uavcov::ConfigError("run: experiment name required");
                params = resolve_params(config_path, sets);
                spec.name = experiment;
                spec.engine = uavcov::parse_engine(engine);
                spec.seed = seed;
                spec.drops = drops;
                spec.jobs = jobs;
                spec.out_dir = out_dir;
                spec.check = check;
                spec.sweep_key = sweep_key;
                spec.sweep_values = sweep_values;
                spec.gue_mode = gue_mode == "voronoi" ? uavcov::GueMode::voronoi
                                                      : uavcov::GueMode::density;
                spec.exact_theorem2 = exact_t2;
                spec.tradeoff_t_db = tradeoff_t;
            }
            const uavcov::ExperimentResult res = uavcov::run_experiment(spec, params);
            std::cout << "experiment " << spec.name << ": " << res.files.size()
                      << " files in " << spec.out_dir << " (" << res.wall_clock_s
                      << " s)\n";
            for (const auto& rep : res.comparisons)
                std::cout << "  max|analytic-mc| = " << rep.max_abs_dev
                          << (rep.pass ? "  [ok]" : "  [outside band]") << "\n";
            if (spec.check && !res.check_passed) {
                std::cerr << "check failed: analytic and MC disagree beyond 0.02\n";
                return 4;
            }
        } else if (los->parsed()) {
            const auto params = resolve_params(config_path, sets);
            const auto table = uavcov::los_step_table(parse_link(link_name), params);
            if (los_out.empty()) {
                table.write_csv(std::cout);
            } else {
                std::ofstream os(los_out);
                if (!os) throw std::runtime_error("cannot write " + los_out);
                table.write_csv(os);
            }
        } else if (pc->parsed()) {
            std::cout << uavcov::serialize_scenario(resolve_params(config_path, sets));
        }
    } catch (const uavcov::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const uavcov::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
