// Copyright (c) 2026 the uavcov authors.
// SPDX-License-Identifier: Apache-2.0
#include "uavcov/experiment.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "uavcov/errors.hpp"
#include "uavcov/version.hpp"

namespace uavcov {

namespace fs = std::filesystem;
using nlohmann::json;

Engine parse_engine(const std::string& name) {
    if (name == "analytic") return Engine::analytic;
    if (name == "mc" || name == "montecarlo") return Engine::montecarlo;
    if (name == "both") return Engine::both;
    throw ConfigError("unknown engine '" + name + "' (analytic|mc|both)");
}

namespace {

const char* engine_name(Engine e) {
    switch (e) {
        case Engine::analytic: return "analytic";
        case Engine::montecarlo: return "mc";
        case Engine::both: return "both";
    }
    return "?";
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

ScenarioParams with_overrides(const ScenarioParams& base,
                              std::vector<std::pair<std::string, std::string>> kv) {
    return load_scenario_with_overrides(serialize_scenario(base), kv);
}

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == '.' || c == '/' || c == ' ') c = '_';
    return s;
}

struct Emitter {
    fs::path dir;
    std::vector<std::string> files;

    void csv(const std::string& name, const std::function<void(std::ostream&)>& body) {
        const fs::path path = dir / name;
        std::ofstream os(path);
        if (!os) throw std::runtime_error("cannot write " + path.string());
        os.precision(10);
        body(os);
        files.push_back(name);
    }
};

void write_comparison_csv(std::ostream& os, const CoverageCurve& a,
                          const CoverageCurve& m) {
    os << "threshold_db,analytic,montecarlo,abs_dev,mc_ci_halfwidth,within_ci\n";
    for (std::size_t i = 0; i < a.threshold_db.size(); ++i) {
        const double dev = std::abs(a.coverage[i] - m.coverage[i]);
        const bool inside = dev <= m.ci_halfwidth[i];
        os << a.threshold_db[i] << "," << a.coverage[i] << "," << m.coverage[i] << ","
           << dev << "," << m.ci_halfwidth[i] << "," << (inside ? 1 : 0) << "\n";
    }
}

struct EngineRuns {
    std::optional<CoverageCurve> analytic_u2u, analytic_gue;
    std::optional<CoverageCurve> mc_u2u, mc_gue;
};

EngineRuns run_engines(const ExperimentSpec& spec, const ScenarioParams& p,
                       std::span<const double> grid, bool want_u2u, bool want_gue) {
    EngineRuns out;
    if (spec.engine != Engine::montecarlo) {
        AnalyticOptions ao;
        ao.jobs = spec.jobs;
        ao.exact_theorem2 = spec.exact_theorem2;
        CoverageAnalytics analytics(p, ao);
        if (want_u2u) out.analytic_u2u = analytics.coverage_u2u(grid);
        if (want_gue) out.analytic_gue = analytics.coverage_gue(grid);
    }
    if (spec.engine != Engine::analytic) {
        SimOptions so;
        so.seed = spec.seed;
        so.drops = spec.drops;
        so.jobs = spec.jobs;
        so.gue_mode = spec.gue_mode;
        const DropRecords rec = MonteCarloEngine(p, so).run();
        if (want_u2u) out.mc_u2u = estimate_ccdf(rec.u2u, grid);
        if (want_gue) out.mc_gue = estimate_ccdf(rec.gue_ul, grid);
    }
    return out;
}

}  // namespace

CompareReport compare_report(const CoverageCurve& analytic, const CoverageCurve& mc,
                             double band) {
    if (analytic.threshold_db != mc.threshold_db)
        throw std::invalid_argument("compare_report: threshold grids differ");
    CompareReport rep;
    rep.band = band;
    rep.points = analytic.threshold_db.size();
    double sum = 0.0;
    std::size_t inside = 0;
    for (std::size_t i = 0; i < rep.points; ++i) {
        const double dev = std::abs(analytic.coverage[i] - mc.coverage[i]);
        rep.max_abs_dev = std::max(rep.max_abs_dev, dev);
        sum += dev;
        if (!mc.ci_halfwidth.empty() && dev <= mc.ci_halfwidth[i]) ++inside;
    }
    rep.mean_abs_dev = rep.points ? sum / static_cast<double>(rep.points) : 0.0;
    rep.ci_cover_fraction =
        rep.points ? static_cast<double>(inside) / static_cast<double>(rep.points) : 0.0;
    rep.pass = rep.max_abs_dev <= band;
    return rep;
}

void write_curve_csv(std::ostream& os, const CoverageCurve& c) {
    const bool mc = c.provenance == Provenance::montecarlo;
    os << "threshold_db,coverage,coverage_los_branch,coverage_nlos_branch,"
       << (mc ? "ci_halfwidth" : "quad_err") << "\n";
    for (std::size_t i = 0; i < c.threshold_db.size(); ++i)
        os << c.threshold_db[i] << "," << c.coverage[i] << "," << c.cov_los[i] << ","
           << c.cov_nlos[i] << ","
           << (mc ? c.ci_halfwidth[i] : c.quad_err[i]) << "\n";
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const ScenarioParams& params) {
    const auto t0 = std::chrono::steady_clock::now();

    if (spec.engine != Engine::analytic && spec.drops < 100)
        throw ConfigError("experiment requires drops >= 100 for Monte Carlo engines");

    ExperimentResult result;
    Emitter out{fs::path(spec.out_dir), {}};
    fs::create_directories(out.dir);

    const std::vector<double> grid = params.sinr.thresholds_db();

    auto emit_pair = [&](const std::string& tag, const EngineRuns& runs, bool u2u) {
        const auto& an = u2u ? runs.analytic_u2u : runs.analytic_gue;
        const auto& mc = u2u ? runs.mc_u2u : runs.mc_gue;
        const std::string link = u2u ? "u2u" : "gue";
        if (an)
            out.csv(link + "_" + tag + "_analytic.csv",
                    [&](std::ostream& os) { write_curve_csv(os, *an); });
        if (mc)
            out.csv(link + "_" + tag + "_mc.csv",
                    [&](std::ostream& os) { write_curve_csv(os, *mc); });
        if (an && mc) {
            out.csv("cmp_" + link + "_" + tag + ".csv",
                    [&](std::ostream& os) { write_comparison_csv(os, *an, *mc); });
            result.comparisons.push_back(compare_report(*an, *mc));
        }
    };

    if (spec.name == "ccdf_by_height") {
        std::vector<double> heights = spec.sweep_values;
        if (heights.empty()) heights = {50.0, 150.0};
        for (double h : heights) {
            const std::string tag = "h" + sanitize(num(h));
            const ScenarioParams ph = with_overrides(params, {{"uav.height_m", num(h)}});
            const EngineRuns runs = run_engines(spec, ph, grid, true, true);
            emit_pair(tag, runs, true);
            emit_pair(tag, runs, false);
            const ScenarioParams pb = with_overrides(
                params, {{"uav.height_m", num(h)}, {"deployment.lambda_u_per_km2", "0"}});
            emit_pair("nou2u_" + tag, run_engines(spec, pb, grid, false, true), false);
        }
    } else if (spec.name == "power_decomposition") {
        std::vector<double> eps = spec.sweep_values;
        if (eps.empty())
            for (int i = 0; i <= 20; ++i) eps.push_back(0.05 * i);
        if (spec.engine == Engine::analytic)
            throw ConfigError("power_decomposition is a Monte Carlo experiment");
        std::vector<PowerDecomposition> at_uav, at_bs;
        for (double e : eps) {
            const ScenarioParams pe =
                with_overrides(params, {{"power_control.epsilon_u", num(e)}});
            SimOptions so{spec.seed, spec.drops, spec.jobs, spec.gue_mode};
            const DropRecords rec = MonteCarloEngine(pe, so).run();
            at_uav.push_back(power_decomposition(rec.u2u));
            at_bs.push_back(power_decomposition(rec.gue_ul));
        }
        auto dump = [&](const std::string& name,
                        const std::vector<PowerDecomposition>& rows) {
            out.csv(name, [&](std::ostream& os) {
                os << "epsilon_u,useful_dbm,i_gue_dbm,i_uav_dbm,noise_dbm\n";
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    os << eps[i] << "," << rows[i].useful_dbm << ",";
                    if (rows[i].i_gue_dbm) os << *rows[i].i_gue_dbm;
                    os << ",";
                    if (rows[i].i_uav_dbm) os << *rows[i].i_uav_dbm;
                    os << "," << rows[i].noise_dbm << "\n";
                }
            });
        };
        dump("powerdec_uav_mc.csv", at_uav);
        dump("powerdec_bs_mc.csv", at_bs);
    } else if (spec.name == "epsilon_tradeoff") {
        std::vector<double> eps = spec.sweep_values;
        if (eps.empty())
            for (int i = 0; i <= 10; ++i) eps.push_back(0.1 * i);
        const std::vector<double> t0_grid = {spec.tradeoff_t_db};
        for (double sigma : {50.0, 100.0, 150.0}) {
            struct Row {
                double eps, a_u2u, a_gue, m_u2u, m_gue, ci_u2u, ci_gue;
            };
            std::vector<Row> rows;
            for (double e : eps) {
                const ScenarioParams pe = with_overrides(
                    params, {{"u2u.sigma_m", num(sigma)},
                             {"power_control.epsilon_u", num(e)}});
                const EngineRuns runs = run_engines(spec, pe, t0_grid, true, true);
                Row row{e, 0, 0, 0, 0, 0, 0};
                if (runs.analytic_u2u) row.a_u2u = runs.analytic_u2u->coverage[0];
                if (runs.analytic_gue) row.a_gue = runs.analytic_gue->coverage[0];
                if (runs.mc_u2u) {
                    row.m_u2u = runs.mc_u2u->coverage[0];
                    row.ci_u2u = runs.mc_u2u->ci_halfwidth[0];
                }
                if (runs.mc_gue) {
                    row.m_gue = runs.mc_gue->coverage[0];
                    row.ci_gue = runs.mc_gue->ci_halfwidth[0];
                }
                rows.push_back(row);
            }
            auto dump = [&](const std::string& link, bool u2u) {
                const std::string name =
                    "tradeoff_" + link + "_sigma" + sanitize(num(sigma)) + ".csv";
                out.csv(name, [&](std::ostream& os) {
                    os << "epsilon_u";
                    if (spec.engine != Engine::montecarlo) os << ",p_cov_analytic";
                    if (spec.engine != Engine::analytic) os << ",p_cov_mc,ci_halfwidth";
                    os << "\n";
                    for (const Row& r : rows) {
                        os << r.eps;
                        if (spec.engine != Engine::montecarlo)
                            os << "," << (u2u ? r.a_u2u : r.a_gue);
                        if (spec.engine != Engine::analytic)
                            os << "," << (u2u ? r.m_u2u : r.m_gue) << ","
                               << (u2u ? r.ci_u2u : r.ci_gue);
                        os << "\n";
                    }
                });
            };
            dump("u2u", true);
            dump("gue", false);
        }
    } else if (spec.name == "custom_sweep") {
        if (spec.sweep_key.empty() || spec.sweep_values.empty())
            throw ConfigError("custom_sweep requires a sweep key and a non-empty grid");
        for (std::size_t i = 0; i < spec.sweep_values.size(); ++i) {
            const double v = spec.sweep_values[i];
            const ScenarioParams pv = with_overrides(params, {{spec.sweep_key, num(v)}});
            const std::string tag = sanitize(spec.sweep_key) + "_" + std::to_string(i);
            const EngineRuns runs = run_engines(spec, pv, grid, true, true);
            emit_pair(tag, runs, true);
            emit_pair(tag, runs, false);
        }
    } else {
        throw ConfigError("unknown experiment '" + spec.name +
                          "' (ccdf_by_height|power_decomposition|epsilon_tradeoff|custom_sweep)");
    }

    result.check_passed = true;
    if (spec.check)
        for (const CompareReport& rep : result.comparisons)
            result.check_passed = result.check_passed && rep.pass;

    const auto t1 = std::chrono::steady_clock::now();
    result.wall_clock_s = std::chrono::duration<double>(t1 - t0).count();

    // Manifest with the fully resolved configuration; rerunning from it
    // reproduces the outputs bit-identically.
    json manifest;
    manifest["tool"] = "uavcov";
    manifest["version"] = version_string;
    manifest["experiment"] = {
        {"name", spec.name},
        {"engine", engine_name(spec.engine)},
        {"sweep_key", spec.sweep_key},
        {"sweep_values", spec.sweep_values},
        {"seed", spec.seed},
        {"drops", spec.drops},
        {"jobs", spec.jobs},
        {"check", spec.check},
        {"gue_mode", spec.gue_mode == GueMode::density ? "density" : "voronoi"},
        {"exact_theorem2", spec.exact_theorem2},
        {"tradeoff_t_db", spec.tradeoff_t_db},
    };
    manifest["config"] = serialize_scenario(params);
    manifest["outputs"] = out.files;
    manifest["wall_clock_s"] = result.wall_clock_s;
    if (!result.comparisons.empty()) {
        json cmp = json::array();
        for (const CompareReport& r : result.comparisons)
            cmp.push_back({{"max_abs_dev", r.max_abs_dev},
                           {"mean_abs_dev", r.mean_abs_dev},
                           {"ci_cover_fraction", r.ci_cover_fraction},
                           {"pass", r.pass}});
        manifest["comparisons"] = cmp;
    }
    const fs::path mpath = out.dir / "manifest.json";
    {
        std::ofstream os(mpath);
        os << manifest.dump(2) << "\n";
    }
    result.files = out.files;
    result.manifest_path = mpath.string();
    return result;
}

std::pair<ExperimentSpec, ScenarioParams> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open manifest '" + path + "'");
    json m = json::parse(in);
    ExperimentSpec spec;
    const json& e = m.at("experiment");
    spec.name = e.at("name").get<std::string>();
    spec.engine = parse_engine(e.at("engine").get<std::string>());
    spec.sweep_key = e.at("sweep_key").get<std::string>();
    spec.sweep_values = e.at("sweep_values").get<std::vector<double>>();
    spec.seed = e.at("seed").get<std::uint64_t>();
    spec.drops = e.at("drops").get<int>();
    spec.jobs = e.at("jobs").get<int>();
    spec.check = e.at("check").get<bool>();
    spec.gue_mode = e.at("gue_mode").get<std::string>() == "voronoi" ? GueMode::voronoi
                                                                     : GueMode::density;
    spec.exact_theorem2 = e.at("exact_theorem2").get<bool>();
    spec.tradeoff_t_db = e.at("tradeoff_t_db").get<double>();
    const ScenarioParams params = load_scenario(m.at("config").get<std::string>());
    return {spec, params};
}

}  // namespace uavcov
