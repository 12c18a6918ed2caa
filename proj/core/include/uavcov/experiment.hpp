// Copyright (c) 2026 the uavcov authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "uavcov/coverage.hpp"
#include "uavcov/montecarlo.hpp"
#include "uavcov/scenario.hpp"

namespace uavcov {

enum class Engine { analytic, montecarlo, both };

Engine parse_engine(const std::string& name);  // analytic | mc | montecarlo | both

/// Named batch experiments reproducing the parameter sweeps.
struct ExperimentSpec {
    std::string name;  // ccdf_by_height | power_decomposition | epsilon_tradeoff | custom_sweep
    Engine engine = Engine::both;
    std::string sweep_key;             // custom_sweep: config key to sweep
    std::vector<double> sweep_values;  // grid (defaults per experiment)
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    int drops = 100000;
    int jobs = 0;
    bool check = false;  // enforce the analytic-vs-MC agreement band
    GueMode gue_mode = GueMode::density;
    bool exact_theorem2 = false;
    double tradeoff_t_db = -5.0;  // threshold for epsilon_tradeoff curves
};

struct CompareReport {
    double max_abs_dev = 0.0;
    double mean_abs_dev = 0.0;
    double ci_cover_fraction = 0.0;  // points where analytic lies in the MC CI
    double band = 0.02;
    bool pass = true;
    std::size_t points = 0;
};

/// Per-point |analytic - MC| summary against the agreement band.
/// Throws std::invalid_argument on threshold-grid mismatch.
CompareReport compare_report(const CoverageCurve& analytic, const CoverageCurve& mc,
                             double band = 0.02);

struct ExperimentResult {
    std::vector<std::string> files;  // emitted CSVs (relative to out_dir)
    std::vector<CompareReport> comparisons;
    bool check_passed = true;
    std::string manifest_path;
    double wall_clock_s = 0.0;
};

/// Runs a named experiment: one CSV per curve plus a JSON manifest recording
/// the fully resolved parameters, seed, and tool version.
ExperimentResult run_experiment(const ExperimentSpec& spec, const ScenarioParams& params);

/// Reloads (spec, params) from a manifest so a run can be reproduced
/// bit-identically.
std::pair<ExperimentSpec, ScenarioParams> load_manifest(const std::string& path);

void write_curve_csv(std::ostream& os, const CoverageCurve& curve);

}  // namespace uavcov
