// Copyright (c) 2026 the uavcov authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "uavcov/coverage.hpp"
#include "uavcov/scenario.hpp"

namespace uavcov {

/// How interfering GUEs are placed for the typical-BS scenario:
/// `density` draws them from the nearest-BS-thinned point process directly,
/// `voronoi` deploys a BS field and associates a GUE population to cells.
enum class GueMode { density, voronoi };

enum class Victim { u2u, gue_ul };

struct SimOptions {
    std::uint64_t seed = 1;
    int drops = 10000;
    int jobs = 0;  // 0 = hardware concurrency
    GueMode gue_mode = GueMode::density;
};

struct TypicalLink {
    double serving_dist = 0.0;  // 2-D, m
    Condition cond = Condition::los;
    double fading = 1.0;
    double tx_power_w = 0.0;
};

struct Interferer {
    double dist_2d = 0.0;         // to the origin (both victims sit there)
    double serving_dist = 0.0;    // its own serving link, sets the tx power
    Condition serving_cond = Condition::los;
    double tx_power_w = 0.0;
    Condition cond_to_uav = Condition::los;
    Condition cond_to_bs = Condition::los;
    double fading_to_uav = 1.0;
    double fading_to_bs = 1.0;
    bool active_at_bs = true;  // nearest-BS thinning for the typical-BS victim
};

/// One network drop.  The typical U2U receiver and the typical BS share the
/// origin; interference toward each is evaluated from the same node field.
struct NetworkRealization {
    std::uint64_t drop_index = 0;
    TypicalLink u2u_pair;     // transmitter of the typical U2U receiver
    TypicalLink serving_gue;  // uplink user of the typical BS
    std::vector<Interferer> uavs;
    std::vector<Interferer> gues;
};

struct SinrRecord {
    double useful_w = 0.0;
    double i_gue_w = 0.0;
    double i_uav_w = 0.0;
    double noise_w = 0.0;
    Condition serving_cond = Condition::los;

    double sinr() const { return useful_w / (i_gue_w + i_uav_w + noise_w); }
    double sinr_db() const;
};

struct DropRecords {
    std::vector<SinrRecord> u2u;
    std::vector<SinrRecord> gue_ul;
};

/// Ground-truth simulator of the system model.  Drops are independent work
/// units on counter-based substreams: identical (seed, params) replay
/// bit-identically regardless of thread count.
class MonteCarloEngine {
  public:
    MonteCarloEngine(const ScenarioParams& params, SimOptions opts);

    NetworkRealization drop_realization(std::uint64_t drop_index) const;
    SinrRecord sinr_u2u(const NetworkRealization& real) const;
    SinrRecord sinr_gue_ul(const NetworkRealization& real) const;

    /// Runs all drops in parallel; records are keyed by drop index.
    DropRecords run() const;

    const ScenarioParams& params() const { return params_; }
    const SimOptions& options() const { return opts_; }

  private:
    struct VoronoiField;
    void fill_gues_voronoi(NetworkRealization& real, SubstreamRng& rng) const;

    ScenarioParams params_;
    SimOptions opts_;
    LosStepFunction los_gb_, los_ub_, los_uu_, los_gu_;
    double noise_w_ = 0.0;
};

/// Empirical CCDF with Wilson-score 95% half-widths.  Requires >= 100 records.
CoverageCurve estimate_ccdf(std::span<const SinrRecord> records,
                            std::span<const double> thresholds_db);

/// Mean received powers in dBm (Fig.-style decomposition).  Absent components
/// (no interferer of that class in any record) are reported as nullopt.
struct PowerDecomposition {
    double useful_dbm = 0.0;
    std::optional<double> i_gue_dbm;
    std::optional<double> i_uav_dbm;
    double noise_dbm = 0.0;
    std::size_t n_records = 0;
};
PowerDecomposition power_decomposition(std::span<const SinrRecord> records);

/// Raw record dump: `drop_idx, victim, useful_dbm, i_gue_dbm, i_uav_dbm,
/// noise_dbm, serving_los`.
void write_records_csv(std::ostream& os, std::span<const SinrRecord> records,
                       Victim victim);

}  // namespace uavcov
