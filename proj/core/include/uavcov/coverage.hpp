// Copyright (c) 2026 the uavcov authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "uavcov/channel.hpp"
#include "uavcov/scenario.hpp"

namespace uavcov {

/// Interferer-source x victim pairs appearing in the two coverage theorems.
enum class InterferenceKind : int {
    uav_to_uav = 0,  // other U2U transmitters at the typical UAV receiver
    gue_to_uav = 1,  // active GUEs at the typical UAV receiver
    uav_to_bs = 2,   // U2U transmitters at the typical BS
    gue_to_bs = 3,   // other-cell GUEs at the typical BS
};

const char* to_string(InterferenceKind k);

struct AnalyticOptions {
    double outer_abs_tol = 1e-6;   // coverage outer quadratures
    double inner_rel_tol = 1e-6;   // interference serving-distance integrals
    double sum_rel_stop = 1e-9;    // step-sum early-stop threshold (gain classes)
    double sum_horizon_m = 5000.0;   // explicit-cell horizon past the LoS table
    bool exact_theorem2 = false;   // serving GUE power unclamped in s_g
    int jobs = 0;                  // threads across threshold points; 0 = auto
};

struct CoverageDiagnostics {
    double max_outer_quad_err = 0.0;
    double max_tail_fraction = 0.0;  // |far-field tail| / |step sum|
    long derivative_evals = 0;       // laplacian_derivatives invocations
    long interp_nodes = 0;           // log-s interpolation grid size
    long eta_evaluations = 0;        // direct log-Laplacian evaluations
};

enum class Provenance { analytic, montecarlo };

/// Coverage over a SINR threshold grid, split by serving-link condition.
/// MC curves carry Wilson 95% confidence half-widths; analytic curves carry
/// outer-quadrature error estimates.
struct CoverageCurve {
    Provenance provenance = Provenance::analytic;
    std::vector<double> threshold_db;
    std::vector<double> coverage;
    std::vector<double> cov_los;   // joint P[SINR > T, serving LoS]
    std::vector<double> cov_nlos;
    std::vector<double> quad_err;      // analytic only
    std::vector<double> ci_halfwidth;  // montecarlo only
    std::size_t n_samples = 0;

    /// Threshold where coverage crosses `level` (linear interpolation);
    /// NaN when the curve never crosses.
    double threshold_at(double level) const;
};

/// Explicit step-sum inputs for the kernel identities (test surface; the
/// production tables add precomputed powers behind the same core).
struct StepSumTable {
    double cell_width = 0.0;
    double beta = 0.0;
    int m = 1;
    double h2 = 0.0;       // squared height difference
    double tau_hat = 1.0;  // linear reference path loss
    std::vector<double> p;     // per-cell LoS-condition probability
    std::vector<double> gain;  // per-cell victim antenna gain (empty = 1)
};

/// Sum_i p_i [Psi(s_i, r_{i+1}) - Psi(s_i, r_i)] plus the exact far tail
/// -p_last Psi(s_last, r_end) under persisted p and gain.
double step_sum_forward(const StepSumTable& t, double s_y, double p_x);

/// Equivalent summation-by-parts form Sum_i [p_{i-1} - p_i] Psi(s, r_i) with
/// p_0 = 0 (constant gain only).
double step_sum_theorem(const StepSumTable& t, double s_y, double p_x);

/// Derivatives D^0..D^order of L = exp(eta) at s, from Richardson-extrapolated
/// central differences of eta composed through the exponential.
struct DerivativeResult {
    std::vector<double> value;
    std::vector<double> rel_error;  // extrapolation error estimates
};
DerivativeResult laplacian_derivatives(const std::function<double(double)>& log_laplacian,
                                       double s, int order);

/// Closed-form coverage engine for both theorems.  Pure and thread-safe;
/// threshold points are evaluated concurrently with a fixed reduction order.
class CoverageAnalytics {
  public:
    explicit CoverageAnalytics(const ScenarioParams& params, AnalyticOptions opts = {});
    ~CoverageAnalytics();
    CoverageAnalytics(CoverageAnalytics&&) noexcept;
    CoverageAnalytics& operator=(CoverageAnalytics&&) noexcept;

    /// Serving-distance integral I_xy^xi(s) of one interference component.
    double interference_integral(InterferenceKind kind, Condition xi, double s) const;

    /// log L_{I_u}(s) = -2 pi [lambda_u (I_uu^L + I_uu^N) + lambda_b (I_gu^L + I_gu^N)].
    double log_laplacian_u2u(double s) const;
    double laplacian_u2u(double s) const;

    /// log L_{I_g}(s) = -2 pi lambda_u Sum I_ub - (2 pi lambda_b)^2 Sum I_gg.
    double log_laplacian_gue(double s) const;
    double laplacian_gue(double s) const;

    CoverageCurve coverage_u2u(std::span<const double> thresholds_db) const;
    CoverageCurve coverage_gue(std::span<const double> thresholds_db) const;

    CoverageDiagnostics diagnostics() const;
    const ScenarioParams& params() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace uavcov
