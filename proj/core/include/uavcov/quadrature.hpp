// Copyright (c) 2026 the uavcov authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace uavcov {

struct QuadResult {
    double value = 0.0;
    double abs_error = 0.0;  // accumulated panel error estimates
    long evaluations = 0;
    bool converged = true;

    QuadResult& operator+=(const QuadResult& o) {
        value += o.value;
        abs_error += o.abs_error;
        evaluations += o.evaluations;
        converged = converged && o.converged;
        return *this;
    }
};

struct QuadOptions {
    double abs_tol = 1e-9;
    double rel_tol = 1e-9;
    int max_depth = 40;
};

namespace detail {

// 15-point Kronrod nodes/weights with embedded 7-point Gauss rule (QUADPACK dqk15).
inline constexpr double kGk15Nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kGk15WeightsK[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kGk15WeightsG[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
void gk15_panel(const F& f, double a, double b, double& kronrod, double& err) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f_mid = f(mid);
    double acc_k = kGk15WeightsK[7] * f_mid;
    double acc_g = kGk15WeightsG[3] * f_mid;
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kGk15Nodes[j];
        const double pair = f(mid - dx) + f(mid + dx);
        acc_k += kGk15WeightsK[j] * pair;
        if (j % 2 == 1) acc_g += kGk15WeightsG[j / 2] * pair;
    }
    kronrod = acc_k * half;
    const double gauss = acc_g * half;
    err = std::abs(kronrod - gauss);
}

template <class F>
void gk15_recurse(const F& f, double a, double b, double tol, int depth,
                  const QuadOptions& opts, QuadResult& out) {
    double value = 0.0, err = 0.0;
    gk15_panel(f, a, b, value, err);
    out.evaluations += 15;
    if (err <= tol || depth >= opts.max_depth) {
        out.value += value;
        out.abs_error += err;
        if (err > tol && depth >= opts.max_depth) out.converged = false;
        return;
    }
    const double mid = 0.5 * (a + b);
    gk15_recurse(f, a, mid, 0.5 * tol, depth + 1, opts, out);
    gk15_recurse(f, mid, b, 0.5 * tol, depth + 1, opts, out);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod 7/15 integration of f over [a, b].
///
/// Panels are refined depth-first with a proportionally split tolerance, so
/// the accumulation order (and hence the result) is deterministic.
template <class F>
QuadResult integrate(const F& f, double a, double b, const QuadOptions& opts = {}) {
    QuadResult out;
    if (a == b) return out;
    double coarse = 0.0, coarse_err = 0.0;
    detail::gk15_panel(f, a, b, coarse, coarse_err);
    const double tol = std::max(opts.abs_tol, opts.rel_tol * std::abs(coarse));
    detail::gk15_recurse(f, a, b, tol, 0, opts, out);
    return out;
}

/// Integrates over [points[0], points.back()] splitting at interior points
/// (used to isolate step-function breakpoints and power-control kinks).
template <class F>
QuadResult integrate_segmented(const F& f, std::span<const double> points,
                               const QuadOptions& opts = {}) {
    QuadResult out;
    if (points.size() < 2) return out;
    QuadOptions seg = opts;
    seg.abs_tol = opts.abs_tol / static_cast<double>(points.size() - 1);
    for (std::size_t i = 0; i + 1 < points.size(); ++i)
        out += integrate(f, points[i], points[i + 1], seg);
    return out;
}

/// Ascending list {a, ..., b} with every multiple of `step` in (a, b) plus any
/// extra split points, deduplicated.
std::vector<double> split_points(double a, double b, double step,
                                 std::span<const double> extra = {});

}  // namespace uavcov
