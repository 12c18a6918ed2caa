// Copyright (c) 2026 the uavcov authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace uavcov {

/// Lower incomplete gamma gamma(a, x) for a in (0, 1), x >= 0.
double lower_incomplete_gamma(double a, double x);

/// Gauss hypergeometric 2F1(a, b; c; z) on z <= 0 with c > b.
///
/// For moderate |z| the Pfaff transform maps the argument into [0, 1) and the
/// series is summed directly; for large |z| the 1/z connection formula keeps
/// the term count bounded.  Relative accuracy ~1e-12, well inside the 1e-8
/// contract.
double gauss_2f1_neg(double a, double b, double c, double z);

/// Arguments of the annulus-interference kernel.
struct PsiArgs {
    double s = 0.0;    // Laplace variable (already scaled by gain/tau_hat)
    double r = 0.0;    // annulus edge, m
    double h = 0.0;    // height difference, m
    int m = 1;         // Nakagami shape of the interference path
    double beta = 0.0; // 2 / alpha, in (0, 1)
    double p_x = 0.0;  // interferer transmit power, W
};

/// Interference kernel
///   Psi(s, r) = (r^2+h^2)/2 [1 - (m/(m+mu))^m] - K(s) 2F1(1+m, 1-b; 2-b; -mu/m)
/// with mu = s P (r^2+h^2)^{-1/beta} and K = s P / (2 (1-beta) (r^2+h^2)^{1/beta-1}).
/// Psi(s, r_next) - Psi(s, r) is the expected annulus interference exposure;
/// Psi -> 0 as r -> infinity.
double psi_kernel(const PsiArgs& args);

/// Kernel with precomputed powers of d2 = r^2 + h^2 (hot path);
/// d2_pow = d2^{1/beta}, d2_pow_m1 = d2^{1/beta - 1}.  u = s * P.
double psi_kernel_pre(double u, double d2, double d2_pow, double d2_pow_m1,
                      int m, double beta);

/// Limit of psi_kernel as r^2 + h^2 -> 0 (co-located annulus edge), finite
/// and negative for u > 0.
double psi_kernel_origin(double u, int m, double beta);

}  // namespace uavcov
