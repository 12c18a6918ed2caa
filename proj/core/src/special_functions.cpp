// Copyright (c) 2026 the uavcov authors.
// SPDX-License-Identifier: Apache-2.0
#include "uavcov/special_functions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "uavcov/errors.hpp"

namespace uavcov {

namespace {

constexpr double kSeriesEps = 1e-12;
constexpr int kSeriesCap = 10000;

// gamma(a, x) by the ascending series x^a e^{-x} sum_n x^n / (a (a+1) ... (a+n)),
// good for x < a + 1.
double gamma_lower_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < kSeriesCap; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < kSeriesEps * std::abs(sum))
            return sum * std::exp(a * std::log(x) - x);
    }
    throw NumericalError("lower_incomplete_gamma: series did not converge");
}

// Upper Gamma(a, x) by the Lentz continued fraction, good for x >= a + 1.
double gamma_upper_cf(double a, double x) {
    const double tiny = std::numeric_limits<double>::min() / kSeriesEps;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kSeriesCap; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kSeriesEps)
            return std::exp(a * std::log(x) - x) * h;
    }
    throw NumericalError("lower_incomplete_gamma: continued fraction did not converge");
}

// Forward 2F1 series at argument w; terminates early when a numerator
// parameter hits a nonpositive integer.
double hyp_series(double a, double b, double c, double w, int* terms_used = nullptr) {
    const double a0 = a, b0 = b, c0 = c;
    double term = 1.0;
    double sum = 1.0;
    int small_streak = 0;
    for (int k = 0; k < kSeriesCap; ++k) {
        const double num = (a + k) * (b + k);
        if (num == 0.0) {  // terminating series
            if (terms_used) *terms_used = k;
            return sum;
        }
        term *= num / ((c + k) * (k + 1.0)) * w;
        sum += term;
        if (std::abs(term) < kSeriesEps * std::abs(sum)) {
            if (++small_streak >= 2) {
                if (terms_used) *terms_used = k + 1;
                return sum;
            }
        } else {
            small_streak = 0;
        }
    }
    if (small_streak > 0) return sum;
    throw NumericalError("gauss_2f1_neg: series did not converge within " +
                         std::to_string(kSeriesCap) + " terms (A=" + std::to_string(a0) +
                         " B=" + std::to_string(b0) + " C=" + std::to_string(c0) +
                         " w=" + std::to_string(w) + ")");
}

bool near_integer(double x) { return std::abs(x - std::round(x)) < 0.02; }

}  // namespace

double lower_incomplete_gamma(double a, double x) {
    if (!(a > 0.0 && a < 1.0))
        throw std::domain_error("lower_incomplete_gamma: a must lie in (0, 1)");
    if (!(x >= 0.0))
        throw std::domain_error("lower_incomplete_gamma: x must be nonnegative");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_lower_series(a, x);
    return std::tgamma(a) - gamma_upper_cf(a, x);
}

double gauss_2f1_neg(double a, double b, double c, double z) {
    if (z > 0.0) throw std::domain_error("gauss_2f1_neg: requires z <= 0");
    if (!(c > b)) throw std::domain_error("gauss_2f1_neg: requires c > b");
    if (z == 0.0) return 1.0;

    // Pfaff: 2F1(a,b;c;z) = (1-z)^{-b} 2F1(c-a, b; c; z/(z-1)); the mapped
    // argument w = z/(z-1) lies in (0, 1).
    if (z >= -3.0 || near_integer(a - b)) {
        const double w = z / (z - 1.0);
        return std::pow(1.0 - z, -b) * hyp_series(c - a, b, c, w);
    }

    // Large |z|: 1/z connection formula (DLMF 15.8.2), valid for a - b not an
    // integer.  Both series run in 1/z with |1/z| < 1/3.  std::tgamma carries
    // the sign for negative non-integer arguments; all arguments stay small
    // in the kernel's parameter family.
    const double w = 1.0 / z;
    const double g_c = std::tgamma(c);
    const double t1 = g_c * std::tgamma(b - a) / (std::tgamma(b) * std::tgamma(c - a)) *
                      std::pow(-z, -a) * hyp_series(a, a - c + 1.0, a - b + 1.0, w);
    const double t2 = g_c * std::tgamma(a - b) / (std::tgamma(a) * std::tgamma(c - b)) *
                      std::pow(-z, -b) * hyp_series(b, b - c + 1.0, b - a + 1.0, w);
    return t1 + t2;
}

double psi_kernel_origin(double u, int m, double beta) {
    if (u <= 0.0) return 0.0;
    const double log_val = std::lgamma(2.0 - beta) + std::lgamma(m + beta) -
                           std::lgamma(1.0 + m) + (1.0 - beta) * std::log(double(m)) +
                           beta * std::log(u);
    return -std::exp(log_val) / (2.0 * (1.0 - beta));
}

double psi_kernel_pre(double u, double d2, double d2_pow, double d2_pow_m1,
                      int m, double beta) {
    if (u <= 0.0) return 0.0;
    if (d2 == 0.0) return psi_kernel_origin(u, m, beta);
    const double mu = u / d2_pow;
    // 1 - (m/(m+mu))^m in log space; stable for both tiny and huge mu.
    const double one_minus = -std::expm1(-m * std::log1p(mu / m));
    const double big_k = u / (2.0 * (1.0 - beta) * d2_pow_m1);
    const double f = gauss_2f1_neg(1.0 + m, 1.0 - beta, 2.0 - beta, -mu / m);
    return 0.5 * d2 * one_minus - big_k * f;
}

double psi_kernel(const PsiArgs& a) {
    if (a.s < 0.0) throw std::domain_error("psi_kernel: s must be nonnegative");
    if (a.r < 0.0) throw std::domain_error("psi_kernel: r must be nonnegative");
    if (a.m < 1) throw std::domain_error("psi_kernel: m must be a positive integer");
    if (!(a.beta > 0.0 && a.beta < 1.0))
        throw std::domain_error("psi_kernel: beta must lie in (0, 1)");
    const double d2 = a.r * a.r + a.h * a.h;
    const double inv_beta = 1.0 / a.beta;
    const double d2_pow = d2 > 0.0 ? std::pow(d2, inv_beta) : 0.0;
    const double d2_pow_m1 = d2 > 0.0 ? std::pow(d2, inv_beta - 1.0) : 0.0;
    return psi_kernel_pre(a.s * a.p_x, d2, d2_pow, d2_pow_m1, a.m, a.beta);
}

}  // namespace uavcov
