// Copyright (c) 2026 the uavcov authors.
// SPDX-License-Identifier: Apache-2.0
#include "uavcov/channel.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace uavcov {

LinkGeometry link_geometry(LinkType t, double r_2d, const ScenarioParams& p) {
    const auto [h_x, h_y] = p.heights(t);
    return LinkGeometry{r_2d, h_x, h_y};
}

namespace {

// Screening probability with k buildings between endpoints: the LoS ray is
// sampled at k equispaced heights between h_x and h_y.
double screening_product(int k, double h_x, double h_y, double a3) {
    double prod = 1.0;
    const double dh = h_x - h_y;
    for (int j = 0; j < k; ++j) {
        const double h = h_x - (j + 0.5) * dh / k;
        prod *= -std::expm1(-h * h / (2.0 * a3 * a3));
    }
    return prod;
}

}  // namespace

double los_probability(const LinkGeometry& g, double a1, double a2, double a3) {
    if (g.h_x < 0.0 || g.h_y < 0.0)
        throw std::domain_error("los_probability: heights must be nonnegative");
    // Buildings crossed; the 1e-9 nudge keeps grid left edges in their own cell.
    const int k = static_cast<int>(
        std::floor(g.r_2d * std::sqrt(a1 * a2) / 1000.0 + 1e-9));
    if (k <= 0) return 1.0;
    return screening_product(k, g.h_x, g.h_y, a3);
}

LosStepFunction::LosStepFunction(double cell_width, std::vector<double> values)
    : cell_width_(cell_width), values_(std::move(values)) {
    if (cell_width_ <= 0.0 || values_.empty())
        throw std::invalid_argument("LosStepFunction: empty table");
}

void LosStepFunction::write_csv(std::ostream& os) const {
    os << "r_left_m,p_los\n";
    for (std::size_t i = 0; i < values_.size(); ++i)
        os << left_edge(i) << "," << values_[i] << "\n";
}

LosStepFunction los_step_table(LinkType t, const ScenarioParams& p) {
    const double cell = p.los_cell_width();
    const auto [h_x, h_y] = p.heights(t);
    const auto n = static_cast<std::size_t>(
        std::max(1.0, std::ceil(p.los_table_radius_m / cell - 1e-9)));
    std::vector<double> values(n);
    for (std::size_t k = 0; k < n; ++k)
        values[k] = screening_product(static_cast<int>(k), h_x, h_y, p.itu_a3);
    return LosStepFunction(cell, std::move(values));
}

double path_loss(const LinkGeometry& g, const LinkClass& cls) {
    const double d = g.d_3d();
    if (d <= 0.0) throw std::domain_error("path_loss: co-located nodes (d_3d = 0)");
    return cls.tau_hat() * std::pow(d, cls.alpha);
}

double bs_antenna_gain(double zenith_rad, const AntennaParams& a) {
    if (zenith_rad < 0.0 || zenith_rad > pi)
        throw std::domain_error("bs_antenna_gain: zenith angle outside [0, pi]");
    const double n = a.n_elements;
    const double element = a.element_peak_gain() * std::pow(std::sin(zenith_rad), 2);
    const double x = pi * (std::cos(zenith_rad) - std::cos(a.downtilt_rad())) / 2.0;
    const double sx = std::sin(x);
    double array_factor;
    if (std::abs(sx) < 1e-9) {
        array_factor = n;  // removable singularity, limit N
    } else {
        const double ratio = std::sin(n * x) / sx;
        array_factor = ratio * ratio / n;
    }
    return element * array_factor;
}

double zenith_angle_at_bs(const LinkGeometry& g) {
    const double d = g.d_3d();
    if (d <= 0.0) throw std::domain_error("zenith_angle_at_bs: co-located nodes");
    const double c = std::clamp((g.h_x - g.h_y) / d, -1.0, 1.0);
    return std::acos(c);
}

double sample_fading(const LinkClass& cls, SubstreamRng& rng) {
    return rng.gamma_unit_mean(cls.m_fading);
}

double fading_cdf(int m, double omega) {
    if (m < 1) throw std::domain_error("fading_cdf: m must be a positive integer");
    if (omega <= 0.0) return 0.0;
    const double mw = m * omega;
    double term = 1.0;
    double sum = 1.0;
    for (int i = 1; i < m; ++i) {
        term *= mw / i;
        sum += term;
    }
    return 1.0 - sum * std::exp(-mw);
}

double large_scale_fading(const LinkGeometry& g, const LinkClass& cls,
                          const AntennaParams& antenna) {
    const bool touches_bs = cls.type == LinkType::gb || cls.type == LinkType::ub;
    const double gain = touches_bs ? bs_antenna_gain(zenith_angle_at_bs(g), antenna) : 1.0;
    return path_loss(g, cls) / gain;
}

double transmit_power(double zeta_serving, const PowerControlParams& pc, NodeRole role) {
    if (!(zeta_serving > 0.0))
        throw std::domain_error("transmit_power: serving large-scale fading must be positive");
    return std::min(pc.p_max_w(role), pc.rho_w(role) * std::pow(zeta_serving, pc.epsilon(role)));
}

}  // namespace uavcov
