// Copyright (c) 2026 the uavcov authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "uavcov/rng.hpp"
#include "uavcov/scenario.hpp"

namespace uavcov {

/// Horizontal distance plus endpoint heights; x is the transmitter, y the
/// receiver.
struct LinkGeometry {
    double r_2d = 0.0;
    double h_x = 0.0;
    double h_y = 0.0;

    double height_diff() const { return h_x - h_y; }
    double d_3d() const { return std::hypot(r_2d, h_x - h_y); }
};

LinkGeometry link_geometry(LinkType t, double r_2d, const ScenarioParams& p);

/// Building-screening LoS probability (urban model with environment
/// constants a1..a3).  Piecewise constant in r by construction: the product's
/// index bound only changes at multiples of 1000/sqrt(a1*a2).
double los_probability(const LinkGeometry& g, double a1, double a2, double a3);

/// LoS probability sampled on the uniform grid r_i = (i-1) * cell_width.
/// Evaluation beyond the table keeps the last value.
class LosStepFunction {
  public:
    LosStepFunction(double cell_width, std::vector<double> values);

    double operator()(double r) const {
        const std::size_t i = cell_index(r);
        return values_[i < values_.size() ? i : values_.size() - 1];
    }

    std::size_t cell_index(double r) const {
        // Nudge so that left edges land in their own cell despite rounding.
        return static_cast<std::size_t>(std::floor(r / cell_width_ + 1e-9));
    }

    double cell_width() const { return cell_width_; }
    std::size_t size() const { return values_.size(); }
    double left_edge(std::size_t i) const { return static_cast<double>(i) * cell_width_; }
    double value(std::size_t i) const {
        return values_[i < values_.size() ? i : values_.size() - 1];
    }

    /// CSV dump: `r_left_m, p_los` per cell.
    void write_csv(std::ostream& os) const;

  private:
    double cell_width_;
    std::vector<double> values_;
};

/// Builds the LoS step table for a link type out to the configured horizon.
LosStepFunction los_step_table(LinkType t, const ScenarioParams& p);

/// Linear path loss tau = tau_hat * d^alpha.  d_3d must be positive.
double path_loss(const LinkGeometry& g, const LinkClass& cls);

/// Element pattern times array factor of the vertical BS array.  The
/// removable singularity at cos(theta) = cos(downtilt) evaluates to N.
double bs_antenna_gain(double zenith_rad, const AntennaParams& a);

/// Zenith angle seen at the BS (y endpoint), measured from the upward
/// vertical: arccos((h_x - h_b)/d_3d).
double zenith_angle_at_bs(const LinkGeometry& g);

/// Nakagami-m power fading draw: unit-mean gamma with shape m.
double sample_fading(const LinkClass& cls, SubstreamRng& rng);

/// CDF of Nakagami-m power fading, 1 - sum_{i<m} (m w)^i e^{-m w} / i!.
double fading_cdf(int m, double omega);

/// Large-scale fading zeta = tau / g; g is the BS pattern for links touching
/// a BS and 1 otherwise.
double large_scale_fading(const LinkGeometry& g, const LinkClass& cls,
                          const AntennaParams& antenna);

/// Fractional power control: min(P_max, rho * zeta^epsilon), in watts.
double transmit_power(double zeta_serving, const PowerControlParams& pc, NodeRole role);

}  // namespace uavcov
