// Copyright (c) 2026 the uavcov authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "uavcov/units.hpp"

namespace uavcov {

enum class LinkType : int { gb = 0, ub = 1, uu = 2, gu = 3 };
enum class Condition : int { los = 0, nlos = 1 };
enum class NodeRole : int { gue = 0, uav = 1 };

const char* to_string(LinkType t);
const char* to_string(Condition c);

/// One (link type, propagation condition) channel class with the
/// height-dependent path-loss formulas already resolved to numbers.
struct LinkClass {
    LinkType type = LinkType::gb;
    Condition cond = Condition::los;
    double alpha = 0.0;       // path-loss exponent
    double tau_hat_db = 0.0;  // reference path loss at 1 m
    int m_fading = 1;         // Nakagami shape, integer

    double tau_hat() const { return db_to_linear(tau_hat_db); }
    friend bool operator==(const LinkClass&, const LinkClass&) = default;
};

// Parameter structs keep the config-native units so that a serialized
// document reparses to an identical value; derived units go through
// accessors.

struct AntennaParams {
    int n_elements = 8;
    double downtilt_deg = 102.0;
    double element_gain_dbi = 8.0;  // peak element gain; see parameter notes
    // Recorded for provenance only: the array factor has half-wavelength
    // spacing baked in.
    double element_spacing_wavelengths = 0.5;

    double downtilt_rad() const { return deg_to_rad(downtilt_deg); }
    double element_peak_gain() const { return db_to_linear(element_gain_dbi); }
    friend bool operator==(const AntennaParams&, const AntennaParams&) = default;
};

struct PowerControlParams {
    double p_max_dbm_gue = 24.0;
    double p_max_dbm_uav = 24.0;
    double rho_dbm_gue = -58.0;
    double rho_dbm_uav = -58.0;
    double epsilon_g = 0.6;
    double epsilon_u = 0.6;

    double p_max_w(NodeRole r) const {
        return dbm_to_watt(r == NodeRole::gue ? p_max_dbm_gue : p_max_dbm_uav);
    }
    double rho_w(NodeRole r) const {
        return dbm_to_watt(r == NodeRole::gue ? rho_dbm_gue : rho_dbm_uav);
    }
    double epsilon(NodeRole r) const {
        return r == NodeRole::gue ? epsilon_g : epsilon_u;
    }
    friend bool operator==(const PowerControlParams&, const PowerControlParams&) = default;
};

struct SinrGrid {
    double t_min_db = -10.0;
    double t_max_db = 30.0;
    int points = 21;

    std::vector<double> thresholds_db() const;
    friend bool operator==(const SinrGrid&, const SinrGrid&) = default;
};

/// Full system parameterization. Immutable after construction and safe to
/// share across threads.
struct ScenarioParams {
    // Deployment (heights in m).
    double lambda_b_per_km2 = 5.0;
    double lambda_u_per_km2 = 1.0;
    double h_b = 25.0;
    double h_u = 100.0;
    double h_g = 1.5;

    // Typical U2U link distance: truncated Rayleigh(sigma_u) below r_max.
    double sigma_u = 100.0;
    double r_max = 1000.0;

    // PHY.
    double carrier_freq_ghz = 2.0;
    double prb_bandwidth_hz = 180000.0;
    double noise_figure_db = 7.0;

    // LoS model environment constants (urban) and step-table horizon
    // (0 = auto: ten mean cell radii rounded up to a grid edge).
    double itu_a1 = 0.3;
    double itu_a2 = 500.0;
    double itu_a3 = 20.0;
    double los_table_radius_m = 0.0;

    AntennaParams antenna;
    PowerControlParams power_control;
    std::array<LinkClass, 8> link_classes{};  // (type, condition), see link()
    SinrGrid sinr;

    // Monte Carlo deployment disc.
    double sim_disc_radius_m = 10000.0;

    double lambda_b() const { return lambda_b_per_km2 * 1e-6; }  // per m^2
    double lambda_u() const { return lambda_u_per_km2 * 1e-6; }

    const LinkClass& link(LinkType t, Condition c) const {
        return link_classes[static_cast<int>(t) * 2 + static_cast<int>(c)];
    }

    /// Scale of the Rayleigh-distributed GUE serving distance, 1/sqrt(2 pi lambda_b).
    double sigma_g() const { return 1.0 / std::sqrt(2.0 * pi * lambda_b()); }

    double noise_power_w() const;

    /// Grid spacing of the LoS step function, 1000/sqrt(a1*a2).
    double los_cell_width() const { return 1000.0 / std::sqrt(itu_a1 * itu_a2); }

    /// Truncated-Rayleigh pdf of the typical U2U link distance.
    double u2u_distance_pdf(double r) const;
    /// Rayleigh(sigma_g) pdf of a GUE serving distance.
    double gue_serving_pdf(double r) const;

    /// (transmitter height, receiver height) for a link type.
    std::pair<double, double> heights(LinkType t) const;

    friend bool operator==(const ScenarioParams&, const ScenarioParams&) = default;
};

/// Table-default parameters (urban scenario, UAVs at 100 m).
ScenarioParams default_scenario();

/// Parses a flat `section.key = value` document, applies defaults for absent
/// keys, resolves the height-dependent link classes, and validates.
/// Throws ConfigError naming the violated invariant.
ScenarioParams load_scenario(const std::string& text);
ScenarioParams load_scenario_file(const std::string& path);

/// Applies `key=value` overrides (CLI --set) on top of a document and loads.
ScenarioParams load_scenario_with_overrides(
    const std::string& text,
    const std::vector<std::pair<std::string, std::string>>& overrides);

/// Emits the full flat key set with enough precision that
/// load_scenario(serialize_scenario(p)) == p.
std::string serialize_scenario(const ScenarioParams& p);

/// -174 dBm/Hz + 10 log10(PRB bandwidth) + noise figure.
double noise_power_dbm(const ScenarioParams& p);

/// Untruncated mean of the U2U link distance, sigma_u * sqrt(pi/2).  Sets
/// *warning when the truncation radius is low enough to shift the mean.
double mean_u2u_distance(const ScenarioParams& p, std::string* warning = nullptr);

}  // namespace uavcov
