// Copyright (c) 2026 the uavcov authors.
// SPDX-License-Identifier: Apache-2.0
#include "uavcov/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "uavcov/errors.hpp"

namespace uavcov {

const char* to_string(LinkType t) {
    switch (t) {
        case LinkType::gb: return "gb";
        case LinkType::ub: return "ub";
        case LinkType::uu: return "uu";
        case LinkType::gu: return "gu";
    }
    return "?";
}

const char* to_string(Condition c) { return c == Condition::los ? "los" : "nlos"; }

std::vector<double> SinrGrid::thresholds_db() const {
    std::vector<double> t(points);
    if (points == 1) {
        t[0] = t_min_db;
        return t;
    }
    for (int i = 0; i < points; ++i)
        t[i] = t_min_db + (t_max_db - t_min_db) * i / (points - 1);
    return t;
}

double ScenarioParams::noise_power_w() const { return dbm_to_watt(noise_power_dbm(*this)); }

double ScenarioParams::u2u_distance_pdf(double r) const {
    if (r < 0.0 || r >= r_max) return 0.0;
    const double s2 = sigma_u * sigma_u;
    const double mass = -std::expm1(-r_max * r_max / (2.0 * s2));
    return r * std::exp(-r * r / (2.0 * s2)) / (s2 * mass);
}

double ScenarioParams::gue_serving_pdf(double r) const {
    if (r < 0.0) return 0.0;
    return 2.0 * pi * lambda_b() * r * std::exp(-lambda_b() * pi * r * r);
}

std::pair<double, double> ScenarioParams::heights(LinkType t) const {
    switch (t) {
        case LinkType::gb: return {h_g, h_b};
        case LinkType::ub: return {h_u, h_b};
        case LinkType::uu: return {h_u, h_u};
        case LinkType::gu: return {h_g, h_u};
    }
    return {0.0, 0.0};
}

double noise_power_dbm(const ScenarioParams& p) {
    return thermal_noise_dbm_per_hz + 10.0 * std::log10(p.prb_bandwidth_hz) +
           p.noise_figure_db;
}

double mean_u2u_distance(const ScenarioParams& p, std::string* warning) {
    if (warning) {
        warning->clear();
        if (p.r_max < 3.0 * p.sigma_u)
            *warning = "r_max < 3 sigma_u: truncation shifts the mean U2U distance";
    }
    return p.sigma_u * std::sqrt(pi / 2.0);
}

namespace {

struct FadingOverrides {
    std::array<int, 8> m{1, 1, 1, 1, 1, 1, 1, 1};
};

int class_index(LinkType t, Condition c) {
    return static_cast<int>(t) * 2 + static_cast<int>(c);
}

// Reference path loss and exponents as functions of carrier frequency and UAV
// height; frozen into numeric entries so downstream code stays formula-free.
std::array<LinkClass, 8> build_link_classes(double f_ghz, double h_u,
                                            const FadingOverrides& fade) {
    const double lf = 20.0 * std::log10(f_ghz);
    const double lh = std::log10(h_u);
    const double tau_aerial_nlos = -17.5 + 20.0 * std::log10(40.0 * pi * f_ghz / 3.0);

    std::array<LinkClass, 8> cls{};
    auto set = [&](LinkType t, Condition c, double alpha, double tau_db) {
        const int i = class_index(t, c);
        cls[i] = LinkClass{t, c, alpha, tau_db, fade.m[i]};
    };
    set(LinkType::gb, Condition::los, 2.2, 28.0 + lf);
    set(LinkType::gb, Condition::nlos, 3.9, 13.54 + lf);
    set(LinkType::ub, Condition::los, 2.2, 28.0 + lf);
    set(LinkType::ub, Condition::nlos, 4.6 - 0.7 * lh, tau_aerial_nlos);
    set(LinkType::uu, Condition::los, 2.2, 28.0 + lf);
    set(LinkType::uu, Condition::nlos, 4.6 - 0.7 * lh, tau_aerial_nlos);
    set(LinkType::gu, Condition::los, 2.225 - 0.05 * lh, 30.9 + lf);
    set(LinkType::gu, Condition::nlos, 4.32 - 0.76 * lh, 32.4 + lf);
    return cls;
}

void require(bool ok, const char* invariant) {
    if (!ok) throw ConfigError(std::string("invalid scenario: ") + invariant);
}

void validate(const ScenarioParams& p) {
    require(p.lambda_b_per_km2 > 0 && p.lambda_u_per_km2 >= 0,
            "densities strictly positive (lambda_u may be 0)");
    require(p.h_b > 0 && p.h_u > 0 && p.h_g > 0, "heights strictly positive");
    require(p.sigma_u > 0, "sigma_u > 0");
    require(p.r_max > 0, "r_M > 0");
    require(p.carrier_freq_ghz > 0, "carrier frequency strictly positive");
    require(p.prb_bandwidth_hz > 0, "bandwidth strictly positive");
    require(p.itu_a1 > 0 && p.itu_a2 > 0 && p.itu_a3 > 0,
            "LoS environment constants strictly positive");
    require(p.antenna.n_elements >= 1, "n_elements >= 1");
    require(p.antenna.downtilt_rad() > 0 && p.antenna.downtilt_rad() < pi,
            "0 < downtilt_rad < pi");
    require(std::isfinite(p.antenna.element_gain_dbi), "element_peak_gain > 0");
    require(p.power_control.epsilon_g >= 0 && p.power_control.epsilon_g <= 1 &&
                p.power_control.epsilon_u >= 0 && p.power_control.epsilon_u <= 1,
            "epsilon in [0,1]");
    for (const auto& c : p.link_classes) {
        require(c.alpha > 0, "alpha > 0");
        require(std::isfinite(c.tau_hat_db), "tau_hat_db finite");
        require(c.m_fading >= 1, "m_fading >= 1 integer");
    }
    require(p.sinr.points >= 1, "SINR grid non-empty");
    require(p.sinr.points == 1 || p.sinr.t_max_db > p.sinr.t_min_db,
            "SINR grid ascending");
    require(p.los_table_radius_m > 0, "LoS table radius strictly positive");
    require(p.sim_disc_radius_m > 0, "simulation disc radius strictly positive");
}

struct RawConfig {
    std::map<std::string, double> values;
    FadingOverrides fading;
};

double parse_number(const std::string& key, const std::string& text) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(text, &pos);
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
            ++pos;
        if (pos != text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("parse failure: key '" + key + "' has non-numeric value '" +
                          text + "'");
    }
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

int parse_integer(const std::string& key, double v, const char* invariant) {
    if (v != std::floor(v)) throw ConfigError(std::string("invalid scenario: ") + invariant);
    return static_cast<int>(v);
}

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k = {
            "deployment.lambda_b_per_km2", "deployment.lambda_u_per_km2",
            "bs.height_m", "gue.height_m", "uav.height_m",
            "u2u.sigma_m", "u2u.r_max_m",
            "phy.carrier_ghz", "phy.prb_bandwidth_hz", "phy.noise_figure_db",
            "los.a1", "los.a2", "los.a3", "los.table_radius_m",
            "antenna.n_elements", "antenna.downtilt_deg", "antenna.element_gain_dbi",
            "antenna.element_spacing_wl",
            "power_control.p_max_gue_dbm", "power_control.p_max_uav_dbm",
            "power_control.rho_gue_dbm", "power_control.rho_uav_dbm",
            "power_control.epsilon_g", "power_control.epsilon_u",
            "sinr.t_min_db", "sinr.t_max_db", "sinr.t_points",
            "mc.disc_radius_m",
        };
        for (LinkType t : {LinkType::gb, LinkType::ub, LinkType::uu, LinkType::gu})
            for (Condition c : {Condition::los, Condition::nlos})
                k.push_back(std::string("fading.m_") + to_string(t) + "_" + to_string(c));
        return k;
    }();
    return keys;
}

RawConfig parse_document(const std::string& text) {
    RawConfig raw;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("parse failure: line " + std::to_string(line_no) +
                              " is not 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto& keys = known_keys();
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw ConfigError("unknown configuration key '" + key + "'");
        if (raw.values.count(key))
            throw ConfigError("duplicate configuration key '" + key + "'");
        raw.values[key] = parse_number(key, value);
    }
    return raw;
}

ScenarioParams from_raw(const RawConfig& raw) {
    ScenarioParams p;  // field initializers carry the table defaults
    FadingOverrides fade;

    auto get = [&](const char* key, double fallback) {
        const auto it = raw.values.find(key);
        return it == raw.values.end() ? fallback : it->second;
    };

    p.lambda_b_per_km2 = get("deployment.lambda_b_per_km2", 5.0);
    p.lambda_u_per_km2 = get("deployment.lambda_u_per_km2", 1.0);
    p.h_b = get("bs.height_m", 25.0);
    p.h_g = get("gue.height_m", 1.5);
    p.h_u = get("uav.height_m", 100.0);
    p.sigma_u = get("u2u.sigma_m", 100.0);
    p.r_max = get("u2u.r_max_m", 1000.0);
    p.carrier_freq_ghz = get("phy.carrier_ghz", 2.0);
    p.prb_bandwidth_hz = get("phy.prb_bandwidth_hz", 180000.0);
    p.noise_figure_db = get("phy.noise_figure_db", 7.0);
    p.itu_a1 = get("los.a1", 0.3);
    p.itu_a2 = get("los.a2", 500.0);
    p.itu_a3 = get("los.a3", 20.0);
    p.los_table_radius_m = get("los.table_radius_m", 0.0);
    p.antenna.n_elements =
        parse_integer("antenna.n_elements", get("antenna.n_elements", 8.0),
                      "n_elements >= 1 integer");
    p.antenna.downtilt_deg = get("antenna.downtilt_deg", 102.0);
    p.antenna.element_gain_dbi = get("antenna.element_gain_dbi", 8.0);
    p.antenna.element_spacing_wavelengths = get("antenna.element_spacing_wl", 0.5);
    p.power_control.p_max_dbm_gue = get("power_control.p_max_gue_dbm", 24.0);
    p.power_control.p_max_dbm_uav = get("power_control.p_max_uav_dbm", 24.0);
    p.power_control.rho_dbm_gue = get("power_control.rho_gue_dbm", -58.0);
    p.power_control.rho_dbm_uav = get("power_control.rho_uav_dbm", -58.0);
    p.power_control.epsilon_g = get("power_control.epsilon_g", 0.6);
    p.power_control.epsilon_u = get("power_control.epsilon_u", 0.6);
    p.sinr.t_min_db = get("sinr.t_min_db", -10.0);
    p.sinr.t_max_db = get("sinr.t_max_db", 30.0);
    p.sinr.points = parse_integer("sinr.t_points", get("sinr.t_points", 21.0),
                                  "SINR grid size integer");
    p.sim_disc_radius_m = get("mc.disc_radius_m", 10000.0);

    for (LinkType t : {LinkType::gb, LinkType::ub, LinkType::uu, LinkType::gu})
        for (Condition c : {Condition::los, Condition::nlos}) {
            const std::string key =
                std::string("fading.m_") + to_string(t) + "_" + to_string(c);
            const double v = get(key.c_str(), 1.0);
            fade.m[class_index(t, c)] =
                parse_integer(key, v, "m_fading >= 1 integer");
        }

    if (p.h_u <= 0 || p.carrier_freq_ghz <= 0)
        throw ConfigError("invalid scenario: heights strictly positive");
    p.link_classes = build_link_classes(p.carrier_freq_ghz, p.h_u, fade);

    // Auto horizon: ten mean cell radii 10/sqrt(pi lambda_b), rounded up to a
    // step-grid edge.  Beyond it the last table value persists.
    if (p.los_table_radius_m == 0.0 && p.lambda_b() > 0) {
        const double cell = p.los_cell_width();
        const double r10 = 10.0 / std::sqrt(pi * p.lambda_b());
        p.los_table_radius_m = std::ceil(r10 / cell) * cell;
    }

    validate(p);
    return p;
}

}  // namespace

ScenarioParams default_scenario() { return load_scenario(""); }

ScenarioParams load_scenario(const std::string& text) {
    return from_raw(parse_document(text));
}

ScenarioParams load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_scenario(ss.str());
}

ScenarioParams load_scenario_with_overrides(
    const std::string& text,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
    // Later assignments win: apply overrides onto the parsed document.
    RawConfig raw = parse_document(text);
    for (const auto& [key, value] : overrides) {
        RawConfig one = parse_document(key + " = " + value);
        for (const auto& [k, v] : one.values) raw.values[k] = v;
    }
    std::ostringstream merged;
    merged.precision(17);
    for (const auto& [k, v] : raw.values) merged << k << " = " << v << "\n";
    return load_scenario(merged.str());
}

std::string serialize_scenario(const ScenarioParams& p) {
    std::ostringstream os;
    os.precision(17);
    os << "deployment.lambda_b_per_km2 = " << p.lambda_b_per_km2 << "\n";
    os << "deployment.lambda_u_per_km2 = " << p.lambda_u_per_km2 << "\n";
    os << "bs.height_m = " << p.h_b << "\n";
    os << "gue.height_m = " << p.h_g << "\n";
    os << "uav.height_m = " << p.h_u << "\n";
    os << "u2u.sigma_m = " << p.sigma_u << "\n";
    os << "u2u.r_max_m = " << p.r_max << "\n";
    os << "phy.carrier_ghz = " << p.carrier_freq_ghz << "\n";
    os << "phy.prb_bandwidth_hz = " << p.prb_bandwidth_hz << "\n";
    os << "phy.noise_figure_db = " << p.noise_figure_db << "\n";
    os << "los.a1 = " << p.itu_a1 << "\n";
    os << "los.a2 = " << p.itu_a2 << "\n";
    os << "los.a3 = " << p.itu_a3 << "\n";
    os << "los.table_radius_m = " << p.los_table_radius_m << "\n";
    os << "antenna.n_elements = " << p.antenna.n_elements << "\n";
    os << "antenna.downtilt_deg = " << p.antenna.downtilt_deg << "\n";
    os << "antenna.element_gain_dbi = " << p.antenna.element_gain_dbi << "\n";
    os << "antenna.element_spacing_wl = " << p.antenna.element_spacing_wavelengths
       << "\n";
    os << "power_control.p_max_gue_dbm = " << p.power_control.p_max_dbm_gue << "\n";
    os << "power_control.p_max_uav_dbm = " << p.power_control.p_max_dbm_uav << "\n";
    os << "power_control.rho_gue_dbm = " << p.power_control.rho_dbm_gue << "\n";
    os << "power_control.rho_uav_dbm = " << p.power_control.rho_dbm_uav << "\n";
    os << "power_control.epsilon_g = " << p.power_control.epsilon_g << "\n";
    os << "power_control.epsilon_u = " << p.power_control.epsilon_u << "\n";
    for (LinkType t : {LinkType::gb, LinkType::ub, LinkType::uu, LinkType::gu})
        for (Condition c : {Condition::los, Condition::nlos})
            os << "fading.m_" << to_string(t) << "_" << to_string(c) << " = "
               << p.link(t, c).m_fading << "\n";
    os << "sinr.t_min_db = " << p.sinr.t_min_db << "\n";
    os << "sinr.t_max_db = " << p.sinr.t_max_db << "\n";
    os << "sinr.t_points = " << p.sinr.points << "\n";
    os << "mc.disc_radius_m = " << p.sim_disc_radius_m << "\n";
    return os.str();
}

}  // namespace uavcov
