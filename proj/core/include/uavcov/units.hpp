// Copyright (c) 2026 the uavcov authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <numbers>

namespace uavcov {

inline constexpr double pi = std::numbers::pi;

// Thermal noise floor at 290 K.
inline constexpr double thermal_noise_dbm_per_hz = -174.0;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
inline double deg_to_rad(double deg) { return deg * pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / pi; }

}  // namespace uavcov
