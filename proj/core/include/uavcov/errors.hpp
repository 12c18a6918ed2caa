// Copyright (c) 2026 the uavcov authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace uavcov {

/// Configuration parse or validation failure; the message names the violated
/// invariant.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure (non-convergent series, quadrature, or unstable
/// extrapolation) that must not be silently accepted.
class NumericalError : public std::runtime_error {
  public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace uavcov
