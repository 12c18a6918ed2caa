// Copyright (c) 2026 the uavcov authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace uavcov {

inline constexpr const char* version_string = "0.1.0";

}  // namespace uavcov
