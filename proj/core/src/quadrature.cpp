// Copyright (c) 2026 the uavcov authors.
// SPDX-License-Identifier: Apache-2.0
#include "uavcov/quadrature.hpp"

#include <cmath>

namespace uavcov {

std::vector<double> split_points(double a, double b, double step,
                                 std::span<const double> extra) {
    std::vector<double> pts;
    pts.push_back(a);
    if (step > 0.0) {
        for (double x = std::ceil(a / step) * step; x < b; x += step)
            if (x > a) pts.push_back(x);
    }
    for (double x : extra)
        if (x > a && x < b) pts.push_back(x);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](double u, double v) { return std::abs(u - v) < 1e-9; }),
              pts.end());
    if (pts.back() != b) pts.back() = b;
    return pts;
}

}  // namespace uavcov
