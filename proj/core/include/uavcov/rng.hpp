// Copyright (c) 2026 the uavcov authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace uavcov {

/// Mixes a 64-bit value to a well-distributed seed (SplitMix64 finalizer).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Random stream derived from (master seed, substream index).
///
/// Substreams are independent of evaluation order, so Monte Carlo drops can
/// run on any thread and still replay bit-identically: drop k always consumes
/// the stream (seed, k).
class SubstreamRng {
  public:
    SubstreamRng(std::uint64_t master_seed, std::uint64_t substream)
        : engine_(splitmix64(splitmix64(master_seed) ^ splitmix64(~substream))) {}

    double uniform() { return unif_(engine_); }  // [0, 1)

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    double exponential() { return -std::log1p(-uniform()); }

    double rayleigh(double sigma) { return sigma * std::sqrt(2.0 * exponential()); }

    /// Rayleigh conditioned on being below r_max (inverse CDF).
    double truncated_rayleigh(double sigma, double r_max) {
        const double mass = -std::expm1(-r_max * r_max / (2.0 * sigma * sigma));
        return sigma * std::sqrt(-2.0 * std::log1p(-uniform() * mass));
    }

    /// Unit-mean gamma with integer shape m (Nakagami-m power fading).
    double gamma_unit_mean(int m) {
        double sum = 0.0;
        for (int i = 0; i < m; ++i) sum += exponential();
        return sum / m;
    }

    int poisson(double mean) {
        std::poisson_distribution<int> dist(mean);
        return dist(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
    std::uniform_real_distribution<double> unif_{0.0, 1.0};
};

}  // namespace uavcov
