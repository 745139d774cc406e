#pragma once

#include "efcp/efcp.hpp"

#include <gtest/gtest.h>

#include <random>

namespace efcp::test {

/// Random band-limited curve: a few low harmonics with decaying amplitudes.
inline Curve random_smooth(const TimeGrid& g, std::mt19937_64& rng, int harmonics = 4) {
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> a(harmonics + 1), b(harmonics + 1);
    for (int h = 0; h <= harmonics; ++h) {
        a[h] = z(rng) / (1.0 + h);
        b[h] = z(rng) / (1.0 + h);
    }
    return Curve::sample(g, [&](double t) {
        double s = a[0];
        for (int h = 1; h <= harmonics; ++h)
            s += a[h] * std::cos(2.0 * std::numbers::pi * h * t) + b[h] * std::sin(2.0 * std::numbers::pi * h * t);
        return s;
    });
}

/// Smooth warp t + c t (1 - t) with |c| < 1, slopes in [1 - |c|, 1 + |c|].
inline Warp quadratic_warp(const TimeGrid& g, double c) {
    std::vector<double> v(g.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = g[k] + c * g[k] * (1.0 - g[k]);
    v.front() = 0.0;
    v.back() = 1.0;
    return Warp(g, std::move(v));
}

inline double linf(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

inline Curve two_peak_curve(const TimeGrid& g, double z1 = 2.0, double z2 = 2.0) {
    return Curve::sample(g, [&](double t) { return two_peak(t, z1, z2); });
}

/// Pointwise cross-sectional variance averaged over the grid.
inline double mean_variance(std::span<const Curve> cs) {
    const std::size_t T = cs.front().size();
    double total = 0.0;
    for (std::size_t k = 0; k < T; ++k) {
        double m = 0.0;
        for (auto& c : cs) m += c[k];
        m /= static_cast<double>(cs.size());
        double v = 0.0;
        for (auto& c : cs) v += (c[k] - m) * (c[k] - m);
        total += v / static_cast<double>(cs.size() - 1);
    }
    return total / static_cast<double>(T);
}

} // namespace efcp::test
