#pragma once

#include "pattern.hpp"

namespace efcp {

namespace detail {

/// Trapezoidal (integral of (a-b)^2) with spacing h.
inline double squared_l2(std::span<const double> a, std::span<const double> b, double h) {
    const std::size_t n = a.size();
    if (n < 2) return 0.0;
    auto sq = [&](std::size_t k) {
        double d = a[k] - b[k];
        return d * d;
    };
    double s = 0.5 * (sq(0) + sq(n - 1));
    for (std::size_t k = 1; k + 1 < n; ++k) s += sq(k);
    return s * h;
}

} // namespace detail

inline double l2_distance(const Curve& f, const Curve& g) {
    require(f.grid() == g.grid(), ErrorCode::SupportMismatch, "curves live on different grids");
    return std::sqrt(detail::squared_l2(f.values(), g.values(), f.grid().step()));
}

/// L2 distance over the common observed support (union of segments).
inline double l2_distance(const PartialCurve& x, const PartialCurve& y) {
    require(x.same_support(y), ErrorCode::SupportMismatch, "partial curves observe different supports");
    require(!x.pattern().is_sparse(), ErrorCode::MetricPatternMismatch,
            "l2 distance needs an interval or fragment support");
    double h = x.grid().step();
    double s = 0.0;
    for (std::size_t j = 0; j < x.segments().size(); ++j)
        s += detail::squared_l2(x.segment_values(j), y.segment_values(j), h);
    return std::sqrt(s);
}

/// Euclidean distance between sparse observation vectors.
inline double euclid_distance(const PartialCurve& x, const PartialCurve& y) {
    require(x.pattern().is_sparse() && y.pattern().is_sparse(), ErrorCode::MetricPatternMismatch,
            "euclid distance needs sparse patterns");
    require(x.same_support(y), ErrorCode::SupportMismatch, "sparse point sets differ");
    double s = 0.0;
    for (auto k : x.indices()) {
        double d = x.source()[k] - y.source()[k];
        s += d * d;
    }
    return std::sqrt(s);
}

} // namespace efcp
