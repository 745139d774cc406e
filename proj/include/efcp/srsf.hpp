#pragma once

#include "distance.hpp"

#include <cmath>

namespace efcp {

/// Square-root slope function q = sign(f')sqrt(|f'|) sampled on a grid.
class Srsf {
public:
    Srsf(TimeGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
        require(values_.size() == grid_.size(), ErrorCode::InvalidArgument,
                "srsf length does not match grid");
        for (double v : values_)
            require(std::isfinite(v), ErrorCode::InvalidArgument, "srsf values must be finite");
    }

    const TimeGrid& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t k) const noexcept { return values_[k]; }
    std::size_t size() const noexcept { return values_.size(); }

private:
    TimeGrid grid_;
    std::vector<double> values_;
};

inline double l2_distance(const Srsf& a, const Srsf& b) {
    require(a.grid() == b.grid(), ErrorCode::SupportMismatch, "srsfs live on different grids");
    return std::sqrt(detail::squared_l2(a.values(), b.values(), a.grid().step()));
}

/// Minimum gap enforced between consecutive warp samples.
inline constexpr double kWarpSlopeGuard = 1e-6;

/// Discretized increasing bijection of [0,1] with gamma(0)=0, gamma(1)=1.
class Warp {
public:
    /// Validates strictly; use `repaired` for values that may be locally flat.
    Warp(TimeGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
        require(values_.size() == grid_.size(), ErrorCode::InvalidArgument,
                "warp length does not match grid");
        require(values_.front() == 0.0 && values_.back() == 1.0, ErrorCode::InvalidArgument,
                "warp must fix the endpoints 0 and 1");
        for (std::size_t k = 1; k < values_.size(); ++k)
            require(values_[k] > values_[k - 1], ErrorCode::InvalidArgument,
                    "warp must be strictly increasing");
    }

    static Warp identity(TimeGrid grid) { return Warp(grid, grid.points()); }

    /// Clamps into [0,1], pins the endpoints and enforces the slope guard.
    static Warp repaired(TimeGrid grid, std::vector<double> v) {
        const std::size_t n = v.size();
        require(n == grid.size(), ErrorCode::InvalidArgument, "warp length does not match grid");
        v.front() = 0.0;
        for (std::size_t k = 1; k < n; ++k) v[k] = std::max(std::min(v[k], 1.0), v[k - 1] + kWarpSlopeGuard);
        double top = v.back();
        for (auto& x : v) x /= top;
        v.back() = 1.0;
        return Warp(grid, std::move(v));
    }

    const TimeGrid& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t k) const noexcept { return values_[k]; }
    std::size_t size() const noexcept { return values_.size(); }

    bool is_identity() const {
        for (std::size_t k = 0; k < values_.size(); ++k)
            if (values_[k] != grid_[k]) return false;
        return true;
    }

    /// Value at arbitrary t by linear interpolation.
    double operator()(double t) const { return detail::interp_uniform(values_, t); }

private:
    TimeGrid grid_;
    std::vector<double> values_;
};

inline Srsf srsf_transform(const Curve& f) {
    auto d = detail::gradient(f.values(), f.grid().step());
    for (auto& x : d) x = std::copysign(std::sqrt(std::abs(x)), x);
    return Srsf(f.grid(), std::move(d));
}

/// f0 + cumulative trapezoid of q|q|.
inline Curve srsf_inverse(const Srsf& q, double f0) {
    const std::size_t n = q.size();
    const double h = q.grid().step();
    std::vector<double> f(n);
    f[0] = f0;
    double acc = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        acc += 0.5 * h * (q[k - 1] * std::abs(q[k - 1]) + q[k] * std::abs(q[k]));
        f[k] = f0 + acc;
    }
    return Curve(q.grid(), std::move(f));
}

/// f o gamma with linear interpolation of f.
inline Curve warp_curve(const Curve& f, const Warp& gamma) {
    require(f.grid() == gamma.grid(), ErrorCode::SupportMismatch, "curve and warp grids differ");
    if (gamma.is_identity()) return f;
    std::vector<double> v(f.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = detail::interp_uniform(f.values(), gamma[k]);
    return Curve(f.grid(), std::move(v));
}

/// (q o gamma) sqrt(gamma'), the SRSF of f o gamma.
inline Srsf warp_srsf(const Srsf& q, const Warp& gamma) {
    require(q.grid() == gamma.grid(), ErrorCode::SupportMismatch, "srsf and warp grids differ");
    if (gamma.is_identity()) return q;
    auto slope = detail::gradient(gamma.values(), gamma.grid().step());
    std::vector<double> v(q.size());
    for (std::size_t k = 0; k < v.size(); ++k)
        v[k] = detail::interp_uniform(q.values(), gamma[k]) * std::sqrt(std::max(slope[k], 0.0));
    return Srsf(q.grid(), std::move(v));
}

/// (outer o inner)(t) = outer(inner(t)).
inline Warp compose(const Warp& outer, const Warp& inner) {
    require(outer.grid() == inner.grid(), ErrorCode::SupportMismatch, "warp grids differ");
    std::vector<double> v(inner.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = outer(inner[k]);
    return Warp::repaired(inner.grid(), std::move(v));
}

/// Numerical inverse by piecewise-linear inversion.
inline Warp invert(const Warp& gamma) {
    const TimeGrid& g = gamma.grid();
    const std::size_t n = g.size();
    std::vector<double> v(n);
    std::size_t j = 0;
    for (std::size_t k = 0; k < n; ++k) {
        double t = g[k];
        while (j + 2 < n && gamma[j + 1] < t) ++j;
        double a = gamma[j], b = gamma[j + 1];
        double w = (b > a) ? (t - a) / (b - a) : 0.0;
        w = std::clamp(w, 0.0, 1.0);
        v[k] = g[j] + w * (g[j + 1] - g[j]);
    }
    return Warp::repaired(g, std::move(v));
}

/// Fisher-Rao distance: L2 distance between the SRSFs.
inline double fr_distance(const Curve& f, const Curve& g) {
    return l2_distance(srsf_transform(f), srsf_transform(g));
}

} // namespace efcp
