#pragma once

#include "error.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace efcp {

/// Uniform grid t_k = k/(T-1), k = 0..T-1, on [0,1].
class TimeGrid {
public:
    explicit TimeGrid(std::size_t size) : size_(size) {
        require(size >= 2, ErrorCode::InvalidArgument, "TimeGrid needs at least 2 points");
    }

    std::size_t size() const noexcept { return size_; }
    double step() const noexcept { return 1.0 / static_cast<double>(size_ - 1); }

    double operator[](std::size_t k) const noexcept {
        // exact endpoints
        if (k + 1 == size_) return 1.0;
        return static_cast<double>(k) / static_cast<double>(size_ - 1);
    }

    std::vector<double> points() const {
        std::vector<double> out(size_);
        for (std::size_t k = 0; k < size_; ++k) out[k] = (*this)[k];
        return out;
    }

    /// Index of the grid point nearest to t (ties resolve to the lower index).
    std::size_t nearest(double t) const {
        double x = t * static_cast<double>(size_ - 1);
        auto k = static_cast<std::size_t>(std::floor(x));
        if (k + 1 >= size_) return size_ - 1;
        return (x - static_cast<double>(k) > 0.5) ? k + 1 : k;
    }

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    std::size_t size_;
};

/// Function sampled on a TimeGrid.
class Curve {
public:
    Curve(TimeGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
        require(values_.size() == grid_.size(), ErrorCode::InvalidArgument,
                "curve length does not match grid");
        for (double v : values_)
            require(std::isfinite(v), ErrorCode::InvalidArgument, "curve values must be finite");
    }

    static Curve constant(TimeGrid grid, double c) {
        return Curve(grid, std::vector<double>(grid.size(), c));
    }

    template <typename F>
    static Curve sample(TimeGrid grid, F&& f) {
        std::vector<double> v(grid.size());
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = f(grid[k]);
        return Curve(grid, std::move(v));
    }

    const TimeGrid& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t k) const noexcept { return values_[k]; }
    std::size_t size() const noexcept { return values_.size(); }

    friend bool operator==(const Curve&, const Curve&) = default;

private:
    TimeGrid grid_;
    std::vector<double> values_;
};

namespace detail {

/// Trapezoidal integral of samples with spacing h.
inline double trapezoid(std::span<const double> y, double h) {
    if (y.size() < 2) return 0.0;
    double s = 0.5 * (y.front() + y.back());
    for (std::size_t k = 1; k + 1 < y.size(); ++k) s += y[k];
    return s * h;
}

/// Linear interpolation of samples on the uniform grid of [0,1] at t (clamped).
inline double interp_uniform(std::span<const double> y, double t) {
    const std::size_t n = y.size();
    double x = t * static_cast<double>(n - 1);
    if (x <= 0.0) return y.front();
    if (x >= static_cast<double>(n - 1)) return y.back();
    auto k = static_cast<std::size_t>(x);
    double w = x - static_cast<double>(k);
    if (w == 0.0) return y[k];
    return (1.0 - w) * y[k] + w * y[k + 1];
}

/// Derivative by central differences inside, one-sided at the ends.
inline std::vector<double> gradient(std::span<const double> y, double h) {
    const std::size_t n = y.size();
    std::vector<double> d(n);
    if (n < 2) return d;
    d.front() = (y[1] - y[0]) / h;
    d.back() = (y[n - 1] - y[n - 2]) / h;
    for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (y[k + 1] - y[k - 1]) / (2.0 * h);
    return d;
}

} // namespace detail

} // namespace efcp
