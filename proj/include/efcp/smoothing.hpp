#pragma once

#include "metric.hpp"

#include <Eigen/Dense>

#include <numbers>

namespace efcp {

/// Symmetric matrix of pairwise predictor distances with zero diagonal.
class DistanceMatrix {
public:
    explicit DistanceMatrix(std::size_t n) : n_(n), d_(n * n, 0.0) {}

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return d_[i * n_ + j]; }
    std::span<const double> row(std::size_t i) const noexcept { return {d_.data() + i * n_, n_}; }

    void set(std::size_t i, std::size_t j, double v) {
        require(i != j || v == 0.0, ErrorCode::InvalidArgument, "diagonal must be zero");
        require(v >= 0.0 && std::isfinite(v), ErrorCode::InvalidArgument, "distances must be finite and >= 0");
        d_[i * n_ + j] = v;
        d_[j * n_ + i] = v;
    }

    /// Entries with i < j.
    std::vector<double> upper_triangle() const {
        std::vector<double> u;
        u.reserve(n_ * (n_ - 1) / 2);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = i + 1; j < n_; ++j) u.push_back(d_[i * n_ + j]);
        return u;
    }

private:
    std::size_t n_;
    std::vector<double> d_;
};

inline DistanceMatrix distance_matrix(std::span<const PartialCurve> xs, const Metric& metric,
                                      unsigned threads = 1) {
    const std::size_t n = xs.size();
    DistanceMatrix D(n);
    if (n == 0) return D;
    check_compatible(metric, xs[0].pattern());
    for (auto& x : xs)
        require(x.same_support(xs[0]), ErrorCode::SupportMismatch, "predictors observe different supports");

    if (metric.kind == MetricKind::fr || metric.kind == MetricKind::amplitude ||
        (metric.kind == MetricKind::prod && metric.base != MetricKind::l2)) {
        // transform each predictor once
        const MetricKind seg_kind = metric.kind == MetricKind::prod ? metric.base : metric.kind;
        std::vector<std::vector<Srsf>> q(n);
        for (std::size_t i = 0; i < n; ++i) q[i] = detail::segment_srsfs(xs[i], seg_kind);
        const double h = xs[0].grid().step();
        const auto& w = xs[0].weights();
        std::vector<double> out(n * n, 0.0);
        parallel_for(n, threads, [&](std::size_t i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                double s = 0.0;
                for (std::size_t f = 0; f < q[i].size(); ++f) {
                    double d = detail::segment_distance(q[i][f], q[j][f], seg_kind, h, metric.dp);
                    s += (metric.kind == MetricKind::prod ? w[f] : 1.0) * d;
                }
                out[i * n + j] = s;
            }
        });
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) D.set(i, j, out[i * n + j]);
        return D;
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) D.set(i, j, distance(xs[i], xs[j], metric));
    return D;
}

enum class KernelKind { gaussian, triangular };

struct KernelSpec {
    KernelKind kind = KernelKind::gaussian;
    double bandwidth = 1.0;
};

inline double kernel(KernelKind kind, double u) {
    if (kind == KernelKind::gaussian) return std::exp(-0.5 * u * u);
    return std::max(1.0 - std::abs(u), 0.0);
}

namespace detail {

/// Kernel weights of one row, excluding `self`. Gaussian weights are
/// scaled by exp(dmin^2 / 2h^2) so that the nearest neighbour has weight
/// one; ratios, and hence the smoother, are unchanged. Returns false when
/// every weight vanishes, in which case the row is filled with ones.
inline bool row_weights(std::span<const double> drow, std::size_t self, const KernelSpec& k,
                        std::span<double> w) {
    require(k.bandwidth > 0.0, ErrorCode::InvalidArgument, "bandwidth must be positive");
    const double h = k.bandwidth;
    double shift = 0.0;
    if (k.kind == KernelKind::gaussian) {
        double dmin = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < drow.size(); ++j)
            if (j != self) dmin = std::min(dmin, drow[j]);
        shift = dmin * dmin;
    }
    double total = 0.0;
    for (std::size_t j = 0; j < drow.size(); ++j) {
        if (j == self) {
            w[j] = 0.0;
            continue;
        }
        if (k.kind == KernelKind::gaussian) {
            w[j] = std::exp(-(drow[j] * drow[j] - shift) / (2.0 * h * h));
        } else {
            w[j] = kernel(k.kind, drow[j] / h);
        }
        total += w[j];
    }
    if (total > 0.0) return true;
    for (std::size_t j = 0; j < drow.size(); ++j) w[j] = (j == self) ? 0.0 : 1.0;
    return false;
}

} // namespace detail

struct NsPrediction {
    double value;
    /// All kernel weights vanished and the plain mean of the others was used.
    bool fallback;
};

/// Leave-self-out neighbourhood smoother: kernel-weighted mean of the other responses.
inline NsPrediction ns_predict(std::span<const double> drow, std::span<const double> responses,
                               std::size_t self, const KernelSpec& k) {
    require(drow.size() == responses.size(), ErrorCode::InvalidArgument,
            "distance row and responses differ in length");
    require(self < drow.size() && drow.size() >= 2, ErrorCode::InvalidArgument, "bad self index");
    std::vector<double> w(drow.size());
    bool ok = detail::row_weights(drow, self, k, w);
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        num += w[j] * responses[j];
        den += w[j];
    }
    return {num / den, !ok};
}

/// Rank of the lower beta quantile among m values: ceil(beta*m), guarded
/// against beta*m landing a hair above an integer.
inline std::size_t quantile_rank(std::size_t m, double beta) {
    auto rank = static_cast<std::size_t>(std::ceil(beta * static_cast<double>(m) - 1e-9));
    return std::clamp<std::size_t>(rank, 1, m);
}

/// Bandwidths at the lower beta quantiles of the off-diagonal distances.
inline std::vector<double> bandwidth_candidates(const DistanceMatrix& D, std::span<const double> betas) {
    require(D.size() >= 2, ErrorCode::InvalidArgument, "need at least two predictors");
    auto u = D.upper_triangle();
    double min_pos = std::numeric_limits<double>::infinity();
    for (double d : u)
        if (d > 0.0) min_pos = std::min(min_pos, d);
    require(std::isfinite(min_pos), ErrorCode::DegenerateDistances, "all predictor distances are zero");
    std::sort(u.begin(), u.end());
    std::vector<double> out;
    for (double b : betas) {
        require(b > 0.0 && b < 1.0, ErrorCode::InvalidArgument, "beta must lie in (0,1)");
        double h = u[quantile_rank(u.size(), b) - 1];
        out.push_back(h > 0.0 ? h : min_pos);
    }
    return out;
}

inline std::vector<double> default_betas() {
    return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
}

/// Least-squares projection onto {1, sqrt2 sin(2 pi k t), sqrt2 cos(2 pi k t)},
/// ordered constant, sin1, cos1, sin2, cos2, ... and truncated to n_basis
/// functions. The inner product is the trapezoidal one on the grid.
inline Curve fourier_project(const Curve& f, int n_basis = 10) {
    require(n_basis >= 1, ErrorCode::InvalidArgument, "n_basis must be >= 1");
    const std::size_t T = f.size();
    const TimeGrid& g = f.grid();
    Eigen::MatrixXd B(T, n_basis);
    for (std::size_t k = 0; k < T; ++k) {
        const double t = g[k];
        B(static_cast<long>(k), 0) = 1.0;
        for (int c = 1; c < n_basis; ++c) {
            const int harmonic = (c + 1) / 2;
            const double arg = 2.0 * std::numbers::pi * harmonic * t;
            B(static_cast<long>(k), c) = std::numbers::sqrt2 * ((c % 2 == 1) ? std::sin(arg) : std::cos(arg));
        }
    }
    Eigen::VectorXd w = Eigen::VectorXd::Constant(static_cast<long>(T), g.step());
    w(0) *= 0.5;
    w(static_cast<long>(T) - 1) *= 0.5;
    Eigen::Map<const Eigen::VectorXd> y(f.values().data(), static_cast<long>(T));
    Eigen::MatrixXd gram = B.transpose() * w.asDiagonal() * B;
    Eigen::VectorXd rhs = B.transpose() * w.asDiagonal() * y;
    Eigen::VectorXd coef = gram.completeOrthogonalDecomposition().solve(rhs);
    Eigen::VectorXd fit = B * coef;
    return Curve(g, std::vector<double>(fit.data(), fit.data() + fit.size()));
}

/// Centered moving average. Even windows use the 2xw form (half weight on
/// the two outermost points) so the window stays centered; near the
/// boundaries the window is truncated and the weights renormalized.
inline Curve moving_average(const Curve& f, int window = 12) {
    require(window >= 1, ErrorCode::InvalidArgument, "window must be >= 1");
    const long T = static_cast<long>(f.size());
    const long half = window / 2;
    const bool even = window % 2 == 0;
    std::vector<double> out(f.size());
    for (long k = 0; k < T; ++k) {
        double num = 0.0, den = 0.0;
        for (long j = k - half; j <= k + half; ++j) {
            if (j < 0 || j >= T) continue;
            double w = (even && (j == k - half || j == k + half)) ? 0.5 : 1.0;
            num += w * f[static_cast<std::size_t>(j)];
            den += w;
        }
        out[static_cast<std::size_t>(k)] = num / den;
    }
    return Curve(f.grid(), std::move(out));
}

} // namespace efcp
