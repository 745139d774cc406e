#pragma once

#include "parallel.hpp"
#include "srsf.hpp"

#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>

namespace efcp {

/// Lattice move set for the registration DP: steps (a, b) with
/// 1 <= a, b <= max_step, where a advances the template index and b the
/// index of the curve being warped. Local warp slope is b/a. The default
/// covers slopes in [1/6, 6]; max_step = 3 with all pairs is the small
/// classical set and is about four times faster.
struct DpOptions {
    int max_step = 6;
    /// Drop moves with gcd(a, b) > 1; they repeat an existing slope.
    bool coprime_only = true;
};

struct Move {
    int a;
    int b;
};

namespace detail {

inline std::vector<Move> dp_moves(const DpOptions& opt) {
    require(opt.max_step >= 1, ErrorCode::InvalidArgument, "max_step must be >= 1");
    std::vector<Move> moves{{1, 1}};
    for (int a = 1; a <= opt.max_step; ++a)
        for (int b = 1; b <= opt.max_step; ++b) {
            if (a == 1 && b == 1) continue;
            if (opt.coprime_only && std::gcd(a, b) != 1) continue;
            moves.push_back({a, b});
        }
    return moves;
}

/// Integral over [t_k, t_{k+a}] of (q1(t) - sqrt(b/a) q2(gamma(t)))^2 where
/// gamma maps [t_k, t_{k+a}] linearly onto [t_l, t_{l+b}]. Trapezoid on
/// max(a, b) equal subintervals, both SRSFs linearly interpolated.
inline double edge_cost(std::span<const double> q1, std::span<const double> q2, std::size_t k,
                        std::size_t l, Move mv, double h) {
    const int m = std::max(mv.a, mv.b);
    const double slope = std::sqrt(static_cast<double>(mv.b) / mv.a);
    const double sub = mv.a * h / m;
    auto at = [](std::span<const double> q, std::size_t base, int num, int den) {
        // q at index base + num/den
        std::size_t whole = base + static_cast<std::size_t>(num / den);
        int rem = num % den;
        if (rem == 0) return q[whole];
        double w = static_cast<double>(rem) / den;
        return (1.0 - w) * q[whole] + w * q[whole + 1];
    };
    double s = 0.0;
    for (int r = 0; r <= m; ++r) {
        double e = at(q1, k, mv.a * r, m) - slope * at(q2, l, mv.b * r, m);
        double w = (r == 0 || r == m) ? 0.5 : 1.0;
        s += w * e * e;
    }
    return s * sub;
}

} // namespace detail

struct PairwiseResult {
    Warp warp;
    /// Achieved distance d2(q1, (q2 o gamma) sqrt(gamma')) on the DP lattice.
    double distance;
};

/// Registers q2 to q1: minimizes the SRSF L2 distance over piecewise-linear
/// warps whose breakpoints lie on the grid lattice.
inline PairwiseResult pairwise_register(const Srsf& q1, const Srsf& q2, const DpOptions& opt = {}) {
    require(q1.grid() == q2.grid(), ErrorCode::SupportMismatch, "srsf grids differ");
    const TimeGrid& grid = q1.grid();
    const std::size_t n = grid.size();
    const double h = grid.step();
    const auto moves = detail::dp_moves(opt);
    const auto a = q1.values();
    const auto b = q2.values();
    const double inf = std::numeric_limits<double>::infinity();
    const long M = opt.max_step;
    const long last = static_cast<long>(n) - 1;

    std::vector<double> cost(n * n, inf);
    std::vector<std::uint8_t> from(n * n, 0);
    cost[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t j = 1; j < n; ++j) {
            const long li = static_cast<long>(i), lj = static_cast<long>(j);
            // outside the slope cone nothing reaches (0,0) and (n-1,n-1)
            if (lj > M * li || li > M * lj || last - lj > M * (last - li) ||
                last - li > M * (last - lj))
                continue;
            double best = inf;
            std::uint8_t arg = 0;
            for (std::size_t m = 0; m < moves.size(); ++m) {
                const Move mv = moves[m];
                if (static_cast<std::size_t>(mv.a) > i || static_cast<std::size_t>(mv.b) > j) continue;
                const std::size_t pk = i - mv.a, pl = j - mv.b;
                const double prev = cost[pk * n + pl];
                if (prev == inf) continue;
                const double c = prev + detail::edge_cost(a, b, pk, pl, mv, h);
                if (c < best) {
                    best = c;
                    arg = static_cast<std::uint8_t>(m);
                }
            }
            cost[i * n + j] = best;
            from[i * n + j] = arg;
        }
    }

    // Backtrack the lattice path; gamma(t_i) = t_j at the nodes.
    std::vector<double> idx(n, 0.0);
    std::size_t i = n - 1, j = n - 1;
    idx[n - 1] = static_cast<double>(n - 1);
    while (i > 0) {
        const Move mv = moves[from[i * n + j]];
        const std::size_t pk = i - mv.a, pl = j - mv.b;
        for (std::size_t r = pk; r < i; ++r)
            idx[r] = static_cast<double>(pl) +
                     static_cast<double>(r - pk) * static_cast<double>(mv.b) / mv.a;
        i = pk;
        j = pl;
    }
    std::vector<double> gamma(n);
    for (std::size_t k = 0; k < n; ++k) gamma[k] = idx[k] * h;
    gamma.front() = 0.0;
    gamma.back() = 1.0;
    return {Warp::repaired(grid, std::move(gamma)), std::sqrt(std::max(cost[n * n - 1], 0.0))};
}

/// Elastic amplitude distance d_a(f, g).
inline double amplitude_distance(const Curve& f, const Curve& g, const DpOptions& opt = {}) {
    return pairwise_register(srsf_transform(f), srsf_transform(g), opt).distance;
}

struct KarcherOptions {
    double tol = 1e-4;
    int max_iter = 20;
    /// Re-center the template so the mean warp is the identity.
    bool recenter = false;
    DpOptions dp{};
    unsigned threads = 1;
};

struct RegistrationResult {
    Curve template_curve;
    Srsf template_srsf;
    std::vector<Warp> warps;
    std::vector<Curve> aligned;
    /// Sum of squared amplitude distances to the template, per accepted iterate.
    std::vector<double> objective_trace;
    bool converged = false;
    std::size_t init_index = 0;
};

namespace detail {

inline std::vector<double> srsf_mean(std::span<const Srsf> qs) {
    std::vector<double> m(qs.front().size(), 0.0);
    for (auto& q : qs)
        for (std::size_t k = 0; k < m.size(); ++k) m[k] += q[k];
    for (auto& x : m) x /= static_cast<double>(qs.size());
    return m;
}

} // namespace detail

/// Registers every curve to a fixed template SRSF.
inline std::vector<PairwiseResult> register_to(const Srsf& templ, std::span<const Srsf> qs,
                                               const DpOptions& dp = {}, unsigned threads = 1) {
    std::vector<std::optional<PairwiseResult>> slots(qs.size());
    parallel_for(qs.size(), threads, [&](std::size_t i) { slots[i] = pairwise_register(templ, qs[i], dp); });
    std::vector<PairwiseResult> out;
    out.reserve(qs.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

/// Sample Karcher mean of the SRSFs under the amplitude distance.
///
/// Starts from the input whose SRSF is closest to the pointwise SRSF
/// average, then alternates alignment to the current template and
/// averaging of the aligned SRSFs. An iterate that does not lower the
/// objective is rejected and the previous one returned, so the trace is
/// nonincreasing. Stops when the relative decrease drops below tol.
inline RegistrationResult karcher_mean(std::span<const Curve> curves, const KarcherOptions& opt = {}) {
    require(!curves.empty(), ErrorCode::InvalidArgument, "karcher_mean needs at least one curve");
    const TimeGrid grid = curves.front().grid();
    for (auto& c : curves)
        require(c.grid() == grid, ErrorCode::SupportMismatch, "curves live on different grids");

    std::vector<Srsf> qs;
    qs.reserve(curves.size());
    for (auto& c : curves) qs.push_back(srsf_transform(c));

    const Srsf average(grid, detail::srsf_mean(qs));
    std::size_t init = 0;
    double init_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < qs.size(); ++i) {
        double d = l2_distance(qs[i], average);
        if (d < init_d) {
            init_d = d;
            init = i;
        }
    }

    Srsf mu = qs[init];
    std::optional<Srsf> best_mu;
    std::vector<PairwiseResult> best_fit;
    std::vector<double> trace;
    bool converged = false;

    for (int iter = 0; iter < opt.max_iter; ++iter) {
        auto fit = register_to(mu, qs, opt.dp, opt.threads);
        double objective = 0.0;
        for (auto& r : fit) objective += r.distance * r.distance;

        if (!trace.empty() && objective >= trace.back()) {
            // no progress: keep the previous iterate
            converged = (objective - trace.back()) <= opt.tol * std::max(trace.back(), 1e-300);
            break;
        }
        const double prev = trace.empty() ? 0.0 : trace.back();
        trace.push_back(objective);
        best_mu = mu;
        best_fit = std::move(fit);
        if (objective == 0.0 || (trace.size() > 1 && (prev - objective) <= opt.tol * prev)) {
            converged = true;
            break;
        }

        std::vector<Srsf> aligned_q;
        aligned_q.reserve(qs.size());
        for (std::size_t i = 0; i < qs.size(); ++i) aligned_q.push_back(warp_srsf(qs[i], best_fit[i].warp));
        Srsf next(grid, detail::srsf_mean(aligned_q));
        if (opt.recenter) {
            std::vector<double> gbar(grid.size(), 0.0);
            for (auto& r : best_fit)
                for (std::size_t k = 0; k < gbar.size(); ++k) gbar[k] += r.warp[k];
            for (auto& x : gbar) x /= static_cast<double>(best_fit.size());
            next = warp_srsf(next, invert(Warp::repaired(grid, std::move(gbar))));
        }
        mu = std::move(next);
    }

    double f0 = 0.0;
    for (auto& c : curves) f0 += c[0];
    f0 /= static_cast<double>(curves.size());

    RegistrationResult out{srsf_inverse(*best_mu, f0), *best_mu, {}, {}, std::move(trace), converged, init};
    out.warps.reserve(curves.size());
    out.aligned.reserve(curves.size());
    for (std::size_t i = 0; i < curves.size(); ++i) {
        out.aligned.push_back(warp_curve(curves[i], best_fit[i].warp));
        out.warps.push_back(std::move(best_fit[i].warp));
    }
    return out;
}

struct MultipleRegistration {
    std::vector<Warp> warps;
    std::vector<Curve> aligned;
};

inline MultipleRegistration multiple_register(std::span<const Curve> curves, const Curve& templ,
                                              const DpOptions& dp = {}, unsigned threads = 1) {
    std::vector<Srsf> qs;
    qs.reserve(curves.size());
    for (auto& c : curves) {
        require(c.grid() == templ.grid(), ErrorCode::SupportMismatch, "curves live on different grids");
        qs.push_back(srsf_transform(c));
    }
    auto fit = register_to(srsf_transform(templ), qs, dp, threads);
    MultipleRegistration out;
    for (std::size_t i = 0; i < curves.size(); ++i) {
        out.aligned.push_back(warp_curve(curves[i], fit[i].warp));
        out.warps.push_back(std::move(fit[i].warp));
    }
    return out;
}

/// Arc length between warps on the Hilbert sphere of sqrt(gamma').
/// Samples are treated as piecewise linear, so sqrt(gamma') is constant on
/// each grid interval. Works on any uniform grid, coarse ones included.
inline double warp_distance(std::span<const double> g1, std::span<const double> g2) {
    require(g1.size() == g2.size() && g1.size() >= 2, ErrorCode::SupportMismatch,
            "warps must share a grid");
    const double h = 1.0 / static_cast<double>(g1.size() - 1);
    double inner = 0.0;
    for (std::size_t k = 0; k + 1 < g1.size(); ++k) {
        double s1 = std::max(g1[k + 1] - g1[k], 0.0) / h;
        double s2 = std::max(g2[k + 1] - g2[k], 0.0) / h;
        inner += h * std::sqrt(s1 * s2);
    }
    return std::acos(std::clamp(inner, -1.0, 1.0));
}

inline double warp_distance(const Warp& g1, const Warp& g2) {
    require(g1.grid() == g2.grid(), ErrorCode::SupportMismatch, "warp grids differ");
    return warp_distance(g1.values(), g2.values());
}

} // namespace efcp
