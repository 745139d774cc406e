#pragma once

#include "grid.hpp"

#include <algorithm>
#include <numeric>
#include <utility>
#include <variant>
#include <vector>

namespace efcp {

struct Interval {
    double u1 = 0.0;
    double u2 = 1.0;
};

struct Fragments {
    std::vector<Interval> pieces;
    /// Empty means equal weights 1/J.
    std::vector<double> weights;
};

struct Sparse {
    std::vector<double> points;
};

/// Which part of [0,1] is observed.
class ObservationPattern {
public:
    using Variant = std::variant<Interval, Fragments, Sparse>;

    ObservationPattern(Interval iv) : v_(iv) {
        require(0.0 <= iv.u1 && iv.u1 < iv.u2 && iv.u2 <= 1.0, ErrorCode::InvalidArgument,
                "interval must satisfy 0 <= u1 < u2 <= 1");
    }

    ObservationPattern(Fragments fr) {
        require(!fr.pieces.empty(), ErrorCode::InvalidArgument, "fragments must be nonempty");
        auto pieces = fr.pieces;
        std::sort(pieces.begin(), pieces.end(), [](auto& a, auto& b) { return a.u1 < b.u1; });
        for (std::size_t j = 0; j < pieces.size(); ++j) {
            require(0.0 <= pieces[j].u1 && pieces[j].u1 < pieces[j].u2 && pieces[j].u2 <= 1.0,
                    ErrorCode::InvalidArgument, "fragment must satisfy 0 <= u1 < u2 <= 1");
            if (j > 0)
                require(pieces[j - 1].u2 < pieces[j].u1, ErrorCode::InvalidArgument,
                        "fragments must be pairwise disjoint");
        }
        if (fr.weights.empty()) {
            fr.weights.assign(fr.pieces.size(), 1.0 / static_cast<double>(fr.pieces.size()));
        }
        require(fr.weights.size() == fr.pieces.size(), ErrorCode::InvalidArgument,
                "one weight per fragment");
        double total = 0.0;
        for (double w : fr.weights) {
            require(w > 0.0, ErrorCode::InvalidArgument, "fragment weights must be positive");
            total += w;
        }
        require(std::abs(total - 1.0) < 1e-9, ErrorCode::InvalidArgument,
                "fragment weights must sum to 1");
        v_ = std::move(fr);
    }

    ObservationPattern(Sparse sp) {
        require(!sp.points.empty(), ErrorCode::InvalidArgument, "sparse pattern needs points");
        for (std::size_t k = 0; k < sp.points.size(); ++k) {
            require(sp.points[k] >= 0.0 && sp.points[k] <= 1.0, ErrorCode::InvalidArgument,
                    "sparse points must lie in [0,1]");
            if (k > 0)
                require(sp.points[k - 1] < sp.points[k], ErrorCode::InvalidArgument,
                        "sparse points must be strictly increasing");
        }
        v_ = std::move(sp);
    }

    const Variant& variant() const noexcept { return v_; }
    bool is_interval() const noexcept { return std::holds_alternative<Interval>(v_); }
    bool is_fragments() const noexcept { return std::holds_alternative<Fragments>(v_); }
    bool is_sparse() const noexcept { return std::holds_alternative<Sparse>(v_); }

private:
    Variant v_;
};

/// Inclusive index range [first, last] on the source grid.
struct Segment {
    std::size_t first = 0;
    std::size_t last = 0;
    std::size_t size() const noexcept { return last - first + 1; }
    friend bool operator==(const Segment&, const Segment&) = default;
};

namespace detail {

// Nearest grid index; exact ties go to the side that keeps more data.
inline std::size_t snap_low(const TimeGrid& g, double u) {
    double x = u * static_cast<double>(g.size() - 1);
    double r = std::round(x);
    if (std::abs(x - r) < 1e-9) return static_cast<std::size_t>(r);
    double fl = std::floor(x);
    return static_cast<std::size_t>(x - fl <= 0.5 ? fl : fl + 1.0);
}

inline std::size_t snap_high(const TimeGrid& g, double u) {
    double x = u * static_cast<double>(g.size() - 1);
    double r = std::round(x);
    if (std::abs(x - r) < 1e-9) return static_cast<std::size_t>(r);
    double fl = std::floor(x);
    return static_cast<std::size_t>(x - fl < 0.5 ? fl : fl + 1.0);
}

inline Segment snap_interval(const TimeGrid& g, Interval iv) {
    Segment s{snap_low(g, iv.u1), std::min(snap_high(g, iv.u2), g.size() - 1)};
    require(s.last > s.first, ErrorCode::EmptySupport,
            "interval [" + std::to_string(iv.u1) + ", " + std::to_string(iv.u2) +
                "] covers fewer than two grid points");
    return s;
}

} // namespace detail

/// A curve viewed only on an observation pattern.
///
/// The support is stored as snapped grid segments (one per interval or
/// fragment) or as a list of snapped indices for sparse patterns.
class PartialCurve {
public:
    PartialCurve(Curve source, ObservationPattern pattern)
        : source_(std::move(source)), pattern_(std::move(pattern)) {
        const TimeGrid& g = source_.grid();
        std::visit(
            [&](const auto& p) {
                using P = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<P, Interval>) {
                    segments_.push_back(detail::snap_interval(g, p));
                    weights_ = {1.0};
                } else if constexpr (std::is_same_v<P, Fragments>) {
                    for (auto& iv : p.pieces) segments_.push_back(detail::snap_interval(g, iv));
                    weights_ = p.weights;
                } else {
                    for (double t : p.points) {
                        std::size_t k = g.nearest(t);
                        require(indices_.empty() || indices_.back() < k, ErrorCode::EmptySupport,
                                "sparse points collide after snapping to the grid");
                        indices_.push_back(k);
                    }
                }
            },
            pattern_.variant());
        if (!pattern_.is_sparse()) {
            for (auto& s : segments_)
                for (std::size_t k = s.first; k <= s.last; ++k) indices_.push_back(k);
            // fragments may touch after snapping
            indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
        }
    }

    const Curve& source() const noexcept { return source_; }
    const TimeGrid& grid() const noexcept { return source_.grid(); }
    const ObservationPattern& pattern() const noexcept { return pattern_; }
    const std::vector<Segment>& segments() const noexcept { return segments_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    /// Observed grid indices in increasing order.
    const std::vector<std::size_t>& indices() const noexcept { return indices_; }
    std::size_t observed_count() const noexcept { return indices_.size(); }

    bool observed(std::size_t k) const {
        return std::binary_search(indices_.begin(), indices_.end(), k);
    }

    double at(std::size_t k) const {
        require(observed(k), ErrorCode::InvalidArgument,
                "evaluation outside the observation pattern at index " + std::to_string(k));
        return source_[k];
    }

    std::span<const double> segment_values(std::size_t j) const {
        const Segment& s = segments_.at(j);
        return source_.values().subspan(s.first, s.size());
    }

    /// Values at the observed indices.
    std::vector<double> observed_values() const {
        std::vector<double> v;
        v.reserve(indices_.size());
        for (auto k : indices_) v.push_back(source_[k]);
        return v;
    }

    /// True when both objects observe exactly the same grid points with the same layout.
    bool same_support(const PartialCurve& o) const {
        return grid() == o.grid() && segments_ == o.segments_ && indices_ == o.indices_ &&
               weights_ == o.weights_ && pattern_.variant().index() == o.pattern_.variant().index();
    }

private:
    Curve source_;
    ObservationPattern pattern_;
    std::vector<Segment> segments_;
    std::vector<double> weights_;
    std::vector<std::size_t> indices_;
};

inline PartialCurve restrict(const Curve& curve, const ObservationPattern& pattern) {
    return PartialCurve(curve, pattern);
}

/// Restricting an already partial curve keeps the original source.
inline PartialCurve restrict(const PartialCurve& partial, const ObservationPattern& pattern) {
    PartialCurve out(partial.source(), pattern);
    for (auto k : out.indices())
        require(partial.observed(k), ErrorCode::EmptySupport,
                "pattern reaches outside the observed support");
    return out;
}

} // namespace efcp
