#pragma once

#include "registration.hpp"

#include <string>
#include <string_view>

namespace efcp {

enum class MetricKind { l2, fr, amplitude, euclid, prod };

inline std::string_view to_string(MetricKind m) {
    switch (m) {
    case MetricKind::l2: return "l2";
    case MetricKind::fr: return "fr";
    case MetricKind::amplitude: return "amplitude";
    case MetricKind::euclid: return "euclid";
    case MetricKind::prod: return "prod";
    }
    return "?";
}

inline MetricKind parse_metric(std::string_view s) {
    if (s == "l2") return MetricKind::l2;
    if (s == "fr") return MetricKind::fr;
    if (s == "amplitude" || s == "da") return MetricKind::amplitude;
    if (s == "euclid") return MetricKind::euclid;
    if (s == "prod") return MetricKind::prod;
    throw Error(ErrorCode::InvalidArgument, "unknown metric '" + std::string(s) + "'");
}

/// Distance between predictors. `base` is the per-fragment distance used by prod.
struct Metric {
    MetricKind kind = MetricKind::l2;
    MetricKind base = MetricKind::l2;
    DpOptions dp{};
};

namespace detail {

/// Per-segment representation used by the fr and amplitude distances.
/// Amplitude works on the segment rescaled affinely to [0,1].
inline std::vector<Srsf> segment_srsfs(const PartialCurve& x, MetricKind kind) {
    std::vector<Srsf> out;
    for (std::size_t j = 0; j < x.segments().size(); ++j) {
        auto v = x.segment_values(j);
        TimeGrid g(v.size());
        auto d = gradient(v, kind == MetricKind::fr ? x.grid().step() : g.step());
        for (auto& s : d) s = std::copysign(std::sqrt(std::abs(s)), s);
        out.emplace_back(g, std::move(d));
    }
    return out;
}

inline double segment_distance(const Srsf& a, const Srsf& b, MetricKind kind, double step,
                               const DpOptions& dp) {
    if (kind == MetricKind::fr) return std::sqrt(squared_l2(a.values(), b.values(), step));
    return pairwise_register(a, b, dp).distance;
}

} // namespace detail

/// Weighted sum of per-fragment base distances.
inline double prod_distance(const PartialCurve& x, const PartialCurve& y, MetricKind base,
                            const DpOptions& dp = {}) {
    require(x.pattern().is_fragments() && y.pattern().is_fragments(), ErrorCode::MetricPatternMismatch,
            "prod distance needs fragment patterns");
    require(x.same_support(y), ErrorCode::SupportMismatch, "fragment layouts differ");
    require(base == MetricKind::l2 || base == MetricKind::fr || base == MetricKind::amplitude,
            ErrorCode::InvalidArgument, "prod base must be l2, fr or amplitude");
    const double h = x.grid().step();
    double s = 0.0;
    if (base == MetricKind::l2) {
        for (std::size_t j = 0; j < x.segments().size(); ++j)
            s += x.weights()[j] * std::sqrt(detail::squared_l2(x.segment_values(j), y.segment_values(j), h));
        return s;
    }
    auto qx = detail::segment_srsfs(x, base);
    auto qy = detail::segment_srsfs(y, base);
    for (std::size_t j = 0; j < qx.size(); ++j)
        s += x.weights()[j] * detail::segment_distance(qx[j], qy[j], base, h, dp);
    return s;
}

/// Rejects metric/pattern combinations that have no meaning.
inline void check_compatible(const Metric& m, const ObservationPattern& p) {
    bool ok = false;
    switch (m.kind) {
    case MetricKind::l2: ok = !p.is_sparse(); break;
    case MetricKind::fr:
    case MetricKind::amplitude: ok = p.is_interval(); break;
    case MetricKind::euclid: ok = p.is_sparse(); break;
    case MetricKind::prod: ok = p.is_fragments(); break;
    }
    require(ok, ErrorCode::MetricPatternMismatch,
            "metric '" + std::string(to_string(m.kind)) + "' does not apply to this observation pattern");
}

/// Distance between two partial predictors under `m`.
inline double distance(const PartialCurve& x, const PartialCurve& y, const Metric& m) {
    check_compatible(m, x.pattern());
    require(x.same_support(y), ErrorCode::SupportMismatch, "predictors observe different supports");
    switch (m.kind) {
    case MetricKind::l2: return l2_distance(x, y);
    case MetricKind::euclid: return euclid_distance(x, y);
    case MetricKind::prod: return prod_distance(x, y, m.base, m.dp);
    case MetricKind::fr:
    case MetricKind::amplitude: {
        auto qx = detail::segment_srsfs(x, m.kind);
        auto qy = detail::segment_srsfs(y, m.kind);
        return detail::segment_distance(qx[0], qy[0], m.kind, x.grid().step(), m.dp);
    }
    }
    return 0.0;
}

} // namespace efcp
