#pragma once

#include "smoothing.hpp"

#include <functional>
#include <optional>
#include <variant>

namespace efcp {

/// ceil(beta*m)-th smallest of m values.
inline double lower_quantile(std::vector<double> values, double beta) {
    require(!values.empty(), ErrorCode::InvalidArgument, "quantile of an empty set");
    require(beta > 0.0 && beta <= 1.0, ErrorCode::InvalidArgument, "beta must lie in (0,1]");
    const std::size_t rank = quantile_rank(values.size(), beta);
    std::nth_element(values.begin(), values.begin() + static_cast<long>(rank - 1), values.end());
    return values[rank - 1];
}

struct TrialGridSpec {
    std::size_t n_trial = 200;
    double expansion = 0.25;
};

/// n_trial equally spaced values over [min - c*range, max + c*range].
inline std::vector<double> trial_grid(std::span<const double> responses, const TrialGridSpec& spec) {
    require(!responses.empty(), ErrorCode::InvalidArgument, "trial grid needs responses");
    require(spec.n_trial >= 2, ErrorCode::InvalidArgument, "n_trial must be >= 2");
    require(spec.expansion >= 0.0, ErrorCode::InvalidArgument, "expansion must be >= 0");
    auto [lo_it, hi_it] = std::minmax_element(responses.begin(), responses.end());
    const double range = std::max(*hi_it - *lo_it, 1e-6);
    const double a = *lo_it - spec.expansion * range;
    const double b = *hi_it + spec.expansion * range;
    std::vector<double> out(spec.n_trial);
    const double n1 = static_cast<double>(spec.n_trial - 1);
    for (std::size_t r = 0; r < spec.n_trial; ++r) {
        const double s = static_cast<double>(r) / n1;
        out[r] = (1.0 - s) * a + s * b;
    }
    out.front() = a;
    out.back() = b;
    // a constant column is only conformal at its value, so that value must be a trial
    if (*hi_it == *lo_it) out[spec.n_trial / 2] = *lo_it;
    return out;
}

enum class BandTarget { raw, amplitude, warp_envelope };

inline std::string_view to_string(BandTarget t) {
    switch (t) {
    case BandTarget::raw: return "raw";
    case BandTarget::amplitude: return "amplitude";
    case BandTarget::warp_envelope: return "warp_envelope";
    }
    return "?";
}

/// Pointwise prediction intervals [lower[k], upper[k]] on a grid.
struct PredictionBand {
    TimeGrid grid{2};
    std::vector<double> lower;
    std::vector<double> upper;
    double alpha = 0.1;
    BandTarget target = BandTarget::raw;
    /// Points where no trial value was accepted; lower = upper = the point prediction there.
    std::vector<std::size_t> empty_points;
    /// Points whose accepted trial set had gaps; the reported interval is its hull.
    std::vector<std::size_t> nonconvex_points;
    /// Smoother rows whose kernel weights all vanished.
    std::size_t fallback_rows = 0;
    /// Selected bandwidth per point.
    std::vector<double> bandwidth;

    bool is_empty(std::size_t k) const {
        return std::binary_search(empty_points.begin(), empty_points.end(), k);
    }
    bool is_nonconvex(std::size_t k) const {
        return std::binary_search(nonconvex_points.begin(), nonconvex_points.end(), k);
    }
    double length(std::size_t k) const { return is_empty(k) ? 0.0 : upper[k] - lower[k]; }
    double point(std::size_t k) const { return 0.5 * (lower[k] + upper[k]); }
    bool contains(std::size_t k, double y) const {
        return !is_empty(k) && lower[k] <= y && y <= upper[k];
    }
    double mean_length() const {
        double s = 0.0;
        for (std::size_t k = 0; k < lower.size(); ++k) s += length(k);
        return s / static_cast<double>(lower.size());
    }
};

enum class TuneMode { global, local };

/// Bandwidth search: candidates are either fixed values or lower-beta
/// quantiles of the predictor distances.
struct BandwidthTuning {
    KernelKind kernel = KernelKind::gaussian;
    std::vector<double> betas = default_betas();
    /// When nonempty, used instead of the beta quantiles.
    std::vector<double> fixed;
    TuneMode mode = TuneMode::local;
};

using BandwidthPolicy = std::variant<KernelSpec, BandwidthTuning>;

struct ConformalConfig {
    double alpha = 0.1;
    /// Training-split size for the split procedures.
    std::size_t n1 = 0;
    Metric metric{};
    BandwidthPolicy bandwidth = BandwidthTuning{};
    TrialGridSpec trial{};
    KarcherOptions karcher{};
    /// Seed for the caller-side shuffle before splitting.
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

struct TunedBand {
    PredictionBand band;
    /// Candidate index chosen per point (local) or once (global, repeated).
    std::vector<std::size_t> choice;
};

/// Selects among candidate bandwidths by band length. `run(h)` must
/// return a band for bandwidth h. Empty points count as infinitely long;
/// ties go to the smaller h.
template <typename Run>
TunedBand tune_bandwidth(Run&& run, std::span<const double> H, TuneMode mode) {
    require(!H.empty(), ErrorCode::InvalidArgument, "no candidate bandwidths");
    std::vector<std::size_t> order(H.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return H[a] < H[b]; });
    std::vector<PredictionBand> bands;
    bands.reserve(H.size());
    for (std::size_t c : order) bands.push_back(run(H[c]));
    const std::size_t T = bands.front().lower.size();
    const double inf = std::numeric_limits<double>::infinity();
    auto len = [&](const PredictionBand& b, std::size_t k) { return b.is_empty(k) ? inf : b.upper[k] - b.lower[k]; };

    TunedBand out{bands.front(), {}};
    if (mode == TuneMode::global) {
        std::size_t best = 0;
        std::pair<std::size_t, double> best_key{std::numeric_limits<std::size_t>::max(), inf};
        for (std::size_t c = 0; c < bands.size(); ++c) {
            std::pair<std::size_t, double> key{bands[c].empty_points.size(), bands[c].mean_length()};
            if (key < best_key) {
                best_key = key;
                best = c;
            }
        }
        out.band = bands[best];
        out.band.bandwidth.assign(T, H[order[best]]);
        out.choice.assign(T, order[best]);
        return out;
    }
    PredictionBand& b = out.band;
    b.empty_points.clear();
    b.nonconvex_points.clear();
    b.bandwidth.assign(T, 0.0);
    b.fallback_rows = 0;
    out.choice.assign(T, 0);
    for (std::size_t k = 0; k < T; ++k) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < bands.size(); ++c)
            if (len(bands[c], k) < len(bands[best], k)) best = c;
        const PredictionBand& src = bands[best];
        b.lower[k] = src.lower[k];
        b.upper[k] = src.upper[k];
        b.bandwidth[k] = H[order[best]];
        out.choice[k] = order[best];
        if (src.is_empty(k)) b.empty_points.push_back(k);
        if (src.is_nonconvex(k)) b.nonconvex_points.push_back(k);
        b.fallback_rows = std::max(b.fallback_rows, src.fallback_rows);
    }
    return out;
}

namespace detail {

/// Kernel fit shared by every trial value: for calibration point i with
/// trial y for the new response, the leave-self-out prediction is
/// base[i][k] + coupling[i] * y.
struct SmootherFit {
    std::vector<std::vector<double>> base;
    std::vector<double> coupling;
    std::vector<double> new_prediction;
    std::size_t fallback_rows = 0;
};

/// Rows 0..m-1 of D are calibration points, row m the new point.
inline SmootherFit fit_smoother(const DistanceMatrix& D, const std::vector<std::vector<double>>& Y,
                                const KernelSpec& k) {
    const std::size_t m = Y.size();
    const std::size_t T = Y.front().size();
    SmootherFit fit;
    fit.base.assign(m, std::vector<double>(T, 0.0));
    fit.coupling.assign(m, 0.0);
    fit.new_prediction.assign(T, 0.0);
    std::vector<double> w(m + 1);
    for (std::size_t i = 0; i <= m; ++i) {
        if (!row_weights(D.row(i), i, k, w)) ++fit.fallback_rows;
        double total = 0.0;
        for (double x : w) total += x;
        auto& acc = (i < m) ? fit.base[i] : fit.new_prediction;
        for (std::size_t j = 0; j < m; ++j) {
            if (w[j] == 0.0) continue;
            const double wj = w[j] / total;
            for (std::size_t t = 0; t < T; ++t) acc[t] += wj * Y[j][t];
        }
        if (i < m) fit.coupling[i] = w[m] / total;
    }
    return fit;
}

inline constexpr double kScoreTieTol = 1e-12;

/// Full-conformal acceptance over the trial grid at every time point.
inline PredictionBand band_for_kernel(const DistanceMatrix& D, const std::vector<std::vector<double>>& Y,
                                      const std::vector<std::vector<double>>& trials, const KernelSpec& k,
                                      double alpha, TimeGrid grid, BandTarget target) {
    const std::size_t m = Y.size();
    const std::size_t T = grid.size();
    const auto fit = fit_smoother(D, Y, k);
    const std::size_t rank = quantile_rank(m + 1, 1.0 - alpha);

    PredictionBand band;
    band.grid = grid;
    band.alpha = alpha;
    band.target = target;
    band.lower.assign(T, 0.0);
    band.upper.assign(T, 0.0);
    band.bandwidth.assign(T, k.bandwidth);
    band.fallback_rows = fit.fallback_rows;

    std::vector<double> resid(m);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t i = 0; i < m; ++i) resid[i] = Y[i][t] - fit.base[i][t];
        const double mu = fit.new_prediction[t];
        std::size_t first = trials[t].size(), last = 0, count = 0;
        for (std::size_t r = 0; r < trials[t].size(); ++r) {
            const double y = trials[t][r];
            // scores equal up to rounding count as ties
            const double s_new = std::abs(y - mu) - kScoreTieTol * (1.0 + std::abs(y));
            // y is accepted iff fewer than `rank` scores lie strictly below s_new
            std::size_t below = 0;
            for (std::size_t i = 0; i < m; ++i)
                if (std::abs(resid[i] - fit.coupling[i] * y) < s_new) ++below;
            if (below < rank) {
                first = std::min(first, r);
                last = r;
                ++count;
            }
        }
        if (count == 0) {
            band.empty_points.push_back(t);
            band.lower[t] = band.upper[t] = mu;
            continue;
        }
        band.lower[t] = trials[t][first];
        band.upper[t] = trials[t][last];
        if (count != last - first + 1) band.nonconvex_points.push_back(t);
    }
    return band;
}

/// Sorts calibration pairs by (predictor values, response values) so that
/// every downstream sum runs in an order independent of the input order.
inline std::vector<std::size_t> canonical_order(std::span<const PartialCurve> xs,
                                                const std::vector<std::vector<double>>& Y) {
    std::vector<std::size_t> idx(xs.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<std::vector<double>> keys(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        keys[i] = xs[i].observed_values();
        keys[i].insert(keys[i].end(), Y[i].begin(), Y[i].end());
    }
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return keys[a] < keys[b]; });
    return idx;
}

inline std::vector<double> candidate_bandwidths(const DistanceMatrix& D, const BandwidthPolicy& policy,
                                                KernelKind& kind, TuneMode& mode) {
    if (auto* k = std::get_if<KernelSpec>(&policy)) {
        kind = k->kind;
        mode = TuneMode::global;
        return {k->bandwidth};
    }
    const auto& tuning = std::get<BandwidthTuning>(policy);
    kind = tuning.kernel;
    mode = tuning.mode;
    if (!tuning.fixed.empty()) return tuning.fixed;
    return bandwidth_candidates(D, tuning.betas);
}

struct Prepared {
    std::vector<PartialCurve> predictors; // calibration in canonical order, new point last
    std::vector<std::vector<double>> responses;
    DistanceMatrix D{0};
};

inline Prepared prepare(std::vector<PartialCurve> calib_x, std::vector<std::vector<double>> calib_y,
                        const PartialCurve& new_x, const ConformalConfig& cfg) {
    const auto order = canonical_order(calib_x, calib_y);
    Prepared p;
    p.predictors.reserve(calib_x.size() + 1);
    for (auto i : order) {
        p.predictors.push_back(std::move(calib_x[i]));
        p.responses.push_back(std::move(calib_y[i]));
    }
    p.predictors.push_back(new_x);
    p.D = distance_matrix(p.predictors, cfg.metric, cfg.threads);
    return p;
}

inline TunedBand conformal_band(const Prepared& p, const ConformalConfig& cfg, TimeGrid grid,
                                BandTarget target) {
    const std::size_t T = grid.size();
    std::vector<std::vector<double>> trials(T);
    std::vector<double> column(p.responses.size());
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t i = 0; i < p.responses.size(); ++i) column[i] = p.responses[i][t];
        trials[t] = trial_grid(column, cfg.trial);
    }
    KernelKind kind{};
    TuneMode mode{};
    auto H = candidate_bandwidths(p.D, cfg.bandwidth, kind, mode);
    return tune_bandwidth(
        [&](double h) {
            return band_for_kernel(p.D, p.responses, trials, KernelSpec{kind, h}, cfg.alpha, grid, target);
        },
        H, mode);
}

inline void check_alpha(double alpha) {
    require(alpha > 0.0 && alpha < 1.0, ErrorCode::InvalidArgument, "alpha must lie in (0,1)");
}

} // namespace detail

/// Full functional conformal prediction of the raw curve values.
/// `predictors`, when given, replaces the restrictions of `curves`.
inline PredictionBand ffcp(std::span<const Curve> curves, const PartialCurve& new_partial,
                           const ConformalConfig& cfg, std::span<const PartialCurve> predictors = {}) {
    detail::check_alpha(cfg.alpha);
    require(!curves.empty(), ErrorCode::InvalidArgument, "ffcp needs complete curves");
    require(predictors.empty() || predictors.size() == curves.size(), ErrorCode::InvalidArgument,
            "one predictor per curve");
    const TimeGrid grid = new_partial.grid();
    std::vector<PartialCurve> xs;
    std::vector<std::vector<double>> ys;
    for (std::size_t i = 0; i < curves.size(); ++i) {
        const Curve& c = curves[i];
        require(c.grid() == grid, ErrorCode::SupportMismatch, "curves and new partial differ in grid");
        xs.push_back(predictors.empty() ? restrict(c, new_partial.pattern()) : predictors[i]);
        ys.emplace_back(c.values().begin(), c.values().end());
    }
    auto prepared = detail::prepare(std::move(xs), std::move(ys), new_partial, cfg);
    return detail::conformal_band(prepared, cfg, grid, BandTarget::raw).band;
}

struct SfcpResult {
    PredictionBand band;
    /// Karcher mean of the training split.
    RegistrationResult registration;
    /// Warps registering each calibration curve to the template, in input order.
    std::vector<Warp> calibration_warps;
};

namespace detail {

inline void check_split(std::size_t n, std::size_t n1) {
    require(n1 > 0 && n1 < n, ErrorCode::InvalidArgument, "split needs 0 < n1 < n");
}

inline std::vector<Srsf> transforms(std::span<const Curve> cs) {
    std::vector<Srsf> qs;
    qs.reserve(cs.size());
    for (auto& c : cs) qs.push_back(srsf_transform(c));
    return qs;
}

} // namespace detail

/// Training-split template plus the calibration warps registering each
/// calibration curve to it. Depends on the curves only, not on the
/// observation pattern, so it can be shared across patterns.
struct SplitTemplate {
    RegistrationResult registration;
    /// In input order of the calibration split.
    std::vector<Warp> calibration_warps;
};

inline SplitTemplate split_register(std::span<const Curve> curves, const ConformalConfig& cfg) {
    detail::check_split(curves.size(), cfg.n1);
    auto reg = karcher_mean(curves.subspan(0, cfg.n1), cfg.karcher);
    auto fits = register_to(reg.template_srsf, detail::transforms(curves.subspan(cfg.n1)), cfg.karcher.dp,
                            cfg.threads);
    SplitTemplate out{std::move(reg), {}};
    for (auto& f : fits) out.calibration_warps.push_back(std::move(f.warp));
    return out;
}

/// Split functional conformal prediction of the amplitude f o gamma*.
/// curves[0, n1) form the training split, the rest the calibration split.
/// `predictors`, when given, replaces the restrictions of the calibration
/// curves (e.g. separately presmoothed partials).
inline SfcpResult sfcp(std::span<const Curve> curves, const PartialCurve& new_partial,
                       const ConformalConfig& cfg, const SplitTemplate& split,
                       std::span<const PartialCurve> predictors = {}) {
    detail::check_alpha(cfg.alpha);
    detail::check_split(curves.size(), cfg.n1);
    const TimeGrid grid = new_partial.grid();
    for (auto& c : curves)
        require(c.grid() == grid, ErrorCode::SupportMismatch, "curves and new partial differ in grid");
    auto calib = curves.subspan(cfg.n1);
    require(split.calibration_warps.size() == calib.size(), ErrorCode::InvalidArgument,
            "split template does not match the calibration split");
    require(predictors.empty() || predictors.size() == calib.size(), ErrorCode::InvalidArgument,
            "one predictor per calibration curve");

    std::vector<PartialCurve> xs;
    std::vector<std::vector<double>> ys;
    for (std::size_t i = 0; i < calib.size(); ++i) {
        xs.push_back(predictors.empty() ? restrict(calib[i], new_partial.pattern()) : predictors[i]);
        auto amp = warp_curve(calib[i], split.calibration_warps[i]);
        ys.emplace_back(amp.values().begin(), amp.values().end());
    }
    auto prepared = detail::prepare(std::move(xs), std::move(ys), new_partial, cfg);
    auto tuned = detail::conformal_band(prepared, cfg, grid, BandTarget::amplitude);
    return {std::move(tuned.band), split.registration, split.calibration_warps};
}

inline SfcpResult sfcp(std::span<const Curve> curves, const PartialCurve& new_partial,
                       const ConformalConfig& cfg) {
    return sfcp(curves, new_partial, cfg, split_register(curves, cfg));
}

/// Registers a complete curve to a split template (evaluation mode).
inline PairwiseResult register_to_template(const RegistrationResult& reg, const Curve& f,
                                           const DpOptions& dp = {}) {
    return pairwise_register(reg.template_srsf, srsf_transform(f), dp);
}

namespace detail {

/// y is accepted iff fewer than `rank` calibration scores lie strictly
/// below d_w(y, prediction).
inline bool warp_accepts(const std::vector<std::vector<double>>& responses,
                         const std::vector<std::vector<double>>& base, const std::vector<double>& coupling,
                         const std::vector<double>& prediction, std::size_t rank, std::span<const double> y) {
    const double s_new = warp_distance(y, prediction);
    std::vector<double> yhat(y.size());
    std::size_t below = 0;
    for (std::size_t i = 0; i < responses.size() && below < rank; ++i) {
        for (std::size_t k = 0; k < y.size(); ++k) yhat[k] = base[i][k] + coupling[i] * y[k];
        if (warp_distance(responses[i], yhat) < s_new) ++below;
    }
    return below < rank;
}

} // namespace detail

/// The conformal test behind a warp prediction set, kept so that any
/// vector, not only the trial lattice, can be checked for membership.
struct WarpMembership {
    std::vector<std::vector<double>> responses;
    std::vector<std::vector<double>> base;
    std::vector<double> coupling;
    std::vector<double> prediction;
    std::size_t rank = 0;

    bool contains(std::span<const double> y) const {
        return !responses.empty() && detail::warp_accepts(responses, base, coupling, prediction, rank, y);
    }
};

/// Joint prediction set for the relative phase on a coarse grid.
struct WarpPredictionSet {
    /// Point prediction: smoothed calibration warps at the new predictor.
    Warp center;
    /// Largest d_w between an accepted vector and the center.
    double radius = 0.0;
    std::vector<Warp> accepted;
    /// Coordinatewise min/max over the accepted vectors.
    PredictionBand envelope;
    double bandwidth = 0.0;
    WarpMembership membership;
};

struct SfcppResult {
    WarpPredictionSet set;
    RegistrationResult registration;
    std::vector<Warp> calibration_warps;
};

namespace detail {

inline std::vector<double> sample_warp(const Warp& g, const TimeGrid& coarse) {
    std::vector<double> v(coarse.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = g(coarse[k]);
    v.front() = 0.0;
    v.back() = 1.0;
    return v;
}

/// Per interior coordinate: calibration deciles plus the expanded range ends,
/// then the strictly increasing vectors of the Cartesian product.
inline std::vector<std::vector<double>> warp_trial_lattice(const std::vector<std::vector<double>>& Y,
                                                           double expansion) {
    const std::size_t Tc = Y.front().size();
    std::vector<std::vector<double>> axes(Tc);
    for (std::size_t k = 1; k + 1 < Tc; ++k) {
        std::vector<double> v;
        for (auto& y : Y) v.push_back(y[k]);
        auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        const double range = *hi - *lo;
        std::vector<double> axis{std::clamp(*lo - expansion * range, 1e-9, 1.0 - 1e-9),
                                 std::clamp(*hi + expansion * range, 1e-9, 1.0 - 1e-9)};
        for (int d = 1; d <= 9; ++d) axis.push_back(lower_quantile(v, d / 10.0));
        std::sort(axis.begin(), axis.end());
        axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
        axes[k] = std::move(axis);
    }
    std::vector<std::vector<double>> out;
    std::vector<double> cur(Tc, 0.0);
    cur.back() = 1.0;
    std::function<void(std::size_t)> rec = [&](std::size_t k) {
        if (k + 1 == Tc) {
            out.push_back(cur);
            return;
        }
        for (double v : axes[k]) {
            if (v <= cur[k - 1]) continue;
            cur[k] = v;
            rec(k + 1);
        }
    };
    rec(1);
    return out;
}

} // namespace detail

/// Split conformal prediction of the relative phase gamma* on `coarse`.
inline SfcppResult sfcpp(std::span<const Curve> curves, const PartialCurve& new_partial,
                         const TimeGrid& coarse, const ConformalConfig& cfg, const SplitTemplate& split,
                         std::span<const PartialCurve> predictors = {}) {
    detail::check_alpha(cfg.alpha);
    detail::check_split(curves.size(), cfg.n1);
    require(coarse.size() >= 3, ErrorCode::InvalidArgument, "coarse grid needs at least 3 points");
    const double level = 1.0 - cfg.alpha / static_cast<double>(coarse.size() - 2);
    require(level > 0.0, ErrorCode::InvalidArgument, "alpha/(T-2) must be below 1");
    const TimeGrid grid = new_partial.grid();
    for (auto& c : curves)
        require(c.grid() == grid, ErrorCode::SupportMismatch, "curves and new partial differ in grid");
    auto calib = curves.subspan(cfg.n1);
    require(split.calibration_warps.size() == calib.size(), ErrorCode::InvalidArgument,
            "split template does not match the calibration split");
    require(predictors.empty() || predictors.size() == calib.size(), ErrorCode::InvalidArgument,
            "one predictor per calibration curve");

    std::vector<PartialCurve> xs;
    std::vector<std::vector<double>> ys;
    for (std::size_t i = 0; i < calib.size(); ++i) {
        xs.push_back(predictors.empty() ? restrict(calib[i], new_partial.pattern()) : predictors[i]);
        ys.push_back(detail::sample_warp(split.calibration_warps[i], coarse));
    }
    auto p = detail::prepare(std::move(xs), std::move(ys), new_partial, cfg);
    const std::size_t m = p.responses.size();
    const std::size_t Tc = coarse.size();
    const auto lattice = detail::warp_trial_lattice(p.responses, cfg.trial.expansion);
    const std::size_t rank = quantile_rank(m + 1, level);

    KernelKind kind{};
    TuneMode mode{};
    auto H = detail::candidate_bandwidths(p.D, cfg.bandwidth, kind, mode);
    std::sort(H.begin(), H.end());

    struct Candidate {
        std::vector<std::size_t> accepted;
        detail::SmootherFit fit;
        double h = 0.0;
        double width = std::numeric_limits<double>::infinity();
    };
    std::optional<Candidate> best;
    for (double h : H) {
        Candidate cand;
        cand.h = h;
        cand.fit = detail::fit_smoother(p.D, p.responses, KernelSpec{kind, h});
        const auto& fit = cand.fit;
        std::vector<double> lo(Tc, 1.0), hi(Tc, 0.0);
        for (std::size_t r = 0; r < lattice.size(); ++r) {
            const auto& y = lattice[r];
            if (detail::warp_accepts(p.responses, fit.base, fit.coupling, fit.new_prediction, rank, y)) {
                cand.accepted.push_back(r);
                for (std::size_t k = 0; k < Tc; ++k) {
                    lo[k] = std::min(lo[k], y[k]);
                    hi[k] = std::max(hi[k], y[k]);
                }
            }
        }
        if (!cand.accepted.empty()) {
            double w = 0.0;
            for (std::size_t k = 0; k < Tc; ++k) w += hi[k] - lo[k];
            cand.width = w / static_cast<double>(Tc);
        }
        // global selection: smallest mean envelope width, ties to smaller h
        if (!best || cand.width < best->width) best = std::move(cand);
    }
    require(best && !best->accepted.empty(), ErrorCode::EmptyWarpSet,
            "no trial warp vector was accepted at any bandwidth");

    const double h = best->h;
    WarpPredictionSet set{Warp::repaired(coarse, best->fit.new_prediction), 0.0, {}, {}, h, {}};
    set.membership = {p.responses, std::move(best->fit.base), std::move(best->fit.coupling),
                      std::move(best->fit.new_prediction), rank};
    PredictionBand& env = set.envelope;
    env.grid = coarse;
    env.alpha = cfg.alpha;
    env.target = BandTarget::warp_envelope;
    env.lower.assign(Tc, 1.0);
    env.upper.assign(Tc, 0.0);
    env.bandwidth.assign(Tc, h);
    for (std::size_t a = 0; a < best->accepted.size(); ++a) {
        const auto& y = lattice[best->accepted[a]];
        for (std::size_t k = 0; k < Tc; ++k) {
            env.lower[k] = std::min(env.lower[k], y[k]);
            env.upper[k] = std::max(env.upper[k], y[k]);
        }
        set.accepted.emplace_back(coarse, y);
        set.radius = std::max(set.radius, warp_distance(set.accepted.back(), set.center));
    }
    return {std::move(set), split.registration, split.calibration_warps};
}

inline SfcppResult sfcpp(std::span<const Curve> curves, const PartialCurve& new_partial,
                         const TimeGrid& coarse, const ConformalConfig& cfg) {
    return sfcpp(curves, new_partial, coarse, cfg, split_register(curves, cfg));
}

} // namespace efcp
