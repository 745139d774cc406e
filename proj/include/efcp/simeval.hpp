#pragma once

#include "conformal.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <optional>
#include <random>

namespace efcp {

enum class Population { homogeneous_two_peak, heterogeneous_mix };

struct GeneratorSpec {
    Population population = Population::homogeneous_two_peak;
    bool phase_variation = false;
    double noise_sd = 0.0;
    std::size_t n = 100;
    std::size_t T = 100;
    std::uint64_t seed = 0;
    /// Share of one-peak curves in the heterogeneous mix.
    double one_peak_fraction = 0.5;
    /// Use the printed formula with both bumps centred at 0.25.
    bool literal_centers = false;
    /// Beta(a, b) warp parameters are drawn from Unif(warp_lo, warp_hi).
    double warp_lo = 1.0;
    double warp_hi = 3.0;
};

inline void validate(const GeneratorSpec& s) {
    require(s.n >= 2, ErrorCode::InvalidArgument, "generator needs n >= 2");
    require(s.T >= 2, ErrorCode::InvalidArgument, "generator needs T >= 2");
    require(s.noise_sd >= 0.0, ErrorCode::InvalidArgument, "noise sd must be >= 0");
    require(s.one_peak_fraction >= 0.0 && s.one_peak_fraction <= 1.0, ErrorCode::InvalidArgument,
            "one-peak fraction must lie in [0,1]");
    require(0.0 < s.warp_lo && s.warp_lo <= s.warp_hi, ErrorCode::InvalidArgument, "bad warp range");
}

inline double two_peak(double t, double z1, double z2, bool literal = false) {
    const double c2 = literal ? 0.25 : 0.75;
    return z1 * std::exp(-(t - 0.25) * (t - 0.25) / 0.072) + z2 * std::exp(-(t - c2) * (t - c2) / 0.072);
}

inline double one_peak(double t, double z) { return z * std::exp(-(t - 0.5) * (t - 0.5) / 0.25); }

/// Beta(a, b) CDF on the grid.
inline Warp gen_warp(double a, double b, const TimeGrid& grid) {
    require(a > 0.0 && b > 0.0, ErrorCode::InvalidArgument, "Beta parameters must be positive");
    std::vector<double> v(grid.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = boost::math::ibeta(a, b, grid[k]);
    v.front() = 0.0;
    v.back() = 1.0;
    for (std::size_t k = 1; k < v.size(); ++k)
        if (v[k] <= v[k - 1]) return Warp::repaired(grid, std::move(v));
    return Warp(grid, std::move(v));
}

/// One draw from the generator: the noise-free curves, the observed ones
/// and the warps applied (identity without phase variation).
struct CurveSample {
    std::vector<Curve> clean;
    std::vector<Curve> observed;
    std::vector<Warp> warps;
    std::vector<bool> one_peak;
};

inline CurveSample gen_sample(const GeneratorSpec& spec, std::mt19937_64& rng) {
    validate(spec);
    const TimeGrid grid(spec.T);
    std::normal_distribution<double> z(2.0, std::sqrt(0.1));
    std::normal_distribution<double> eps(0.0, spec.noise_sd > 0.0 ? spec.noise_sd : 1.0);
    std::uniform_real_distribution<double> unif(spec.warp_lo, spec.warp_hi);
    std::bernoulli_distribution coin(spec.one_peak_fraction);

    CurveSample out;
    for (std::size_t i = 0; i < spec.n; ++i) {
        const bool single = spec.population == Population::heterogeneous_mix && coin(rng);
        const double z1 = z(rng);
        const double z2 = single ? 0.0 : z(rng);
        Warp gamma = Warp::identity(grid);
        if (spec.phase_variation) {
            const double a = unif(rng);
            const double b = unif(rng);
            gamma = gen_warp(a, b, grid);
        }
        // evaluate the analytic curve at gamma(t) rather than interpolating
        auto f = [&](double t) { return single ? one_peak(t, z1) : two_peak(t, z1, z2, spec.literal_centers); };
        std::vector<double> v(grid.size());
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = f(gamma[k]);
        Curve clean(grid, v);
        if (spec.noise_sd > 0.0)
            for (auto& x : v) x += eps(rng);
        out.clean.push_back(std::move(clean));
        out.observed.emplace_back(grid, std::move(v));
        out.warps.push_back(std::move(gamma));
        out.one_peak.push_back(single);
    }
    return out;
}

inline std::vector<Curve> gen_curves(const GeneratorSpec& spec) {
    std::mt19937_64 rng(spec.seed);
    return gen_sample(spec, rng).observed;
}

enum class Procedure { ffcp, sfcp, sfcpp };

inline std::string_view to_string(Procedure p) {
    switch (p) {
    case Procedure::ffcp: return "ffcp";
    case Procedure::sfcp: return "sfcp";
    case Procedure::sfcpp: return "sfcpp";
    }
    return "?";
}

inline Procedure parse_procedure(std::string_view s) {
    if (s == "ffcp") return Procedure::ffcp;
    if (s == "sfcp") return Procedure::sfcp;
    if (s == "sfcpp") return Procedure::sfcpp;
    throw Error(ErrorCode::InvalidArgument, "unknown procedure '" + std::string(s) + "'");
}

enum class Presmoother { none, fourier, moving_average };

struct PresmoothSpec {
    Presmoother kind = Presmoother::none;
    int fourier_basis = 10;
    int window = 12;
};

inline Curve presmooth(const Curve& f, const PresmoothSpec& s) {
    switch (s.kind) {
    case Presmoother::none: return f;
    case Presmoother::fourier: return fourier_project(f, s.fourier_basis);
    case Presmoother::moving_average: return moving_average(f, s.window);
    }
    return f;
}

/// Smooths each observed segment on its own, as if only the partial
/// curve were available. Sparse predictors are returned unchanged.
inline PartialCurve presmooth(const PartialCurve& x, const PresmoothSpec& s) {
    if (s.kind == Presmoother::none || x.pattern().is_sparse()) return x;
    std::vector<double> v(x.source().values().begin(), x.source().values().end());
    for (std::size_t j = 0; j < x.segments().size(); ++j) {
        auto seg = x.segment_values(j);
        Curve piece(TimeGrid(seg.size()), std::vector<double>(seg.begin(), seg.end()));
        Curve sm = presmooth(piece, s);
        std::copy(sm.values().begin(), sm.values().end(), v.begin() + static_cast<long>(x.segments()[j].first));
    }
    return PartialCurve(Curve(x.grid(), std::move(v)), x.pattern());
}

using PatternSampler = std::function<ObservationPattern(std::mt19937_64&)>;

inline PatternSampler fixed_pattern(ObservationPattern p) {
    return [p](std::mt19937_64&) { return p; };
}

/// J = [0, U] with U fixed.
inline PatternSampler truncation_at(double u) { return fixed_pattern(Interval{0.0, u}); }

/// J = [0, U] with U ~ Unif(lo, hi).
inline PatternSampler uniform_truncation(double lo, double hi) {
    require(0.0 < lo && lo <= hi && hi <= 1.0, ErrorCode::InvalidArgument, "bad truncation range");
    return [lo, hi](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> u(lo, hi);
        return ObservationPattern(Interval{0.0, u(rng)});
    };
}

struct EvalOptions {
    /// Coarse grid size for sfcpp.
    std::size_t coarse_T = 5;
    PresmoothSpec presmooth{};
    unsigned threads = 1;
};

struct ReplicateOutcome {
    std::vector<bool> covered;
    std::vector<double> length;
    /// Joint coverage when it is not the conjunction of `covered`, as for a
    /// warp set whose membership is decided by its own conformal test.
    std::optional<bool> joint;
};

/// Monte-Carlo metrics over B replicates.
struct EvalReport {
    Procedure procedure = Procedure::ffcp;
    double alpha = 0.1;
    std::size_t B = 0;
    std::size_t n_errors = 0;
    std::vector<std::string> error_messages;
    std::vector<double> t;
    std::vector<double> p_k;
    std::vector<double> ell_k;
    std::vector<double> ci_halfwidths;
    double p_bar = 0.0;
    double ell_bar = 0.0;
    /// Share of replicates covered at every point at once; for sfcpp, share
    /// whose true warp vector passes the set's conformal test.
    double p_overall = 0.0;
    /// Per successful replicate, in replicate order.
    std::vector<double> replicate_mean_length;
    std::vector<bool> replicate_covered_all;
};

namespace detail {

inline std::mt19937_64 replicate_rng(std::uint64_t seed, std::uint64_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32), 0x9e3779b9u};
    return std::mt19937_64(seq);
}

inline EvalReport assemble(Procedure proc, double alpha, std::size_t B, const TimeGrid& grid,
                           const std::vector<std::optional<ReplicateOutcome>>& outcomes,
                           const std::vector<std::string>& errors) {
    EvalReport r;
    r.procedure = proc;
    r.alpha = alpha;
    r.B = B;
    r.t = grid.points();
    const std::size_t T = grid.size();
    r.p_k.assign(T, 0.0);
    r.ell_k.assign(T, 0.0);
    std::size_t ok = 0, all = 0;
    for (std::size_t b = 0; b < outcomes.size(); ++b) {
        if (!outcomes[b]) {
            ++r.n_errors;
            r.error_messages.push_back("replicate " + std::to_string(b) + ": " + errors[b]);
            continue;
        }
        ++ok;
        bool every = true;
        double mean_len = 0.0;
        for (std::size_t k = 0; k < T; ++k) {
            r.p_k[k] += outcomes[b]->covered[k] ? 1.0 : 0.0;
            r.ell_k[k] += outcomes[b]->length[k];
            every = every && outcomes[b]->covered[k];
            mean_len += outcomes[b]->length[k];
        }
        if (outcomes[b]->joint) every = *outcomes[b]->joint;
        all += every ? 1 : 0;
        r.replicate_mean_length.push_back(mean_len / static_cast<double>(T));
        r.replicate_covered_all.push_back(every);
    }
    const double denom = ok > 0 ? static_cast<double>(ok) : 1.0;
    r.ci_halfwidths.assign(T, 0.0);
    for (std::size_t k = 0; k < T; ++k) {
        r.p_k[k] /= denom;
        r.ell_k[k] /= denom;
        r.ci_halfwidths[k] = 1.96 * std::sqrt(r.p_k[k] * (1.0 - r.p_k[k]) / denom);
        r.p_bar += r.p_k[k];
        r.ell_bar += r.ell_k[k];
    }
    r.p_bar /= static_cast<double>(T);
    r.ell_bar /= static_cast<double>(T);
    r.p_overall = static_cast<double>(all) / denom;
    return r;
}

inline ReplicateOutcome score_band(const PredictionBand& band, std::span<const double> truth) {
    ReplicateOutcome o;
    for (std::size_t k = 0; k < truth.size(); ++k) {
        o.covered.push_back(band.contains(k, truth[k]));
        o.length.push_back(band.length(k));
    }
    return o;
}

} // namespace detail

/// Runs `proc` on B fresh replicates for each pattern sampler and scores
/// the bands against the procedure's target: raw values for ffcp, the
/// registered amplitude for sfcp, the relative phase for sfcpp. Curves and
/// the split template are shared across samplers within a replicate.
/// Replicates run in parallel; results are gathered in replicate order.
inline std::vector<EvalReport> monte_carlo(Procedure proc, const GeneratorSpec& spec,
                                           std::span<const PatternSampler> samplers,
                                           const ConformalConfig& cfg, std::size_t B,
                                           const EvalOptions& opt = {}) {
    require(B >= 1, ErrorCode::InvalidArgument, "B must be >= 1");
    require(!samplers.empty(), ErrorCode::InvalidArgument, "need at least one pattern sampler");
    validate(spec);
    GeneratorSpec gen = spec;
    gen.n = spec.n + 1; // last curve is the target
    const TimeGrid grid(spec.T);
    const TimeGrid coarse(opt.coarse_T);
    const TimeGrid& eval_grid = proc == Procedure::sfcpp ? coarse : grid;
    ConformalConfig inner = cfg;
    inner.threads = 1;

    const std::size_t S = samplers.size();
    std::vector<std::vector<std::optional<ReplicateOutcome>>> outcomes(S, std::vector<std::optional<ReplicateOutcome>>(B));
    std::vector<std::vector<std::string>> errors(S, std::vector<std::string>(B));

    parallel_for(B, opt.threads, [&](std::size_t b) {
        auto rng = detail::replicate_rng(spec.seed, b);
        std::optional<CurveSample> sample;
        std::vector<ObservationPattern> patterns;
        try {
            sample = gen_sample(gen, rng);
            for (auto& s : samplers) patterns.push_back(s(rng));
        } catch (const Error& e) {
            for (std::size_t s = 0; s < S; ++s) errors[s][b] = e.what();
            return;
        }
        std::vector<Curve> curves;
        for (std::size_t i = 0; i < spec.n; ++i) curves.push_back(presmooth(sample->observed[i], opt.presmooth));
        const Curve target_raw = sample->observed[spec.n];
        const Curve target = presmooth(target_raw, opt.presmooth);

        std::optional<SplitTemplate> split;
        std::vector<double> amp_truth, phase_truth;
        try {
            if (proc != Procedure::ffcp) {
                split = split_register(curves, inner);
                auto reg = register_to_template(split->registration, target, inner.karcher.dp);
                auto amp = warp_curve(target, reg.warp);
                amp_truth.assign(amp.values().begin(), amp.values().end());
                phase_truth = detail::sample_warp(reg.warp, coarse);
            }
        } catch (const Error& e) {
            for (std::size_t s = 0; s < S; ++s) errors[s][b] = e.what();
            return;
        }

        for (std::size_t s = 0; s < S; ++s) {
            try {
                const PartialCurve new_x = presmooth(restrict(target_raw, patterns[s]), opt.presmooth);
                std::vector<PartialCurve> xs;
                if (opt.presmooth.kind != Presmoother::none) {
                    const std::size_t first = proc == Procedure::ffcp ? 0 : cfg.n1;
                    for (std::size_t i = first; i < spec.n; ++i)
                        xs.push_back(presmooth(restrict(sample->observed[i], patterns[s]), opt.presmooth));
                }
                switch (proc) {
                case Procedure::ffcp: {
                    auto band = ffcp(curves, new_x, inner, xs);
                    outcomes[s][b] = detail::score_band(band, target.values());
                    break;
                }
                case Procedure::sfcp: {
                    auto res = sfcp(curves, new_x, inner, *split, xs);
                    outcomes[s][b] = detail::score_band(res.band, amp_truth);
                    break;
                }
                case Procedure::sfcpp: {
                    auto res = sfcpp(curves, new_x, coarse, inner, *split, xs);
                    auto o = detail::score_band(res.set.envelope, phase_truth);
                    o.joint = res.set.membership.contains(phase_truth);
                    // a member of the set lies in its projection at every point
                    if (*o.joint) o.covered.assign(o.covered.size(), true);
                    outcomes[s][b] = std::move(o);
                    break;
                }
                }
            } catch (const Error& e) {
                errors[s][b] = e.what();
            }
        }
    });

    std::vector<EvalReport> reports;
    for (std::size_t s = 0; s < S; ++s)
        reports.push_back(detail::assemble(proc, cfg.alpha, B, eval_grid, outcomes[s], errors[s]));
    return reports;
}

inline EvalReport monte_carlo(Procedure proc, const GeneratorSpec& spec, const PatternSampler& sampler,
                              const ConformalConfig& cfg, std::size_t B, const EvalOptions& opt = {}) {
    return monte_carlo(proc, spec, std::span<const PatternSampler>(&sampler, 1), cfg, B, opt).front();
}

} // namespace efcp
