// Command-line front end: simulate, predict, evaluate, register.

#include "efcp/efcp.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using efcp::io::json;

namespace {

enum Exit { kOk = 0, kUsage = 2, kData = 3, kNumerical = 4 };

int exit_code(efcp::ErrorCode c) {
    switch (c) {
    case efcp::ErrorCode::InvalidArgument: return kUsage;
    case efcp::ErrorCode::DegenerateDistances:
    case efcp::ErrorCode::EmptyWarpSet: return kNumerical;
    default: return kData;
    }
}

/// JSON config files. A flat object applies to the subcommand being run;
/// a nested object keyed by that subcommand's name does too, and objects
/// keyed by other subcommands are ignored. A
/// manifest written by this tool is accepted too (its "config" is used).
class JsonConfig : public CLI::Config {
public:
    explicit JsonConfig(std::string sub) : sub_(std::move(sub)) {}

    std::string to_config(const CLI::App*, bool, bool, std::string) const override { return {}; }

    std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
        json j;
        try {
            j = json::parse(in);
        } catch (const json::parse_error& e) {
            throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
        }
        if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
        if (j.contains("command") && j.contains("config") && j["config"].is_object()) j = j["config"];
        std::vector<CLI::ConfigItem> items;
        if (sub_.empty()) return items;
        for (auto& [key, val] : j.items()) {
            if (!val.is_object())
                items.push_back(item(key, val));
            else if (key == sub_)
                for (auto& [k2, v2] : val.items()) items.push_back(item(k2, v2));
        }
        return items;
    }

private:
    static std::string scalar(const json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        return v.dump();
    }

    CLI::ConfigItem item(const std::string& name, const json& v) const {
        CLI::ConfigItem it;
        it.parents = {sub_};
        it.name = name;
        if (v.is_array())
            for (auto& e : v) it.inputs.push_back(scalar(e));
        else
            it.inputs.push_back(scalar(v));
        return it;
    }

    std::string sub_;
};

unsigned default_threads() {
    if (const char* env = std::getenv("EFCP_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
    }
    return 1;
}

/// Resolved option values of a subcommand, minus those that do not affect
/// results (thread count, output directory, config path).
json snapshot(const CLI::App& app) {
    json j = json::object();
    for (const CLI::Option* o : app.get_options()) {
        const std::string name = o->get_lnames().empty() ? o->get_name() : o->get_lnames().front();
        if (name.empty() || name == "help" || name == "threads" || name == "out" || name == "config") continue;
        if (o->count() > 0) {
            auto r = o->results();
            if (o->get_expected_max() > 1 || r.size() > 1)
                j[name] = r;
            else
                j[name] = r.front();
        } else if (!o->get_default_str().empty()) {
            j[name] = o->get_default_str();
        }
    }
    return j;
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw efcp::Error(efcp::ErrorCode::Parse, "cannot write '" + p.string() + "'");
    out << s;
}

template <typename Fn>
void write_file(const fs::path& p, Fn&& fn) {
    std::ostringstream ss;
    fn(ss);
    write_text(p, ss.str());
}

struct Output {
    fs::path dir;
    efcp::io::RunManifest manifest;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    template <typename Fn>
    void add(const std::string& name, Fn&& fn) {
        write_file(dir / name, std::forward<Fn>(fn));
        manifest.outputs.push_back(name);
    }

    void finish() {
        write_text(dir / "manifest.json", efcp::io::to_json(manifest).dump(2) + "\n");
        double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        json t;
        t["wall_time_seconds"] = sec;
        write_text(dir / "timing.json", t.dump(2) + "\n");
    }
};

Output open_output(const std::string& dir, const std::string& command, const CLI::App& sub, std::uint64_t seed) {
    fs::create_directories(dir);
    Output o;
    o.dir = dir;
    o.manifest.command = command;
    o.manifest.config = snapshot(sub);
    o.manifest.seed = seed;
    return o;
}

// ---- shared settings ----

struct DpFlags {
    int max_step = efcp::DpOptions{}.max_step;
    bool all_moves = false;

    void add(CLI::App* app) {
        app->add_option("--max-step", max_step, "largest DP lattice step")->check(CLI::Range(1, 20))->capture_default_str();
        app->add_flag("--all-moves", all_moves, "keep DP moves that repeat a slope");
    }
    efcp::DpOptions options() const { return {max_step, !all_moves}; }
};

struct KarcherFlags {
    double tol = 1e-4;
    int max_iter = 20;
    bool recenter = false;

    void add(CLI::App* app) {
        app->add_option("--karcher-tol", tol, "relative objective tolerance")->capture_default_str();
        app->add_option("--max-iter", max_iter, "Karcher iterations")->check(CLI::PositiveNumber)->capture_default_str();
        app->add_flag("--recenter", recenter, "recenter warps after each iteration");
    }
};

struct ConformalFlags {
    double alpha = 0.1;
    std::size_t n1 = 0;
    std::string metric = "l2";
    std::string base = "l2";
    std::string kernel = "gaussian";
    std::vector<double> bandwidth;
    std::vector<double> betas = efcp::default_betas();
    std::string tune = "local";
    std::size_t n_trial = 200;
    double expansion = 0.25;
    std::size_t coarse_T = 5;
    std::string proc = "sfcp";

    void add(CLI::App* app) {
        app->add_option("--proc", proc, "ffcp, sfcp or sfcpp")
            ->check(CLI::IsMember({"ffcp", "sfcp", "sfcpp"}))->capture_default_str();
        app->add_option("--alpha", alpha, "miscoverage level")->check(CLI::Range(0.0, 1.0))->capture_default_str();
        app->add_option("--n1", n1, "training split size (default: half)");
        app->add_option("--metric", metric, "l2, fr, amplitude (da), euclid or prod")->capture_default_str();
        app->add_option("--base", base, "per-fragment metric for prod")->capture_default_str();
        app->add_option("--kernel", kernel, "gaussian or triangular")
            ->check(CLI::IsMember({"gaussian", "triangular"}))->capture_default_str();
        app->add_option("--bandwidth", bandwidth, "fixed bandwidth candidates (skip beta quantiles)");
        app->add_option("--betas", betas, "distance quantile levels for bandwidth candidates");
        app->add_option("--tune", tune, "local or global bandwidth selection")
            ->check(CLI::IsMember({"local", "global"}))->capture_default_str();
        app->add_option("--n-trial", n_trial, "trial values per time point")->check(CLI::Range(2, 100000))->capture_default_str();
        app->add_option("--expansion", expansion, "trial grid range expansion")->capture_default_str();
        app->add_option("--coarse-T", coarse_T, "coarse grid size for sfcpp")->check(CLI::Range(3, 50))->capture_default_str();
    }

    efcp::ConformalConfig config(std::size_t n, const efcp::DpOptions& dp, const KarcherFlags& k,
                                 std::uint64_t seed, unsigned threads) const {
        efcp::ConformalConfig c;
        c.alpha = alpha;
        c.n1 = n1 > 0 ? n1 : n / 2;
        c.metric.kind = efcp::parse_metric(metric);
        c.metric.base = efcp::parse_metric(base);
        c.metric.dp = dp;
        efcp::BandwidthTuning t;
        t.kernel = kernel == "gaussian" ? efcp::KernelKind::gaussian : efcp::KernelKind::triangular;
        t.betas = betas;
        t.fixed = bandwidth;
        t.mode = tune == "local" ? efcp::TuneMode::local : efcp::TuneMode::global;
        c.bandwidth = t;
        c.trial = {n_trial, expansion};
        c.karcher.tol = k.tol;
        c.karcher.max_iter = k.max_iter;
        c.karcher.recenter = k.recenter;
        c.karcher.dp = dp;
        c.karcher.threads = threads;
        c.seed = seed;
        c.threads = threads;
        return c;
    }
};

struct PatternFlags {
    std::vector<double> u;
    std::vector<double> u_range;
    std::vector<double> fragments;
    std::vector<double> weights;
    std::vector<double> sparse;

    void add(CLI::App* app, bool many_u) {
        auto* ou = app->add_option("--u", u, many_u ? "truncation points U (observe [0,U])" : "truncation point U (observe [0,U])");
        if (!many_u) ou->expected(1);
        if (many_u) app->add_option("--u-range", u_range, "draw U ~ Unif(lo, hi)")->expected(2);
        app->add_option("--fragments", fragments, "observed fragments as a1 b1 a2 b2 ...");
        app->add_option("--weights", weights, "fragment weights (default equal)");
        app->add_option("--sparse", sparse, "sparse observation times");
    }

    std::vector<efcp::ObservationPattern> patterns() const {
        int kinds = (!u.empty() || !u_range.empty()) + !fragments.empty() + !sparse.empty();
        if (kinds != 1)
            throw efcp::Error(efcp::ErrorCode::InvalidArgument,
                              "give exactly one of --u/--u-range, --fragments or --sparse");
        std::vector<efcp::ObservationPattern> out;
        for (double x : u) out.emplace_back(efcp::Interval{0.0, x});
        if (!fragments.empty()) {
            if (fragments.size() % 2 != 0)
                throw efcp::Error(efcp::ErrorCode::InvalidArgument, "--fragments needs pairs of endpoints");
            efcp::Fragments f;
            for (std::size_t i = 0; i < fragments.size(); i += 2) f.pieces.push_back({fragments[i], fragments[i + 1]});
            f.weights = weights;
            out.emplace_back(f);
        }
        if (!sparse.empty()) out.emplace_back(efcp::Sparse{sparse});
        return out;
    }

    /// l2 is the default metric; on fragments and sparse points it means
    /// the fragment sum and the Euclidean distance respectively.
    static void adapt_metric(efcp::Metric& m, const efcp::ObservationPattern& p) {
        if (m.kind == efcp::MetricKind::l2 && p.is_fragments()) {
            m.kind = efcp::MetricKind::prod;
        } else if (m.kind == efcp::MetricKind::l2 && p.is_sparse()) {
            m.kind = efcp::MetricKind::euclid;
        } else if ((m.kind == efcp::MetricKind::fr || m.kind == efcp::MetricKind::amplitude) && p.is_fragments()) {
            m.base = m.kind;
            m.kind = efcp::MetricKind::prod;
        }
    }
};

struct GeneratorFlags {
    std::string population = "homogeneous";
    bool phase = false;
    double noise_sd = 0.0;
    std::size_t n = 100;
    std::size_t T = 100;
    double one_peak_fraction = 0.5;
    bool literal_centers = false;
    std::vector<double> warp_range{1.0, 3.0};

    void add(CLI::App* app) {
        app->add_option("--population", population, "homogeneous or heterogeneous")
            ->check(CLI::IsMember({"homogeneous", "heterogeneous"}))->capture_default_str();
        app->add_flag("--phase", phase, "apply random Beta-CDF warps");
        app->add_option("--noise-sd", noise_sd, "additive noise sd")->check(CLI::NonNegativeNumber)->capture_default_str();
        app->add_option("--n", n, "number of curves")->check(CLI::Range(2, 1000000))->capture_default_str();
        app->add_option("--T", T, "grid size")->check(CLI::Range(2, 100000))->capture_default_str();
        app->add_option("--one-peak-fraction", one_peak_fraction, "one-peak share in the heterogeneous mix")
            ->check(CLI::Range(0.0, 1.0))->capture_default_str();
        app->add_flag("--literal-centers", literal_centers, "centre both bumps at 0.25");
        app->add_option("--warp-range", warp_range, "range of the Beta warp parameters")->expected(2)->capture_default_str();
    }

    efcp::GeneratorSpec spec(std::uint64_t seed) const {
        efcp::GeneratorSpec s;
        s.population = population == "homogeneous" ? efcp::Population::homogeneous_two_peak
                                                   : efcp::Population::heterogeneous_mix;
        s.phase_variation = phase;
        s.noise_sd = noise_sd;
        s.n = n;
        s.T = T;
        s.seed = seed;
        s.one_peak_fraction = one_peak_fraction;
        s.literal_centers = literal_centers;
        s.warp_lo = warp_range.at(0);
        s.warp_hi = warp_range.at(1);
        return s;
    }
};

// ---- subcommands ----

struct Common {
    std::string out;
    std::uint64_t seed = 0;
    unsigned threads = default_threads();

    void add(CLI::App* app, bool needs_out = true) {
        auto* o = app->add_option("--out", out, "output directory");
        if (needs_out) o->required();
        app->add_option("--seed", seed, "random seed")->capture_default_str();
        app->add_option("--threads", threads, "worker threads (default: EFCP_THREADS or 1)")->check(CLI::PositiveNumber);
    }
};

int run_simulate(const CLI::App& sub, const Common& c, const GeneratorFlags& g) {
    auto spec = g.spec(c.seed);
    std::mt19937_64 rng(spec.seed);
    auto sample = efcp::gen_sample(spec, rng);
    auto o = open_output(c.out, "simulate", sub, c.seed);
    o.add("curves.csv", [&](std::ostream& s) { efcp::io::write_curves(s, sample.observed); });
    if (spec.noise_sd > 0.0)
        o.add("clean.csv", [&](std::ostream& s) { efcp::io::write_curves(s, sample.clean); });
    if (spec.phase_variation)
        o.add("warps.csv", [&](std::ostream& s) { efcp::io::write_warps(s, sample.warps); });
    o.finish();
    return kOk;
}

struct PredictFlags {
    std::string curves;
    long target = -1;
    bool normalize = false;
};

int run_predict(const CLI::App& sub, const Common& c, const PredictFlags& pf, const PatternFlags& pat,
                const ConformalFlags& cf, const DpFlags& dpf, const KarcherFlags& kf) {
    auto tab = efcp::io::read_curves(pf.curves, pf.normalize);
    const std::size_t N = tab.curves.size();
    if (N < 3) throw efcp::Error(efcp::ErrorCode::Parse, "need at least three curves (training plus target)");
    const std::size_t ti = pf.target < 0 ? N - 1 : static_cast<std::size_t>(pf.target);
    if (ti >= N) throw efcp::Error(efcp::ErrorCode::InvalidArgument, "--target is out of range");
    const efcp::Curve target = tab.curves[ti];
    std::vector<efcp::Curve> train;
    for (std::size_t i = 0; i < N; ++i)
        if (i != ti) train.push_back(tab.curves[i]);
    // curve files are often sorted; shuffle before the split
    std::mt19937_64 rng(c.seed);
    std::shuffle(train.begin(), train.end(), rng);

    auto pats = pat.patterns();
    if (pats.size() != 1) throw efcp::Error(efcp::ErrorCode::InvalidArgument, "predict takes a single pattern");
    auto cfg = cf.config(train.size(), dpf.options(), kf, c.seed, c.threads);
    PatternFlags::adapt_metric(cfg.metric, pats[0]);
    const efcp::PartialCurve x = efcp::restrict(target, pats[0]);
    const auto proc = efcp::parse_procedure(cf.proc);

    auto o = open_output(c.out, "predict", sub, c.seed);
    o.manifest.input_checksums[pf.curves] = efcp::io::file_checksum(pf.curves);
    int code = kOk;
    switch (proc) {
    case efcp::Procedure::ffcp: {
        auto band = efcp::ffcp(train, x, cfg);
        o.add("band.csv", [&](std::ostream& s) { efcp::io::write_band(s, band, target.values()); });
        break;
    }
    case efcp::Procedure::sfcp: {
        auto res = efcp::sfcp(train, x, cfg);
        auto reg = efcp::register_to_template(res.registration, target, cfg.karcher.dp);
        auto amp = efcp::warp_curve(target, reg.warp);
        o.add("band.csv", [&](std::ostream& s) { efcp::io::write_band(s, res.band, amp.values()); });
        o.add("template.csv", [&](std::ostream& s) {
            efcp::io::write_curves(s, std::span(&res.registration.template_curve, 1), std::vector<std::string>{"template"});
        });
        if (!res.registration.converged) code = kNumerical;
        break;
    }
    case efcp::Procedure::sfcpp: {
        const efcp::TimeGrid coarse(cf.coarse_T);
        auto res = efcp::sfcpp(train, x, coarse, cfg);
        auto reg = efcp::register_to_template(res.registration, target, cfg.karcher.dp);
        auto phase = efcp::detail::sample_warp(reg.warp, coarse);
        o.add("band.csv", [&](std::ostream& s) { efcp::io::write_band(s, res.set.envelope, phase); });
        o.add("center.csv", [&](std::ostream& s) { efcp::io::write_warps(s, std::span(&res.set.center, 1)); });
        if (!res.registration.converged) code = kNumerical;
        break;
    }
    }
    o.finish();
    if (code == kNumerical) std::cerr << "warning: Karcher mean did not converge; outputs written\n";
    return code;
}

struct EvaluateFlags {
    std::size_t B = 100;
    std::string presmooth = "none";
    int fourier_basis = 10;
    int window = 12;
};

int run_evaluate(const CLI::App& sub, const Common& c, const EvaluateFlags& ef, const GeneratorFlags& g,
                 const PatternFlags& pat, const ConformalFlags& cf, const DpFlags& dpf, const KarcherFlags& kf) {
    auto spec = g.spec(c.seed);
    std::vector<efcp::PatternSampler> samplers;
    std::vector<std::string> names;
    if (!pat.u_range.empty()) {
        if (!pat.u.empty() || !pat.fragments.empty() || !pat.sparse.empty())
            throw efcp::Error(efcp::ErrorCode::InvalidArgument, "--u-range excludes other pattern flags");
        samplers.push_back(efcp::uniform_truncation(pat.u_range[0], pat.u_range[1]));
        names.push_back("report.json");
    } else {
        auto pats = pat.patterns();
        for (auto& p : pats) samplers.push_back(efcp::fixed_pattern(p));
        for (std::size_t i = 0; i < pats.size(); ++i)
            names.push_back(pats.size() == 1 ? "report.json" : "report_" + std::to_string(i) + ".json");
    }
    auto cfg = cf.config(spec.n, dpf.options(), kf, c.seed, 1);
    if (pat.u_range.empty()) PatternFlags::adapt_metric(cfg.metric, pat.patterns().front());
    efcp::EvalOptions opt;
    opt.coarse_T = cf.coarse_T;
    opt.threads = c.threads;
    opt.presmooth.kind = ef.presmooth == "none"      ? efcp::Presmoother::none
                         : ef.presmooth == "fourier" ? efcp::Presmoother::fourier
                                                     : efcp::Presmoother::moving_average;
    opt.presmooth.fourier_basis = ef.fourier_basis;
    opt.presmooth.window = ef.window;
    auto reports = efcp::monte_carlo(efcp::parse_procedure(cf.proc), spec, samplers, cfg, ef.B, opt);

    auto o = open_output(c.out, "evaluate", sub, c.seed);
    bool all_failed = true;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        o.add(names[i], [&](std::ostream& s) { s << efcp::io::to_json(reports[i]).dump(2) << '\n'; });
        all_failed = all_failed && reports[i].n_errors == reports[i].B;
        std::cout << names[i] << ": p_bar=" << efcp::io::fmt(reports[i].p_bar)
                  << " ell_bar=" << efcp::io::fmt(reports[i].ell_bar)
                  << " p_overall=" << efcp::io::fmt(reports[i].p_overall) << " errors=" << reports[i].n_errors << '\n';
    }
    o.finish();
    return all_failed ? kNumerical : kOk;
}

struct RegisterFlags {
    std::string curves;
    bool normalize = false;
};

int run_register(const CLI::App& sub, const Common& c, const RegisterFlags& rf, const DpFlags& dpf,
                 const KarcherFlags& kf) {
    auto tab = efcp::io::read_curves(rf.curves, rf.normalize);
    efcp::KarcherOptions k;
    k.tol = kf.tol;
    k.max_iter = kf.max_iter;
    k.recenter = kf.recenter;
    k.dp = dpf.options();
    k.threads = c.threads;
    auto reg = efcp::karcher_mean(tab.curves, k);

    auto o = open_output(c.out, "register", sub, c.seed);
    o.manifest.input_checksums[rf.curves] = efcp::io::file_checksum(rf.curves);
    o.add("template.csv", [&](std::ostream& s) {
        efcp::io::write_curves(s, std::span(&reg.template_curve, 1), std::vector<std::string>{"template"});
    });
    o.add("warps.csv", [&](std::ostream& s) { efcp::io::write_warps(s, reg.warps, tab.ids); });
    o.add("aligned.csv", [&](std::ostream& s) { efcp::io::write_curves(s, reg.aligned, tab.ids); });
    o.add("trace.csv", [&](std::ostream& s) {
        s << "iteration,objective\n";
        for (std::size_t i = 0; i < reg.objective_trace.size(); ++i)
            s << i << ',' << efcp::io::fmt(reg.objective_trace[i]) << '\n';
    });
    o.finish();
    if (!reg.converged) {
        std::cerr << "warning: Karcher mean did not converge in " << k.max_iter << " iterations; outputs written\n";
        return kNumerical;
    }
    return kOk;
}

/// CLI11 only reads a root-level config file when the flag precedes the
/// subcommand, so hoist `--config <path>` to the front.
std::vector<std::string> hoist_config(int argc, char** argv) {
    std::vector<std::string> front, rest;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) {
            front.push_back(a);
            front.push_back(argv[++i]);
        } else if (a.starts_with("--config=")) {
            front.push_back(a);
        } else {
            rest.push_back(a);
        }
    }
    front.insert(front.end(), rest.begin(), rest.end());
    return front;
}

std::string find_subcommand(const std::vector<std::string>& args) {
    for (auto& a : args)
        if (a == "simulate" || a == "predict" || a == "evaluate" || a == "register") return a;
    return {};
}

} // namespace

int main(int argc, char** argv) {
    auto args = hoist_config(argc, argv);
    CLI::App app{"Elastic functional conformal prediction for partially observed curves"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(efcp::kVersion));
    app.set_config("--config", "", "JSON config file; flags given on the command line win");
    app.config_formatter(std::make_shared<JsonConfig>(find_subcommand(args)));
    app.allow_config_extras(CLI::config_extras_mode::error);

    Common common;
    GeneratorFlags gen;
    PatternFlags pat;
    ConformalFlags conf;
    DpFlags dp;
    KarcherFlags karcher;
    PredictFlags pf;
    EvaluateFlags ef;
    RegisterFlags rf;

    auto* sim = app.add_subcommand("simulate", "generate simulated curves");
    common.add(sim);
    gen.add(sim);

    auto* pred = app.add_subcommand("predict", "prediction band for a partially observed curve");
    common.add(pred);
    pred->add_option("--curves", pf.curves, "curves CSV")->required()->check(CLI::ExistingFile);
    pred->add_option("--target", pf.target, "row of the curve to predict (default: last)");
    pred->add_flag("--normalize", pf.normalize, "scale each curve to unit L2 norm");
    pat.add(pred, false);
    conf.add(pred);
    dp.add(pred);
    karcher.add(pred);

    auto* eval = app.add_subcommand("evaluate", "Monte Carlo coverage and length");
    common.add(eval);
    gen.add(eval);
    eval->add_option("--B", ef.B, "replicates")->check(CLI::PositiveNumber)->capture_default_str();
    eval->add_option("--presmooth", ef.presmooth, "none, fourier or ma")
        ->check(CLI::IsMember({"none", "fourier", "ma"}))->capture_default_str();
    eval->add_option("--fourier-basis", ef.fourier_basis, "Fourier basis size")->capture_default_str();
    eval->add_option("--window", ef.window, "moving-average window")->capture_default_str();
    pat.add(eval, true);
    conf.add(eval);
    dp.add(eval);
    karcher.add(eval);

    auto* reg = app.add_subcommand("register", "Karcher mean and alignment of curves");
    common.add(reg);
    reg->add_option("--curves", rf.curves, "curves CSV")->required()->check(CLI::ExistingFile);
    reg->add_flag("--normalize", rf.normalize, "scale each curve to unit L2 norm");
    dp.add(reg);
    karcher.add(reg);

    app.name(argv[0]);
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*sim) return run_simulate(*sim, common, gen);
        if (*pred) return run_predict(*pred, common, pf, pat, conf, dp, karcher);
        if (*eval) return run_evaluate(*eval, common, ef, gen, pat, conf, dp, karcher);
        if (*reg) return run_register(*reg, common, rf, dp, karcher);
    } catch (const efcp::Error& e) {
        std::cerr << "error (" << efcp::to_string(e.code()) << "): " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kData;
    }
    return kUsage;
}
