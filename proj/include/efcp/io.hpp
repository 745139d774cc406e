#pragma once

#include "simeval.hpp"

#include "json.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace efcp {

inline constexpr std::string_view kVersion = "0.3.1";

namespace io {

using json = nlohmann::json;

/// Shortest round-trip decimal form, independent of locale.
inline std::string fmt(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline double parse_double(std::string_view s, std::size_t row, std::size_t col) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    double v = 0.0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc{} || r.ptr != s.data() + s.size() || !std::isfinite(v))
        throw Error(ErrorCode::Parse, "row " + std::to_string(row) + ", column " + std::to_string(col) +
                                          ": not a finite number: '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto p = line.find(',', start);
        out.push_back(line.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
        if (p == std::string_view::npos) break;
        start = p + 1;
    }
    return out;
}

/// Curves as read from a CSV, with the original time axis kept for reference.
struct CurveTable {
    std::vector<std::string> ids;
    std::vector<Curve> curves;
    double t_min = 0.0;
    double t_max = 1.0;
    /// Set when values were divided by their L2 norm.
    bool normalized = false;
};

/// Reads a curves CSV: header "id,t_1,...,t_T" followed by one curve per
/// row. Numeric header times must be equally spaced and are mapped
/// affinely to [0,1]; non-numeric headers imply an equally spaced grid.
inline CurveTable read_curves(std::istream& in, bool normalize = false) {
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::Parse, "row 1: missing header");
    auto head = split_csv(line);
    require(head.size() >= 3, ErrorCode::Parse, "row 1: header needs an id column and at least two times");
    const std::size_t T = head.size() - 1;
    CurveTable tab;
    std::vector<double> times;
    try {
        for (std::size_t c = 1; c < head.size(); ++c) times.push_back(parse_double(head[c], 1, c + 1));
    } catch (const Error&) {
        times.clear();
    }
    if (!times.empty()) {
        tab.t_min = times.front();
        tab.t_max = times.back();
        const double span = tab.t_max - tab.t_min;
        require(span > 0.0, ErrorCode::Parse, "row 1: header times must increase");
        const double step = span / static_cast<double>(T - 1);
        for (std::size_t c = 0; c < T; ++c)
            require(std::abs(times[c] - (tab.t_min + step * static_cast<double>(c))) <= 1e-6 * span,
                    ErrorCode::Parse,
                    "row 1, column " + std::to_string(c + 2) + ": header times must be equally spaced");
    }
    const TimeGrid grid(T);
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        auto cells = split_csv(line);
        require(cells.size() == T + 1, ErrorCode::Parse,
                "row " + std::to_string(row) + ": expected " + std::to_string(T + 1) + " columns, found " +
                    std::to_string(cells.size()));
        std::vector<double> v(T);
        for (std::size_t c = 0; c < T; ++c) v[c] = parse_double(cells[c + 1], row, c + 2);
        if (normalize) {
            const double norm = std::sqrt(detail::trapezoid(
                [&] {
                    std::vector<double> sq(v);
                    for (auto& x : sq) x *= x;
                    return sq;
                }(),
                grid.step()));
            require(norm > 0.0, ErrorCode::Parse, "row " + std::to_string(row) + ": zero curve cannot be normalized");
            for (auto& x : v) x /= norm;
        }
        tab.ids.emplace_back(cells[0]);
        tab.curves.emplace_back(grid, std::move(v));
    }
    require(!tab.curves.empty(), ErrorCode::Parse, "no curves after the header");
    tab.normalized = normalize;
    return tab;
}

inline CurveTable read_curves(const std::string& path, bool normalize = false) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::Parse, "cannot open '" + path + "'");
    return read_curves(in, normalize);
}

inline void write_curves(std::ostream& out, std::span<const Curve> curves, std::span<const std::string> ids = {}) {
    require(!curves.empty(), ErrorCode::InvalidArgument, "no curves to write");
    const TimeGrid& g = curves[0].grid();
    out << "id";
    for (std::size_t k = 0; k < g.size(); ++k) out << ',' << fmt(g[k]);
    out << '\n';
    for (std::size_t i = 0; i < curves.size(); ++i) {
        out << (ids.empty() ? std::to_string(i) : ids[i]);
        for (double v : curves[i].values()) out << ',' << fmt(v);
        out << '\n';
    }
}

/// Band CSV: t, lower, upper, point, flags and optionally the truth.
/// Flags: "empty", "nonconvex" or "ok".
inline void write_band(std::ostream& out, const PredictionBand& b, std::span<const double> truth = {}) {
    out << "t,lower,upper,point,flags";
    if (!truth.empty()) out << ",truth";
    out << '\n';
    for (std::size_t k = 0; k < b.lower.size(); ++k) {
        out << fmt(b.grid[k]) << ',' << fmt(b.lower[k]) << ',' << fmt(b.upper[k]) << ',' << fmt(b.point(k)) << ','
            << (b.is_empty(k) ? "empty" : b.is_nonconvex(k) ? "nonconvex" : "ok");
        if (!truth.empty()) out << ',' << fmt(truth[k]);
        out << '\n';
    }
}

/// Warps CSV: one row per grid point, t then one column per warp.
inline void write_warps(std::ostream& out, std::span<const Warp> warps, std::span<const std::string> ids = {}) {
    require(!warps.empty(), ErrorCode::InvalidArgument, "no warps to write");
    out << 't';
    for (std::size_t i = 0; i < warps.size(); ++i) out << ',' << (ids.empty() ? std::to_string(i) : ids[i]);
    out << '\n';
    const TimeGrid& g = warps[0].grid();
    for (std::size_t k = 0; k < g.size(); ++k) {
        out << fmt(g[k]);
        for (auto& w : warps) out << ',' << fmt(w.values()[k]);
        out << '\n';
    }
}

inline constexpr std::string_view kReportSchema = "efcp.eval_report";
inline constexpr int kReportVersion = 1;

inline json to_json(const EvalReport& r) {
    json j;
    j["schema"] = kReportSchema;
    j["version"] = kReportVersion;
    j["procedure"] = to_string(r.procedure);
    j["alpha"] = r.alpha;
    j["B"] = r.B;
    j["n_errors"] = r.n_errors;
    j["errors"] = r.error_messages;
    j["t"] = r.t;
    j["p_k"] = r.p_k;
    j["ell_k"] = r.ell_k;
    j["ci_halfwidth_k"] = r.ci_halfwidths;
    j["p_bar"] = r.p_bar;
    j["ell_bar"] = r.ell_bar;
    j["p_overall"] = r.p_overall;
    return j;
}

/// Checks a report against the fixed schema. Returns the problems found.
inline std::vector<std::string> validate_report(const json& j) {
    std::vector<std::string> bad;
    auto need = [&](const char* key, auto pred, const char* what) {
        if (!j.contains(key) || !pred(j[key])) bad.push_back(std::string(key) + ": " + what);
    };
    if (!j.is_object()) return {"report is not an object"};
    need("schema", [](const json& v) { return v.is_string() && v.get<std::string>() == kReportSchema; },
         "must equal efcp.eval_report");
    need("version", [](const json& v) { return v.is_number_integer() && v.get<int>() == kReportVersion; },
         "must equal 1");
    need("procedure", [](const json& v) {
        return v.is_string() && (v == "ffcp" || v == "sfcp" || v == "sfcpp");
    }, "must be ffcp, sfcp or sfcpp");
    auto prob = [](const json& v) { return v.is_number() && v.get<double>() >= 0.0 && v.get<double>() <= 1.0; };
    auto nonneg = [](const json& v) { return v.is_number() && v.get<double>() >= 0.0; };
    auto count = [](const json& v) { return v.is_number_unsigned() || (v.is_number_integer() && v.get<long>() >= 0); };
    need("alpha", [](const json& v) { return v.is_number() && v.get<double>() > 0.0 && v.get<double>() < 1.0; },
         "must be in (0,1)");
    need("B", count, "must be a nonnegative integer");
    need("n_errors", count, "must be a nonnegative integer");
    need("errors", [](const json& v) {
        return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_string(); });
    }, "must be an array of strings");
    need("p_bar", prob, "must be in [0,1]");
    need("p_overall", prob, "must be in [0,1]");
    need("ell_bar", nonneg, "must be >= 0");
    std::size_t T = 0;
    for (const char* key : {"t", "p_k", "ell_k", "ci_halfwidth_k"}) {
        if (!j.contains(key) || !j[key].is_array() || j[key].empty() ||
            !std::all_of(j[key].begin(), j[key].end(), [](const json& e) { return e.is_number(); })) {
            bad.push_back(std::string(key) + ": must be a nonempty numeric array");
            continue;
        }
        if (T == 0) T = j[key].size();
        else if (j[key].size() != T) bad.push_back(std::string(key) + ": length differs from t");
    }
    if (j.contains("p_k") && j["p_k"].is_array())
        for (auto& v : j["p_k"])
            if (!prob(v)) {
                bad.push_back("p_k: entries must be in [0,1]");
                break;
            }
    if (j.contains("B") && j.contains("n_errors") && count(j["B"]) && count(j["n_errors"]) &&
        j["n_errors"].get<std::size_t>() > j["B"].get<std::size_t>())
        bad.push_back("n_errors: exceeds B");
    return bad;
}

inline EvalReport report_from_json(const json& j) {
    auto bad = validate_report(j);
    require(bad.empty(), ErrorCode::Parse, bad.empty() ? "" : "invalid report: " + bad.front());
    EvalReport r;
    r.procedure = parse_procedure(j["procedure"].get<std::string>());
    r.alpha = j["alpha"];
    r.B = j["B"];
    r.n_errors = j["n_errors"];
    r.error_messages = j["errors"].get<std::vector<std::string>>();
    r.t = j["t"].get<std::vector<double>>();
    r.p_k = j["p_k"].get<std::vector<double>>();
    r.ell_k = j["ell_k"].get<std::vector<double>>();
    r.ci_halfwidths = j["ci_halfwidth_k"].get<std::vector<double>>();
    r.p_bar = j["p_bar"];
    r.ell_bar = j["ell_bar"];
    r.p_overall = j["p_overall"];
    return r;
}

/// 64-bit FNV-1a, used for input checksums in manifests.
inline std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string file_checksum(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::Parse, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(ss.str())));
    return std::string("fnv1a64:") + buf;
}

/// Everything needed to repeat a run. Wall time is kept out of it so that
/// a repeated run reproduces the manifest too.
struct RunManifest {
    std::string command;
    json config;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> input_checksums;
    std::string version{kVersion};
    std::vector<std::string> outputs;
};

inline json to_json(const RunManifest& m) {
    json j;
    j["command"] = m.command;
    j["config"] = m.config;
    j["seed"] = m.seed;
    j["inputs"] = m.input_checksums;
    j["version"] = m.version;
    j["outputs"] = m.outputs;
    return j;
}

inline RunManifest manifest_from_json(const json& j) {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.config = j.at("config");
    m.seed = j.at("seed").get<std::uint64_t>();
    m.input_checksums = j.at("inputs").get<std::map<std::string, std::string>>();
    m.version = j.at("version").get<std::string>();
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    return m;
}

} // namespace io
} // namespace efcp
