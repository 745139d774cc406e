#include "helpers.hpp"

#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using namespace efcp;

namespace {

int run(const std::string& args) {
    std::string cmd = std::string(EFCP_CLI) + " " + args + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_rows(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

double mean_band_length(const fs::path& p) {
    auto rows = read_rows(p);
    double s = 0.0;
    for (std::size_t r = 1; r < rows.size(); ++r) s += std::stod(rows[r][2]) - std::stod(rows[r][1]);
    return s / static_cast<double>(rows.size() - 1);
}

class Cli : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        root_ = new fs::path(fs::temp_directory_path() / ("efcp_cli_" + std::to_string(::getpid())));
        fs::create_directories(*root_);
        ASSERT_EQ(run("simulate --population homogeneous --phase --n 41 --T 100 --seed 7 --out " +
                      (*root_ / "sim").string()),
                  0);
    }
    static void TearDownTestSuite() {
        fs::remove_all(*root_);
        delete root_;
    }
    static fs::path dir(const std::string& name) { return *root_ / name; }
    static std::string curves() { return (*root_ / "sim" / "curves.csv").string(); }
    static fs::path* root_;
};
fs::path* Cli::root_ = nullptr;

} // namespace

TEST_F(Cli, SimulateShapeAndDeterminism) {
    ASSERT_EQ(run("simulate --population homogeneous --phase --n 100 --T 100 --seed 7 --out " + dir("a").string()), 0);
    ASSERT_EQ(run("simulate --population homogeneous --phase --n 100 --T 100 --seed 7 --out " + dir("b").string()), 0);
    auto rows = read_rows(dir("a") / "curves.csv");
    ASSERT_EQ(rows.size(), 101u);
    for (auto& r : rows) EXPECT_EQ(r.size(), 101u);
    EXPECT_EQ(slurp(dir("a") / "curves.csv"), slurp(dir("b") / "curves.csv"));
    EXPECT_EQ(slurp(dir("a") / "manifest.json"), slurp(dir("b") / "manifest.json"));
    EXPECT_TRUE(fs::exists(dir("a") / "warps.csv"));
    EXPECT_TRUE(fs::exists(dir("a") / "timing.json"));
}

TEST_F(Cli, SimulateNoiseSd) {
    ASSERT_EQ(run("simulate --n 2000 --T 50 --noise-sd 0.1 --seed 3 --out " + dir("noise").string()), 0);
    auto noisy = io::read_curves((dir("noise") / "curves.csv").string());
    auto clean = io::read_curves((dir("noise") / "clean.csv").string());
    double ss = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < noisy.curves.size(); ++i)
        for (std::size_t k = 0; k < 50; ++k) {
            double e = noisy.curves[i][k] - clean.curves[i][k];
            ss += e * e;
            ++n;
        }
    EXPECT_NEAR(std::sqrt(ss / static_cast<double>(n)), 0.1, 2e-3);
}

TEST_F(Cli, UsageErrors) {
    EXPECT_EQ(run("simulate --n 1 --out " + dir("x").string()), 2);
    EXPECT_EQ(run("simulate --population nope --out " + dir("x").string()), 2);
    EXPECT_EQ(run("frobnicate"), 2);
    EXPECT_EQ(run("predict --curves " + curves() + " --out " + dir("x").string()), 2); // no pattern
    EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, MalformedCsvIsDataError) {
    fs::create_directories(dir("bad"));
    {
        std::ofstream out(dir("bad") / "c.csv");
        out << "id,0,0.5,1\na,1,2,3\nb,1,2,3\nc,1,x,3\n";
    }
    EXPECT_EQ(run("predict --u 0.5 --curves " + (dir("bad") / "c.csv").string() + " --out " + dir("bad").string()), 3);
}

TEST_F(Cli, PredictSfcpShapeAndFfcpIsWider) {
    ASSERT_EQ(run("predict --proc sfcp --alpha 0.1 --u 0.5 --metric l2 --tune local --curves " + curves() +
                  " --out " + dir("sfcp").string()),
              0);
    auto rows = read_rows(dir("sfcp") / "band.csv");
    ASSERT_EQ(rows.size(), 101u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"t", "lower", "upper", "point", "flags", "truth"}));
    ASSERT_EQ(run("predict --proc ffcp --alpha 0.1 --u 0.5 --metric l2 --tune local --curves " + curves() +
                  " --out " + dir("ffcp").string()),
              0);
    EXPECT_GE(mean_band_length(dir("ffcp") / "band.csv"), mean_band_length(dir("sfcp") / "band.csv"));
}

TEST_F(Cli, PredictSfcppFivePointEnvelope) {
    ASSERT_EQ(run("predict --proc sfcpp --coarse-T 5 --u 0.5 --curves " + curves() + " --out " + dir("pp").string()), 0);
    auto rows = read_rows(dir("pp") / "band.csv");
    ASSERT_EQ(rows.size(), 6u);
    for (std::size_t r = 2; r < rows.size(); ++r) {
        EXPECT_GE(std::stod(rows[r][1]), std::stod(rows[r - 1][1]));
        EXPECT_GE(std::stod(rows[r][2]), std::stod(rows[r - 1][2]));
    }
}

TEST_F(Cli, PredictFragmentsAndSparse) {
    EXPECT_EQ(run("predict --proc ffcp --fragments 0 0.2 0.4 0.6 0.8 1 --curves " + curves() + " --out " +
                  dir("frag").string()),
              0);
    EXPECT_EQ(run("predict --proc ffcp --sparse 0 0.1 0.2 0.3 0.4 0.5 --curves " + curves() + " --out " +
                  dir("sparse").string()),
              0);
    EXPECT_EQ(run("predict --proc ffcp --metric amplitude --sparse 0 0.5 --curves " + curves() + " --out " +
                  dir("sparse2").string()),
              3);
}

TEST_F(Cli, ThreadCountDoesNotChangeBytes) {
    const std::string args = "predict --proc sfcp --u 0.5 --seed 4 --curves " + curves();
    ASSERT_EQ(run(args + " --threads 1 --out " + dir("t1").string()), 0);
    ASSERT_EQ(run(args + " --threads 4 --out " + dir("t4").string()), 0);
    for (auto f : {"band.csv", "template.csv", "manifest.json"})
        EXPECT_EQ(slurp(dir("t1") / f), slurp(dir("t4") / f)) << f;
}

TEST_F(Cli, ManifestReproducesRun) {
    ASSERT_EQ(run("predict --proc ffcp --u 0.4 --alpha 0.2 --seed 9 --curves " + curves() + " --out " +
                  dir("m1").string()),
              0);
    ASSERT_EQ(run("predict --config " + (dir("m1") / "manifest.json").string() + " --out " + dir("m2").string()), 0);
    EXPECT_EQ(slurp(dir("m1") / "band.csv"), slurp(dir("m2") / "band.csv"));
    EXPECT_EQ(slurp(dir("m1") / "manifest.json"), slurp(dir("m2") / "manifest.json"));
}

TEST_F(Cli, ConfigFileWithFlagOverride) {
    fs::create_directories(dir("cfg"));
    {
        std::ofstream out(dir("cfg") / "c.json");
        out << R"({"proc": "ffcp", "u": 0.5, "alpha": 0.3, "curves": ")" << curves() << "\"}";
    }
    ASSERT_EQ(run("predict --config " + (dir("cfg") / "c.json").string() + " --alpha 0.1 --out " + dir("cfg").string()),
              0);
    auto m = io::json::parse(slurp(dir("cfg") / "manifest.json"));
    EXPECT_EQ(m["config"]["alpha"], "0.1");
    EXPECT_EQ(m["config"]["proc"], "ffcp");
}

TEST_F(Cli, EvaluateSingleReplicateValidates) {
    ASSERT_EQ(run("evaluate --proc ffcp --B 1 --n 20 --T 30 --u 0.5 --out " + dir("ev").string()), 0);
    auto j = io::json::parse(slurp(dir("ev") / "report.json"));
    EXPECT_TRUE(io::validate_report(j).empty());
    EXPECT_EQ(j["B"], 1);
}

TEST_F(Cli, EvaluateBytesIndependentOfThreads) {
    const std::string args = "evaluate --proc sfcp --phase --B 4 --n 30 --T 40 --u 0.25 0.75 --seed 5";
    ASSERT_EQ(run(args + " --threads 1 --out " + dir("e1").string()), 0);
    ASSERT_EQ(::setenv("EFCP_THREADS", "3", 1), 0);
    ASSERT_EQ(run(args + " --out " + dir("e3").string()), 0);
    ::unsetenv("EFCP_THREADS");
    for (auto f : {"report_0.json", "report_1.json", "manifest.json"})
        EXPECT_EQ(slurp(dir("e1") / f), slurp(dir("e3") / f)) << f;
}

TEST_F(Cli, RegisterSingleCurveAndVarianceDrop) {
    fs::create_directories(dir("one"));
    {
        auto tab = io::read_curves(curves());
        std::ofstream out(dir("one") / "c.csv");
        io::write_curves(out, std::span(tab.curves.data(), 1));
    }
    ASSERT_EQ(run("register --curves " + (dir("one") / "c.csv").string() + " --out " + dir("one").string()), 0);
    auto in = io::read_curves((dir("one") / "c.csv").string());
    auto templ = io::read_curves((dir("one") / "template.csv").string());
    EXPECT_LT(test::linf(in.curves[0].values(), templ.curves[0].values()), 1e-2);

    ASSERT_EQ(run("register --curves " + curves() + " --out " + dir("reg").string()), 0);
    auto orig = io::read_curves(curves());
    auto aligned = io::read_curves((dir("reg") / "aligned.csv").string());
    EXPECT_LT(test::mean_variance(aligned.curves), test::mean_variance(orig.curves));
    auto trace = read_rows(dir("reg") / "trace.csv");
    for (std::size_t r = 2; r < trace.size(); ++r) EXPECT_LE(std::stod(trace[r][1]), std::stod(trace[r - 1][1]));
}
