#include "duc/fit.hpp"
#include "duc/qubit.hpp"
#include "duc/touchstone.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

using namespace duc;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(DUC_BINARY) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    std::string out;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof(buf), p)) out.append(buf, n);
    const int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "duc_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

const std::string kConfigs = std::string(DUC_SOURCE_DIR) + "/configs/";

} // namespace

TEST(Cli, PlanBenchmark) {
    const auto r = run("plan --target-hz 5.026e9 --if-hz 450e6");
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j.at("f_lo1_hz").get<double>(), 3.35e9);
    EXPECT_EQ(j.at("f_lo2_hz").get<double>(), 7.926e9);
}

TEST(Cli, PlanAcceptsSiStringsAndConfig) {
    EXPECT_EQ(run("plan --target-hz 5.026GHz --if-hz 450MHz").code, 0);
    const auto r = run("plan --config " + kConfigs + "bench.json --target-hz 6GHz");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(nlohmann::json::parse(r.out).at("f_lo2_hz").get<double>(), 8.9e9);
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run("plan --target-hz 3e9 --if-hz 450e6").code, 2);          // outside stage-2 passband
    EXPECT_EQ(run("plan --if-hz 450e6").code, 1);                          // no target
    EXPECT_EQ(run("plan --target-hz 5e9 --if-hz 450e6 --bogus").code, 1);  // unknown flag
    EXPECT_EQ(run("plan --target-hz 5e9 --if-hz 4.5furlongs").code, 1);
    EXPECT_EQ(run("synth-filter --f-low-hz 4.5e9 --f-high-hz 8e9").code, 5);
    EXPECT_EQ(run("analyze-s2p /nonexistent/file.s2p").code, 4);
    EXPECT_EQ(run("").code, 1);
}

TEST(Cli, BatchKeepsInputOrder) {
    const auto path = scratch("targets.txt");
    std::vector<double> targets;
    {
        std::ofstream f(path);
        for (int i = 0; i < 100; ++i) {
            targets.push_back(7e9 - i * 25e6);
            f << targets.back() << "\n";
        }
    }
    const auto r = run("plan --batch " + path.string() + " --if-hz 450e6");
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    ASSERT_EQ(j.size(), 100u);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(j[i].at("output_hz").get<double>(), targets[i]);
}

TEST(Cli, SimulateStageOneContainsDesiredTone) {
    const auto r = run("simulate --config " + kConfigs + "bench.json --stage 1");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out.rfind("frequency_hz,power_dbm,label\n", 0), 0u);
    EXPECT_NE(r.out.find("\n2.9e+09,"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("\n3.8e+09,"), std::string::npos);
}

TEST(Cli, SimulateOutDirWritesEveryStage) {
    const fs::path dir = scratch("stages");
    fs::remove_all(dir);
    ASSERT_EQ(run("simulate --preset bench --out-dir " + dir.string()).code, 0);
    int csv = 0;
    for (const auto& e : fs::directory_iterator(dir)) csv += e.path().extension() == ".csv";
    EXPECT_EQ(csv, 5);
}

TEST(Cli, SweepCsv) {
    const auto r = run("sweep-dbc --preset bench --start-hz 4.5e9 --stop-hz 5e9 --step-hz 100e6");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out.rfind("target_hz,dbc_db,lo2_hz\n", 0), 0u);
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 7);
}

TEST(Cli, SynthAndAnalyze) {
    const auto geo = scratch("geo.json");
    ASSERT_EQ(run("synth-filter --f-low-hz 5.5e9 --f-high-hz 6.5e9 --out " + geo.string()).code, 0);
    const auto j = nlohmann::json::parse(std::ifstream(geo));
    EXPECT_EQ(j.at("sections").size(), 6u);
    const auto r = run("analyze-geometry " + geo.string() + " --start-hz 4e9 --stop-hz 8e9 --points 81");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out.rfind("frequency_hz,s21_db\n", 0), 0u);
    EXPECT_EQ(run("analyze-geometry --reference parallel").code, 0);
}

TEST(Cli, AnalyzeS2pMetrics) {
    TabulatedResponse t;
    t.points = {{2.0e9, -80.0}, {2.799e9, -80.0}, {2.8e9, -8.0}, {3.0e9, -8.0}, {3.001e9, -80.0}, {4e9, -80.0}};
    const auto path = scratch("flat.s2p");
    std::ofstream(path) << write_touchstone(t);
    const auto r = run("analyze-s2p " + path.string());
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_NEAR(j.at("f_low_hz").get<double>(), 2.8e9, 1e6);
    EXPECT_NEAR(j.at("f_high_hz").get<double>(), 3.0e9, 1e6);
    EXPECT_NEAR(j.at("mean_il_db").get<double>(), 8.0, 1e-9);

    TabulatedResponse mono{{{1e9, 0.0}, {2e9, -10.0}, {3e9, -20.0}}};
    std::ofstream(path) << write_touchstone(mono);
    EXPECT_EQ(run("analyze-s2p " + path.string()).code, 6);
}

TEST(Cli, RabiFitMatchesLibrary) {
    const auto fit_path = scratch("rabi_fit.json");
    const auto r = run("qubit rabi --amp-max 0.2 --points 101 --fit-out " + fit_path.string());
    ASSERT_EQ(r.code, 0);
    std::vector<double> amps;
    for (int i = 0; i < 101; ++i) amps.push_back(0.2 * i / 100);
    const auto lib = fit_sinusoid(amps, rabi_sweep(QubitSpec{}, amps));
    const auto j = nlohmann::json::parse(std::ifstream(fit_path));
    EXPECT_NEAR(j.at("parameters").at("frequency").get<double>(), lib["frequency"], 1e-9 * lib["frequency"]);
    EXPECT_TRUE(j.at("converged").get<bool>());
}

TEST(Cli, OutputIsReproducible) {
    for (const char* args : {"qubit ramsey --noise-sigma 0.02 --seed 7", "sweep-dbc --preset bench",
                             "qubit spectroscopy --preset bench --t1-s 20e-6 --t2-s 10e-6 --points 41"}) {
        const auto a = run(args), b = run(args);
        EXPECT_EQ(a.code, 0) << args;
        EXPECT_EQ(a.out, b.out) << args;
        EXPECT_FALSE(a.out.empty());
    }
    EXPECT_NE(run("qubit ramsey --noise-sigma 0.02 --seed 7").out, run("qubit ramsey --noise-sigma 0.02 --seed 8").out);
}

TEST(Cli, CalibrateReportsShippedValues) {
    const auto r = run("calibrate");
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    ASSERT_EQ(j.size(), 4u);
    for (const auto& [name, v] : j.items()) EXPECT_EQ(v.at("calibrated"), v.at("shipped")) << name;
}
