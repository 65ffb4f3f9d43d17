#include <gtest/gtest.h>

#include "xlmimo/cli.hpp"
#include "xlmimo/csv_io.hpp"
#include "xlmimo/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>

using namespace xlmimo;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "xlmimo");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string scenario(const char* name) { return (fs::path(XLMIMO_SOURCE_DIR) / "scenarios" / name).string(); }
std::string sweep(const char* name) { return (fs::path(XLMIMO_SOURCE_DIR) / "sweeps" / name).string(); }

std::vector<std::string> data_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        if (header) {
            header = false;
            continue;
        }
        lines.push_back(line);
    }
    return lines;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("xlmimo_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string write(const std::string& name, const std::string& text) const {
        write_text_file(dir_ / name, text);
        return path(name);
    }

    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, HelpAndBadArguments) {
    EXPECT_EQ(run({"--help"}).code, kExitOk);
    EXPECT_EQ(run({}).code, kExitConfig);
    EXPECT_EQ(run({"frobnicate"}).code, kExitConfig);
    EXPECT_EQ(run({"synth", "--out", path("y.csv")}).code, kExitConfig);
    EXPECT_EQ(run({"bench", "--sweep", sweep("wideband_single.sweep"), "--out", path("b.csv"), "--threads", "0"}).code,
              kExitConfig);
}

TEST_F(CliTest, SynthWritesEveryElementAndMetadata) {
    const auto r = run({"synth", "--scenario", scenario("two_range_bins.scn"), "--out", path("y.csv")});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const auto text = read_text_file(path("y.csv"));
    EXPECT_EQ(text.substr(0, text.find('\n')), "m,n,re,im");
    EXPECT_EQ(data_lines(text).size(), 4096u);
    const auto meta = load_scenario(path("y.csv") + ".meta");
    EXPECT_EQ(meta.scenario.params.elements, 64);
    EXPECT_EQ(meta.scenario.targets.size(), 3u);
}

TEST_F(CliTest, BoresightWidebandFileEqualsNarrowband) {
    const auto scn = scenario("boresight.scn");
    ASSERT_EQ(run({"synth", "--scenario", scn, "--model", "wideband", "--out", path("wb.csv")}).code, kExitOk);
    ASSERT_EQ(run({"synth", "--scenario", scn, "--model", "narrowband", "--out", path("nb.csv")}).code, kExitOk);
    EXPECT_EQ(read_text_file(path("wb.csv")), read_text_file(path("nb.csv")));
}

TEST_F(CliTest, SynthIsDeterministicAndSeedOverrides) {
    const auto scn = scenario("noise_only.scn");
    ASSERT_EQ(run({"synth", "--scenario", scn, "--out", path("a.csv")}).code, kExitOk);
    ASSERT_EQ(run({"synth", "--scenario", scn, "--out", path("b.csv")}).code, kExitOk);
    ASSERT_EQ(run({"synth", "--scenario", scn, "--seed", "4242", "--out", path("c.csv")}).code, kExitOk);
    EXPECT_EQ(read_text_file(path("a.csv")), read_text_file(path("b.csv")));
    EXPECT_NE(read_text_file(path("a.csv")), read_text_file(path("c.csv")));
}

TEST_F(CliTest, MalformedKeyNamesKeyAndLine) {
    const auto scn = write("bad.scn", "[radar]\nM = 8\nN = 8\nwavelength = 3\n");
    const auto r = run({"synth", "--scenario", scn, "--out", path("y.csv")});
    EXPECT_EQ(r.code, kExitConfig);
    EXPECT_NE(r.err.find("wavelength"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find(":4"), std::string::npos) << r.err;
    EXPECT_FALSE(fs::exists(path("y.csv")));
}

TEST_F(CliTest, IoErrorsExitThree) {
    EXPECT_EQ(run({"synth", "--scenario", path("missing.scn"), "--out", path("y.csv")}).code, kExitIo);
    EXPECT_EQ(run({"synth", "--scenario", scenario("boresight.scn"), "--out", "/nonexistent/dir/y.csv"}).code, kExitIo);
    EXPECT_EQ(run({"estimate", "--matrix", path("missing.csv"), "--out", path("s.csv")}).code, kExitIo);
    EXPECT_EQ(run({"bench", "--sweep", path("missing.sweep"), "--out", path("b.csv")}).code, kExitIo);
}

TEST_F(CliTest, EnvironmentOverridesApply) {
    ::setenv("XLMIMO_RADAR_M", "16", 1);
    const auto r = run({"synth", "--scenario", scenario("boresight.scn"), "--out", path("y.csv")});
    ::unsetenv("XLMIMO_RADAR_M");
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_EQ(data_lines(read_text_file(path("y.csv"))).size(), 16u * 32u);

    ::setenv("XLMIMO_RADAR_SHAPE", "round", 1);
    const auto bad = run({"synth", "--scenario", scenario("boresight.scn"), "--out", path("z.csv")});
    ::unsetenv("XLMIMO_RADAR_SHAPE");
    EXPECT_EQ(bad.code, kExitConfig);
    EXPECT_NE(bad.err.find("XLMIMO_RADAR_SHAPE"), std::string::npos);
}

TEST_F(CliTest, MapHasAxisHeaderAndSinglePeak) {
    const auto scn =
        write("one.scn", "[radar]\nM = 32\nN = 32\nalpha = 0\n[target]\nomega_theta = 0.25\nomega_r = 0.5\n");
    const auto r = run({"map", "--scenario", scn, "--view", "range_angle", "--out", path("map.csv")});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const auto text = read_text_file(path("map.csv"));
    EXPECT_NE(text.find("# row_axis="), std::string::npos);
    EXPECT_NE(text.find("# col_axis="), std::string::npos);
    EXPECT_NE(text.find("clusters=1"), std::string::npos);
    const auto rows = data_lines(text);
    ASSERT_EQ(rows.size(), 1024u);
    double peak = 0.0;
    std::vector<double> mags;
    for (const auto& line : rows) {
        mags.push_back(*parse_number(line.substr(line.rfind(',') + 1)));
        peak = std::max(peak, mags.back());
    }
    EXPECT_EQ(std::count_if(mags.begin(), mags.end(), [&](double m) { return m >= 0.99 * peak; }), 1);
}

TEST_F(CliTest, MapClusterCountsForPhysicalScenes) {
    ASSERT_EQ(run({"map", "--scenario", scenario("physical_separated.scn"), "--out", path("a.csv")}).code, kExitOk);
    ASSERT_EQ(run({"map", "--scenario", scenario("physical_overlap.scn"), "--out", path("b.csv")}).code, kExitOk);
    EXPECT_NE(read_text_file(path("a.csv")).find("clusters=3"), std::string::npos);
    EXPECT_NE(read_text_file(path("b.csv")).find("clusters=2"), std::string::npos);
}

TEST_F(CliTest, MatrixRoundTripReproducesMapAndEstimate) {
    const auto scn = scenario("two_range_bins.scn");
    ASSERT_EQ(run({"synth", "--scenario", scn, "--out", path("y.csv")}).code, kExitOk);
    for (const char* view : {"range_angle", "angle_time", "range_antenna"}) {
        ASSERT_EQ(run({"map", "--scenario", scn, "--view", view, "--out", path("direct.csv")}).code, kExitOk);
        ASSERT_EQ(run({"map", "--matrix", path("y.csv"), "--view", view, "--out", path("via.csv")}).code, kExitOk);
        EXPECT_EQ(data_lines(read_text_file(path("direct.csv"))), data_lines(read_text_file(path("via.csv")))) << view;
    }
    ASSERT_EQ(run({"estimate", "--scenario", scn, "--out", path("e1.csv")}).code, kExitOk);
    ASSERT_EQ(run({"estimate", "--matrix", path("y.csv"), "--out", path("e2.csv")}).code, kExitOk);
    EXPECT_EQ(read_text_file(path("e1.csv")), read_text_file(path("e2.csv")));

    const auto file = load_scenario(scn);
    EXPECT_EQ(parse_matrix_csv(read_text_file(path("y.csv"))), synthesize_scenario(file).data);
}

TEST_F(CliTest, MatrixDimensionsMustMatchScenario) {
    ASSERT_EQ(run({"synth", "--scenario", scenario("boresight.scn"), "--out", path("y.csv")}).code, kExitOk);
    const auto r = run({"estimate", "--matrix", path("y.csv"), "--scenario", scenario("two_range_bins.scn"), "--out",
                        path("s.csv")});
    EXPECT_EQ(r.code, kExitConfig);
}

TEST_F(CliTest, EstimateWidebandScenario) {
    const auto r = run({"estimate", "--scenario", scenario("wideband_three.scn"), "--method", "decoupled", "--out",
                        path("s.csv"), "--timing"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const auto text = read_text_file(path("s.csv"));
    EXPECT_EQ(text.substr(0, text.find('\n')), "group_id,omega_theta,omega_r,amp_re,amp_im");
    EXPECT_EQ(data_lines(text).size(), 3u);
    const auto report = read_text_file(path("s.csv") + ".report.json");
    EXPECT_NE(report.find("\"matched\": 3"), std::string::npos) << report;
    EXPECT_NE(report.find("\"timing_ms\""), std::string::npos);
}

TEST_F(CliTest, EstimateReportIsDeterministicWithoutTiming) {
    const auto scn = scenario("two_range_bins.scn");
    ASSERT_EQ(run({"estimate", "--scenario", scn, "--out", path("a.csv")}).code, kExitOk);
    ASSERT_EQ(run({"estimate", "--scenario", scn, "--out", path("b.csv")}).code, kExitOk);
    EXPECT_EQ(read_text_file(path("a.csv.report.json")), read_text_file(path("b.csv.report.json")));
    EXPECT_EQ(read_text_file(path("a.csv.report.json")).find("timing_ms"), std::string::npos);
}

TEST_F(CliTest, BaselineOnOverlapGivesTwoRows) {
    const auto r = run({"estimate", "--scenario", scenario("physical_overlap.scn"), "--method", "baseline", "--out",
                        path("s.csv")});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_EQ(data_lines(read_text_file(path("s.csv"))).size(), 2u);
}

TEST_F(CliTest, EmptySceneGivesNoRowsAndSucceeds) {
    const auto r = run({"estimate", "--scenario", scenario("noise_only.scn"), "--out", path("s.csv")});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_TRUE(data_lines(read_text_file(path("s.csv"))).empty());
}

TEST_F(CliTest, BenchSinglePoint) {
    const auto r = run({"bench", "--sweep", sweep("wideband_single.sweep"), "--out", path("b.csv")});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const auto text = read_text_file(path("b.csv"));
    EXPECT_EQ(text.substr(0, text.find('\n')),
              "axis_value,trial,detections,misses,false_alarms,rmse_theta,rmse_r,runtime_ms");
    const auto rows = data_lines(text);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].substr(0, 10), "0,0,3,0,0,");
}

TEST_F(CliTest, BenchNoiselessTrialsAgree) {
    ASSERT_EQ(run({"bench", "--sweep", sweep("wideband_noiseless.sweep"), "--out", path("b.csv")}).code, kExitOk);
    const auto rows = data_lines(read_text_file(path("b.csv")));
    ASSERT_EQ(rows.size(), 5u);
    auto strip_trial = [](const std::string& row) {
        const auto a = row.find(',');
        const auto b = row.find(',', a + 1);
        return row.substr(0, a) + row.substr(b);
    };
    for (const auto& row : rows) EXPECT_EQ(strip_trial(row), strip_trial(rows[0]));
}

TEST_F(CliTest, BenchBaselineLosesTargetAsSpreadGrows) {
    ASSERT_EQ(run({"bench", "--sweep", sweep("overlap_alpha.sweep"), "--out", path("b.csv")}).code, kExitOk);
    const auto rows = data_lines(read_text_file(path("b.csv")));
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].substr(0, 6), "0,0,3,");
    EXPECT_EQ(rows[1].substr(0, 8), "0.2,0,2,");
}

TEST_F(CliTest, BenchIsIndependentOfThreadCount) {
    const auto sw = sweep("wideband_sigma.sweep");
    ASSERT_EQ(run({"bench", "--sweep", sw, "--threads", "1", "--out", path("a.csv")}).code, kExitOk);
    ASSERT_EQ(run({"bench", "--sweep", sw, "--threads", "4", "--out", path("b.csv")}).code, kExitOk);
    ASSERT_EQ(run({"bench", "--sweep", sw, "--threads", "4", "--seed", "9", "--out", path("c.csv")}).code, kExitOk);
    EXPECT_EQ(read_text_file(path("a.csv")), read_text_file(path("b.csv")));
    EXPECT_NE(read_text_file(path("a.csv")), read_text_file(path("c.csv")));
}

TEST_F(CliTest, InvalidSweepIsConfigError) {
    const auto base = scenario("boresight.scn");
    const auto bad_axis = write("a.sweep", "[sweep]\nbase = " + base + "\naxis = colour\nvalues = 1\n");
    EXPECT_EQ(run({"bench", "--sweep", bad_axis, "--out", path("b.csv")}).code, kExitConfig);
    const auto bad_values = write("b.sweep", "[sweep]\nbase = " + base + "\naxis = sigma\nvalues = 0, x\n");
    EXPECT_EQ(run({"bench", "--sweep", bad_values, "--out", path("b.csv")}).code, kExitConfig);
    const auto bad_point = write("c.sweep", "[sweep]\nbase = " + base + "\naxis = alpha\nvalues = 0.1, 2\n");
    EXPECT_EQ(run({"bench", "--sweep", bad_point, "--out", path("b.csv")}).code, kExitConfig);
}
