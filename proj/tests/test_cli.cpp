#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "egohand/cli.hpp"

using namespace egohand;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("egohand_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    void simulate(const std::string& sub, std::vector<std::string> extra = {}) {
        std::vector<std::string> args{"simulate", "--seed", "42", "--out", path(sub)};
        args.insert(args.end(), extra.begin(), extra.end());
        const Result r = run(args);
        ASSERT_EQ(r.code, 0) << r.err;
    }

    static nlohmann::json metrics_json(const std::string& pred, const std::string& gt) {
        const Result r = run({"metrics", "--pred", pred, "--gt", gt, "--json", "-"});
        EXPECT_EQ(r.code, 0) << r.err;
        const auto nl = r.out.rfind('\n', r.out.size() - 2);
        return nlohmann::json::parse(r.out.substr(nl + 1));
    }

    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, MetricsOnIdenticalFilesIsZero) {
    simulate("s", {"--frames", "20"});
    const Result r = run({"metrics", "--pred", path("s/gt.jsonl"), "--gt", path("s/gt.jsonl"), "--pa"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("MPJPE: 0.000 mm"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("PA-MPJPE: 0.000 mm"), std::string::npos) << r.out;
}

TEST_F(CliTest, UnknownFlagIsUsageError) {
    const Result r = run({"metrics", "--bogus"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("Usage"), std::string::npos) << r.err;
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"nonsense"}).code, 2);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, InvalidFlagValuesAreUsageErrors) {
    simulate("s", {"--frames", "20"});
    const auto pred = path("s/pred.jsonl"), cams = path("s/cameras.json"), out = path("f.jsonl");
    EXPECT_EQ(run({"fuse", "--pred", pred, "--cameras", cams, "--out", out, "--window", "4"}).code, 2);
    EXPECT_EQ(run({"fuse", "--pred", pred, "--cameras", cams, "--out", out, "--threshold", "-3"}).code, 2);
    EXPECT_EQ(run({"fuse", "--pred", pred, "--cameras", cams, "--out", out, "--threshold", "abc"}).code, 2);
    EXPECT_EQ(run({"simulate", "--views", "0", "--out", path("z")}).code, 2);
    EXPECT_EQ(run({"warp", "--camera", cams, "--bbox", "1,2,3"}).code, 2);
    EXPECT_EQ(run({"ensemble", "--runs", pred, "--out", out, "--weights", "0.9", "0.9"}).code, 2);
}

TEST_F(CliTest, IoAndDataErrorCodes) {
    EXPECT_EQ(run({"metrics", "--pred", path("missing.jsonl"), "--gt", path("missing.jsonl")}).code, 3);
    std::ofstream(path("bad.jsonl")) << "{\"video_id\":\n";
    const Result r = run({"metrics", "--pred", path("bad.jsonl"), "--gt", path("bad.jsonl")});
    EXPECT_EQ(r.code, 4);
    EXPECT_NE(r.err.find("line 1"), std::string::npos) << r.err;

    EXPECT_EQ(cli::exit_code_for(ErrorCode::NonPositiveDepth), 5);
    EXPECT_EQ(cli::exit_code_for(ErrorCode::NoConvergence), 5);
    EXPECT_EQ(cli::exit_code_for(ErrorCode::OutOfModelRange), 5);
    EXPECT_EQ(cli::exit_code_for(ErrorCode::Io), 3);
    EXPECT_EQ(cli::exit_code_for(ErrorCode::FrameMismatch), 4);
}

TEST_F(CliTest, MetricsNeedsOneRecordPerFrame) {
    simulate("s", {"--frames", "10"});
    const Result r = run({"metrics", "--pred", path("s/pred.jsonl"), "--gt", path("s/gt.jsonl")});
    EXPECT_EQ(r.code, 4);
    EXPECT_NE(r.err.find("--view"), std::string::npos) << r.err;
    // one view per frame passes the grouping but camera-frame joints are not comparable to world ground truth
    const Result v = run({"metrics", "--pred", path("s/pred.jsonl"), "--gt", path("s/gt.jsonl"), "--view", "cam2"});
    EXPECT_EQ(v.code, 4);
    EXPECT_NE(v.err.find("FrameMismatch"), std::string::npos) << v.err;
}

TEST_F(CliTest, FuseThenMetricsReproducesBenchmark) {
    simulate("s");
    const Result f = run({"fuse", "--pred", path("s/pred.jsonl"), "--cameras", path("s/cameras.json"), "--out",
                          path("fused.jsonl")});
    ASSERT_EQ(f.code, 0) << f.err;
    EXPECT_NE(f.out.find("mean_of_pair=300"), std::string::npos) << f.out;
    const double fused = metrics_json(path("fused.jsonl"), path("s/gt.jsonl"))["mpjpe_mm"].get<double>();

    const auto rep = run_benchmark(default_scenario(42));
    EXPECT_EQ(fused, rep.merged_smoothed_mm);

    const Result b = run({"benchmark", "--seed", "42"});
    ASSERT_EQ(b.code, 0);
    EXPECT_EQ(b.out, rep.to_text());

    // unsmoothed fuse reproduces row b
    ASSERT_EQ(run({"fuse", "--pred", path("s/pred.jsonl"), "--cameras", path("s/cameras.json"), "--out",
                   path("merged.jsonl"), "--no-smooth"})
                  .code,
              0);
    EXPECT_EQ(metrics_json(path("merged.jsonl"), path("s/gt.jsonl"))["mpjpe_mm"].get<double>(), rep.merged_mm);
}

TEST_F(CliTest, FuseLiftsRawRecords) {
    simulate("s", {"--frames", "40", "--raw"});
    // Strip the precomputed joints so fusion has to lift from the 2.5D fields.
    std::ifstream in(path("s/pred.jsonl"));
    std::ofstream raw_only(path("raw.jsonl"));
    std::string line;
    while (std::getline(in, line)) {
        auto j = nlohmann::ordered_json::parse(line);
        j.erase("joints");
        raw_only << j.dump() << "\n";
    }
    raw_only.close();
    ASSERT_EQ(run({"fuse", "--pred", path("s/pred.jsonl"), "--cameras", path("s/cameras.json"), "--out", path("a.jsonl")}).code, 0);
    ASSERT_EQ(run({"fuse", "--pred", path("raw.jsonl"), "--cameras", path("s/cameras.json"), "--out", path("b.jsonl")}).code, 0);
    const double a = metrics_json(path("a.jsonl"), path("s/gt.jsonl"))["mpjpe_mm"].get<double>();
    const double b = metrics_json(path("b.jsonl"), path("s/gt.jsonl"))["mpjpe_mm"].get<double>();
    EXPECT_NEAR(a, b, 1e-9);
    EXPECT_GT(a, 0.0);
}

TEST_F(CliTest, FuseWritesDecisionLogAndFillsGaps) {
    simulate("s", {"--frames", "30"});
    // drop every record of frames 10 and 11
    std::ifstream in(path("s/pred.jsonl"));
    std::ofstream gappy(path("gappy.jsonl"));
    std::string line;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        const auto f = j["frame_id"].get<int>();
        if (f != 10 && f != 11) gappy << line << "\n";
    }
    gappy.close();
    const Result r = run({"fuse", "--pred", path("gappy.jsonl"), "--cameras", path("s/cameras.json"), "--out",
                          path("f.jsonl"), "--decisions", path("d.jsonl")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("missing=2"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("interpolated=2"), std::string::npos) << r.out;
    std::ifstream log(path("d.jsonl"));
    int n = 0;
    while (std::getline(log, line)) {
        const auto j = nlohmann::json::parse(line);
        EXPECT_EQ(j["frame_id"].get<int>(), n);
        EXPECT_EQ(j["interpolated"].get<bool>(), n == 10 || n == 11);
        ++n;
    }
    EXPECT_EQ(n, 30);
    const auto fused = read_predictions_file(path("f.jsonl"));
    ASSERT_EQ(fused.size(), 30u);
    EXPECT_EQ(fused[10].view_id, "fused");
    EXPECT_EQ(fused[10].frame, FrameKind::World);
}

TEST_F(CliTest, SimulateIsDeterministic) {
    simulate("a", {"--frames", "25"});
    simulate("b", {"--frames", "25"});
    for (const char* f : {"gt.jsonl", "pred.jsonl", "cameras.json"}) {
        std::ifstream x(path(std::string("a/") + f)), y(path(std::string("b/") + f));
        std::stringstream sx, sy;
        sx << x.rdbuf();
        sy << y.rdbuf();
        EXPECT_EQ(sx.str(), sy.str()) << f;
        EXPECT_FALSE(sx.str().empty());
    }
    EXPECT_EQ(read_predictions_file(path("a/pred.jsonl")).size(), 100u);
    EXPECT_EQ(read_camera_file(path("a/cameras.json")).cameras.size(), 4u);
}

TEST_F(CliTest, SmoothAndEnsemble) {
    simulate("s", {"--frames", "40"});
    ASSERT_EQ(run({"fuse", "--pred", path("s/pred.jsonl"), "--cameras", path("s/cameras.json"), "--out", path("m.jsonl"),
                   "--no-smooth"})
                  .code,
              0);
    const Result s = run({"smooth", "--pred", path("m.jsonl"), "--out", path("sm.jsonl"), "--window", "7", "--order", "2"});
    ASSERT_EQ(s.code, 0) << s.err;
    const auto merged = read_predictions_file(path("m.jsonl"));
    Sequence seq;
    for (const auto& r : merged) seq.push_back(r.skeleton());
    const Sequence want = smooth_skeleton_sequence(seq, SavGolParams(7, 2));
    const auto smoothed = read_predictions_file(path("sm.jsonl"));
    ASSERT_EQ(smoothed.size(), want.size());
    for (std::size_t f = 0; f < want.size(); ++f) ASSERT_EQ(smoothed[f].skeleton().joints, want[f].joints);

    // a run ensembled with itself is unchanged
    const Result e = run({"ensemble", "--runs", path("sm.jsonl"), path("sm.jsonl"), "--secondary", path("sm.jsonl"),
                          "--out", path("e.jsonl")});
    ASSERT_EQ(e.code, 0) << e.err;
    const auto ens = read_predictions_file(path("e.jsonl"));
    for (std::size_t f = 0; f < ens.size(); ++f) ASSERT_EQ(ens[f].skeleton().joints, smoothed[f].skeleton().joints);

    // runs that cover different frames are rejected
    auto shorter = merged;
    shorter.pop_back();
    write_predictions_file(path("short.jsonl"), shorter);
    EXPECT_EQ(run({"ensemble", "--runs", path("m.jsonl"), "--secondary", path("short.jsonl"), "--out", path("x.jsonl")}).code, 4);
}

TEST_F(CliTest, WarpPrintsRotationAndHomography) {
    simulate("s", {"--frames", "2"});
    const Result r = run({"warp", "--camera", path("s/cameras.json"), "--view", "cam1", "--bbox", "320,240,50,50"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream is(r.out);
    std::string header;
    Mat3 R, H;
    is >> header;
    EXPECT_EQ(header, "R:");
    for (int i = 0; i < 9; ++i) is >> R(i / 3, i % 3);
    is >> header;
    EXPECT_EQ(header, "H:");
    for (int i = 0; i < 9; ++i) is >> H(i / 3, i % 3);
    EXPECT_EQ(R, Mat3::Identity());
    EXPECT_EQ(H, Mat3::Identity());

    const Result off = run({"warp", "--camera", path("s/cameras.json"), "--bbox", "600,100,50,50"});
    ASSERT_EQ(off.code, 0);
    EXPECT_NE(off.out, r.out);
    EXPECT_EQ(run({"warp", "--camera", path("s/cameras.json"), "--view", "cam9", "--bbox", "1,1,2,2"}).code, 4);
}

TEST_F(CliTest, RectifyMapFile) {
    CameraRig src(1), dst(1);
    src[0].view_id = dst[0].view_id = "c";
    src[0].intrinsics = {200, 200, 40, 30, 80, 60};
    src[0].distortion = FisheyeDistortion{0.01, 0, 0, 0};
    dst[0].intrinsics = {150, 150, 40, 30, 80, 60};
    write_camera_file(path("src.json"), src);
    write_camera_file(path("dst.json"), dst);
    const Result r = run({"rectify-map", "--src", path("src.json"), "--dst", path("dst.json"), "--out", path("m.bin")});
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream is(path("m.bin"), std::ios::binary);
    const RectifyMap m = read_rectify_map(is);
    const RectifyMap want = build_rectify_map(src[0].source(), dst[0].intrinsics);
    EXPECT_EQ(m.xy, want.xy);
    EXPECT_EQ(m.mask, want.mask);
}
