#pragma once

// Generated prediction streams and a malformed-line corpus shared by the I/O
// unit tests and the acceptance binary.

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "egohand/io.hpp"

namespace fixture {

inline std::vector<egohand::PredictionRecord> random_records(std::mt19937_64& rng, std::size_t n) {
    using namespace egohand;
    std::uniform_real_distribution<double> coord(-500.0, 500.0), depth(200.0, 900.0), px(0.0, 640.0);
    std::uniform_int_distribution<int> joints(1, 21);
    std::vector<PredictionRecord> out;
    for (std::size_t i = 0; i < n; ++i) {
        PredictionRecord r;
        r.video_id = "vid" + std::to_string(i % 3);
        r.frame_id = i;
        r.view_id = "cam" + std::to_string(i % 4);
        r.model_id = i % 5 == 0 ? "mét\"a\\" : "m0";
        r.frame = i % 2 ? FrameKind::World : FrameKind::Camera;
        const int J = joints(rng);
        for (int k = 0; k < 3 * J; ++k) r.joints.push_back(coord(rng));
        if (r.frame == FrameKind::Camera && i % 3 == 0) {
            Raw25D raw;
            for (int k = 0; k < 2 * J; ++k) raw.kp2d.push_back(px(rng));
            for (int k = 0; k < 3 * J; ++k) raw.rel3d.push_back(coord(rng));
            raw.root_depth = depth(rng);
            raw.root_index = static_cast<std::size_t>(J - 1);
            if (i % 4 == 0) raw.warp_R = std::array<double, 9>{1, 0, 0, 0, 1, 0, 0, 0, 1};
            r.raw = raw;
            if (i % 6 == 0) r.joints.clear();
        }
        out.push_back(std::move(r));
    }
    return out;
}

struct FuzzCase {
    std::string name;
    std::string text;
    std::size_t line;  // 1-based line that must be reported
};

/// Streams with exactly one malformed line (syntax, structure or type).
inline std::vector<FuzzCase> malformed_corpus() {
    std::mt19937_64 rng(2024);
    const auto records = random_records(rng, 12);
    std::vector<std::string> lines;
    for (const auto& r : records) lines.push_back(egohand::record_to_json(r).dump());

    std::vector<std::pair<std::string, std::string>> bad;  // (name, replacement line)
    const std::string good = lines[1];
    for (std::size_t cut : {1UL, 7UL, good.size() / 3, good.size() / 2, good.size() - 2, good.size() - 1})
        bad.emplace_back("truncated_at_" + std::to_string(cut), good.substr(0, cut));
    auto replace = [&](const std::string& from, const std::string& to) {
        std::string s = good;
        const auto pos = s.find(from);
        s.replace(pos, from.size(), to);
        return s;
    };
    for (const char* f : {"video_id", "frame_id", "view_id", "model_id", "frame", "joints"})
        bad.emplace_back(std::string("missing_") + f, replace(std::string("\"") + f + "\":", "\"x_" + std::string(f) + "\":"));
    bad.emplace_back("video_id_number", replace("\"video_id\":\"vid1\"", "\"video_id\":7"));
    bad.emplace_back("view_id_null", replace("\"view_id\":\"cam1\"", "\"view_id\":null"));
    bad.emplace_back("model_id_array", replace("\"model_id\":\"m0\"", "\"model_id\":[\"m0\"]"));
    bad.emplace_back("frame_id_negative", replace("\"frame_id\":1", "\"frame_id\":-1"));
    bad.emplace_back("frame_id_fraction", replace("\"frame_id\":1", "\"frame_id\":1.5"));
    bad.emplace_back("frame_id_string", replace("\"frame_id\":1", "\"frame_id\":\"1\""));
    bad.emplace_back("frame_unknown", replace("\"frame\":\"world\"", "\"frame\":\"sky\""));
    bad.emplace_back("frame_number", replace("\"frame\":\"world\"", "\"frame\":1"));
    bad.emplace_back("joints_string", replace("\"joints\":[", "\"joints\":\"[") + "\"");
    bad.emplace_back("joints_object", replace("\"joints\":[", "\"joints\":{\"a\":[") + "}");
    bad.emplace_back("joint_null", replace("\"joints\":[", "\"joints\":[null,"));
    bad.emplace_back("joint_string", replace("\"joints\":[", "\"joints\":[\"1.0\","));
    bad.emplace_back("joint_nested", replace("\"joints\":[", "\"joints\":[[1,2,3],"));
    bad.emplace_back("joint_nan", replace("\"joints\":[", "\"joints\":[NaN,"));
    bad.emplace_back("joint_infinity", replace("\"joints\":[", "\"joints\":[Infinity,"));
    bad.emplace_back("joint_overflow", replace("\"joints\":[", "\"joints\":[1e999,"));
    bad.emplace_back("trailing_comma", replace("\"joints\":[", "\"joints\":[1,2,3,],\"j\":["));
    bad.emplace_back("single_quotes", replace("\"video_id\"", "'video_id'"));
    bad.emplace_back("unquoted_key", replace("\"video_id\"", "video_id"));
    bad.emplace_back("trailing_garbage", good + " x");
    bad.emplace_back("two_objects", good + good);
    bad.emplace_back("leading_garbage", "#" + good);
    bad.emplace_back("top_level_array", "[" + good + "]");
    bad.emplace_back("top_level_number", "42");
    bad.emplace_back("top_level_string", "\"record\"");
    bad.emplace_back("top_level_null", "null");
    bad.emplace_back("empty_object", "{}");
    bad.emplace_back("open_brace", "{");
    bad.emplace_back("close_brace", "}");
    bad.emplace_back("plain_text", "not a record");
    bad.emplace_back("csv_line", "vid0,1,cam0,m0,world,1,2,3");
    bad.emplace_back("bad_escape", replace("\"vid1\"", "\"v\\qid\""));
    bad.emplace_back("invalid_utf8", replace("\"vid1\"", "\"v\xff\xfe\""));
    bad.emplace_back("control_char", replace("\"vid1\"", "\"v\x01id\""));
    bad.emplace_back("unterminated_string", replace("\"vid1\"", "\"vid1"));
    bad.emplace_back("raw_kp2d_string", replace("\"joints\":[", "\"kp2d\":\"x\",\"rel3d\":[0,0,0],\"root_depth\":1,\"joints\":["));
    bad.emplace_back("raw_missing_rel3d", replace("\"joints\":[", "\"kp2d\":[1,2],\"root_depth\":1,\"joints\":["));
    bad.emplace_back("raw_depth_string", replace("\"joints\":[", "\"kp2d\":[1,2],\"rel3d\":[0,0,0],\"root_depth\":\"1\",\"joints\":["));
    bad.emplace_back("raw_root_index_negative",
                     replace("\"joints\":[", "\"kp2d\":[1,2],\"rel3d\":[0,0,0],\"root_depth\":1,\"root_index\":-1,\"joints\":["));
    bad.emplace_back("raw_warp_nan", replace("\"joints\":[", "\"kp2d\":[1,2],\"rel3d\":[0,0,0],\"root_depth\":1,\"warp_R\":[NaN],\"joints\":["));

    // Each corruption lands on a different line, with blank lines ahead of it
    // for some cases so that the counter must include them.
    std::vector<FuzzCase> out;
    for (std::size_t i = 0; i < bad.size(); ++i) {
        const std::size_t target = i % lines.size();
        const bool blanks = i % 3 == 0;
        std::ostringstream os;
        std::size_t line = 0, reported = 0;
        if (blanks) {
            os << "\n   \n";
            line += 2;
        }
        for (std::size_t k = 0; k < lines.size(); ++k) {
            ++line;
            if (k == target) {
                os << bad[i].second << '\n';
                reported = line;
            } else {
                os << lines[k] << '\n';
            }
        }
        out.push_back({bad[i].first, os.str(), reported});
    }
    return out;
}

}  // namespace fixture
