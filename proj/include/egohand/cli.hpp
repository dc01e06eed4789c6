#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "egohand/camera.hpp"
#include "egohand/fusion.hpp"
#include "egohand/io.hpp"
#include "egohand/lift.hpp"
#include "egohand/metrics.hpp"
#include "egohand/preprocess.hpp"
#include "egohand/simulation.hpp"
#include "egohand/smoothing.hpp"

namespace egohand::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kIo = 3, kData = 4, kNumeric = 5 };

inline int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::Io: return kIo;
        case ErrorCode::NonPositiveDepth:
        case ErrorCode::NoConvergence:
        case ErrorCode::OutOfModelRange: return kNumeric;
        default: return kData;
    }
}

/// Invalid flag values; reported with the usage exit code.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string fixed(double x, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

inline FusionConfig make_fusion_config(double threshold, bool fallback_all) {
    FusionConfig cfg;
    cfg.merge_threshold_mm = threshold;
    cfg.fallback_all_views = fallback_all;
    try {
        cfg.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    return cfg;
}

inline SavGolParams make_savgol(int window, int order) {
    try {
        return SavGolParams(window, order);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

inline const CameraModel& pick_camera(const CameraFile& file, const std::string& view) {
    if (file.cameras.empty()) throw Error(ErrorCode::InvariantViolation, "camera file has no cameras");
    return view.empty() ? file.cameras.front() : find_camera(file.cameras, view);
}

inline void print_warnings(const CameraFile& file, std::ostream& err) {
    for (const auto& w : file.warnings) err << "warning: " << w << "\n";
}

inline std::string histogram_line(const std::vector<MergeDecision>& decisions) {
    std::map<std::string, int> h{{"mean_of_pair", 0}, {"temporal_fallback", 0}, {"passthrough", 0}, {"missing", 0}};
    int interpolated = 0, no_previous = 0;
    for (const auto& d : decisions) {
        ++h[to_string(d.branch)];
        interpolated += d.interpolated;
        no_previous += d.no_previous;
    }
    std::string s = "# branches:";
    for (const auto& [k, v] : h) s += " " + k + "=" + std::to_string(v);
    s += " interpolated=" + std::to_string(interpolated) + " no_previous=" + std::to_string(no_previous);
    return s;
}

inline nlohmann::ordered_json decision_to_json(const std::string& video, const std::string& model,
                                               const MergeDecision& d) {
    nlohmann::ordered_json j;
    j["video_id"] = video;
    j["model_id"] = model;
    j["frame_id"] = d.frame_id;
    j["branch"] = to_string(d.branch);
    j["selected_views"] = d.selected_views;
    j["pair_mpjpe_mm"] = d.pair_mpjpe_mm ? nlohmann::ordered_json(*d.pair_mpjpe_mm) : nlohmann::ordered_json();
    j["chosen_view"] = d.chosen_view ? nlohmann::ordered_json(*d.chosen_view) : nlohmann::ordered_json();
    nlohmann::ordered_json fb = nlohmann::ordered_json::object();
    for (const auto& [view, err] : d.fallback_pa_mpjpe) fb[view] = err;
    j["fallback_pa_mpjpe"] = fb;
    j["no_previous"] = d.no_previous;
    j["interpolated"] = d.interpolated;
    return j;
}

// (video_id, model_id) -> ordered frames.
using Groups = std::map<std::pair<std::string, std::string>, std::map<std::uint64_t, std::vector<ViewSkeleton>>>;

/// Camera-frame records become world-frame skeletons via their view's
/// extrinsics, lifting raw 2.5D fields first when present.
inline Groups group_for_fusion(const std::vector<PredictionRecord>& records, const CameraFile& cams) {
    Groups groups;
    for (const auto& r : records) {
        Skeleton s;
        if (r.frame == FrameKind::Camera) {
            const CameraModel& cam = find_camera(cams.cameras, r.view_id);
            s = r.raw ? lift(r.prediction25d(), cam.intrinsics, r.view_id) : r.skeleton();
            s = to_world(s, cam.extrinsics);
        } else {
            s = r.skeleton();
        }
        groups[{r.video_id, r.model_id}][r.frame_id].push_back({r.view_id, std::move(s)});
    }
    return groups;
}

// (video_id) -> frame_id -> record index, requiring one record per frame.
inline std::map<std::string, std::map<std::uint64_t, const PredictionRecord*>> index_by_frame(
    const std::vector<PredictionRecord>& records, const std::string& what) {
    std::map<std::string, std::map<std::uint64_t, const PredictionRecord*>> out;
    for (const auto& r : records) {
        if (!out[r.video_id].emplace(r.frame_id, &r).second)
            throw Error(ErrorCode::InvariantViolation, what + " has several records for video '" + r.video_id +
                                                           "' frame " + std::to_string(r.frame_id) +
                                                           " (filter by --view/--model)");
    }
    return out;
}

inline std::vector<double> parse_bbox(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("--bbox expects cx,cy,w,h");
        }
    }
    if (v.size() != 4 || !(v[2] > 0.0) || !(v[3] > 0.0)) throw UsageError("--bbox expects cx,cy,w,h with w,h > 0");
    return v;
}

inline void print_matrix(std::ostream& out, const char* name, const Mat3& m) {
    out << name << ":\n";
    char buf[256];
    for (int i = 0; i < 3; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", m(i, 0), m(i, 1), m(i, 2));
        out << buf;
    }
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw Error(ErrorCode::Io, "cannot create '" + path + "'");
    os << text;
    if (!os) throw Error(ErrorCode::Io, "failed writing '" + path + "'");
}

}  // namespace detail

struct FuseArgs {
    std::string pred, cameras, out, decisions;
    double threshold = 30.0;
    int window = 9;
    int order = 2;
    bool no_smooth = false;
    bool fallback_all = false;
};

inline int cmd_fuse(const FuseArgs& a, std::ostream& out, std::ostream& err) {
    const FusionConfig cfg = detail::make_fusion_config(a.threshold, a.fallback_all);
    const SavGolParams sg = detail::make_savgol(a.window, a.order);
    const auto records = read_predictions_file(a.pred);
    const CameraFile cams = read_camera_file(a.cameras);
    detail::print_warnings(cams, err);

    std::vector<PredictionRecord> fused;
    std::vector<MergeDecision> all_decisions;
    std::string decision_log;
    for (const auto& [key, by_frame] : detail::group_for_fusion(records, cams)) {
        const auto& [video, model] = key;
        // Frame ids absent between the first and last observed frame become Missing.
        std::vector<FrameViews> frames;
        const std::uint64_t first = by_frame.begin()->first;
        const std::uint64_t last = by_frame.rbegin()->first;
        for (std::uint64_t f = first;; ++f) {
            const auto it = by_frame.find(f);
            frames.push_back({f, it == by_frame.end() ? std::vector<ViewSkeleton>{} : it->second});
            if (f == last) break;
        }
        SequenceMerge merged = merge_sequence(frames, cfg);
        const Sequence result = a.no_smooth ? merged.skeletons : smooth_skeleton_sequence(merged.skeletons, sg);
        for (std::size_t i = 0; i < frames.size(); ++i) {
            PredictionRecord r;
            r.video_id = video;
            r.frame_id = frames[i].frame_id;
            r.view_id = "fused";
            r.model_id = model;
            r.set_skeleton(result[i]);
            fused.push_back(std::move(r));
            decision_log += detail::decision_to_json(video, model, merged.decisions[i]).dump() + "\n";
        }
        all_decisions.insert(all_decisions.end(), merged.decisions.begin(), merged.decisions.end());
    }
    write_predictions_file(a.out, fused);
    detail::write_text(a.decisions.empty() ? a.out + ".decisions.jsonl" : a.decisions, decision_log);

    out << "# fuse merge_threshold_mm=" << detail::fixed(cfg.merge_threshold_mm) << " window=" << sg.window()
        << " order=" << sg.polyorder() << " smooth=" << (a.no_smooth ? "off" : "on")
        << " fallback=" << (cfg.fallback_all_views ? "all_views" : "pair") << "\n"
        << detail::histogram_line(all_decisions) << "\n"
        << "wrote " << fused.size() << " records to " << a.out << "\n";
    return kOk;
}

struct SmoothArgs {
    std::string pred, out;
    int window = 9;
    int order = 2;
};

inline int cmd_smooth(const SmoothArgs& a, std::ostream& out, std::ostream&) {
    const SavGolParams sg = detail::make_savgol(a.window, a.order);
    auto records = read_predictions_file(a.pred);
    // Each (video, view, model) series is smoothed along frame_id.
    std::map<std::tuple<std::string, std::string, std::string>, std::map<std::uint64_t, std::size_t>> series;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.joints.empty()) throw Error(ErrorCode::InvariantViolation, r.key() + ": smooth needs joints");
        series[{r.video_id, r.view_id, r.model_id}][r.frame_id] = i;
    }
    for (const auto& [key, frames] : series) {
        Sequence seq;
        for (const auto& [f, idx] : frames) seq.push_back(records[idx].skeleton());
        const Sequence smoothed = smooth_skeleton_sequence(seq, sg);
        std::size_t k = 0;
        for (const auto& [f, idx] : frames) {
            records[idx].set_skeleton(smoothed[k++]);
            records[idx].raw.reset();
        }
    }
    write_predictions_file(a.out, records);
    out << "# smooth window=" << sg.window() << " order=" << sg.polyorder() << "\n"
        << "wrote " << records.size() << " records to " << a.out << "\n";
    return kOk;
}

struct EnsembleArgs {
    std::vector<std::string> runs;
    std::string secondary, out;
    std::vector<double> weights{0.7, 0.3};
    double gap = 20.0;
};

inline int cmd_ensemble(const EnsembleArgs& a, std::ostream& out, std::ostream&) {
    FusionConfig cfg;
    if (a.weights.size() != 2) throw UsageError("--weights expects two values");
    cfg.ensemble_weights = {a.weights[0], a.weights[1]};
    cfg.gap_threshold_mm = a.gap;
    try {
        cfg.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }

    struct Input {
        std::string path;
        ModelRole role;
        std::vector<PredictionRecord> records;
    };
    std::vector<Input> inputs;
    for (const auto& p : a.runs) inputs.push_back({p, ModelRole::Primary, read_predictions_file(p)});
    if (!a.secondary.empty()) inputs.push_back({a.secondary, ModelRole::Secondary, read_predictions_file(a.secondary)});

    std::vector<std::map<std::string, std::map<std::uint64_t, const PredictionRecord*>>> indexed;
    for (const auto& in : inputs) indexed.push_back(detail::index_by_frame(in.records, in.path));
    const auto& reference = indexed.front();
    for (std::size_t i = 1; i < indexed.size(); ++i) {
        bool same = indexed[i].size() == reference.size();
        for (auto it = reference.begin(); same && it != reference.end(); ++it) {
            const auto other = indexed[i].find(it->first);
            same = other != indexed[i].end() && other->second.size() == it->second.size();
            for (auto f = it->second.begin(); same && f != it->second.end(); ++f)
                same = other->second.count(f->first) == 1;
        }
        if (!same)
            throw Error(ErrorCode::LengthMismatch, "'" + inputs[i].path + "' does not cover the same frames as '" +
                                                       inputs.front().path + "'");
    }

    std::vector<PredictionRecord> result;
    for (const auto& [video, frames] : reference) {
        std::vector<TaggedRun> runs;
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            TaggedRun run{inputs[i].path, inputs[i].role, {}};
            for (const auto& [f, rec] : indexed[i].at(video)) run.frames.push_back(rec->skeleton());
            runs.push_back(std::move(run));
        }
        const Sequence fused = ensemble_sequences(runs, cfg);
        std::size_t k = 0;
        for (const auto& [f, rec] : frames) {
            PredictionRecord r;
            r.video_id = video;
            r.frame_id = f;
            r.view_id = rec->view_id;
            r.model_id = "ensemble";
            r.set_skeleton(fused[k++]);
            r.frame = rec->frame;
            result.push_back(std::move(r));
        }
    }
    write_predictions_file(a.out, result);
    out << "# ensemble runs=" << a.runs.size() << " secondary=" << (a.secondary.empty() ? "none" : a.secondary)
        << " weights=" << detail::fixed(cfg.ensemble_weights.primary) << ","
        << detail::fixed(cfg.ensemble_weights.secondary) << " gap_threshold_mm=" << detail::fixed(cfg.gap_threshold_mm)
        << " gap_weights=" << detail::fixed(cfg.gap_weights.primary) << "," << detail::fixed(cfg.gap_weights.secondary)
        << "\n"
        << "wrote " << result.size() << " records to " << a.out << "\n";
    return kOk;
}

struct MetricsArgs {
    std::string pred, gt, json, view, model;
    bool pa = false;
    bool no_scale = false;
};

inline int cmd_metrics(const MetricsArgs& a, std::ostream& out, std::ostream&) {
    auto pred_records = read_predictions_file(a.pred);
    std::erase_if(pred_records, [&](const PredictionRecord& r) {
        return (!a.view.empty() && r.view_id != a.view) || (!a.model.empty() && r.model_id != a.model);
    });
    const auto gt_records = read_predictions_file(a.gt);
    const auto pred = detail::index_by_frame(pred_records, "prediction file");
    const auto gt = detail::index_by_frame(gt_records, "ground-truth file");

    AlignOptions align;
    align.with_scale = !a.no_scale;
    std::vector<double> per_frame, per_frame_pa;
    std::vector<double> per_joint_sum;
    for (const auto& [video, frames] : gt) {
        const auto pit = pred.find(video);
        if (pit == pred.end() || pit->second.size() != frames.size())
            throw Error(ErrorCode::LengthMismatch, "prediction frames do not match ground truth for video '" + video + "'");
        Sequence p, g;
        for (const auto& [f, rec] : frames) {
            const auto it = pit->second.find(f);
            if (it == pit->second.end())
                throw Error(ErrorCode::LengthMismatch,
                            "video '" + video + "' frame " + std::to_string(f) + " has no prediction");
            p.push_back(it->second->skeleton());
            g.push_back(rec->skeleton());
        }
        const MetricReport r = sequence_metrics(p, g, align, a.pa);
        per_frame.insert(per_frame.end(), r.per_frame.begin(), r.per_frame.end());
        per_frame_pa.insert(per_frame_pa.end(), r.per_frame_pa.begin(), r.per_frame_pa.end());
        if (per_joint_sum.empty()) per_joint_sum.assign(r.per_joint.size(), 0.0);
        if (per_joint_sum.size() != r.per_joint.size())
            throw Error(ErrorCode::JointCountMismatch, "joint count differs between videos");
        for (std::size_t j = 0; j < r.per_joint.size(); ++j)
            per_joint_sum[j] += r.per_joint[j] * static_cast<double>(r.per_frame.size());
    }
    for (const auto& [video, frames] : pred)
        if (!gt.count(video)) throw Error(ErrorCode::LengthMismatch, "video '" + video + "' has no ground truth");

    // Same accumulation order as sequence_metrics, so a single video matches it bit for bit.
    double mpjpe_mm = 0.0, pa_mm = 0.0;
    for (double v : per_frame) mpjpe_mm += v;
    for (double v : per_frame_pa) pa_mm += v;
    const auto n = static_cast<double>(per_frame.size());
    if (!per_frame.empty()) {
        mpjpe_mm /= n;
        pa_mm /= n;
        for (auto& v : per_joint_sum) v /= n;
    }

    out << "# metrics videos=" << gt.size() << " frames=" << per_frame.size()
        << " pa_scale=" << (align.with_scale ? "on" : "off") << "\n";
    out << "MPJPE: " << detail::fixed(mpjpe_mm) << " mm\n";
    if (a.pa) out << "PA-MPJPE: " << detail::fixed(pa_mm) << " mm\n";

    if (!a.json.empty()) {
        nlohmann::ordered_json j;
        j["frames"] = per_frame.size();
        j["mpjpe_mm"] = mpjpe_mm;
        if (a.pa) j["pa_mpjpe_mm"] = pa_mm;
        j["per_joint_mm"] = per_joint_sum;
        j["per_frame_mm"] = per_frame;
        if (a.pa) j["per_frame_pa_mm"] = per_frame_pa;
        if (a.json == "-")
            out << j.dump() << "\n";
        else
            detail::write_text(a.json, j.dump(2) + "\n");
    }
    return kOk;
}

struct SimulateArgs {
    std::uint64_t seed = 42;
    int views = 4;
    int frames = 300;
    std::string out;
    double sigma = 5.0;
    double outlier_prob = 0.1;
    bool raw = false;
};

inline SimScenario scenario_from(std::uint64_t seed, int views, int frames, double sigma, double outlier_prob) {
    SimScenario s = default_scenario(seed);
    s.n_views = views;
    s.n_frames = frames;
    s.noise.gaussian_sigma_mm = sigma;
    s.noise.outlier_prob = outlier_prob;
    try {
        s.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    return s;
}

inline int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream&) {
    const SimScenario s = scenario_from(a.seed, a.views, a.frames, a.sigma, a.outlier_prob);
    const Sequence gt = generate_trajectory(s);
    const CameraRig rig = generate_rig(s);
    const CorruptedViews cv = corrupt(gt, rig, s.noise);

    std::error_code ec;
    std::filesystem::create_directories(a.out, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create directory '" + a.out + "': " + ec.message());
    const std::string video = "sim" + std::to_string(a.seed);

    std::vector<PredictionRecord> gt_records;
    for (std::size_t f = 0; f < gt.size(); ++f) {
        PredictionRecord r{video, f, "gt", "gt", FrameKind::World, {}, std::nullopt};
        r.set_skeleton(gt[f]);
        gt_records.push_back(std::move(r));
    }
    std::vector<PredictionRecord> pred_records;
    for (std::size_t f = 0; f < gt.size(); ++f) {
        for (std::size_t v = 0; v < rig.size(); ++v) {
            PredictionRecord r{video, f, rig[v].view_id, "sim", FrameKind::Camera, {}, std::nullopt};
            r.set_skeleton(cv.views[v][f]);
            if (a.raw) r.raw = to_raw(decompose(cv.views[v][f], rig[v].intrinsics));
            pred_records.push_back(std::move(r));
        }
    }
    const std::filesystem::path dir(a.out);
    write_predictions_file((dir / "gt.jsonl").string(), gt_records);
    write_predictions_file((dir / "pred.jsonl").string(), pred_records);
    write_camera_file((dir / "cameras.json").string(), rig);
    out << "# simulate seed=" << a.seed << " views=" << a.views << " frames=" << a.frames
        << " sigma_mm=" << detail::fixed(a.sigma) << " outlier_prob=" << detail::fixed(a.outlier_prob) << "\n"
        << "wrote " << (dir / "gt.jsonl").string() << ", " << (dir / "pred.jsonl").string() << ", "
        << (dir / "cameras.json").string() << "\n";
    return kOk;
}

struct BenchmarkArgs {
    std::uint64_t seed = 42;
    int views = 4;
    int frames = 300;
    double sigma = 5.0;
    double outlier_prob = 0.1;
    double threshold = 30.0;
    int window = 9;
    int order = 2;
    std::string json;
};

inline int cmd_benchmark(const BenchmarkArgs& a, std::ostream& out, std::ostream&) {
    const SimScenario s = scenario_from(a.seed, a.views, a.frames, a.sigma, a.outlier_prob);
    const BenchmarkReport rep = run_benchmark(s, detail::make_fusion_config(a.threshold, false),
                                              detail::make_savgol(a.window, a.order));
    out << rep.to_text();
    if (!a.json.empty()) {
        nlohmann::ordered_json j;
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const auto& r : rep.single_view) rows.push_back({{"id", r.id}, {"method", r.method}, {"mpjpe_mm", r.mpjpe_mm}});
        j["single_view"] = rows;
        j["mean_single_view_mm"] = rep.mean_single_view_mm;
        j["merged_mm"] = rep.merged_mm;
        j["merged_smoothed_mm"] = rep.merged_smoothed_mm;
        j["ensemble_mm"] = rep.ensemble_mm;
        j["branches"] = rep.branch_histogram;
        detail::write_text(a.json, j.dump(2) + "\n");
    }
    return kOk;
}

struct WarpArgs {
    std::string camera, view, bbox;
};

inline int cmd_warp(const WarpArgs& a, std::ostream& out, std::ostream& err) {
    const auto box = detail::parse_bbox(a.bbox);
    const CameraFile file = read_camera_file(a.camera);
    detail::print_warnings(file, err);
    const CameraModel& cam = detail::pick_camera(file, a.view);
    const VirtualRotation w = virtual_rotation_warp(cam.intrinsics, {box[0], box[1]});
    detail::print_matrix(out, "R", w.R);
    detail::print_matrix(out, "H", w.H);
    return kOk;
}

struct RectifyArgs {
    std::string src, src_view, dst, dst_view, out;
};

inline int cmd_rectify_map(const RectifyArgs& a, std::ostream& out, std::ostream& err) {
    const CameraFile src = read_camera_file(a.src);
    const CameraFile dst = read_camera_file(a.dst);
    detail::print_warnings(src, err);
    detail::print_warnings(dst, err);
    const RectifyMap map = build_rectify_map(detail::pick_camera(src, a.src_view).source(),
                                             detail::pick_camera(dst, a.dst_view).intrinsics);
    std::ofstream os(a.out, std::ios::binary);
    if (!os) throw Error(ErrorCode::Io, "cannot create '" + a.out + "'");
    write_rectify_map(os, map);
    std::size_t valid = 0;
    for (auto m : map.mask) valid += m;
    out << "# rectify-map " << map.width << "x" << map.height << " valid=" << valid << "\n"
        << "wrote " << a.out << "\n";
    return kOk;
}

/// Entry point shared by the executable and the tests. args excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-view 3D hand pose post-processing toolkit", "egohand"};
    app.require_subcommand(1);

    FuseArgs fuse;
    auto* fuse_cmd = app.add_subcommand("fuse", "Lift, transform to world, merge views, smooth");
    fuse_cmd->add_option("--pred", fuse.pred, "Prediction stream (JSONL)")->required();
    fuse_cmd->add_option("--cameras", fuse.cameras, "Camera file (JSON)")->required();
    fuse_cmd->add_option("--out", fuse.out, "Fused output stream")->required();
    fuse_cmd->add_option("--decisions", fuse.decisions, "Decision log (default: <out>.decisions.jsonl)");
    fuse_cmd->add_option("--threshold", fuse.threshold, "Merge threshold in mm");
    fuse_cmd->add_option("--window", fuse.window, "Savitzky-Golay window");
    fuse_cmd->add_option("--order", fuse.order, "Savitzky-Golay polynomial order");
    fuse_cmd->add_flag("--no-smooth", fuse.no_smooth, "Skip smoothing");
    fuse_cmd->add_flag("--fallback-all-views", fuse.fallback_all, "Temporal fallback scores every view");

    SmoothArgs smooth;
    auto* smooth_cmd = app.add_subcommand("smooth", "Savitzky-Golay smoothing of every series");
    smooth_cmd->add_option("--pred", smooth.pred)->required();
    smooth_cmd->add_option("--out", smooth.out)->required();
    smooth_cmd->add_option("--window", smooth.window);
    smooth_cmd->add_option("--order", smooth.order);

    EnsembleArgs ens;
    auto* ens_cmd = app.add_subcommand("ensemble", "Fuse runs of several models");
    ens_cmd->add_option("--runs", ens.runs, "Primary-architecture runs")->required()->expected(1, -1);
    ens_cmd->add_option("--secondary", ens.secondary, "Secondary-architecture run");
    ens_cmd->add_option("--out", ens.out)->required();
    ens_cmd->add_option("--weights", ens.weights, "Primary and secondary weight")->expected(2);
    ens_cmd->add_option("--gap", ens.gap, "Gap threshold in mm");

    MetricsArgs met;
    auto* met_cmd = app.add_subcommand("metrics", "MPJPE / PA-MPJPE against ground truth");
    met_cmd->add_option("--pred", met.pred)->required();
    met_cmd->add_option("--gt", met.gt)->required();
    met_cmd->add_flag("--pa", met.pa, "Also report PA-MPJPE");
    met_cmd->add_flag("--no-scale", met.no_scale, "PA alignment without scale");
    met_cmd->add_option("--json", met.json, "Machine-readable report path ('-' for stdout)");
    met_cmd->add_option("--view", met.view, "Only prediction records of this view");
    met_cmd->add_option("--model", met.model, "Only prediction records of this model");

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Write a synthetic multi-view scenario");
    sim_cmd->add_option("--seed", sim.seed);
    sim_cmd->add_option("--views", sim.views);
    sim_cmd->add_option("--frames", sim.frames);
    sim_cmd->add_option("--out", sim.out)->required();
    sim_cmd->add_option("--sigma", sim.sigma, "Gaussian noise in mm");
    sim_cmd->add_option("--outlier-prob", sim.outlier_prob);
    sim_cmd->add_flag("--raw", sim.raw, "Also emit 2.5D fields");

    BenchmarkArgs bench;
    auto* bench_cmd = app.add_subcommand("benchmark", "Synthetic ablation report");
    bench_cmd->add_option("--seed", bench.seed);
    bench_cmd->add_option("--views", bench.views);
    bench_cmd->add_option("--frames", bench.frames);
    bench_cmd->add_option("--sigma", bench.sigma);
    bench_cmd->add_option("--outlier-prob", bench.outlier_prob);
    bench_cmd->add_option("--threshold", bench.threshold);
    bench_cmd->add_option("--window", bench.window);
    bench_cmd->add_option("--order", bench.order);
    bench_cmd->add_option("--json", bench.json);

    WarpArgs warp;
    auto* warp_cmd = app.add_subcommand("warp", "Virtual rotation towards a hand box");
    warp_cmd->add_option("--camera", warp.camera)->required();
    warp_cmd->add_option("--view", warp.view);
    warp_cmd->add_option("--bbox", warp.bbox, "cx,cy,w,h")->required();

    RectifyArgs rect;
    auto* rect_cmd = app.add_subcommand("rectify-map", "Fisheye to pinhole lookup map");
    rect_cmd->add_option("--src", rect.src)->required();
    rect_cmd->add_option("--src-view", rect.src_view);
    rect_cmd->add_option("--dst", rect.dst)->required();
    rect_cmd->add_option("--dst-view", rect.dst_view);
    rect_cmd->add_option("--out", rect.out)->required();

    std::vector<const char*> argv{"egohand"};
    for (const auto& s : args) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kUsage;
    }

    try {
        if (*fuse_cmd) return cmd_fuse(fuse, out, err);
        if (*smooth_cmd) return cmd_smooth(smooth, out, err);
        if (*ens_cmd) return cmd_ensemble(ens, out, err);
        if (*met_cmd) return cmd_metrics(met, out, err);
        if (*sim_cmd) return cmd_simulate(sim, out, err);
        if (*bench_cmd) return cmd_benchmark(bench, out, err);
        if (*warp_cmd) return cmd_warp(warp, out, err);
        if (*rect_cmd) return cmd_rectify_map(rect, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    }
    return kUsage;
}

}  // namespace egohand::cli
