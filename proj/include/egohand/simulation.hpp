#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "egohand/camera.hpp"
#include "egohand/fusion.hpp"
#include "egohand/geometry.hpp"
#include "egohand/metrics.hpp"
#include "egohand/random.hpp"
#include "egohand/smoothing.hpp"

namespace egohand {

enum class OcclusionMode {
    RigidOffset,      // the whole hand of an occluded view is displaced by one offset
    PerJointDropout,  // each joint of an occluded view independently, with probability 1/2
};

struct NoiseModel {
    double gaussian_sigma_mm = 5.0;
    double outlier_prob = 0.1;
    double outlier_min_mm = 30.0;
    double outlier_max_mm = 80.0;
    std::uint64_t seed = 42;
    OcclusionMode mode = OcclusionMode::RigidOffset;

    void validate() const {
        if (!(gaussian_sigma_mm >= 0.0)) throw Error(ErrorCode::InvalidParams, "sigma must be >= 0");
        if (!(outlier_prob >= 0.0 && outlier_prob <= 1.0))
            throw Error(ErrorCode::InvalidParams, "outlier_prob must lie in [0, 1]");
        if (!(outlier_min_mm >= 0.0 && outlier_min_mm <= outlier_max_mm))
            throw Error(ErrorCode::InvalidParams, "outlier range must satisfy 0 <= min <= max");
    }
};

struct RigParams {
    double radius_mm = 550.0;     // camera distance to the trajectory center
    double arc_deg = 120.0;       // azimuth span of the camera arc
    double elevation_deg = 20.0;  // cameras look slightly down onto the volume
    double jitter_deg = 3.0;      // seeded per-camera azimuth jitter
    Intrinsics intrinsics{280.0, 280.0, 320.0, 240.0, 640, 480};
};

struct TrajectoryParams {
    Vec3 center = Vec3::Zero();
    double root_amplitude_mm = 60.0;  // per-axis bound of the root excursion
    double fps = 30.0;
    double max_speed_mm_per_frame = 12.0;
    double rotation_amplitude_rad = 0.35;
    double flexion_amplitude_rad = 0.5;  // per bone
};

struct SimScenario {
    int n_views = 4;
    int n_frames = 300;
    std::uint64_t seed = 42;
    RigParams rig;
    TrajectoryParams trajectory;
    NoiseModel noise;

    void validate() const {
        if (n_views < 1) throw Error(ErrorCode::InvalidParams, "n_views must be >= 1");
        if (n_frames < 1) throw Error(ErrorCode::InvalidParams, "n_frames must be >= 1");
        noise.validate();
    }
};

/// Scenario with the given seed used for both the scene and the noise.
inline SimScenario default_scenario(std::uint64_t seed = 42) {
    SimScenario s;
    s.seed = seed;
    s.noise.seed = seed;
    return s;
}

namespace sim {

enum Stream : std::uint64_t { kTrajectory = 1, kRig = 2, kNoise = 3, kOutlier = 4 };

inline constexpr std::size_t kJoints = 21;
inline constexpr int kFingers = 5;

struct HandTemplate {
    // Joint 0 is the wrist; finger f owns joints 1 + 4f .. 4 + 4f, base first.
    std::array<Vec3, kFingers> base;       // finger base, hand-local, mm
    std::array<Vec3, kFingers> direction;  // rest direction of the finger bones
    std::array<Vec3, kFingers> bend_axis;
    std::array<std::array<double, 3>, kFingers> bone_length;
    Vec3 palm_center;
};

inline HandTemplate hand_template() {
    HandTemplate h;
    h.base = {Vec3(-22.0, 25.0, -8.0), Vec3(-20.0, 85.0, 0.0), Vec3(0.0, 90.0, 0.0), Vec3(18.0, 85.0, 0.0),
              Vec3(34.0, 75.0, 0.0)};
    h.direction = {Vec3(-0.6, 0.8, -0.1).normalized(), Vec3(-0.1, 1.0, 0.0).normalized(), Vec3::UnitY(),
                   Vec3(0.1, 1.0, 0.0).normalized(), Vec3(0.2, 1.0, 0.0).normalized()};
    h.bend_axis = {Vec3(0.8, 0.6, 0.0).normalized(), Vec3::UnitX(), Vec3::UnitX(), Vec3::UnitX(), Vec3::UnitX()};
    h.bone_length = {{{40.0, 32.0, 28.0}, {42.0, 25.0, 20.0}, {45.0, 28.0, 22.0}, {42.0, 26.0, 21.0},
                      {33.0, 20.0, 18.0}}};
    h.palm_center = Vec3(0.0, 60.0, 0.0);
    return h;
}

/// Largest distance of any joint from the palm center over all articulations.
inline double hand_reach(const HandTemplate& h) {
    double reach = h.palm_center.norm();
    for (int f = 0; f < kFingers; ++f) {
        double len = (h.base[f] - h.palm_center).norm();
        for (double b : h.bone_length[f]) len += b;
        reach = std::max(reach, len);
    }
    return reach;
}

/// Bound on the distance of any joint from the trajectory center.
inline double trajectory_radius(const SimScenario& s) {
    return std::sqrt(3.0) * s.trajectory.root_amplitude_mm + hand_reach(hand_template());
}

inline Sequence generate_with_time_scale(const SimScenario& s, double time_scale) {
    const CounterRng rng(s.seed);
    const HandTemplate h = hand_template();
    const auto& tp = s.trajectory;

    // Root path: per axis, three sinusoids with weights summing to one.
    std::array<std::array<double, 3>, 3> amp{}, freq{}, phase{};
    for (std::uint64_t axis = 0; axis < 3; ++axis) {
        double total = 0.0;
        for (std::uint64_t k = 0; k < 3; ++k) {
            amp[axis][k] = rng.uniform(0.3, 1.0, {kTrajectory, 0, axis, k});
            total += amp[axis][k];
            freq[axis][k] = rng.uniform(0.1, 0.5, {kTrajectory, 1, axis, k});
            phase[axis][k] = rng.uniform(0.0, 2.0 * M_PI, {kTrajectory, 2, axis, k});
        }
        for (auto& a : amp[axis]) a *= tp.root_amplitude_mm / total;
    }
    std::array<double, 3> rot_freq{}, rot_phase{};
    for (std::uint64_t axis = 0; axis < 3; ++axis) {
        rot_freq[axis] = rng.uniform(0.05, 0.3, {kTrajectory, 3, axis});
        rot_phase[axis] = rng.uniform(0.0, 2.0 * M_PI, {kTrajectory, 4, axis});
    }
    std::array<double, kFingers> flex_freq{}, flex_phase{};
    for (std::uint64_t f = 0; f < kFingers; ++f) {
        flex_freq[f] = rng.uniform(0.2, 0.8, {kTrajectory, 5, f});
        flex_phase[f] = rng.uniform(0.0, 2.0 * M_PI, {kTrajectory, 6, f});
    }

    Sequence seq;
    seq.reserve(static_cast<std::size_t>(s.n_frames));
    for (int frame = 0; frame < s.n_frames; ++frame) {
        const double t = time_scale * frame / tp.fps;
        Vec3 root = tp.center;
        for (int axis = 0; axis < 3; ++axis)
            for (int k = 0; k < 3; ++k) root(axis) += amp[axis][k] * std::sin(2.0 * M_PI * freq[axis][k] * t + phase[axis][k]);

        auto angle = [&](int axis) {
            return tp.rotation_amplitude_rad * std::sin(2.0 * M_PI * rot_freq[axis] * t + rot_phase[axis]);
        };
        const Mat3 global = axis_angle(Vec3::UnitZ(), angle(2)) * axis_angle(Vec3::UnitY(), angle(1)) *
                            axis_angle(Vec3::UnitX(), angle(0));

        std::vector<Vec3> local(kJoints);
        local[0] = Vec3::Zero();
        for (int f = 0; f < kFingers; ++f) {
            const double flex =
                tp.flexion_amplitude_rad * 0.5 * (1.0 + std::sin(2.0 * M_PI * flex_freq[f] * t + flex_phase[f]));
            Vec3 p = h.base[f];
            local[1 + 4 * f] = p;
            double cumulative = 0.0;
            for (int b = 0; b < 3; ++b) {
                cumulative += flex;
                p += h.bone_length[f][b] * (axis_angle(h.bend_axis[f], cumulative) * h.direction[f]);
                local[2 + 4 * f + b] = p;
            }
        }
        Skeleton sk;
        sk.frame = FrameTag::world();
        sk.joints.reserve(kJoints);
        for (const auto& p : local) sk.joints.push_back(root + global * (p - h.palm_center));
        seq.push_back(std::move(sk));
    }
    return seq;
}

inline double max_frame_displacement(const Sequence& seq) {
    double worst = 0.0;
    for (std::size_t f = 1; f < seq.size(); ++f)
        for (std::size_t j = 0; j < seq[f].size(); ++j)
            worst = std::max(worst, (seq[f].joints[j] - seq[f - 1].joints[j]).norm());
    return worst;
}

}  // namespace sim

/// Ground-truth world-frame hand trajectory: a rigid-bone 21-joint template
/// whose root follows a band-limited sinusoidal path while the hand rotates
/// and the fingers flex. Playback is slowed until no joint moves more than
/// max_speed_mm_per_frame between frames.
inline Sequence generate_trajectory(const SimScenario& s) {
    s.validate();
    double time_scale = 1.0;
    for (int attempt = 0; attempt < 64; ++attempt) {
        Sequence seq = sim::generate_with_time_scale(s, time_scale);
        const double worst = sim::max_frame_displacement(seq);
        if (worst <= s.trajectory.max_speed_mm_per_frame) return seq;
        time_scale *= 0.95 * s.trajectory.max_speed_mm_per_frame / worst;
    }
    throw Error(ErrorCode::InvalidParams, "trajectory speed bound unattainable");
}

/// Cameras on a horizontal arc around the trajectory center, looking at it.
inline CameraRig generate_rig(const SimScenario& s) {
    s.validate();
    const CounterRng rng(s.seed);
    const auto& rp = s.rig;
    const double elevation = rp.elevation_deg * M_PI / 180.0;
    CameraRig rig;
    for (int i = 0; i < s.n_views; ++i) {
        const double base = s.n_views == 1 ? 0.0 : -rp.arc_deg / 2.0 + rp.arc_deg * i / (s.n_views - 1);
        const double jitter = rng.uniform(-rp.jitter_deg, rp.jitter_deg, {sim::kRig, static_cast<std::uint64_t>(i)});
        const double az = (base + jitter) * M_PI / 180.0;
        const Vec3 offset(std::sin(az) * std::cos(elevation), -std::sin(elevation), -std::cos(az) * std::cos(elevation));
        const Vec3 position = s.trajectory.center + rp.radius_mm * offset;

        // World y points down, matching the image v axis.
        const Vec3 z = (s.trajectory.center - position).normalized();
        const Vec3 x = Vec3::UnitY().cross(z).normalized();
        const Vec3 y = z.cross(x);
        CameraModel cam;
        cam.view_id = "cam" + std::to_string(i);
        cam.intrinsics = rp.intrinsics;
        cam.extrinsics.R.row(0) = x.transpose();
        cam.extrinsics.R.row(1) = y.transpose();
        cam.extrinsics.R.row(2) = z.transpose();
        cam.extrinsics.t = -(cam.extrinsics.R * position);

        // Depth is affine in the point, so the bounding sphere of the trajectory
        // decides visibility of every joint.
        const double center_depth = cam.extrinsics.world_to_camera(s.trajectory.center).z();
        if (!(center_depth - sim::trajectory_radius(s) > kMinDepthMm))
            throw Error(ErrorCode::InfeasibleRig, cam.view_id + " does not see the whole trajectory volume");
        rig.push_back(std::move(cam));
    }
    return rig;
}

struct CorruptedViews {
    std::vector<Sequence> views;             // [view][frame], camera frame
    std::vector<std::vector<bool>> occluded;  // [view][frame]
};

/// Per-view camera-frame predictions: Gaussian noise on every coordinate plus
/// occlusion outliers displaced by a random offset of magnitude within the
/// configured range.
inline CorruptedViews corrupt(const Sequence& gt, const CameraRig& rig, const NoiseModel& noise) {
    noise.validate();
    const CounterRng rng(noise.seed);
    CorruptedViews out;
    out.views.resize(rig.size());
    out.occluded.resize(rig.size());

    auto random_offset = [&](std::uint64_t v, std::uint64_t f, std::uint64_t j) {
        Vec3 dir;
        for (std::uint64_t c = 0; c < 3; ++c) dir(c) = rng.normal(sim::kOutlier, v, f, j, c);
        if (dir.norm() < 1e-12) dir = Vec3::UnitX();
        const double magnitude = rng.uniform(noise.outlier_min_mm, noise.outlier_max_mm, {sim::kOutlier, v, f, j, 7});
        return Vec3(dir.normalized() * magnitude);
    };

    for (std::size_t v = 0; v < rig.size(); ++v) {
        out.views[v].reserve(gt.size());
        out.occluded[v].reserve(gt.size());
        for (std::size_t f = 0; f < gt.size(); ++f) {
            Skeleton s = to_camera(gt[f], rig[v].extrinsics, rig[v].view_id);
            const bool occluded = noise.outlier_prob > 0.0 && rng.uniform({sim::kOutlier, v, f, 1000}) < noise.outlier_prob;
            const Vec3 rigid = occluded ? random_offset(v, f, 1000) : Vec3::Zero();
            for (std::size_t j = 0; j < s.size(); ++j) {
                if (noise.gaussian_sigma_mm > 0.0)
                    for (std::uint64_t c = 0; c < 3; ++c)
                        s.joints[j](c) += noise.gaussian_sigma_mm * rng.normal(sim::kNoise, v, f, j, c);
                if (occluded) {
                    if (noise.mode == OcclusionMode::RigidOffset)
                        s.joints[j] += rigid;
                    else if (rng.uniform({sim::kOutlier, v, f, j, 8}) < 0.5)
                        s.joints[j] += random_offset(v, f, j);
                }
            }
            out.views[v].push_back(std::move(s));
            out.occluded[v].push_back(occluded);
        }
    }
    return out;
}

/// World-frame per-frame view lists ready for merge_sequence.
inline std::vector<FrameViews> to_world_frames(const CorruptedViews& cv, const CameraRig& rig) {
    std::vector<FrameViews> frames;
    if (cv.views.empty()) return frames;
    const std::size_t n = cv.views.front().size();
    frames.resize(n);
    for (std::size_t f = 0; f < n; ++f) {
        frames[f].frame_id = f;
        for (std::size_t v = 0; v < rig.size(); ++v)
            frames[f].views.push_back({rig[v].view_id, to_world(cv.views[v][f], rig[v].extrinsics)});
    }
    return frames;
}

struct BenchmarkRow {
    std::string id;
    std::string method;
    double mpjpe_mm = 0.0;
};

struct BenchmarkReport {
    SimScenario scenario;
    FusionConfig fusion;
    SavGolParams savgol;
    std::vector<BenchmarkRow> single_view;
    double mean_single_view_mm = 0.0;
    double merged_mm = 0.0;
    double merged_smoothed_mm = 0.0;
    double ensemble_mm = 0.0;
    std::map<std::string, int> branch_histogram;

    std::string to_text() const;
};

namespace detail {

inline std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

inline std::map<std::string, int> branch_histogram(const std::vector<MergeDecision>& d) {
    std::map<std::string, int> h{{"mean_of_pair", 0}, {"temporal_fallback", 0}, {"passthrough", 0}, {"missing", 0}};
    for (const auto& x : d) ++h[to_string(x.branch)];
    return h;
}

}  // namespace detail

inline std::string BenchmarkReport::to_text() const {
    using detail::fmt;
    std::string s;
    s += "# synthetic multi-view ablation\n";
    s += "# seed=" + std::to_string(scenario.seed) + " noise_seed=" + std::to_string(scenario.noise.seed) +
         " views=" + std::to_string(scenario.n_views) + " frames=" + std::to_string(scenario.n_frames) +
         " sigma_mm=" + fmt("%.3f", scenario.noise.gaussian_sigma_mm) +
         " outlier_prob=" + fmt("%.3f", scenario.noise.outlier_prob) +
         " outlier_range_mm=" + fmt("%.3f", scenario.noise.outlier_min_mm) + "-" +
         fmt("%.3f", scenario.noise.outlier_max_mm) + "\n";
    s += "# merge_threshold_mm=" + fmt("%.3f", fusion.merge_threshold_mm) +
         " window=" + std::to_string(savgol.window()) + " order=" + std::to_string(savgol.polyorder()) +
         " ensemble_weights=" + fmt("%.3f", fusion.ensemble_weights.primary) + "," +
         fmt("%.3f", fusion.ensemble_weights.secondary) + " gap_threshold_mm=" + fmt("%.3f", fusion.gap_threshold_mm) +
         " gap_weights=" + fmt("%.3f", fusion.gap_weights.primary) + "," + fmt("%.3f", fusion.gap_weights.secondary) +
         "\n";
    auto row = [&](const std::string& id, const std::string& method, double v) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%-4s %-36s %12.6f\n", id.c_str(), method.c_str(), v);
        s += buf;
    };
    char header[128];
    std::snprintf(header, sizeof header, "%-4s %-36s %12s\n", "ID", "method", "MPJPE(mm)");
    s += header;
    for (const auto& r : single_view) row(r.id, r.method, r.mpjpe_mm);
    row("a", "mean single view", mean_single_view_mm);
    row("b", "multi-view merge", merged_mm);
    row("c", "b + smooth", merged_smoothed_mm);
    row("d", "c + second-run ensemble", ensemble_mm);
    s += "# branches:";
    for (const auto& [k, v] : branch_histogram) s += " " + k + "=" + std::to_string(v);
    s += "\n";
    return s;
}

/// Merged, smoothed output of one noise realization.
inline SequenceMerge merge_views(const CorruptedViews& cv, const CameraRig& rig, const FusionConfig& cfg) {
    return merge_sequence(to_world_frames(cv, rig), cfg);
}

/// Synthetic analogue of the ablation table: single views, merged, merged and
/// smoothed, and merged/smoothed fused with a second noise realization.
inline BenchmarkReport run_benchmark(const SimScenario& scenario, const FusionConfig& cfg = {},
                                     const SavGolParams& savgol = {}) {
    cfg.validate();
    BenchmarkReport rep{scenario, cfg, savgol, {}, 0.0, 0.0, 0.0, 0.0, {}};
    const Sequence gt = generate_trajectory(scenario);
    const CameraRig rig = generate_rig(scenario);
    const CorruptedViews run1 = corrupt(gt, rig, scenario.noise);

    const auto frames = to_world_frames(run1, rig);
    for (std::size_t v = 0; v < rig.size(); ++v) {
        Sequence single;
        single.reserve(frames.size());
        for (const auto& f : frames) single.push_back(f.views[v].skeleton);
        const double e = sequence_metrics(single, gt, {}, false).mpjpe;
        rep.single_view.push_back({"a" + std::to_string(v), "single view " + rig[v].view_id, e});
        rep.mean_single_view_mm += e;
    }
    rep.mean_single_view_mm /= static_cast<double>(rig.size());

    const SequenceMerge merged = merge_sequence(frames, cfg);
    rep.branch_histogram = detail::branch_histogram(merged.decisions);
    rep.merged_mm = sequence_metrics(merged.skeletons, gt, {}, false).mpjpe;
    const Sequence smoothed = smooth_skeleton_sequence(merged.skeletons, savgol);
    rep.merged_smoothed_mm = sequence_metrics(smoothed, gt, {}, false).mpjpe;

    NoiseModel second = scenario.noise;
    second.seed = scenario.noise.seed + 1;
    const CorruptedViews run2 = corrupt(gt, rig, second);
    const Sequence smoothed2 = smooth_skeleton_sequence(merge_views(run2, rig, cfg).skeletons, savgol);
    const Sequence ensembled = ensemble_sequences(
        {{"run1", ModelRole::Primary, smoothed}, {"run2", ModelRole::Secondary, smoothed2}}, cfg);
    rep.ensemble_mm = sequence_metrics(ensembled, gt, {}, false).mpjpe;
    return rep;
}

}  // namespace egohand
