#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "egohand/geometry.hpp"
#include "egohand/metrics.hpp"

namespace egohand {

struct WeightPair {
    double primary = 0.5;
    double secondary = 0.5;
};

struct FusionConfig {
    double merge_threshold_mm = 30.0;
    WeightPair ensemble_weights{0.7, 0.3};
    double gap_threshold_mm = 20.0;
    WeightPair gap_weights{0.5, 0.5};
    // Temporal fallback normally scores only the two views of the selected pair.
    bool fallback_all_views = false;
    AlignOptions align;

    void validate() const {
        if (!(merge_threshold_mm > 0.0) || !(gap_threshold_mm > 0.0))
            throw Error(ErrorCode::InvalidParams, "fusion thresholds must be positive");
        for (const auto& w : {ensemble_weights, gap_weights}) {
            if (!(w.primary >= 0.0 && w.secondary >= 0.0) || std::abs(w.primary + w.secondary - 1.0) > 1e-12)
                throw Error(ErrorCode::InvalidParams, "weight pairs must be non-negative and sum to 1");
        }
    }
};

struct ViewSkeleton {
    std::string view_id;
    Skeleton skeleton;
};

enum class MergeBranch { MeanOfPair, TemporalFallback, Passthrough, Missing };

inline const char* to_string(MergeBranch b) {
    switch (b) {
        case MergeBranch::MeanOfPair: return "mean_of_pair";
        case MergeBranch::TemporalFallback: return "temporal_fallback";
        case MergeBranch::Passthrough: return "passthrough";
        case MergeBranch::Missing: return "missing";
    }
    return "unknown";
}

/// Audit record of one merge_frame call.
struct MergeDecision {
    std::uint64_t frame_id = 0;
    MergeBranch branch = MergeBranch::Missing;
    std::vector<std::string> selected_views;    // the pair, the single view, or empty
    std::optional<double> pair_mpjpe_mm;
    std::optional<std::string> chosen_view;     // TemporalFallback / Passthrough
    std::vector<std::pair<std::string, double>> fallback_pa_mpjpe;
    bool no_previous = false;   // above threshold, mean used because no previous output existed
    bool interpolated = false;  // Missing frame filled by merge_sequence

    friend bool operator==(const MergeDecision&, const MergeDecision&) = default;
};

struct FrameMerge {
    std::optional<Skeleton> skeleton;  // empty for Missing
    MergeDecision decision;
};

inline Skeleton joint_mean(const Skeleton& a, const Skeleton& b) {
    require_compatible(a, b);
    Skeleton out;
    out.frame = a.frame;
    out.joints.reserve(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) out.joints.push_back((a.joints[j] + b.joints[j]) * 0.5);
    return out;
}

/// Picks the most mutually consistent pair of views. Below the threshold their
/// mean is returned; above it, the candidate with the lowest PA-MPJPE to the
/// previous output wins. The result does not depend on the order of `views`.
inline FrameMerge merge_frame(std::uint64_t frame_id, std::vector<ViewSkeleton> views,
                              const std::optional<Skeleton>& prev, const FusionConfig& cfg = {}) {
    FrameMerge out;
    out.decision.frame_id = frame_id;

    std::sort(views.begin(), views.end(),
              [](const ViewSkeleton& a, const ViewSkeleton& b) { return a.view_id < b.view_id; });
    for (std::size_t i = 0; i < views.size(); ++i) {
        if (!views[i].skeleton.frame.is_world())
            throw Error(ErrorCode::FrameMismatch, "merge_frame expects world-frame skeletons");
        if (i > 0 && views[i].view_id == views[i - 1].view_id)
            throw Error(ErrorCode::InvariantViolation, "duplicate view '" + views[i].view_id + "'");
        if (views[i].skeleton.size() != views.front().skeleton.size())
            throw Error(ErrorCode::JointCountMismatch, "views disagree on joint count");
    }
    if (prev) {
        if (!prev->frame.is_world()) throw Error(ErrorCode::FrameMismatch, "previous output not in world frame");
        if (!views.empty() && prev->size() != views.front().skeleton.size())
            throw Error(ErrorCode::JointCountMismatch, "previous output joint count differs");
    }

    if (views.empty()) {
        out.decision.branch = MergeBranch::Missing;
        return out;
    }
    if (views.size() == 1) {
        out.decision.branch = MergeBranch::Passthrough;
        out.decision.selected_views = {views.front().view_id};
        out.decision.chosen_view = views.front().view_id;
        out.skeleton = views.front().skeleton;
        return out;
    }

    std::size_t best_i = 0, best_j = 1;
    double best = mpjpe(views[0].skeleton, views[1].skeleton);
    for (std::size_t i = 0; i < views.size(); ++i) {
        for (std::size_t j = i + 1; j < views.size(); ++j) {
            const double e = mpjpe(views[i].skeleton, views[j].skeleton);
            if (e < best) {
                best = e;
                best_i = i;
                best_j = j;
            }
        }
    }
    const auto& a = views[best_i];
    const auto& b = views[best_j];
    out.decision.selected_views = {a.view_id, b.view_id};
    out.decision.pair_mpjpe_mm = best;

    if (best < cfg.merge_threshold_mm || !prev) {
        out.decision.branch = MergeBranch::MeanOfPair;
        out.decision.no_previous = !(best < cfg.merge_threshold_mm);
        out.skeleton = joint_mean(a.skeleton, b.skeleton);
        return out;
    }

    std::vector<const ViewSkeleton*> candidates;
    if (cfg.fallback_all_views) {
        for (const auto& v : views) candidates.push_back(&v);
    } else {
        candidates = {&a, &b};
    }
    const ViewSkeleton* chosen = nullptr;
    double chosen_err = 0.0;
    for (const auto* c : candidates) {
        const double e = pa_mpjpe(c->skeleton, *prev, cfg.align);
        out.decision.fallback_pa_mpjpe.emplace_back(c->view_id, e);
        if (!chosen || e < chosen_err) {
            chosen = c;
            chosen_err = e;
        }
    }
    out.decision.branch = MergeBranch::TemporalFallback;
    out.decision.chosen_view = chosen->view_id;
    out.skeleton = chosen->skeleton;
    return out;
}

struct FrameViews {
    std::uint64_t frame_id = 0;
    std::vector<ViewSkeleton> views;
};

struct SequenceMerge {
    Sequence skeletons;
    std::vector<MergeDecision> decisions;
};

/// Runs merge_frame over an ordered video. The previous output handed to each
/// frame is the latest merged (non-missing) result. Missing frames are then
/// linearly interpolated in frame_id between merged neighbours; frames before
/// the first or after the last merged frame copy the nearest one.
inline SequenceMerge merge_sequence(const std::vector<FrameViews>& frames, const FusionConfig& cfg = {}) {
    cfg.validate();
    SequenceMerge out;
    if (frames.empty()) return out;

    std::vector<std::optional<Skeleton>> merged;
    merged.reserve(frames.size());
    std::optional<Skeleton> prev;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (i > 0 && frames[i].frame_id <= frames[i - 1].frame_id)
            throw Error(ErrorCode::InvariantViolation, "frames must be strictly ordered by frame_id");
        auto r = merge_frame(frames[i].frame_id, frames[i].views, prev, cfg);
        if (r.skeleton) prev = r.skeleton;
        merged.push_back(std::move(r.skeleton));
        out.decisions.push_back(std::move(r.decision));
    }

    std::vector<std::size_t> known;
    for (std::size_t i = 0; i < merged.size(); ++i)
        if (merged[i]) known.push_back(i);
    if (known.empty()) throw Error(ErrorCode::InvariantViolation, "no frame in the sequence has any view");

    out.skeletons.resize(frames.size());
    std::size_t k = 0;  // index into known of the first known frame >= i
    for (std::size_t i = 0; i < merged.size(); ++i) {
        while (k < known.size() && known[k] < i) ++k;
        if (merged[i]) {
            out.skeletons[i] = *merged[i];  // copied: later missing frames read it
            continue;
        }
        out.decisions[i].interpolated = true;
        if (k == 0) {
            out.skeletons[i] = *merged[known.front()];
        } else if (k == known.size()) {
            out.skeletons[i] = *merged[known.back()];
        } else {
            const auto& lo = *merged[known[k - 1]];
            const auto& hi = *merged[known[k]];
            const double f0 = static_cast<double>(frames[known[k - 1]].frame_id);
            const double f1 = static_cast<double>(frames[known[k]].frame_id);
            const double w = (static_cast<double>(frames[i].frame_id) - f0) / (f1 - f0);
            Skeleton s;
            s.frame = lo.frame;
            s.joints.reserve(lo.size());
            for (std::size_t j = 0; j < lo.size(); ++j)
                s.joints.push_back(lo.joints[j] + w * (hi.joints[j] - lo.joints[j]));
            out.skeletons[i] = std::move(s);
        }
    }
    return out;
}

/// Weighted joint-wise blend of a primary and a secondary model output. When
/// the two disagree by more than the gap threshold the gap weights apply.
inline Skeleton ensemble_frame(const Skeleton& primary, const Skeleton& secondary, const FusionConfig& cfg = {}) {
    require_compatible(primary, secondary);
    const WeightPair w =
        mpjpe(primary, secondary) > cfg.gap_threshold_mm ? cfg.gap_weights : cfg.ensemble_weights;
    Skeleton out;
    out.frame = primary.frame;
    out.joints.reserve(primary.size());
    // primary + w_s (secondary - primary) == w_p primary + w_s secondary, as w_p + w_s = 1.
    for (std::size_t j = 0; j < primary.size(); ++j)
        out.joints.push_back(primary.joints[j] + w.secondary * (secondary.joints[j] - primary.joints[j]));
    return out;
}

enum class ModelRole { Primary, Secondary };

struct TaggedRun {
    std::string model_id;
    ModelRole role = ModelRole::Primary;
    Sequence frames;
};

namespace detail {

inline Sequence uniform_mean(const std::vector<const Sequence*>& runs) {
    Sequence mean = *runs.front();
    for (std::size_t r = 1; r < runs.size(); ++r) {
        const double inv = 1.0 / static_cast<double>(r + 1);
        for (std::size_t f = 0; f < mean.size(); ++f) {
            require_compatible(mean[f], (*runs[r])[f]);
            for (std::size_t j = 0; j < mean[f].size(); ++j)
                mean[f].joints[j] += ((*runs[r])[f].joints[j] - mean[f].joints[j]) * inv;
        }
    }
    return mean;
}

}  // namespace detail

/// Runs of one role are averaged uniformly; the secondary mean is then folded
/// into the primary mean frame by frame with ensemble_frame.
inline Sequence ensemble_sequences(const std::vector<TaggedRun>& runs, const FusionConfig& cfg = {}) {
    cfg.validate();
    if (runs.empty()) throw Error(ErrorCode::InvalidParams, "ensemble needs at least one run");
    const std::size_t n = runs.front().frames.size();
    std::vector<const Sequence*> primary, secondary;
    for (const auto& r : runs) {
        if (r.frames.size() != n)
            throw Error(ErrorCode::LengthMismatch, "run '" + r.model_id + "' has " + std::to_string(r.frames.size()) +
                                                       " frames, expected " + std::to_string(n));
        (r.role == ModelRole::Primary ? primary : secondary).push_back(&r.frames);
    }
    if (primary.empty()) return detail::uniform_mean(secondary);
    Sequence out = detail::uniform_mean(primary);
    if (secondary.empty()) return out;
    const Sequence sec = detail::uniform_mean(secondary);
    for (std::size_t f = 0; f < n; ++f) out[f] = ensemble_frame(out[f], sec[f], cfg);
    return out;
}

}  // namespace egohand
