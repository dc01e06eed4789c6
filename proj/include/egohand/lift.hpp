#pragma once

#include <optional>
#include <vector>

#include "egohand/geometry.hpp"

namespace egohand {

/// Network-style output: 2D keypoints in the (possibly warped) crop camera,
/// root-relative 3D joints and the root's absolute depth.
struct Prediction25D {
    std::vector<Pixel> kp2d;
    std::vector<Vec3> rel3d;
    double root_depth = 0.0;
    std::size_t root_index = 0;
    // Virtual rotation applied at crop time (original camera -> virtual camera).
    std::optional<Mat3> warp_R;

    void validate() const {
        if (rel3d.empty()) throw Error(ErrorCode::InvariantViolation, "rel3d is empty");
        if (root_index >= rel3d.size() || root_index >= kp2d.size())
            throw Error(ErrorCode::InvariantViolation, "root_index out of range");
        if (rel3d[root_index].cwiseAbs().maxCoeff() > 1e-9)
            throw Error(ErrorCode::InvariantViolation, "root joint of rel3d must be the origin");
        if (!(root_depth > 0.0)) throw Error(ErrorCode::NonPositiveDepth, "root_depth must be positive");
        if (warp_R && !is_rotation(*warp_R)) throw Error(ErrorCode::InvariantViolation, "warp_R is not a rotation");
    }
};

/// Absolute camera-frame skeleton from the root keypoint, root depth and
/// root-relative joints. Only the root's 2D keypoint is consumed.
inline Skeleton lift(const Prediction25D& p, const Intrinsics& intr, const std::string& view_id = {}) {
    p.validate();
    const Vec3 root = unproject(p.kp2d[p.root_index], p.root_depth, intr);
    Skeleton out;
    out.frame = FrameTag::camera(view_id);
    out.joints.reserve(p.rel3d.size());
    for (const auto& r : p.rel3d) {
        const Vec3 joint = root + r;
        out.joints.push_back(p.warp_R ? Vec3(p.warp_R->transpose() * joint) : joint);
    }
    return out;
}

/// Inverse of lift: expresses a camera-frame skeleton in the 2.5D representation,
/// optionally inside a virtual camera rotated by warp_R.
inline Prediction25D decompose(const Skeleton& s, const Intrinsics& intr, std::size_t root_index = 0,
                               std::optional<Mat3> warp_R = std::nullopt) {
    if (s.frame.is_world()) throw Error(ErrorCode::FrameMismatch, "decompose expects a camera-frame skeleton");
    if (root_index >= s.size()) throw Error(ErrorCode::InvariantViolation, "root_index out of range");
    Prediction25D p;
    p.root_index = root_index;
    p.warp_R = warp_R;
    std::vector<Vec3> joints = s.joints;
    if (warp_R)
        for (auto& j : joints) j = *warp_R * j;
    const Vec3 root = joints[root_index];
    p.root_depth = root.z();
    p.kp2d.reserve(joints.size());
    p.rel3d.reserve(joints.size());
    for (const auto& j : joints) {
        p.kp2d.push_back(j.z() > kMinDepthMm ? project(j, intr) : Pixel{});
        p.rel3d.push_back(j - root);
    }
    if (!(p.root_depth > kMinDepthMm)) throw Error(ErrorCode::NonPositiveDepth, "root behind camera");
    return p;
}

}  // namespace egohand
