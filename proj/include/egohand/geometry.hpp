#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "egohand/error.hpp"

namespace egohand {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr std::size_t kDefaultJointCount = 21;
inline constexpr double kMinDepthMm = 1e-9;

struct Pixel {
    double u = 0.0;
    double v = 0.0;
};

enum class FrameKind { Camera, World };

/// Coordinate frame a skeleton is expressed in. Camera frames are keyed by view id.
struct FrameTag {
    FrameKind kind = FrameKind::World;
    std::string view_id;

    static FrameTag world() { return {FrameKind::World, {}}; }
    static FrameTag camera(std::string view) { return {FrameKind::Camera, std::move(view)}; }

    bool is_world() const { return kind == FrameKind::World; }

    friend bool operator==(const FrameTag& a, const FrameTag& b) {
        if (a.kind != b.kind) return false;
        return a.kind == FrameKind::World || a.view_id == b.view_id;
    }
};

inline std::string describe(const FrameTag& f) {
    return f.is_world() ? std::string("world") : "camera(" + f.view_id + ")";
}

/// J joints in millimeters, tagged with the frame they live in.
struct Skeleton {
    std::vector<Vec3> joints;
    FrameTag frame = FrameTag::world();

    Skeleton() = default;
    Skeleton(std::vector<Vec3> j, FrameTag f) : joints(std::move(j)), frame(std::move(f)) {}

    std::size_t size() const { return joints.size(); }

    bool all_finite() const {
        for (const auto& p : joints)
            if (!p.allFinite()) return false;
        return true;
    }
};

using Sequence = std::vector<Skeleton>;

/// Throws unless both skeletons share a frame tag and joint count.
inline void require_compatible(const Skeleton& a, const Skeleton& b) {
    if (!(a.frame == b.frame))
        throw Error(ErrorCode::FrameMismatch, describe(a.frame) + " vs " + describe(b.frame));
    if (a.size() != b.size())
        throw Error(ErrorCode::JointCountMismatch,
                    std::to_string(a.size()) + " vs " + std::to_string(b.size()));
}

struct Intrinsics {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 1;
    int height = 1;

    Mat3 K() const {
        Mat3 k;
        k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
        return k;
    }

    Mat3 K_inv() const {
        Mat3 k;
        k << 1.0 / fx, 0.0, -cx / fx, 0.0, 1.0 / fy, -cy / fy, 0.0, 0.0, 1.0;
        return k;
    }

    void validate() const {
        if (!(fx > 0.0) || !(fy > 0.0))
            throw Error(ErrorCode::InvalidParams, "focal lengths must be positive");
        if (width <= 0 || height <= 0)
            throw Error(ErrorCode::InvalidParams, "image size must be positive");
        if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height))
            throw Error(ErrorCode::InvalidParams, "principal point outside image");
    }
};

inline bool is_rotation(const Mat3& r, double tol = 1e-9) {
    if (!r.allFinite()) return false;
    if ((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
    return std::abs(r.determinant() - 1.0) <= tol;
}

/// X_cam = R * X_world + t
struct Extrinsics {
    Mat3 R = Mat3::Identity();
    Vec3 t = Vec3::Zero();

    Vec3 world_to_camera(const Vec3& x) const { return R * x + t; }
    Vec3 camera_to_world(const Vec3& x) const { return R.transpose() * (x - t); }
};

inline Pixel project(const Vec3& p, const Intrinsics& intr) {
    if (!(p.z() > kMinDepthMm))
        throw Error(ErrorCode::NonPositiveDepth, "project: z = " + std::to_string(p.z()));
    return {intr.fx * (p.x() / p.z()) + intr.cx, intr.fy * (p.y() / p.z()) + intr.cy};
}

inline Vec3 unproject(const Pixel& px, double depth, const Intrinsics& intr) {
    if (!(depth > kMinDepthMm))
        throw Error(ErrorCode::NonPositiveDepth, "unproject: depth = " + std::to_string(depth));
    return {(px.u - intr.cx) / intr.fx * depth, (px.v - intr.cy) / intr.fy * depth, depth};
}

inline Skeleton to_world(const Skeleton& s, const Extrinsics& ext) {
    if (s.frame.is_world()) throw Error(ErrorCode::FrameMismatch, "to_world: skeleton already in world frame");
    Skeleton out;
    out.frame = FrameTag::world();
    out.joints.reserve(s.size());
    for (const auto& p : s.joints) out.joints.push_back(ext.camera_to_world(p));
    return out;
}

inline Skeleton to_camera(const Skeleton& s, const Extrinsics& ext, const std::string& view_id) {
    if (!s.frame.is_world()) throw Error(ErrorCode::FrameMismatch, "to_camera: skeleton not in world frame");
    Skeleton out;
    out.frame = FrameTag::camera(view_id);
    out.joints.reserve(s.size());
    for (const auto& p : s.joints) out.joints.push_back(ext.world_to_camera(p));
    return out;
}

inline Mat3 axis_angle(const Vec3& unit_axis, double angle) {
    return Eigen::AngleAxisd(angle, unit_axis).toRotationMatrix();
}

/// Minimal rotation taking unit vector a onto unit vector b. For antiparallel
/// inputs a half-turn about a deterministic axis orthogonal to a is returned.
inline Mat3 rotation_between(const Vec3& a, const Vec3& b) {
    constexpr double kUnitTol = 1e-9;
    if (std::abs(a.norm() - 1.0) > kUnitTol || std::abs(b.norm() - 1.0) > kUnitTol)
        throw Error(ErrorCode::InvalidParams, "rotation_between: inputs must be unit vectors");

    const Vec3 axis = a.cross(b);
    const double s = axis.norm();
    const double c = a.dot(b);
    const double angle = std::atan2(s, c);

    if (std::abs(angle - M_PI) < 1e-6) {
        // Cross a with the basis vector of smallest index that is not nearly parallel to it.
        Vec3 ortho = Vec3::Zero();
        for (int i = 0; i < 3; ++i) {
            const Vec3 e = Vec3::Unit(i);
            const Vec3 candidate = a.cross(e);
            if (candidate.norm() > 0.5) {
                ortho = candidate.normalized();
                break;
            }
        }
        return axis_angle(ortho, M_PI);
    }
    if (s == 0.0) return Mat3::Identity();

    // Rodrigues: R = I + [k]x sin + [k]x^2 (1 - cos)
    const Vec3 k = axis / s;
    Mat3 kx;
    kx << 0.0, -k.z(), k.y(), k.z(), 0.0, -k.x(), -k.y(), k.x(), 0.0;
    return Mat3::Identity() + kx * s + kx * kx * (1.0 - c);
}

}  // namespace egohand
