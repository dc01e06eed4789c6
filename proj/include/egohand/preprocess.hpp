#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "egohand/geometry.hpp"

namespace egohand {

/// Equidistant fisheye model: theta_d = theta (1 + k1 theta^2 + k2 theta^4 + k3 theta^6 + k4 theta^8).
struct FisheyeDistortion {
    double k1 = 0.0;
    double k2 = 0.0;
    double k3 = 0.0;
    double k4 = 0.0;
    // Largest incidence angle (rad) the model is validated for.
    double max_angle = 80.0 * M_PI / 180.0;

    double distorted_angle(double theta) const {
        const double t2 = theta * theta;
        return theta * (1.0 + t2 * (k1 + t2 * (k2 + t2 * (k3 + t2 * k4))));
    }

    double distorted_angle_derivative(double theta) const {
        const double t2 = theta * theta;
        return 1.0 + t2 * (3.0 * k1 + t2 * (5.0 * k2 + t2 * (7.0 * k3 + t2 * 9.0 * k4)));
    }

    bool is_monotone(int samples = 2000) const {
        for (int i = 0; i <= samples; ++i) {
            const double theta = max_angle * i / samples;
            if (!(distorted_angle_derivative(theta) > 0.0)) return false;
        }
        return true;
    }

    void validate() const {
        if (!std::isfinite(k1) || !std::isfinite(k2) || !std::isfinite(k3) || !std::isfinite(k4))
            throw Error(ErrorCode::InvalidParams, "distortion coefficients must be finite");
        if (!(max_angle > 0.0 && max_angle < M_PI))
            throw Error(ErrorCode::InvalidParams, "max_angle must lie in (0, pi)");
        if (!is_monotone())
            throw Error(ErrorCode::InvalidParams, "distortion model is not monotone up to max_angle");
    }
};

inline Vec2 fisheye_distort(const Vec2& p, const FisheyeDistortion& dist) {
    const double r = p.norm();
    if (r < 1e-12) return p;
    const double theta = std::atan(r);
    return (dist.distorted_angle(theta) / r) * p;
}

struct UndistortOptions {
    double tolerance = 1e-10;
    int max_iterations = 50;
};

/// Inverts fisheye_distort by Newton iteration on theta_d(theta).
inline Vec2 fisheye_undistort(const Vec2& pd, const FisheyeDistortion& dist, UndistortOptions opts = {},
                              int* iterations_used = nullptr) {
    const double rd = pd.norm();
    if (iterations_used) *iterations_used = 0;
    if (rd < 1e-12) return pd;
    if (rd > dist.distorted_angle(dist.max_angle))
        throw Error(ErrorCode::OutOfModelRange, "distorted radius " + std::to_string(rd) + " beyond model range");

    // theta_d is monotone on [0, max_angle], so the root stays bracketed; a
    // Newton step leaving the bracket is replaced by bisection.
    double lo = 0.0, hi = dist.max_angle;
    double theta = std::min(rd, hi);
    double residual = dist.distorted_angle(theta) - rd;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        if (residual > 0.0) hi = theta; else lo = theta;
        double next = theta - residual / dist.distorted_angle_derivative(theta);
        if (!(next >= lo && next <= hi)) next = 0.5 * (lo + hi);
        const double step = next - theta;
        theta = next;
        residual = dist.distorted_angle(theta) - rd;
        if (std::abs(step) < opts.tolerance) break;
    }
    if (iterations_used) *iterations_used = it + 1;
    if (it == opts.max_iterations || !std::isfinite(theta)) throw NoConvergence(std::abs(residual), opts.max_iterations);
    if (theta < 0.0 || theta >= M_PI / 2)
        throw Error(ErrorCode::OutOfModelRange, "inverted angle outside the forward hemisphere");
    return (std::tan(theta) / rd) * pd;
}

/// Source-pixel lookup for every destination pixel, with a validity mask.
struct RectifyMap {
    int width = 0;
    int height = 0;
    std::vector<double> xy;       // row-major (x, y) pairs
    std::vector<std::uint8_t> mask;  // 1 = valid

    RectifyMap() = default;
    RectifyMap(int w, int h) : width(w), height(h), xy(2 * std::size_t(w) * h, 0.0), mask(std::size_t(w) * h, 0) {}

    std::size_t index(int u, int v) const { return std::size_t(v) * width + u; }
    Vec2 at(int u, int v) const {
        const auto i = index(u, v);
        return {xy[2 * i], xy[2 * i + 1]};
    }
    void set(int u, int v, const Vec2& p, bool valid) {
        const auto i = index(u, v);
        xy[2 * i] = p.x();
        xy[2 * i + 1] = p.y();
        mask[i] = valid ? 1 : 0;
    }
    bool valid(int u, int v) const { return mask[index(u, v)] != 0; }
};

struct SourceCamera {
    Intrinsics intrinsics;
    // Absent for a plain pinhole source.
    std::optional<FisheyeDistortion> distortion;
};

inline RectifyMap build_rectify_map(const SourceCamera& src, const Intrinsics& dst) {
    src.intrinsics.validate();
    dst.validate();
    if (src.distortion) src.distortion->validate();

    RectifyMap map(dst.width, dst.height);
    const double max_x = src.intrinsics.width - 1;
    const double max_y = src.intrinsics.height - 1;
    const double max_r = src.distortion ? std::tan(src.distortion->max_angle) : 0.0;
    for (int v = 0; v < dst.height; ++v) {
        for (int u = 0; u < dst.width; ++u) {
            Vec2 ray((u - dst.cx) / dst.fx, (v - dst.cy) / dst.fy);
            bool in_model = true;
            if (src.distortion) {
                in_model = ray.norm() <= max_r;
                ray = fisheye_distort(ray, *src.distortion);
            }
            const Vec2 s(src.intrinsics.fx * ray.x() + src.intrinsics.cx,
                         src.intrinsics.fy * ray.y() + src.intrinsics.cy);
            const bool inside = s.x() >= 0.0 && s.x() <= max_x && s.y() >= 0.0 && s.y() <= max_y;
            map.set(u, v, s, in_model && inside);
        }
    }
    return map;
}

/// Interleaved H x W x C image of reals.
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<double> data;

    Image() = default;
    Image(int w, int h, int c) : width(w), height(h), channels(c), data(std::size_t(w) * h * c, 0.0) {}

    double& operator()(int u, int v, int c) { return data[(std::size_t(v) * width + u) * channels + c]; }
    double operator()(int u, int v, int c) const { return data[(std::size_t(v) * width + u) * channels + c]; }
};

struct RemapResult {
    Image image;
    std::vector<std::uint8_t> mask;
};

inline RemapResult remap_bilinear(const Image& img, const RectifyMap& map) {
    if (map.xy.size() != 2 * map.mask.size() || map.mask.size() != std::size_t(map.width) * map.height)
        throw Error(ErrorCode::DimensionMismatch, "rectify map buffers do not match its size");
    if (img.data.size() != std::size_t(img.width) * img.height * img.channels)
        throw Error(ErrorCode::DimensionMismatch, "image buffer does not match its size");

    RemapResult out{Image(map.width, map.height, img.channels), std::vector<std::uint8_t>(map.mask.size(), 0)};
    for (int v = 0; v < map.height; ++v) {
        for (int u = 0; u < map.width; ++u) {
            if (!map.valid(u, v)) continue;
            const Vec2 s = map.at(u, v);
            if (!(s.x() >= 0.0 && s.x() <= img.width - 1 && s.y() >= 0.0 && s.y() <= img.height - 1)) continue;
            const int x0 = static_cast<int>(std::floor(s.x()));
            const int y0 = static_cast<int>(std::floor(s.y()));
            const int x1 = std::min(x0 + 1, img.width - 1);
            const int y1 = std::min(y0 + 1, img.height - 1);
            const double ax = s.x() - x0;
            const double ay = s.y() - y0;
            for (int c = 0; c < img.channels; ++c) {
                const double top = img(x0, y0, c) + ax * (img(x1, y0, c) - img(x0, y0, c));
                const double bottom = img(x0, y1, c) + ax * (img(x1, y1, c) - img(x0, y1, c));
                out.image(u, v, c) = top + ay * (bottom - top);
            }
            out.mask[map.index(u, v)] = 1;
        }
    }
    return out;
}

// Flat binary layout: "HFMAP1", u32 width, u32 height (little endian), row-major
// float64 (x, y) pairs, row-major u8 mask.
inline constexpr char kRectifyMapMagic[6] = {'H', 'F', 'M', 'A', 'P', '1'};

inline void write_rectify_map(std::ostream& os, const RectifyMap& map) {
    static_assert(sizeof(double) == 8);
    auto put_u32 = [&](std::uint32_t x) {
        const unsigned char b[4] = {static_cast<unsigned char>(x), static_cast<unsigned char>(x >> 8),
                                    static_cast<unsigned char>(x >> 16), static_cast<unsigned char>(x >> 24)};
        os.write(reinterpret_cast<const char*>(b), 4);
    };
    os.write(kRectifyMapMagic, 6);
    put_u32(static_cast<std::uint32_t>(map.width));
    put_u32(static_cast<std::uint32_t>(map.height));
    for (double d : map.xy) {
        std::uint64_t bits;
        std::memcpy(&bits, &d, 8);
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
        os.write(reinterpret_cast<const char*>(b), 8);
    }
    os.write(reinterpret_cast<const char*>(map.mask.data()), static_cast<std::streamsize>(map.mask.size()));
    if (!os) throw Error(ErrorCode::Io, "failed writing rectify map");
}

inline RectifyMap read_rectify_map(std::istream& is) {
    char magic[6];
    if (!is.read(magic, 6) || std::memcmp(magic, kRectifyMapMagic, 6) != 0)
        throw Error(ErrorCode::InvariantViolation, "bad rectify map magic");
    auto get_u32 = [&]() {
        unsigned char b[4];
        if (!is.read(reinterpret_cast<char*>(b), 4)) throw Error(ErrorCode::InvariantViolation, "truncated header");
        return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 | std::uint32_t(b[3]) << 24;
    };
    const auto w = get_u32();
    const auto h = get_u32();
    if (w == 0 || h == 0 || w > (1u << 16) || h > (1u << 16))
        throw Error(ErrorCode::InvariantViolation, "implausible rectify map size");
    RectifyMap map(static_cast<int>(w), static_cast<int>(h));
    for (double& d : map.xy) {
        unsigned char b[8];
        if (!is.read(reinterpret_cast<char*>(b), 8)) throw Error(ErrorCode::InvariantViolation, "truncated map data");
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= std::uint64_t(b[i]) << (8 * i);
        std::memcpy(&d, &bits, 8);
    }
    if (!is.read(reinterpret_cast<char*>(map.mask.data()), static_cast<std::streamsize>(map.mask.size())))
        throw Error(ErrorCode::InvariantViolation, "truncated map mask");
    return map;
}

struct VirtualRotation {
    Mat3 R;  // original camera -> virtual camera looking at the hand
    Mat3 H;  // homography K R K^-1 on pixel coordinates
};

/// Rotates the camera so the ray through bbox_center becomes the optical axis.
/// Output intrinsics equal the input ones.
inline VirtualRotation virtual_rotation_warp(const Intrinsics& intr, const Pixel& bbox_center) {
    if (!(bbox_center.u >= 0.0 && bbox_center.u < intr.width && bbox_center.v >= 0.0 && bbox_center.v < intr.height))
        throw Error(ErrorCode::InvalidParams, "bbox center outside image");
    const Vec3 ray = (intr.K_inv() * Vec3(bbox_center.u, bbox_center.v, 1.0)).normalized();
    const Mat3 R = rotation_between(ray, Vec3::UnitZ());
    return {R, intr.K() * R * intr.K_inv()};
}

inline Pixel apply_homography(const Mat3& H, const Pixel& p) {
    const Vec3 q = H * Vec3(p.u, p.v, 1.0);
    return {q.x() / q.z(), q.y() / q.z()};
}

struct BBox {
    double cx = 0.0;
    double cy = 0.0;
    double w = 1.0;
    double h = 1.0;
};

struct CropPolicy {
    double expand_scale = 1.3;
    double no_expand_scale = 1.0;
    double small_hand_diag_px = 80.0;
    double overlap_frac_threshold = 0.2;

    void validate() const {
        if (!(expand_scale >= no_expand_scale && no_expand_scale >= 1.0))
            throw Error(ErrorCode::InvalidParams, "crop policy requires expand_scale >= no_expand_scale >= 1");
    }
};

struct VideoCropStats {
    double median_bbox_diag_px = 0.0;
    double overlap_fraction = 0.0;
};

/// Small hands or frequent hand-hand overlap keep the tight crop; otherwise expand.
inline double crop_scale_for_video(const VideoCropStats& stats, const CropPolicy& policy = {}) {
    if (!(stats.overlap_fraction >= 0.0 && stats.overlap_fraction <= 1.0))
        throw Error(ErrorCode::InvalidParams, "overlap_fraction must lie in [0, 1]");
    if (stats.median_bbox_diag_px < policy.small_hand_diag_px ||
        stats.overlap_fraction > policy.overlap_frac_threshold)
        return policy.no_expand_scale;
    return policy.expand_scale;
}

/// Scales the box about its center, then shrinks/shifts it to fit inside a
/// width x height image. The center moves only when the box would cross an edge.
inline BBox enlarge_bbox(const BBox& b, double scale, int width, int height) {
    if (!(scale >= 1.0)) throw Error(ErrorCode::InvalidParams, "enlarge scale must be >= 1");
    BBox out = b;
    out.w = std::min(b.w * scale, static_cast<double>(width));
    out.h = std::min(b.h * scale, static_cast<double>(height));
    out.cx = std::clamp(b.cx, out.w / 2.0, width - out.w / 2.0);
    out.cy = std::clamp(b.cy, out.h / 2.0, height - out.h / 2.0);
    return out;
}

}  // namespace egohand
