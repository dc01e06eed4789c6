#pragma once

#include <cmath>
#include <vector>

#include <Eigen/SVD>

#include "egohand/geometry.hpp"

namespace egohand {

/// x -> scale * R * x + t
struct SimilarityTransform {
    double scale = 1.0;
    Mat3 R = Mat3::Identity();
    Vec3 t = Vec3::Zero();
    // Set when the source points span fewer than two dimensions; the transform is
    // then the centroid-difference translation only.
    bool degenerate = false;

    Vec3 apply(const Vec3& x) const { return scale * (R * x) + t; }

    Skeleton apply(const Skeleton& s) const {
        Skeleton out;
        out.frame = s.frame;
        out.joints.reserve(s.size());
        for (const auto& p : s.joints) out.joints.push_back(apply(p));
        return out;
    }
};

struct AlignOptions {
    bool with_scale = true;
};

inline double mpjpe(const Skeleton& a, const Skeleton& b) {
    require_compatible(a, b);
    if (a.size() == 0) throw Error(ErrorCode::JointCountMismatch, "empty skeleton");
    double sum = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) sum += (a.joints[j] - b.joints[j]).norm();
    return sum / static_cast<double>(a.size());
}

inline double squared_error_sum(const Skeleton& a, const Skeleton& b) {
    require_compatible(a, b);
    double sum = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) sum += (a.joints[j] - b.joints[j]).squaredNorm();
    return sum;
}

/// Least-squares similarity transform taking src onto dst (Umeyama 1991).
/// Reflections are excluded by flipping the sign tied to the smallest singular
/// value of the cross-covariance.
inline SimilarityTransform umeyama_align(const Skeleton& src, const Skeleton& dst, AlignOptions opts = {}) {
    if (src.size() != dst.size())
        throw Error(ErrorCode::JointCountMismatch,
                    std::to_string(src.size()) + " vs " + std::to_string(dst.size()));
    if (src.size() < 3) throw Error(ErrorCode::InvalidParams, "umeyama_align needs at least 3 joints");

    const auto n = static_cast<double>(src.size());
    Vec3 mu_src = Vec3::Zero();
    Vec3 mu_dst = Vec3::Zero();
    for (std::size_t j = 0; j < src.size(); ++j) {
        mu_src += src.joints[j];
        mu_dst += dst.joints[j];
    }
    mu_src /= n;
    mu_dst /= n;

    Mat3 cov = Mat3::Zero();
    Mat3 src_scatter = Mat3::Zero();
    double var_src = 0.0;
    for (std::size_t j = 0; j < src.size(); ++j) {
        const Vec3 a = src.joints[j] - mu_src;
        const Vec3 b = dst.joints[j] - mu_dst;
        cov += b * a.transpose();
        src_scatter += a * a.transpose();
        var_src += a.squaredNorm();
    }
    cov /= n;
    var_src /= n;

    SimilarityTransform out;

    const Eigen::JacobiSVD<Mat3> src_svd(src_scatter);
    const auto sv = src_svd.singularValues();
    if (!(sv(0) > 0.0) || sv(1) <= 1e-12 * sv(0)) {
        out.degenerate = true;
        out.t = mu_dst - mu_src;
        return out;
    }

    const Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Mat3& U = svd.matrixU();
    const Mat3& V = svd.matrixV();
    Vec3 signs(1.0, 1.0, 1.0);
    if (U.determinant() * V.determinant() < 0.0) signs(2) = -1.0;

    out.R = U * signs.asDiagonal() * V.transpose();
    out.scale = opts.with_scale ? svd.singularValues().dot(signs) / var_src : 1.0;
    if (!(out.scale > 0.0)) {
        // Anti-correlated configurations can drive the trace negative; keep the
        // best rotation and drop the scale.
        out.scale = 1.0;
        out.degenerate = true;
    }
    out.t = mu_dst - out.scale * (out.R * mu_src);
    return out;
}

inline double pa_mpjpe(const Skeleton& pred, const Skeleton& gt, AlignOptions opts = {}) {
    require_compatible(pred, gt);
    return mpjpe(umeyama_align(pred, gt, opts).apply(pred), gt);
}

struct MetricReport {
    double mpjpe = 0.0;
    double pa_mpjpe = 0.0;
    std::vector<double> per_joint;
    std::vector<double> per_frame;
    std::vector<double> per_frame_pa;
};

/// Per-frame MPJPE and PA-MPJPE over two aligned sequences; headline values
/// are means over frames. PA values stay empty/zero when with_pa is false.
inline MetricReport sequence_metrics(const Sequence& pred, const Sequence& gt, AlignOptions opts = {},
                                     bool with_pa = true) {
    if (pred.size() != gt.size())
        throw Error(ErrorCode::LengthMismatch,
                    std::to_string(pred.size()) + " vs " + std::to_string(gt.size()) + " frames");
    MetricReport r;
    if (pred.empty()) return r;

    const std::size_t J = gt.front().size();
    r.per_joint.assign(J, 0.0);
    r.per_frame.reserve(pred.size());
    r.per_frame_pa.reserve(pred.size());
    for (std::size_t f = 0; f < pred.size(); ++f) {
        require_compatible(pred[f], gt[f]);
        if (gt[f].size() != J) throw Error(ErrorCode::JointCountMismatch, "joint count changes within sequence");
        r.per_frame.push_back(mpjpe(pred[f], gt[f]));
        if (with_pa) r.per_frame_pa.push_back(pa_mpjpe(pred[f], gt[f], opts));
        for (std::size_t j = 0; j < J; ++j) r.per_joint[j] += (pred[f].joints[j] - gt[f].joints[j]).norm();
    }
    const auto frames = static_cast<double>(pred.size());
    for (auto& v : r.per_joint) v /= frames;
    for (double v : r.per_frame) r.mpjpe += v;
    for (double v : r.per_frame_pa) r.pa_mpjpe += v;
    r.mpjpe /= frames;
    r.pa_mpjpe /= frames;
    return r;
}

}  // namespace egohand
