#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/SVD>
#include <json.hpp>

#include "egohand/camera.hpp"
#include "egohand/geometry.hpp"
#include "egohand/lift.hpp"

namespace egohand {

using ordered_json = nlohmann::ordered_json;

/// Raw 2.5D fields as stored in a record, flat.
struct Raw25D {
    std::vector<double> kp2d;   // 2J
    std::vector<double> rel3d;  // 3J
    double root_depth = 0.0;
    std::size_t root_index = 0;
    std::optional<std::array<double, 9>> warp_R;  // row-major

    friend bool operator==(const Raw25D&, const Raw25D&) = default;
};

/// One (video, frame, view, model) observation.
struct PredictionRecord {
    std::string video_id;
    std::uint64_t frame_id = 0;
    std::string view_id;
    std::string model_id;
    FrameKind frame = FrameKind::Camera;
    std::vector<double> joints;  // 3J, mm; may be empty when raw is present
    std::optional<Raw25D> raw;

    friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;

    std::string key() const {
        return video_id + "/" + std::to_string(frame_id) + "/" + view_id + "/" + model_id;
    }

    FrameTag frame_tag() const { return frame == FrameKind::World ? FrameTag::world() : FrameTag::camera(view_id); }

    Skeleton skeleton() const {
        Skeleton s;
        s.frame = frame_tag();
        s.joints.reserve(joints.size() / 3);
        for (std::size_t i = 0; i + 2 < joints.size(); i += 3) s.joints.emplace_back(joints[i], joints[i + 1], joints[i + 2]);
        return s;
    }

    void set_skeleton(const Skeleton& s) {
        frame = s.frame.kind;
        joints.clear();
        joints.reserve(3 * s.size());
        for (const auto& p : s.joints) joints.insert(joints.end(), {p.x(), p.y(), p.z()});
    }

    Prediction25D prediction25d() const {
        if (!raw) throw Error(ErrorCode::InvariantViolation, key() + ": no raw 2.5D fields");
        Prediction25D p;
        for (std::size_t i = 0; i + 1 < raw->kp2d.size(); i += 2) p.kp2d.push_back({raw->kp2d[i], raw->kp2d[i + 1]});
        for (std::size_t i = 0; i + 2 < raw->rel3d.size(); i += 3)
            p.rel3d.emplace_back(raw->rel3d[i], raw->rel3d[i + 1], raw->rel3d[i + 2]);
        p.root_depth = raw->root_depth;
        p.root_index = raw->root_index;
        if (raw->warp_R) p.warp_R = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(raw->warp_R->data());
        return p;
    }
};

inline Raw25D to_raw(const Prediction25D& p) {
    Raw25D r;
    for (const auto& k : p.kp2d) r.kp2d.insert(r.kp2d.end(), {k.u, k.v});
    for (const auto& v : p.rel3d) r.rel3d.insert(r.rel3d.end(), {v.x(), v.y(), v.z()});
    r.root_depth = p.root_depth;
    r.root_index = p.root_index;
    if (p.warp_R) {
        std::array<double, 9> m{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m[3 * i + j] = (*p.warp_R)(i, j);
        r.warp_R = m;
    }
    return r;
}

namespace detail {

struct LineContext {
    std::size_t line;
};

inline const ordered_json& field(const ordered_json& obj, const char* name, LineContext ctx) {
    const auto it = obj.find(name);
    if (it == obj.end()) throw ParseError(ctx.line, std::string("missing field '") + name + "'");
    return *it;
}

inline std::string string_field(const ordered_json& obj, const char* name, LineContext ctx) {
    const auto& v = field(obj, name, ctx);
    if (!v.is_string()) throw ParseError(ctx.line, std::string("field '") + name + "' must be a string");
    return v.get<std::string>();
}

inline double number_value(const ordered_json& v, const char* name, LineContext ctx) {
    if (!v.is_number()) throw ParseError(ctx.line, std::string("field '") + name + "' must be numeric");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ParseError(ctx.line, std::string("field '") + name + "' is not finite");
    return x;
}

inline std::vector<double> number_array(const ordered_json& v, const char* name, LineContext ctx) {
    if (!v.is_array()) throw ParseError(ctx.line, std::string("field '") + name + "' must be an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& x : v) out.push_back(number_value(x, name, ctx));
    return out;
}

inline std::uint64_t unsigned_value(const ordered_json& v, const char* name, LineContext ctx) {
    if (!v.is_number_unsigned()) throw ParseError(ctx.line, std::string("field '") + name + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
}

inline Error invariant(const PredictionRecord& r, std::size_t line, const std::string& what) {
    return Error(ErrorCode::InvariantViolation, "line " + std::to_string(line) + " record " + r.key() + ": " + what);
}

}  // namespace detail

/// Parses one record; `line` is used for error reporting only.
inline PredictionRecord parse_record(const std::string& text, std::size_t line) {
    using namespace detail;
    const LineContext ctx{line};
    ordered_json obj;
    try {
        obj = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(line, e.what());
    }
    if (!obj.is_object()) throw ParseError(line, "record must be a JSON object");

    PredictionRecord r;
    r.video_id = string_field(obj, "video_id", ctx);
    r.frame_id = unsigned_value(field(obj, "frame_id", ctx), "frame_id", ctx);
    r.view_id = string_field(obj, "view_id", ctx);
    r.model_id = string_field(obj, "model_id", ctx);
    const std::string frame = string_field(obj, "frame", ctx);
    if (frame == "camera")
        r.frame = FrameKind::Camera;
    else if (frame == "world")
        r.frame = FrameKind::World;
    else
        throw ParseError(line, "field 'frame' must be \"camera\" or \"world\"");

    const bool has_raw = obj.contains("kp2d") || obj.contains("rel3d") || obj.contains("root_depth");
    if (obj.contains("joints"))
        r.joints = number_array(obj["joints"], "joints", ctx);
    else if (!has_raw)
        throw ParseError(line, "missing field 'joints'");

    if (has_raw) {
        Raw25D raw;
        raw.kp2d = number_array(field(obj, "kp2d", ctx), "kp2d", ctx);
        raw.rel3d = number_array(field(obj, "rel3d", ctx), "rel3d", ctx);
        raw.root_depth = number_value(field(obj, "root_depth", ctx), "root_depth", ctx);
        if (obj.contains("root_index")) raw.root_index = unsigned_value(obj["root_index"], "root_index", ctx);
        if (obj.contains("warp_R")) {
            const auto m = number_array(obj["warp_R"], "warp_R", ctx);
            if (m.size() != 9) throw invariant(r, line, "warp_R must have 9 entries");
            std::array<double, 9> a{};
            std::copy(m.begin(), m.end(), a.begin());
            raw.warp_R = a;
        }
        r.raw = std::move(raw);
    }

    if (r.joints.size() % 3 != 0) throw invariant(r, line, "joints length is not divisible by 3");
    if (r.joints.empty() && !r.raw) throw invariant(r, line, "record has no joints");
    if (r.raw) {
        const auto J = r.raw->rel3d.size() / 3;
        if (r.raw->rel3d.size() % 3 != 0 || J == 0) throw invariant(r, line, "rel3d length must be 3J, J >= 1");
        if (r.raw->kp2d.size() != 2 * J) throw invariant(r, line, "kp2d length must be 2J");
        if (!r.joints.empty() && r.joints.size() != 3 * J) throw invariant(r, line, "joints and rel3d disagree on J");
        if (r.raw->root_index >= J) throw invariant(r, line, "root_index out of range");
        if (!(r.raw->root_depth > 0.0)) throw invariant(r, line, "root_depth must be positive");
        if (r.frame != FrameKind::Camera) throw invariant(r, line, "raw 2.5D fields require a camera-frame record");
    }
    return r;
}

inline ordered_json record_to_json(const PredictionRecord& r) {
    ordered_json j;
    j["video_id"] = r.video_id;
    j["frame_id"] = r.frame_id;
    j["view_id"] = r.view_id;
    j["model_id"] = r.model_id;
    j["frame"] = r.frame == FrameKind::World ? "world" : "camera";
    if (!r.joints.empty() || !r.raw) j["joints"] = r.joints;
    if (r.raw) {
        j["kp2d"] = r.raw->kp2d;
        j["rel3d"] = r.raw->rel3d;
        j["root_depth"] = r.raw->root_depth;
        j["root_index"] = r.raw->root_index;
        if (r.raw->warp_R) j["warp_R"] = *r.raw->warp_R;
    }
    return j;
}

/// Line-delimited records. Blank lines are skipped; keys must be unique.
inline std::vector<PredictionRecord> read_predictions(std::istream& is) {
    std::vector<PredictionRecord> out;
    std::set<std::tuple<std::string, std::uint64_t, std::string, std::string>> seen;
    std::string text;
    std::size_t line = 0;
    while (std::getline(is, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        PredictionRecord r = parse_record(text, line);
        if (!seen.emplace(r.video_id, r.frame_id, r.view_id, r.model_id).second)
            throw detail::invariant(r, line, "duplicate (video, frame, view, model) key");
        out.push_back(std::move(r));
    }
    return out;
}

// nlohmann emits doubles with 17 significant digits, which round-trips exactly.
inline void write_predictions(std::ostream& os, const std::vector<PredictionRecord>& records) {
    for (const auto& r : records) os << record_to_json(r).dump() << '\n';
    if (!os) throw Error(ErrorCode::Io, "failed writing prediction stream");
}

inline std::vector<PredictionRecord> read_predictions_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
    return read_predictions(is);
}

inline void write_predictions_file(const std::string& path, const std::vector<PredictionRecord>& records) {
    std::ofstream os(path);
    if (!os) throw Error(ErrorCode::Io, "cannot create '" + path + "'");
    write_predictions(os, records);
}

// ---------------------------------------------------------------------------
// Camera files

struct CameraFile {
    CameraRig cameras;
    std::vector<std::string> warnings;
};

/// Nearest rotation in the Frobenius sense (polar factor), determinant forced to +1.
inline Mat3 nearest_rotation(const Mat3& m) {
    const Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < 0.0) {
        Mat3 u = svd.matrixU();
        u.col(2) *= -1.0;
        r = u * svd.matrixV().transpose();
    }
    return r;
}

namespace detail {

inline double object_number(const ordered_json& obj, const char* name, const std::string& where) {
    const auto it = obj.find(name);
    if (it == obj.end() || !it->is_number())
        throw Error(ErrorCode::InvariantViolation, where + ": missing numeric field '" + name + "'");
    return it->get<double>();
}

}  // namespace detail

inline CameraFile parse_camera_file(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("camera file: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("cameras") || !doc["cameras"].is_array())
        throw Error(ErrorCode::InvariantViolation, "camera file needs a 'cameras' array");

    CameraFile out;
    for (const auto& c : doc["cameras"]) {
        if (!c.is_object() || !c.contains("view_id") || !c["view_id"].is_string())
            throw Error(ErrorCode::InvariantViolation, "camera entry needs a string 'view_id'");
        CameraModel cam;
        cam.view_id = c["view_id"].get<std::string>();
        const std::string where = "camera '" + cam.view_id + "'";
        if (!c.contains("intrinsics") || !c["intrinsics"].is_object())
            throw Error(ErrorCode::InvariantViolation, where + ": missing intrinsics");
        const auto& in = c["intrinsics"];
        cam.intrinsics.fx = detail::object_number(in, "fx", where);
        cam.intrinsics.fy = detail::object_number(in, "fy", where);
        cam.intrinsics.cx = detail::object_number(in, "cx", where);
        cam.intrinsics.cy = detail::object_number(in, "cy", where);
        cam.intrinsics.width = static_cast<int>(detail::object_number(in, "width", where));
        cam.intrinsics.height = static_cast<int>(detail::object_number(in, "height", where));
        cam.intrinsics.validate();

        if (c.contains("distortion")) {
            const auto& d = c["distortion"];
            FisheyeDistortion dist;
            dist.k1 = detail::object_number(d, "k1", where);
            dist.k2 = detail::object_number(d, "k2", where);
            dist.k3 = detail::object_number(d, "k3", where);
            dist.k4 = detail::object_number(d, "k4", where);
            if (d.contains("max_angle")) dist.max_angle = detail::object_number(d, "max_angle", where);
            dist.validate();
            cam.distortion = dist;
        }

        if (!c.contains("extrinsics") || !c["extrinsics"].is_object())
            throw Error(ErrorCode::InvariantViolation, where + ": missing extrinsics");
        const auto& ex = c["extrinsics"];
        if (!ex.contains("R") || !ex["R"].is_array() || ex["R"].size() != 9 || !ex.contains("t") ||
            !ex["t"].is_array() || ex["t"].size() != 3)
            throw Error(ErrorCode::InvariantViolation, where + ": extrinsics need R[9] and t[3]");
        for (int i = 0; i < 9; ++i) {
            if (!ex["R"][i].is_number()) throw Error(ErrorCode::InvariantViolation, where + ": R must be numeric");
            cam.extrinsics.R(i / 3, i % 3) = ex["R"][i].get<double>();
        }
        for (int i = 0; i < 3; ++i) {
            if (!ex["t"][i].is_number()) throw Error(ErrorCode::InvariantViolation, where + ": t must be numeric");
            cam.extrinsics.t(i) = ex["t"][i].get<double>();
        }
        const Mat3& R = cam.extrinsics.R;
        if (!R.allFinite() || !cam.extrinsics.t.allFinite())
            throw Error(ErrorCode::InvariantViolation, where + ": non-finite extrinsics");
        if (R.determinant() <= 0.0) throw Error(ErrorCode::InvariantViolation, where + ": R is not a proper rotation");
        const double deviation = (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff();
        if (deviation > 1e-9) {
            if (deviation > 1e-6)
                out.warnings.push_back(where + ": R deviates from orthonormal by " + std::to_string(deviation) +
                                       ", re-orthonormalized");
            cam.extrinsics.R = nearest_rotation(R);
        }
        out.cameras.push_back(std::move(cam));
    }
    return out;
}

inline std::string camera_file_to_string(const CameraRig& rig) {
    ordered_json doc;
    doc["cameras"] = ordered_json::array();
    for (const auto& cam : rig) {
        ordered_json c;
        c["view_id"] = cam.view_id;
        c["intrinsics"] = {{"fx", cam.intrinsics.fx}, {"fy", cam.intrinsics.fy}, {"cx", cam.intrinsics.cx},
                           {"cy", cam.intrinsics.cy}, {"width", cam.intrinsics.width},
                           {"height", cam.intrinsics.height}};
        if (cam.distortion)
            c["distortion"] = {{"k1", cam.distortion->k1}, {"k2", cam.distortion->k2}, {"k3", cam.distortion->k3},
                               {"k4", cam.distortion->k4}, {"max_angle", cam.distortion->max_angle}};
        std::vector<double> R(9), t(3);
        for (int i = 0; i < 9; ++i) R[i] = cam.extrinsics.R(i / 3, i % 3);
        for (int i = 0; i < 3; ++i) t[i] = cam.extrinsics.t(i);
        c["extrinsics"] = {{"R", R}, {"t", t}};
        doc["cameras"].push_back(std::move(c));
    }
    return doc.dump(2) + "\n";
}

inline CameraFile read_camera_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_camera_file(ss.str());
}

inline void write_camera_file(const std::string& path, const CameraRig& rig) {
    std::ofstream os(path);
    if (!os) throw Error(ErrorCode::Io, "cannot create '" + path + "'");
    os << camera_file_to_string(rig);
    if (!os) throw Error(ErrorCode::Io, "failed writing '" + path + "'");
}

}  // namespace egohand
