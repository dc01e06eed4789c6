#pragma once

#include <optional>
#include <string>
#include <vector>

#include "egohand/geometry.hpp"
#include "egohand/preprocess.hpp"

namespace egohand {

struct CameraModel {
    std::string view_id;
    Intrinsics intrinsics;
    std::optional<FisheyeDistortion> distortion;  // absent: pinhole
    Extrinsics extrinsics;

    SourceCamera source() const { return {intrinsics, distortion}; }
};

using CameraRig = std::vector<CameraModel>;

inline const CameraModel& find_camera(const CameraRig& rig, const std::string& view_id) {
    for (const auto& c : rig)
        if (c.view_id == view_id) return c;
    throw Error(ErrorCode::InvariantViolation, "no camera for view '" + view_id + "'");
}

}  // namespace egohand
