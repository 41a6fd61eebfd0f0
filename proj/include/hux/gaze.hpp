#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hux/errors.hpp"
#include "hux/geometry.hpp"
#include "hux/image_ref.hpp"
#include "hux/scene.hpp"

namespace hux {

inline constexpr double kDefaultGazeRadiusPx = 120.0;

// One gaze fixation: where the user looked and how wide the gaze area is.
struct GazeSample {
    double x = 0.0;
    double y = 0.0;
    double radius_px = kDefaultGazeRadiusPx;
    std::int64_t timestamp_ms = 0;
};

// The scene sub-region selected by a gaze sample.
struct RoiCrop {
    std::int64_t source_frame_id = 0;
    Rect rect;
    std::string image_ref;
    std::optional<std::string> caption;
};

// Pair the newest gaze sample and newest frame at or before the release
// instant, so both come from the same moment the user let go.
inline std::pair<GazeSample, FrameRecord>
snapshot_at_release(const std::vector<GazeSample>& gaze_trace,
                    const std::vector<FrameRecord>& frames, std::int64_t release_ts_ms) {
    const GazeSample* best_gaze = nullptr;
    for (const auto& sample : gaze_trace) {
        if (sample.timestamp_ms > release_ts_ms) continue;
        if (!best_gaze || sample.timestamp_ms >= best_gaze->timestamp_ms) best_gaze = &sample;
    }
    if (!best_gaze)
        throw NoGazeData("no gaze sample at or before t=" + std::to_string(release_ts_ms));

    const FrameRecord* best_frame = nullptr;
    for (const auto& frame : frames) {
        if (frame.timestamp_ms > release_ts_ms) continue;
        if (!best_frame || frame.timestamp_ms >= best_frame->timestamp_ms) best_frame = &frame;
    }
    if (!best_frame)
        throw NoFrame("no frame at or before t=" + std::to_string(release_ts_ms));

    return {*best_gaze, *best_frame};
}

// Cut the square gaze region out of the frame. The square has side
// 2*radius_px centered on the gazed pixel; near borders it is translated
// back inside, and only shrunk when a side exceeds the frame dimension.
// Gaze outside the frame raises OutOfScene.
inline RoiCrop extract_roi(const FrameRecord& frame, const GazeSample& gaze) {
    if (frame.width <= 0 || frame.height <= 0)
        throw NoFrame("frame " + std::to_string(frame.frame_id) + " has no dimensions");
    if (gaze.x < 0.0 || gaze.x >= frame.width || gaze.y < 0.0 || gaze.y >= frame.height) {
        throw OutOfScene("gaze (" + std::to_string(gaze.x) + ", " + std::to_string(gaze.y) +
                         ") outside " + std::to_string(frame.width) + "x" +
                         std::to_string(frame.height) + " frame");
    }

    const int side = std::max<int>(1, static_cast<int>(std::llround(2.0 * gaze.radius_px)));
    const int side_w = std::min(side, frame.width);
    const int side_h = std::min(side, frame.height);

    // Centering on the gazed pixel keeps the gaze point inside the rect even
    // after translation.
    const int px = static_cast<int>(std::floor(gaze.x));
    const int py = static_cast<int>(std::floor(gaze.y));
    const int left = std::clamp(px - side_w / 2, 0, frame.width - side_w);
    const int top = std::clamp(py - side_h / 2, 0, frame.height - side_h);

    RoiCrop crop;
    crop.source_frame_id = frame.frame_id;
    crop.rect = {left, top, side_w, side_h};
    crop.image_ref = make_roi_ref(frame, crop.rect);
    return crop;
}

} // namespace hux
