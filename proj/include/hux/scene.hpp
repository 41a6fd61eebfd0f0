#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hux/errors.hpp"
#include "hux/geometry.hpp"
#include "hux/profile.hpp"

namespace hux {

// One detector output: a labelled box with a confidence score.
struct Detection {
    std::string category;
    Rect bbox;
    double confidence = 1.0;

    friend bool operator==(const Detection&, const Detection&) = default;
};

// One video frame with the annotations the detector produced for it.
// image_ref is an opaque locator (file path or synthetic descriptor).
struct FrameRecord {
    std::int64_t frame_id = 0;
    std::int64_t timestamp_ms = 0;
    int width = 0;
    int height = 0;
    std::string image_ref;
    std::vector<Detection> detections;

    friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

struct CountChange {
    int before = 0;
    int after = 0;

    friend bool operator==(const CountChange&, const CountChange&) = default;
};

// Motion of one track matched across consecutive ingested frames.
struct TrackDelta {
    std::int64_t track_id = 0;
    std::string category;
    double displacement_px = 0.0;
    double scale_ratio = 1.0; // new bbox area / old bbox area
};

// What changed between the previous scene state and one ingested frame.
// counts lists every OOI category present before or after the frame, whether
// or not its tally changed; tracks covers matched tracks only.
struct FrameDelta {
    std::int64_t frame_id = 0;
    std::int64_t timestamp_ms = 0;
    std::string image_ref;
    std::map<std::string, CountChange> counts;
    std::vector<TrackDelta> tracks;

    bool any_count_change() const {
        for (const auto& [cat, change] : counts)
            if (change.before != change.after) return true;
        return false;
    }
};

struct TrackedObject {
    std::int64_t track_id = 0;
    std::string category;
    Rect last_bbox;
    std::int64_t last_seen_frame_id = 0;
};

// Immutable snapshot of the tracked scene. counts always equals the tally of
// tracked objects from the most recent ingested frame.
struct SceneState {
    std::map<std::string, int> counts;
    std::vector<TrackedObject> tracked;
    std::int64_t last_frame_id = -1;
    std::int64_t next_track_id = 1;

    bool has_ingested() const { return last_frame_id >= 0; }
};

namespace detail {

// Detections the analyzer actually sees: scoped to the profile's OOI
// categories and above its confidence floor.
inline std::vector<Detection> filter_detections(const FrameRecord& frame,
                                                const TaskProfile& profile) {
    std::vector<Detection> kept;
    for (const auto& det : frame.detections) {
        if (det.confidence >= profile.min_confidence && profile.is_ooi(det.category))
            kept.push_back(det);
    }
    return kept;
}

} // namespace detail

inline constexpr double kIouMatchThreshold = 0.3;

// Ingest one frame: match detections to live tracks (greedy, highest IoU
// within the same category, ties to the lower track_id then lower detection
// index), retire unmatched tracks, mint fresh ids for unmatched detections.
// Returns the successor state and the per-category / per-track delta.
inline std::pair<SceneState, FrameDelta> ingest_frame(const SceneState& state,
                                                      const FrameRecord& frame,
                                                      const TaskProfile& profile) {
    if (frame.frame_id <= state.last_frame_id) {
        throw RejectedFrame("frame_id " + std::to_string(frame.frame_id) +
                            " does not increase the stream (last was " +
                            std::to_string(state.last_frame_id) + ")");
    }

    const std::vector<Detection> detections = detail::filter_detections(frame, profile);

    struct Candidate {
        double iou;
        std::size_t track_index;
        std::size_t det_index;
    };
    std::vector<Candidate> candidates;
    for (std::size_t t = 0; t < state.tracked.size(); ++t) {
        for (std::size_t d = 0; d < detections.size(); ++d) {
            if (state.tracked[t].category != detections[d].category) continue;
            const double overlap = iou(state.tracked[t].last_bbox, detections[d].bbox);
            if (overlap >= kIouMatchThreshold)
                candidates.push_back({overlap, t, d});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
        if (a.iou != b.iou) return a.iou > b.iou;
        const auto id_a = state.tracked[a.track_index].track_id;
        const auto id_b = state.tracked[b.track_index].track_id;
        if (id_a != id_b) return id_a < id_b;
        return a.det_index < b.det_index;
    });

    std::vector<bool> track_used(state.tracked.size(), false);
    std::vector<bool> det_used(detections.size(), false);
    std::vector<std::pair<std::size_t, std::size_t>> matches; // (track, detection)
    for (const auto& c : candidates) {
        if (track_used[c.track_index] || det_used[c.det_index]) continue;
        track_used[c.track_index] = true;
        det_used[c.det_index] = true;
        matches.emplace_back(c.track_index, c.det_index);
    }

    SceneState next;
    next.last_frame_id = frame.frame_id;
    next.next_track_id = state.next_track_id;

    FrameDelta delta;
    delta.frame_id = frame.frame_id;
    delta.timestamp_ms = frame.timestamp_ms;
    delta.image_ref = frame.image_ref;

    // Matched tracks survive in track_id order so output is stable.
    std::sort(matches.begin(), matches.end(), [&](const auto& a, const auto& b) {
        return state.tracked[a.first].track_id < state.tracked[b.first].track_id;
    });
    for (const auto& [t, d] : matches) {
        const TrackedObject& old_track = state.tracked[t];
        const Detection& det = detections[d];
        next.tracked.push_back({old_track.track_id, old_track.category, det.bbox, frame.frame_id});

        TrackDelta td;
        td.track_id = old_track.track_id;
        td.category = old_track.category;
        td.displacement_px = center_distance(old_track.last_bbox, det.bbox);
        const auto old_area = area(old_track.last_bbox);
        td.scale_ratio = old_area > 0
                             ? static_cast<double>(area(det.bbox)) / static_cast<double>(old_area)
                             : 1.0;
        delta.tracks.push_back(td);
    }
    for (std::size_t d = 0; d < detections.size(); ++d) {
        if (det_used[d]) continue;
        next.tracked.push_back(
            {next.next_track_id++, detections[d].category, detections[d].bbox, frame.frame_id});
    }

    for (const auto& track : next.tracked) ++next.counts[track.category];

    for (const auto& [cat, n] : state.counts) delta.counts[cat].before = n;
    for (const auto& [cat, n] : next.counts) delta.counts[cat].after = n;

    return {std::move(next), std::move(delta)};
}

// Exhaustive per-frame recount, no tracking involved. Oracle support.
inline std::vector<std::pair<std::int64_t, std::map<std::string, int>>>
counts_timeline(const std::vector<FrameRecord>& frames, const TaskProfile& profile) {
    std::vector<std::pair<std::int64_t, std::map<std::string, int>>> timeline;
    timeline.reserve(frames.size());
    for (const auto& frame : frames) {
        std::map<std::string, int> counts;
        for (const auto& det : detail::filter_detections(frame, profile)) ++counts[det.category];
        timeline.emplace_back(frame.frame_id, std::move(counts));
    }
    return timeline;
}

} // namespace hux
