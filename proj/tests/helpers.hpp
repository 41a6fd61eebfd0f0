#pragma once

// Shared test utilities. The brute_* functions are independent oracles:
// they recompute expected results from raw inputs with straight-line code
// and must not call the library paths they are used to check.

#include <cctype>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "hux/scenario.hpp"
#include "hux/scene.hpp"

namespace hux_test {

// Per-frame recount: confidence- and category-filtered tallies.
inline std::vector<std::map<std::string, int>>
brute_counts(const std::vector<hux::FrameRecord>& frames, const hux::TaskProfile& profile) {
    std::vector<std::map<std::string, int>> out;
    for (const auto& frame : frames) {
        std::map<std::string, int> counts;
        for (const auto& det : frame.detections) {
            if (det.confidence < profile.min_confidence) continue;
            if (profile.ooi_categories.find(det.category) == profile.ooi_categories.end())
                continue;
            counts[det.category] += 1;
        }
        out.push_back(counts);
    }
    return out;
}

// Frames whose filtered recount differs from the previous frame's.
inline std::vector<std::int64_t>
brute_change_frames(const std::vector<hux::FrameRecord>& frames,
                    const hux::TaskProfile& profile) {
    const auto counts = brute_counts(frames, profile);
    std::vector<std::int64_t> changed;
    std::map<std::string, int> previous;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (counts[i] != previous) changed.push_back(frames[i].frame_id);
        previous = counts[i];
    }
    return changed;
}

// Double-arithmetic 3x3 cell classifier; boundary centers go to the lower cell.
inline int brute_grid_cell(const hux::Rect& bbox, int frame_w, int frame_h) {
    const double cx = bbox.x + bbox.w / 2.0;
    const double cy = bbox.y + bbox.h / 2.0;
    auto third = [](double coord, double extent) {
        if (coord <= extent / 3.0) return 0;
        if (coord <= 2.0 * extent / 3.0) return 1;
        return 2;
    };
    return third(cy, frame_h) * 3 + third(cx, frame_w);
}

// Token-overlap retrieval score recomputed from scratch.
inline double brute_retrieval_score(const std::string& query,
                                    const std::vector<std::string>& keywords) {
    auto split = [](const std::string& text) {
        std::set<std::string> tokens;
        std::string cur;
        for (unsigned char c : text) {
            if (std::isalnum(c)) {
                cur.push_back(static_cast<char>(std::tolower(c)));
            } else if (!cur.empty()) {
                tokens.insert(cur);
                cur.clear();
            }
        }
        if (!cur.empty()) tokens.insert(cur);
        return tokens;
    };
    const std::set<std::string> query_tokens = split(query);
    std::set<std::string> keyword_tokens;
    for (const auto& kw : keywords)
        for (const auto& t : split(kw)) keyword_tokens.insert(t);
    if (query_tokens.empty()) return 0.0;
    std::size_t matched = 0;
    for (const auto& t : query_tokens)
        if (keyword_tokens.count(t)) ++matched;
    return static_cast<double>(matched) / static_cast<double>(query_tokens.size());
}

inline hux::Detection make_detection(const std::string& category, int x, int y, int w = 40,
                                     int h = 40, double confidence = 0.9) {
    return {category, {x, y, w, h}, confidence};
}

inline hux::TaskProfile fruit_profile() {
    hux::TaskProfile profile;
    profile.task_id = "fruits";
    profile.ooi_categories = {"apple", "banana", "orange"};
    return profile;
}

// Random frame stream over the profile's categories: objects pop in and out
// and drift around, which exercises count, behavior, and tracking paths.
inline std::vector<hux::FrameRecord> random_frames(std::mt19937& rng, int frame_count,
                                                   const hux::TaskProfile& profile,
                                                   int width = 1000, int height = 1000,
                                                   std::int64_t frame_period_ms = 100) {
    std::vector<std::string> categories(profile.ooi_categories.begin(),
                                        profile.ooi_categories.end());
    std::uniform_int_distribution<int> count_dist(0, 3);
    std::uniform_int_distribution<int> pos_dist(0, width - 60);
    std::uniform_int_distribution<int> size_dist(20, 59);
    std::uniform_real_distribution<double> conf_dist(0.3, 1.0);

    std::vector<hux::FrameRecord> frames;
    for (int i = 0; i < frame_count; ++i) {
        hux::FrameRecord frame;
        frame.frame_id = i + 1;
        frame.timestamp_ms = i * frame_period_ms;
        frame.width = width;
        frame.height = height;
        for (const auto& category : categories) {
            const int n = count_dist(rng);
            for (int k = 0; k < n; ++k) {
                frame.detections.push_back({category,
                                            {pos_dist(rng), pos_dist(rng), size_dist(rng),
                                             size_dist(rng)},
                                            conf_dist(rng)});
            }
        }
        frame.image_ref = hux::make_scene_ref(frame);
        frames.push_back(std::move(frame));
    }
    return frames;
}

inline hux::ScenarioScript random_scenario(std::mt19937& rng, int frame_count,
                                           std::int64_t frame_period_ms = 100) {
    hux::ScenarioScript script;
    script.name = "generated";
    script.frame_rate_hz = 1000.0 / static_cast<double>(frame_period_ms);
    script.frame_width = 1000;
    script.frame_height = 1000;
    script.profile = fruit_profile();
    script.frames = random_frames(rng, frame_count, script.profile, script.frame_width,
                                  script.frame_height, frame_period_ms);
    return script;
}

inline std::string golden_path(const std::string& file) {
    return std::string(HUX_SOURCE_DIR) + "/tests/golden/" + file;
}

inline std::string scenario_path(const std::string& file) {
    return std::string(HUX_SOURCE_DIR) + "/scenarios/" + file;
}

} // namespace hux_test
