#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hux/eoi.hpp"
#include "hux/errors.hpp"
#include "hux/gaze.hpp"
#include "hux/image_ref.hpp"
#include "hux/profile.hpp"
#include "hux/scene.hpp"

namespace hux {

inline constexpr int kScenarioVersion = 1;

struct Utterance {
    std::int64_t press_ts_ms = 0;
    std::int64_t release_ts_ms = 0;
    std::string text;
};

// A fully scripted run: frames with annotations, the gaze trace, and the
// utterances, all on one virtual clock.
struct ScenarioScript {
    std::string name;
    double frame_rate_hz = 0.0;
    int frame_width = 0;
    int frame_height = 0;
    std::optional<CaptionPolicy> policy;
    std::optional<std::int64_t> caption_latency_ms;
    TaskProfile profile;
    std::optional<std::string> profile_ref;   // task_id to resolve against a registry
    std::optional<std::string> registry_path; // resolved relative to the scenario file
    std::vector<FrameRecord> frames;
    std::vector<GazeSample> gaze_trace;
    std::vector<Utterance> utterances;
};

namespace detail {

inline CaptionPolicy parse_policy(const std::string& s, std::size_t line) {
    if (s == "naive") return CaptionPolicy::naive;
    if (s == "hybrid") return CaptionPolicy::hybrid;
    throw ScenarioError(line, "unknown policy '" + s + "' (expected naive or hybrid)");
}

inline TaskProfile parse_profile(const nlohmann::json& p, std::size_t line) {
    TaskProfile profile;
    if (!p.contains("ooi_categories") || p["ooi_categories"].empty())
        throw ScenarioError(line, "profile.ooi_categories must be a non-empty list");
    profile.task_id = p.value("task_id", "default");
    for (const auto& cat : p["ooi_categories"]) profile.ooi_categories.insert(cat.get<std::string>());
    profile.min_confidence = p.value("min_confidence", 0.5);
    profile.move_threshold_px = p.value("move_threshold_px", 25.0);
    profile.scale_ratio_threshold = p.value("scale_ratio_threshold", 1.5);
    profile.caption_instruction = p.value("caption_instruction", "Describe the image.");
    profile.context_instruction = p.value("context_instruction", "");
    if (profile.min_confidence < 0.0 || profile.min_confidence > 1.0)
        throw ScenarioError(line, "profile.min_confidence must lie in [0,1]");
    if (profile.move_threshold_px <= 0.0)
        throw ScenarioError(line, "profile.move_threshold_px must be positive");
    if (profile.scale_ratio_threshold <= 1.0)
        throw ScenarioError(line, "profile.scale_ratio_threshold must exceed 1");
    return profile;
}

} // namespace detail

// Parse a scenario from line-delimited JSON records. The first non-empty
// line is the header; each later line is a frame, gaze, or utterance record.
// All validation errors carry the 1-based line number.
inline ScenarioScript parse_scenario(std::istream& in) {
    ScenarioScript script;
    bool header_seen = false;
    std::string line;
    std::size_t line_no = 0;

    std::int64_t last_frame_id = -1;
    std::int64_t last_frame_ts = -1;
    std::int64_t last_gaze_ts = -1;
    std::int64_t last_release_ts = -1;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ScenarioError(line_no, std::string("invalid record: ") + e.what());
        }

        try {
            if (!header_seen) {
                const int version = rec.value("scenario_version", 0);
                if (version != kScenarioVersion)
                    throw ScenarioError(line_no, "unsupported scenario_version " +
                                                     std::to_string(version));
                script.name = rec.at("name").get<std::string>();
                script.frame_rate_hz = rec.value("frame_rate_hz", 0.0);
                script.frame_width = rec.at("frame_width").get<int>();
                script.frame_height = rec.at("frame_height").get<int>();
                if (script.frame_width <= 0 || script.frame_height <= 0)
                    throw ScenarioError(line_no, "frame dimensions must be positive");
                if (rec.contains("policy"))
                    script.policy = detail::parse_policy(rec["policy"].get<std::string>(), line_no);
                if (rec.contains("caption_latency_ms")) {
                    script.caption_latency_ms = rec["caption_latency_ms"].get<std::int64_t>();
                    if (*script.caption_latency_ms < 0)
                        throw ScenarioError(line_no, "caption_latency_ms must be >= 0");
                }
                if (rec.contains("registry"))
                    script.registry_path = rec["registry"].get<std::string>();
                if (rec.contains("profile") && rec.contains("profile_ref"))
                    throw ScenarioError(line_no, "header cannot carry both profile and profile_ref");
                if (rec.contains("profile")) {
                    script.profile = detail::parse_profile(rec["profile"], line_no);
                } else if (rec.contains("profile_ref")) {
                    script.profile_ref = rec["profile_ref"].get<std::string>();
                } else {
                    throw ScenarioError(line_no, "header needs a profile or a profile_ref");
                }
                header_seen = true;
                continue;
            }

            const std::string type = rec.at("type").get<std::string>();
            if (type == "frame") {
                FrameRecord frame;
                frame.frame_id = rec.at("frame_id").get<std::int64_t>();
                frame.timestamp_ms = rec.at("timestamp_ms").get<std::int64_t>();
                frame.width = script.frame_width;
                frame.height = script.frame_height;
                if (frame.frame_id <= last_frame_id)
                    throw ScenarioError(line_no, "frame_id must strictly increase");
                if (frame.timestamp_ms < last_frame_ts)
                    throw ScenarioError(line_no, "frame timestamps must not decrease");
                for (const auto& d : rec.value("detections", nlohmann::json::array())) {
                    Detection det;
                    det.category = d.at("category").get<std::string>();
                    const auto& box = d.at("bbox");
                    if (!box.is_array() || box.size() != 4)
                        throw ScenarioError(line_no, "bbox must be [x, y, w, h]");
                    det.bbox = {box[0].get<int>(), box[1].get<int>(), box[2].get<int>(),
                                box[3].get<int>()};
                    det.confidence = d.value("confidence", 1.0);
                    if (det.bbox.x < 0 || det.bbox.y < 0 || det.bbox.w < 0 || det.bbox.h < 0 ||
                        det.bbox.x + det.bbox.w > frame.width ||
                        det.bbox.y + det.bbox.h > frame.height)
                        throw ScenarioError(line_no, "bbox exceeds frame bounds");
                    if (det.confidence < 0.0 || det.confidence > 1.0)
                        throw ScenarioError(line_no, "confidence must lie in [0,1]");
                    frame.detections.push_back(std::move(det));
                }
                frame.image_ref = rec.value("image_ref", "");
                if (frame.image_ref.empty()) frame.image_ref = make_scene_ref(frame);
                last_frame_id = frame.frame_id;
                last_frame_ts = frame.timestamp_ms;
                script.frames.push_back(std::move(frame));
            } else if (type == "gaze") {
                GazeSample g;
                g.timestamp_ms = rec.at("timestamp_ms").get<std::int64_t>();
                g.x = rec.at("x").get<double>();
                g.y = rec.at("y").get<double>();
                g.radius_px = rec.value("radius_px", kDefaultGazeRadiusPx);
                if (g.radius_px <= 0.0)
                    throw ScenarioError(line_no, "radius_px must be positive");
                if (g.timestamp_ms < last_gaze_ts)
                    throw ScenarioError(line_no, "gaze timestamps must not decrease");
                last_gaze_ts = g.timestamp_ms;
                script.gaze_trace.push_back(g);
            } else if (type == "utterance") {
                Utterance u;
                u.press_ts_ms = rec.at("press_ts_ms").get<std::int64_t>();
                u.release_ts_ms = rec.at("release_ts_ms").get<std::int64_t>();
                u.text = rec.at("text").get<std::string>();
                if (u.release_ts_ms < u.press_ts_ms)
                    throw ScenarioError(line_no, "utterance release must not precede press");
                if (u.text.empty()) throw ScenarioError(line_no, "utterance text must be non-empty");
                if (u.release_ts_ms < last_release_ts)
                    throw ScenarioError(line_no, "utterances must be ordered by release time");
                last_release_ts = u.release_ts_ms;
                script.utterances.push_back(std::move(u));
            } else {
                throw ScenarioError(line_no, "unknown record type '" + type + "'");
            }
        } catch (const ScenarioError&) {
            throw;
        } catch (const nlohmann::json::exception& e) {
            throw ScenarioError(line_no, std::string("invalid record: ") + e.what());
        }
    }

    if (!header_seen) throw ScenarioError(line_no, "scenario has no header record");
    return script;
}

inline ScenarioScript load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError(0, "cannot open scenario file: " + path);
    return parse_scenario(in);
}

// Serialize a script back to the line-delimited form (used for fixtures and
// generated scenarios; load(write(s)) == s).
inline void write_scenario(const ScenarioScript& script, std::ostream& out) {
    nlohmann::ordered_json header;
    header["scenario_version"] = kScenarioVersion;
    header["name"] = script.name;
    header["frame_rate_hz"] = script.frame_rate_hz;
    header["frame_width"] = script.frame_width;
    header["frame_height"] = script.frame_height;
    if (script.policy) header["policy"] = to_string(*script.policy);
    if (script.caption_latency_ms) header["caption_latency_ms"] = *script.caption_latency_ms;
    if (script.registry_path) header["registry"] = *script.registry_path;
    if (script.profile_ref) {
        header["profile_ref"] = *script.profile_ref;
    } else {
        nlohmann::ordered_json profile;
        profile["task_id"] = script.profile.task_id;
        profile["ooi_categories"] = script.profile.ooi_categories;
        profile["min_confidence"] = script.profile.min_confidence;
        profile["move_threshold_px"] = script.profile.move_threshold_px;
        profile["scale_ratio_threshold"] = script.profile.scale_ratio_threshold;
        profile["caption_instruction"] = script.profile.caption_instruction;
        profile["context_instruction"] = script.profile.context_instruction;
        header["profile"] = profile;
    }
    out << header.dump() << '\n';

    for (const auto& frame : script.frames) {
        nlohmann::ordered_json rec;
        rec["type"] = "frame";
        rec["frame_id"] = frame.frame_id;
        rec["timestamp_ms"] = frame.timestamp_ms;
        auto dets = nlohmann::ordered_json::array();
        for (const auto& d : frame.detections) {
            dets.push_back({{"category", d.category},
                            {"bbox", {d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h}},
                            {"confidence", d.confidence}});
        }
        rec["detections"] = dets;
        if (!frame.image_ref.empty() && frame.image_ref != make_scene_ref(frame))
            rec["image_ref"] = frame.image_ref;
        out << rec.dump() << '\n';
    }
    for (const auto& g : script.gaze_trace) {
        nlohmann::ordered_json rec;
        rec["type"] = "gaze";
        rec["timestamp_ms"] = g.timestamp_ms;
        rec["x"] = g.x;
        rec["y"] = g.y;
        rec["radius_px"] = g.radius_px;
        out << rec.dump() << '\n';
    }
    for (const auto& u : script.utterances) {
        nlohmann::ordered_json rec;
        rec["type"] = "utterance";
        rec["press_ts_ms"] = u.press_ts_ms;
        rec["release_ts_ms"] = u.release_ts_ms;
        rec["text"] = u.text;
        out << rec.dump() << '\n';
    }
}

inline void save_scenario(const ScenarioScript& script, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw PersistenceFailure("cannot write scenario file: " + path);
    write_scenario(script, out);
}

} // namespace hux
