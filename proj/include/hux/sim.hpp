#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hux/backend.hpp"
#include "hux/eoi.hpp"
#include "hux/errors.hpp"
#include "hux/gaze.hpp"
#include "hux/liou.hpp"
#include "hux/prompt.hpp"
#include "hux/scenario.hpp"
#include "hux/scene.hpp"
#include "hux/tasks.hpp"

namespace hux {

inline constexpr const char* kRoiOk = "ok";
inline constexpr const char* kRoiOutOfScene = "out_of_scene";
inline constexpr const char* kRoiNoGaze = "no_gaze";

struct TranscriptTurn {
    int turn = 0;
    std::int64_t release_ts_ms = 0;
    std::string utterance;
    std::string roi_status; // ok | out_of_scene | no_gaze
    std::optional<std::string> tool_used;
    std::int64_t scene_frame_id = -1; // frame behind the scene caption, -1 if none
    std::string prompt;
    std::string answer;
};

struct RunMetrics {
    std::int64_t events_true = 0;
    std::int64_t events_detected = 0;
    std::int64_t captions_issued = 0;
    std::int64_t count_only_events = 0;
    std::int64_t liou_dropped = 0;
    std::int64_t oracle_count_mismatches = 0;

    double recall() const {
        return events_true > 0 ? static_cast<double>(events_detected) / events_true : 1.0;
    }
};

struct RunReport {
    std::string scenario_name;
    CaptionPolicy policy = CaptionPolicy::hybrid;
    std::int64_t caption_latency_ms = 0;
    std::vector<TranscriptTurn> transcript;
    std::vector<EventRecord> event_log;
    RunMetrics metrics;
};

// Ground truth for one frame where the recount changed.
struct TrueEvent {
    std::int64_t frame_id = 0;
    std::int64_t timestamp_ms = 0;
    std::map<std::string, CountChange> count_deltas;
};

struct TimelinePoint {
    std::int64_t frame_id = 0;
    std::int64_t timestamp_ms = 0;
    std::map<std::string, int> counts;
};

struct OracleOutput {
    std::string scenario_name;
    std::vector<TrueEvent> true_events;
    std::vector<TimelinePoint> timeline;
};

// Exhaustive per-frame recount and adjacent diff: no tracking, no latency,
// no policy. The ground truth scenario runs are scored against.
inline OracleOutput oracle(const ScenarioScript& script) {
    if (script.profile_ref)
        throw Error("scenario profile_ref '" + *script.profile_ref +
                    "' is unresolved; call resolve_profile with the registry first");
    OracleOutput out;
    out.scenario_name = script.name;

    std::map<std::string, int> previous;
    for (const auto& frame : script.frames) {
        std::map<std::string, int> counts;
        for (const auto& det : detail::filter_detections(frame, script.profile))
            ++counts[det.category];
        out.timeline.push_back({frame.frame_id, frame.timestamp_ms, counts});

        std::map<std::string, CountChange> deltas;
        for (const auto& [cat, n] : previous) deltas[cat].before = n;
        for (const auto& [cat, n] : counts) deltas[cat].after = n;
        bool changed = false;
        for (const auto& [cat, change] : deltas)
            if (change.before != change.after) changed = true;
        if (changed) out.true_events.push_back({frame.frame_id, frame.timestamp_ms, deltas});
        previous = counts;
    }
    return out;
}

struct SimOptions {
    std::optional<CaptionPolicy> policy_override;
    std::optional<std::int64_t> latency_override;
    bool disable_behavior_events = false; // raise motion thresholds beyond reach
    CaptionPolicy fallback_policy = CaptionPolicy::hybrid;
    std::int64_t fallback_latency_ms = 1000;
};

// Replace a header profile_ref with the matching profile from the registry
// (by tool id, falling back to the profiles' task ids).
inline void resolve_profile(ScenarioScript& script, const ToolRegistry& registry) {
    if (!script.profile_ref) return;
    const ToolSpec* match = registry.find(*script.profile_ref);
    if (!match) {
        for (const auto& tool : registry.tools())
            if (tool.profile.task_id == *script.profile_ref) match = &tool;
    }
    if (!match)
        throw ScenarioError(0, "profile_ref '" + *script.profile_ref +
                                   "' matches nothing in the tool registry");
    script.profile = match->profile;
    script.profile_ref.reset();
}

namespace detail {

inline std::map<std::string, int> normalized_counts(const std::map<std::string, int>& counts) {
    std::map<std::string, int> out;
    for (const auto& [cat, n] : counts)
        if (n != 0) out[cat] = n;
    return out;
}

} // namespace detail

// Compare the report's reconstructed count timeline against oracle counts at
// the logged event times and fill in the oracle-derived metrics.
inline RunMetrics score(const RunReport& report, const OracleOutput& oracle_out) {
    if (report.scenario_name != oracle_out.scenario_name)
        throw ScriptMismatch("report is for '" + report.scenario_name + "' but oracle is for '" +
                             oracle_out.scenario_name + "'");

    RunMetrics metrics = report.metrics;
    metrics.events_true = static_cast<std::int64_t>(oracle_out.true_events.size());
    metrics.events_detected = static_cast<std::int64_t>(report.event_log.size());

    const auto reconstructed = reconstruct_timeline(report.event_log, ReconstructMode::lenient);
    std::int64_t mismatches = 0;
    for (std::size_t i = 0; i < report.event_log.size(); ++i) {
        const std::int64_t frame_id = report.event_log[i].frame_id;
        const TimelinePoint* truth = nullptr;
        for (const auto& point : oracle_out.timeline) {
            if (point.frame_id == frame_id) {
                truth = &point;
                break;
            }
        }
        if (!truth) {
            ++mismatches; // event for a frame the oracle never saw
            continue;
        }
        if (detail::normalized_counts(reconstructed[i].second) !=
            detail::normalized_counts(truth->counts))
            ++mismatches;
    }
    metrics.oracle_count_mismatches = mismatches;
    return metrics;
}

// Drive the full pipeline over a scripted scenario on a virtual clock.
//
// Per frame: ingest -> classify -> schedule under the active policy. Per
// caption completion: push the caption onto the LIOU stack. Per utterance
// release: pair gaze and frame from the release instant, crop the ROI,
// caption it, read the LIOU top, optionally fire a task tool, assemble the
// prompt and complete it. Ties at one instant process caption completions
// first, then the frame, then the utterance. Deterministic under the mock
// backend.
inline RunReport run_scenario(const ScenarioScript& script, Backend& backend,
                              const ToolRegistry& registry = {}, const SimOptions& options = {}) {
    if (script.profile_ref)
        throw Error("scenario profile_ref '" + *script.profile_ref +
                    "' is unresolved; call resolve_profile with the registry first");
    const CaptionPolicy policy =
        options.policy_override.value_or(script.policy.value_or(options.fallback_policy));
    const std::int64_t latency =
        options.latency_override.value_or(script.caption_latency_ms.value_or(
            options.fallback_latency_ms));

    TaskProfile profile = script.profile;
    if (options.disable_behavior_events) {
        profile.move_threshold_px = std::numeric_limits<double>::infinity();
        profile.scale_ratio_threshold = std::numeric_limits<double>::infinity();
        profile.custom_rules.clear();
    }

    RunReport report;
    report.scenario_name = script.name;
    report.policy = policy;
    report.caption_latency_ms = latency;

    SceneState state;
    CaptionScheduler scheduler(policy, latency);
    LiouStack liou;
    std::vector<Turn> history;
    std::optional<std::string> active_task;

    auto handle_completions = [&](const std::vector<CompletedCaption>& completed) {
        for (const auto& c : completed) {
            const std::string text = backend.caption(c.image_ref, profile.caption_instruction);
            if (c.log_status == CaptionStatus::captioned) scheduler.attach_caption(c.event_id, text);
            liou.push(text, c.frame_id, c.completed_at_ms);
        }
    };

    auto process_frame = [&](const FrameRecord& frame) {
        auto [next_state, delta] = ingest_frame(state, frame, profile);
        state = std::move(next_state);
        if (auto event = classify_event(delta, profile)) {
            scheduler.on_event(std::move(*event), frame.timestamp_ms);
            handle_completions(scheduler.advance_to(frame.timestamp_ms));
        }
    };

    auto process_utterance = [&](const Utterance& utterance) {
        std::string roi_status = kRoiOk;
        std::optional<std::string> roi_caption;

        std::optional<GazeSample> gaze;
        const FrameRecord* release_frame = nullptr;
        try {
            auto [g, frame] = snapshot_at_release(script.gaze_trace, script.frames,
                                                  utterance.release_ts_ms);
            gaze = g;
            for (const auto& f : script.frames)
                if (f.frame_id == frame.frame_id) release_frame = &f;
        } catch (const NoGazeData&) {
            roi_status = kRoiNoGaze;
            // scene-only turn; the newest frame still anchors tool use
            for (const auto& f : script.frames)
                if (f.timestamp_ms <= utterance.release_ts_ms &&
                    (!release_frame || f.timestamp_ms >= release_frame->timestamp_ms))
                    release_frame = &f;
            if (!release_frame)
                throw NoFrame("no frame before utterance at t=" +
                              std::to_string(utterance.release_ts_ms));
        }

        if (gaze) {
            try {
                RoiCrop crop = extract_roi(*release_frame, *gaze);
                roi_caption = backend.caption(crop.image_ref, profile.caption_instruction);
            } catch (const OutOfScene&) {
                roi_status = kRoiOutOfScene;
            }
        }

        const auto liou_top = liou.read();
        std::string scene_caption = liou_top ? liou_top->caption : "";
        std::int64_t scene_frame_id = liou_top ? liou_top->frame_id : -1;

        std::optional<std::string> tool_used;
        if (!registry.empty()) {
            if (auto selection = select_tool(utterance.text, active_task, registry)) {
                const ToolSpec* tool = registry.find(selection->tool_id);
                const ToolResult result =
                    apply_tool(*tool, *release_frame, selection->action_input, backend);
                scene_caption = result.tool_caption;
                scene_frame_id = release_frame->frame_id;
                tool_used = selection->tool_id;
                active_task = selection->tool_id;
            }
        }

        PromptBundle bundle;
        bundle.scene_caption = scene_caption;
        bundle.roi_caption = roi_caption;
        bundle.utterance = utterance.text;
        if (!profile.context_instruction.empty())
            bundle.history.push_back({Speaker::system, profile.context_instruction});
        bundle.history.insert(bundle.history.end(), history.begin(), history.end());

        TranscriptTurn turn;
        turn.turn = static_cast<int>(report.transcript.size()) + 1;
        turn.release_ts_ms = utterance.release_ts_ms;
        turn.utterance = utterance.text;
        turn.roi_status = roi_status;
        turn.tool_used = tool_used;
        turn.scene_frame_id = scene_frame_id;
        turn.prompt = assemble_prompt(bundle);
        turn.answer = backend.complete(turn.prompt, bundle.history);
        report.transcript.push_back(turn);

        history.push_back({Speaker::user, utterance.text});
        history.push_back({Speaker::assistant, turn.answer});
    };

    // Merged virtual timeline; at equal timestamps frames precede utterances
    // so a release always sees the frame from its own instant.
    std::size_t fi = 0;
    std::size_t ui = 0;
    while (fi < script.frames.size() || ui < script.utterances.size()) {
        const bool take_frame =
            ui >= script.utterances.size() ||
            (fi < script.frames.size() &&
             script.frames[fi].timestamp_ms <= script.utterances[ui].release_ts_ms);
        const std::int64_t now = take_frame ? script.frames[fi].timestamp_ms
                                            : script.utterances[ui].release_ts_ms;
        handle_completions(scheduler.advance_to(now));
        if (take_frame) {
            process_frame(script.frames[fi++]);
        } else {
            process_utterance(script.utterances[ui++]);
        }
    }
    handle_completions(scheduler.drain());

    report.event_log = scheduler.log();
    report.metrics.captions_issued = scheduler.captions_issued();
    report.metrics.liou_dropped = liou.dropped_count();
    std::int64_t count_only = 0;
    for (const auto& event : report.event_log)
        if (event.caption_status == CaptionStatus::count_only) ++count_only;
    report.metrics.count_only_events = count_only;

    report.metrics = score(report, oracle(script));
    return report;
}

// --- report serialization ---------------------------------------------------

inline nlohmann::ordered_json report_to_json(const RunReport& report) {
    nlohmann::ordered_json j;
    j["report_version"] = 1;
    j["scenario"] = report.scenario_name;
    j["policy"] = to_string(report.policy);
    j["caption_latency_ms"] = report.caption_latency_ms;

    auto turns = nlohmann::ordered_json::array();
    for (const auto& t : report.transcript) {
        nlohmann::ordered_json turn;
        turn["turn"] = t.turn;
        turn["release_ts_ms"] = t.release_ts_ms;
        turn["utterance"] = t.utterance;
        turn["roi_status"] = t.roi_status;
        if (t.tool_used) turn["tool_used"] = *t.tool_used;
        turn["scene_frame_id"] = t.scene_frame_id;
        turn["prompt"] = t.prompt;
        turn["answer"] = t.answer;
        turns.push_back(turn);
    }
    j["transcript"] = turns;

    auto events = nlohmann::ordered_json::array();
    for (const auto& e : report.event_log) {
        nlohmann::ordered_json event;
        event["event_id"] = e.event_id;
        event["frame_id"] = e.frame_id;
        event["timestamp_ms"] = e.timestamp_ms;
        event["kinds"] = e.kinds;
        nlohmann::ordered_json deltas;
        for (const auto& [cat, change] : e.count_deltas)
            deltas[cat] = {change.before, change.after};
        event["count_deltas"] = deltas;
        event["caption_status"] = to_string(e.caption_status);
        if (e.caption) event["caption"] = *e.caption;
        event["image_ref"] = e.image_ref;
        events.push_back(event);
    }
    j["event_log"] = events;

    j["metrics"] = {{"events_true", report.metrics.events_true},
                    {"events_detected", report.metrics.events_detected},
                    {"captions_issued", report.metrics.captions_issued},
                    {"count_only_events", report.metrics.count_only_events},
                    {"liou_dropped", report.metrics.liou_dropped},
                    {"oracle_count_mismatches", report.metrics.oracle_count_mismatches}};
    return j;
}

inline std::string report_to_text(const RunReport& report) {
    std::ostringstream out;
    out << "scenario: " << report.scenario_name << " (policy=" << to_string(report.policy)
        << ", caption_latency_ms=" << report.caption_latency_ms << ")\n\n";
    for (const auto& t : report.transcript) {
        out << "turn " << t.turn << " @" << t.release_ts_ms << "ms";
        if (t.tool_used) out << " [tool: " << *t.tool_used << "]";
        if (t.roi_status != kRoiOk) out << " [roi: " << t.roi_status << "]";
        out << "\n  Human: " << t.utterance << "\n  AI:    " << t.answer << "\n";
    }
    out << "\nevents:\n";
    for (const auto& e : report.event_log) {
        out << "  #" << e.event_id << " frame " << e.frame_id << " @" << e.timestamp_ms << "ms "
            << to_string(e.caption_status);
        for (const auto& [cat, change] : e.count_deltas) {
            if (change.before != change.after)
                out << " " << cat << ":" << change.before << "->" << change.after;
        }
        if (e.caption) out << " | " << *e.caption;
        out << "\n";
    }
    const auto& m = report.metrics;
    out << "\nmetrics: events_true=" << m.events_true << " events_detected=" << m.events_detected
        << " captions_issued=" << m.captions_issued
        << " count_only_events=" << m.count_only_events << " liou_dropped=" << m.liou_dropped
        << " oracle_count_mismatches=" << m.oracle_count_mismatches << "\n";
    return out.str();
}

} // namespace hux
