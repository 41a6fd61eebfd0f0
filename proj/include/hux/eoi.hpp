#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hux/errors.hpp"
#include "hux/profile.hpp"
#include "hux/scene.hpp"

namespace hux {

inline constexpr const char* kKindCountChange = "count_change";
inline constexpr const char* kKindBehaviorChange = "behavior_change";
inline constexpr const char* kCustomKindPrefix = "custom:";

enum class CaptionStatus { captioned, count_only, pending };

inline const char* to_string(CaptionStatus s) {
    switch (s) {
        case CaptionStatus::captioned: return "captioned";
        case CaptionStatus::count_only: return "count_only";
        case CaptionStatus::pending: return "pending";
    }
    return "pending";
}

// One detected event of interest. Simultaneous triggers on a frame merge
// into a single record carrying a set of kinds.
struct EventRecord {
    std::int64_t event_id = 0;
    std::int64_t frame_id = 0;
    std::int64_t timestamp_ms = 0;
    std::string image_ref;
    std::set<std::string> kinds;
    std::map<std::string, CountChange> count_deltas;
    CaptionStatus caption_status = CaptionStatus::pending;
    std::optional<std::string> caption;
};

enum class CaptionPolicy { naive, hybrid };

inline const char* to_string(CaptionPolicy p) {
    return p == CaptionPolicy::naive ? "naive" : "hybrid";
}

// The single captioner slot plus the one pending candidate behind it.
struct CaptionerState {
    std::int64_t busy_until_ms = 0;
    std::optional<EventRecord> in_flight;
    std::optional<EventRecord> pending_event;
    std::int64_t last_now_ms = std::numeric_limits<std::int64_t>::min();

    bool busy(std::int64_t now_ms) const { return now_ms < busy_until_ms && in_flight; }
};

// Classify a frame delta against a profile. Returns a record with event_id 0
// (ids are assigned when the event enters a log) or nothing if no trigger
// fires.
inline std::optional<EventRecord> classify_event(const FrameDelta& delta,
                                                 const TaskProfile& profile) {
    std::set<std::string> kinds;
    if (delta.any_count_change()) kinds.insert(kKindCountChange);

    for (const auto& track : delta.tracks) {
        const bool moved = track.displacement_px > profile.move_threshold_px;
        const bool rescaled = track.scale_ratio > profile.scale_ratio_threshold ||
                              track.scale_ratio < 1.0 / profile.scale_ratio_threshold;
        if (moved || rescaled) {
            kinds.insert(kKindBehaviorChange);
            break;
        }
    }
    for (const auto& rule : profile.custom_rules) {
        if (rule.predicate && rule.predicate(delta)) kinds.insert(kCustomKindPrefix + rule.name);
    }

    if (kinds.empty()) return std::nullopt;

    EventRecord event;
    event.frame_id = delta.frame_id;
    event.timestamp_ms = delta.timestamp_ms;
    event.image_ref = delta.image_ref;
    event.kinds = std::move(kinds);
    event.count_deltas = delta.counts;
    return event;
}

enum class ScheduleDecision { dispatch, replace_pending, record_counts };

// The latency-aware scheduling primitive. Free captioner: dispatch now.
// Busy: naive keeps only the newest event as the sole pending candidate
// (the replaced one is gone for good); hybrid logs the counts of every
// event (caller's job, signalled by record_counts) and keeps the newest as
// the caption candidate for when the slot frees.
inline ScheduleDecision schedule_caption(const EventRecord& event, std::int64_t now_ms,
                                         CaptionerState& captioner, CaptionPolicy policy,
                                         std::int64_t caption_latency_ms) {
    if (now_ms < captioner.last_now_ms)
        throw ClockRegression("schedule_caption at t=" + std::to_string(now_ms) +
                              " after t=" + std::to_string(captioner.last_now_ms));
    captioner.last_now_ms = now_ms;

    if (!captioner.busy(now_ms)) {
        captioner.in_flight = event;
        captioner.in_flight->caption_status = CaptionStatus::captioned;
        captioner.busy_until_ms = now_ms + caption_latency_ms;
        captioner.pending_event.reset(); // stale candidate from an unprocessed completion
        return ScheduleDecision::dispatch;
    }

    captioner.pending_event = event;
    return policy == CaptionPolicy::naive ? ScheduleDecision::replace_pending
                                          : ScheduleDecision::record_counts;
}

// A caption whose processing window has closed; text is produced by the caller.
struct CompletedCaption {
    std::int64_t event_id = 0;
    std::int64_t frame_id = 0;
    std::string image_ref;
    std::int64_t completed_at_ms = 0;
    CaptionStatus log_status = CaptionStatus::captioned;
};

// Drives schedule_caption against a growing event log. Log semantics differ
// by policy: hybrid records every event at arrival (count_only while the
// captioner is busy), naive records an event only when its caption is
// actually dispatched, so replaced candidates never reach the log.
class CaptionScheduler {
  public:
    CaptionScheduler(CaptionPolicy policy, std::int64_t caption_latency_ms)
        : policy_(policy), latency_ms_(caption_latency_ms) {}

    // Process completions due at or before now. Must run before on_event for
    // the same instant so a freed slot can be reused.
    std::vector<CompletedCaption> advance_to(std::int64_t now_ms) {
        std::vector<CompletedCaption> completed;
        while (captioner_.in_flight && captioner_.busy_until_ms <= now_ms) {
            const EventRecord& flight = *captioner_.in_flight;
            completed.push_back({flight.event_id, flight.frame_id, flight.image_ref,
                                 captioner_.busy_until_ms, flight.caption_status});
            const std::int64_t freed_at = captioner_.busy_until_ms;
            captioner_.in_flight.reset();
            if (captioner_.pending_event) {
                EventRecord candidate = *captioner_.pending_event;
                captioner_.pending_event.reset();
                if (policy_ == CaptionPolicy::naive) {
                    candidate.caption_status = CaptionStatus::captioned;
                    log_.push_back(candidate);
                }
                captioner_.in_flight = candidate;
                captioner_.busy_until_ms = freed_at + latency_ms_;
                ++captions_issued_;
            }
        }
        return completed;
    }

    // Requires advance_to(now_ms) to have been called first, so completed
    // captions are never silently overwritten by a new dispatch.
    ScheduleDecision on_event(EventRecord event, std::int64_t now_ms) {
        if (captioner_.in_flight && captioner_.busy_until_ms <= now_ms)
            throw std::logic_error("CaptionScheduler: advance_to must run before on_event");
        event.event_id = next_event_id_++;
        const ScheduleDecision decision =
            schedule_caption(event, now_ms, captioner_, policy_, latency_ms_);
        switch (decision) {
            case ScheduleDecision::dispatch:
                event.caption_status = CaptionStatus::captioned;
                log_.push_back(event);
                ++captions_issued_;
                break;
            case ScheduleDecision::record_counts:
                event.caption_status = CaptionStatus::count_only;
                log_.push_back(event);
                break;
            case ScheduleDecision::replace_pending:
                break; // naive: candidate replaced, nothing logged
        }
        return decision;
    }

    // Run the clock forward until the captioner falls idle.
    std::vector<CompletedCaption> drain() {
        std::vector<CompletedCaption> completed;
        while (captioner_.in_flight) {
            auto step = advance_to(captioner_.busy_until_ms);
            completed.insert(completed.end(), step.begin(), step.end());
        }
        return completed;
    }

    // Attach caption text to a captioned log entry. count_only entries keep
    // their counts-only shape even when their frame was captioned late.
    void attach_caption(std::int64_t event_id, const std::string& text) {
        for (auto& event : log_) {
            if (event.event_id == event_id &&
                event.caption_status == CaptionStatus::captioned) {
                event.caption = text;
                return;
            }
        }
    }

    const std::vector<EventRecord>& log() const { return log_; }
    const CaptionerState& captioner() const { return captioner_; }
    std::int64_t captions_issued() const { return captions_issued_; }
    std::int64_t events_seen() const { return next_event_id_ - 1; }

  private:
    CaptionPolicy policy_;
    std::int64_t latency_ms_;
    CaptionerState captioner_;
    std::vector<EventRecord> log_;
    std::int64_t next_event_id_ = 1;
    std::int64_t captions_issued_ = 0;
};

enum class ReconstructMode {
    strict, // stated before-counts must match the running reconstruction
    lenient // apply signed deltas regardless; lost steps surface as drift
};

// Rebuild the count timeline from count_deltas alone; captions are not
// consulted. A complete log reproduces the true counts at every event time;
// a log with holes drifts from them, which lenient mode makes observable.
inline std::vector<std::pair<std::int64_t, std::map<std::string, int>>>
reconstruct_timeline(const std::vector<EventRecord>& event_log,
                     ReconstructMode mode = ReconstructMode::strict) {
    std::vector<std::pair<std::int64_t, std::map<std::string, int>>> timeline;
    std::map<std::string, int> running;
    for (const auto& event : event_log) {
        for (const auto& [cat, change] : event.count_deltas) {
            auto it = running.find(cat);
            const int current = it == running.end() ? 0 : it->second;
            if (mode == ReconstructMode::strict && current != change.before) {
                throw InconsistentLog(event.event_id,
                                      "event " + std::to_string(event.event_id) + " states " +
                                          cat + " before=" + std::to_string(change.before) +
                                          " but running count is " + std::to_string(current));
            }
            const int next = current + (change.after - change.before);
            if (next == 0) {
                if (it != running.end()) running.erase(it);
            } else {
                running[cat] = next;
            }
        }
        timeline.emplace_back(event.timestamp_ms, running);
    }
    return timeline;
}

} // namespace hux
