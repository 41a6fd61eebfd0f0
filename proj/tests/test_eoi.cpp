#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "hux/eoi.hpp"
#include "hux/scene.hpp"

#include "helpers.hpp"

using namespace hux;
using hux_test::fruit_profile;
using hux_test::make_detection;

namespace {

EventRecord event_with_delta(std::int64_t frame_id, std::int64_t ts,
                             std::map<std::string, CountChange> deltas) {
    EventRecord ev;
    ev.event_id = frame_id;
    ev.frame_id = frame_id;
    ev.timestamp_ms = ts;
    ev.kinds = {kKindCountChange};
    ev.count_deltas = std::move(deltas);
    return ev;
}

FrameRecord frame_at(std::int64_t id, std::int64_t ts, std::vector<Detection> dets) {
    FrameRecord f;
    f.frame_id = id;
    f.timestamp_ms = ts;
    f.width = 1000;
    f.height = 1000;
    f.detections = std::move(dets);
    f.image_ref = make_scene_ref(f);
    return f;
}

// Classify-and-schedule over a frame stream; returns the scheduler for
// inspection after draining.
CaptionScheduler run_stream(const std::vector<FrameRecord>& frames, const TaskProfile& profile,
                            CaptionPolicy policy, std::int64_t latency) {
    CaptionScheduler scheduler(policy, latency);
    SceneState state;
    for (const auto& frame : frames) {
        scheduler.advance_to(frame.timestamp_ms);
        auto [next, delta] = ingest_frame(state, frame, profile);
        state = std::move(next);
        if (auto ev = classify_event(delta, profile))
            scheduler.on_event(std::move(*ev), frame.timestamp_ms);
    }
    scheduler.drain();
    return scheduler;
}

} // namespace

TEST_CASE("count change produces a count_change event") {
    FrameDelta delta;
    delta.frame_id = 3;
    delta.counts["apple"] = {1, 2};
    const auto event = classify_event(delta, fruit_profile());
    REQUIRE(event.has_value());
    REQUIRE(event->kinds == std::set<std::string>{kKindCountChange});
    REQUIRE(event->count_deltas.at("apple").before == 1);
    REQUIRE(event->count_deltas.at("apple").after == 2);
}

TEST_CASE("sub-threshold movement does not trigger") {
    FrameDelta delta;
    delta.counts["apple"] = {1, 1};
    delta.tracks.push_back({1, "apple", 3.0, 1.0});
    REQUIRE_FALSE(classify_event(delta, fruit_profile()).has_value());
}

TEST_CASE("behavior change triggers on movement or scale in either direction") {
    auto profile = fruit_profile(); // move 25px, scale 1.5

    FrameDelta moved;
    moved.counts["apple"] = {1, 1};
    moved.tracks.push_back({1, "apple", 30.0, 1.0});
    REQUIRE(classify_event(moved, profile)->kinds == std::set<std::string>{kKindBehaviorChange});

    FrameDelta grown;
    grown.counts["apple"] = {1, 1};
    grown.tracks.push_back({1, "apple", 0.0, 1.6});
    REQUIRE(classify_event(grown, profile).has_value());

    FrameDelta shrunk;
    shrunk.counts["apple"] = {1, 1};
    shrunk.tracks.push_back({1, "apple", 0.0, 0.5}); // below 1/1.5
    REQUIRE(classify_event(shrunk, profile).has_value());
}

TEST_CASE("simultaneous triggers merge into one event with a kind set") {
    auto profile = fruit_profile();
    profile.custom_rules.push_back(
        {"apple_pair", [](const FrameDelta& d) {
             auto it = d.counts.find("apple");
             return it != d.counts.end() && it->second.after == 2;
         }});

    FrameDelta delta;
    delta.counts["apple"] = {1, 2};
    delta.tracks.push_back({1, "apple", 40.0, 1.0});
    const auto event = classify_event(delta, profile);
    REQUIRE(event.has_value());
    REQUIRE(event->kinds == std::set<std::string>{kKindCountChange, kKindBehaviorChange,
                                                  "custom:apple_pair"});
}

TEST_CASE("orange removed and replaced three times yields six count_change events") {
    const auto profile = fruit_profile();
    std::vector<FrameRecord> frames;
    frames.push_back(frame_at(1, 0, {make_detection("banana", 500, 500)}));
    bool present = false;
    for (int i = 2; i <= 7; ++i) {
        present = !present;
        std::vector<Detection> dets = {make_detection("banana", 500, 500)};
        if (present) dets.push_back(make_detection("orange", 100, 100));
        frames.push_back(frame_at(i, (i - 1) * 100, std::move(dets)));
    }

    const auto expected_frames = hux_test::brute_change_frames(frames, profile);

    SceneState state;
    std::vector<std::int64_t> event_frames;
    for (const auto& frame : frames) {
        auto [next, delta] = ingest_frame(state, frame, profile);
        state = std::move(next);
        if (auto ev = classify_event(delta, profile)) {
            REQUIRE(ev->kinds.count(kKindCountChange) == 1);
            event_frames.push_back(ev->frame_id);
        }
    }
    REQUIRE(event_frames.size() == 7); // banana appearing at f1 plus six orange flips
    REQUIRE(event_frames == expected_frames);
    // six of them are the orange flips
    int orange_events = 0;
    for (auto id : event_frames)
        if (id >= 2) ++orange_events;
    REQUIRE(orange_events == 6);
}

TEST_CASE("free captioner dispatches immediately") {
    CaptionerState captioner;
    const auto decision = schedule_caption(event_with_delta(1, 0, {{"apple", {0, 1}}}), 0,
                                           captioner, CaptionPolicy::naive, 1000);
    REQUIRE(decision == ScheduleDecision::dispatch);
    REQUIRE(captioner.busy_until_ms == 1000);
    REQUIRE(captioner.in_flight.has_value());
}

TEST_CASE("schedule_caption rejects a clock that moves backward") {
    CaptionerState captioner;
    schedule_caption(event_with_delta(1, 500, {}), 500, captioner, CaptionPolicy::hybrid, 100);
    REQUIRE_THROWS_AS(
        schedule_caption(event_with_delta(2, 400, {}), 400, captioner, CaptionPolicy::hybrid, 100),
        ClockRegression);
}

TEST_CASE("naive policy: busy-window events are replaced, middle one is lost") {
    CaptionScheduler scheduler(CaptionPolicy::naive, 1000);
    scheduler.advance_to(0);
    scheduler.on_event(event_with_delta(1, 0, {{"apple", {0, 1}}}), 0);
    scheduler.advance_to(300);
    scheduler.on_event(event_with_delta(2, 300, {{"apple", {1, 2}}}), 300);
    scheduler.advance_to(600);
    scheduler.on_event(event_with_delta(3, 600, {{"apple", {2, 3}}}), 600);

    const auto completed = scheduler.drain();

    const auto& log = scheduler.log();
    REQUIRE(log.size() == 2);
    REQUIRE(log[0].event_id == 1);
    REQUIRE(log[1].event_id == 3); // id 2 was assigned but its record is gone
    REQUIRE(log[0].caption_status == CaptionStatus::captioned);
    REQUIRE(log[1].caption_status == CaptionStatus::captioned);
    REQUIRE(scheduler.captions_issued() == 2);

    REQUIRE(completed.size() == 2);
    REQUIRE(completed[0].event_id == 1);
    REQUIRE(completed[0].completed_at_ms == 1000);
    REQUIRE(completed[1].event_id == 3);
    REQUIRE(completed[1].completed_at_ms == 2000); // dispatched when the slot freed
}

TEST_CASE("hybrid policy: busy-window events keep their counts, latest gets the caption slot") {
    CaptionScheduler scheduler(CaptionPolicy::hybrid, 1000);
    scheduler.advance_to(0);
    scheduler.on_event(event_with_delta(1, 0, {{"apple", {0, 1}}}), 0);
    scheduler.advance_to(300);
    scheduler.on_event(event_with_delta(2, 300, {{"apple", {1, 2}}}), 300);
    scheduler.advance_to(600);
    scheduler.on_event(event_with_delta(3, 600, {{"apple", {2, 3}}}), 600);

    const auto completed = scheduler.drain();

    const auto& log = scheduler.log();
    REQUIRE(log.size() == 3);
    REQUIRE(log[0].caption_status == CaptionStatus::captioned);
    REQUIRE(log[1].caption_status == CaptionStatus::count_only);
    REQUIRE(log[2].caption_status == CaptionStatus::count_only);
    REQUIRE(scheduler.captions_issued() == 2); // E1's frame, then E3's frame at t=1000

    REQUIRE(completed.size() == 2);
    REQUIRE(completed[1].frame_id == 3); // the middle frame was skipped over
    REQUIRE(completed[1].completed_at_ms == 2000);
}

TEST_CASE("reconstruct_timeline on an empty log is empty") {
    REQUIRE(reconstruct_timeline({}).empty());
}

TEST_CASE("hybrid log reconstructs the oracle counts at event times") {
    std::vector<EventRecord> log = {event_with_delta(1, 0, {{"apple", {0, 1}}}),
                                    event_with_delta(2, 300, {{"apple", {1, 2}}}),
                                    event_with_delta(3, 600, {{"apple", {2, 3}}})};
    const auto timeline = reconstruct_timeline(log);
    REQUIRE(timeline.size() == 3);
    REQUIRE(timeline[0].second.at("apple") == 1);
    REQUIRE(timeline[1].second.at("apple") == 2);
    REQUIRE(timeline[2].second.at("apple") == 3);
}

TEST_CASE("naive log with a hole diverges under lenient reconstruction and throws under strict") {
    std::vector<EventRecord> log = {event_with_delta(1, 0, {{"apple", {0, 1}}}),
                                    event_with_delta(3, 600, {{"apple", {2, 3}}})};
    const auto timeline = reconstruct_timeline(log, ReconstructMode::lenient);
    REQUIRE(timeline.size() == 2);
    REQUIRE(timeline[1].second.at("apple") == 2); // true count at t=600 is 3

    REQUIRE_THROWS_AS(reconstruct_timeline(log), InconsistentLog);
    try {
        reconstruct_timeline(log);
    } catch (const InconsistentLog& e) {
        REQUIRE(e.event_id == 3);
    }
}

TEST_CASE("hybrid policy never loses count information, for any latency") {
    const auto profile = fruit_profile();
    std::mt19937 rng(424242);
    for (const std::int64_t latency : {std::int64_t{0}, std::int64_t{100}, std::int64_t{300},
                                       std::int64_t{1000}}) {
        const auto frames = hux_test::random_frames(rng, 60, profile);
        const auto expected = hux_test::brute_counts(frames, profile);

        const auto scheduler = run_stream(frames, profile, CaptionPolicy::hybrid, latency);
        const auto timeline = reconstruct_timeline(scheduler.log()); // strict must not throw

        for (std::size_t i = 0; i < scheduler.log().size(); ++i) {
            const auto frame_id = scheduler.log()[i].frame_id;
            REQUIRE(timeline[i].second == expected[static_cast<std::size_t>(frame_id - 1)]);
        }
    }
}

TEST_CASE("with zero latency naive and hybrid agree and everything is captioned") {
    const auto profile = fruit_profile();
    std::mt19937 rng(1312);
    const auto frames = hux_test::random_frames(rng, 50, profile);

    const auto naive = run_stream(frames, profile, CaptionPolicy::naive, 0);
    const auto hybrid = run_stream(frames, profile, CaptionPolicy::hybrid, 0);

    REQUIRE(naive.log().size() == hybrid.log().size());
    for (std::size_t i = 0; i < naive.log().size(); ++i) {
        REQUIRE(naive.log()[i].event_id == hybrid.log()[i].event_id);
        REQUIRE(naive.log()[i].frame_id == hybrid.log()[i].frame_id);
        REQUIRE(naive.log()[i].count_deltas == hybrid.log()[i].count_deltas);
        REQUIRE(naive.log()[i].caption_status == CaptionStatus::captioned);
        REQUIRE(hybrid.log()[i].caption_status == CaptionStatus::captioned);
    }
    REQUIRE(naive.captions_issued() == static_cast<std::int64_t>(naive.log().size()));
}

TEST_CASE("dispatch count never exceeds event count under either policy") {
    const auto profile = fruit_profile();
    std::mt19937 rng(555);
    for (const auto policy : {CaptionPolicy::naive, CaptionPolicy::hybrid}) {
        const auto frames = hux_test::random_frames(rng, 80, profile);
        const auto scheduler = run_stream(frames, profile, policy, 250);
        REQUIRE(scheduler.captions_issued() <= scheduler.events_seen());
        REQUIRE(static_cast<std::int64_t>(scheduler.log().size()) <= scheduler.events_seen());
    }
}

TEST_CASE("classify fires exactly when the adjacent-frame recount differs") {
    auto profile = fruit_profile();
    profile.move_threshold_px = std::numeric_limits<double>::infinity();
    profile.scale_ratio_threshold = std::numeric_limits<double>::infinity();
    std::mt19937 rng(31337);
    const auto frames = hux_test::random_frames(rng, 50, profile);
    const auto expected_frames = hux_test::brute_change_frames(frames, profile);

    SceneState state;
    std::vector<std::int64_t> event_frames;
    for (const auto& frame : frames) {
        auto [next, delta] = ingest_frame(state, frame, profile);
        state = std::move(next);
        if (auto ev = classify_event(delta, profile)) event_frames.push_back(ev->frame_id);
    }
    REQUIRE(event_frames == expected_frames);
}
