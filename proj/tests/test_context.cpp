#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "hux/backend.hpp"
#include "hux/liou.hpp"
#include "hux/prompt.hpp"

#include "httplib.h"

#include "helpers.hpp"

using namespace hux;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::size_t count_occurrences(const std::string& haystack, const std::string& needle) {
    std::size_t count = 0;
    for (std::size_t pos = haystack.find(needle); pos != std::string::npos;
         pos = haystack.find(needle, pos + 1))
        ++count;
    return count;
}

} // namespace

TEST_CASE("LIOU: single push then read, nothing dropped") {
    LiouStack stack;
    stack.push("c1", 1, 100);
    const auto top = stack.read();
    REQUIRE(top.has_value());
    REQUIRE(top->caption == "c1");
    REQUIRE(stack.dropped_count() == 0);
}

TEST_CASE("LIOU: pushes over unread tops drop the older captions") {
    LiouStack stack;
    stack.push("c1", 1, 100);
    stack.push("c2", 2, 200);
    stack.push("c3", 3, 300);
    const auto top = stack.read();
    REQUIRE(top->caption == "c3");
    REQUIRE(stack.dropped_count() == 2);

    // re-reading the same top is not a fresh read and drops nothing
    REQUIRE(stack.read()->caption == "c3");
    REQUIRE(stack.fresh_read_count() == 1);
}

TEST_CASE("LIOU: empty stack reads nothing; stale timestamps are rejected") {
    LiouStack stack;
    REQUIRE_FALSE(stack.read().has_value());
    stack.push("c1", 1, 500);
    REQUIRE_THROWS_AS(stack.push("c0", 2, 400), ClockRegression);
}

TEST_CASE("LIOU accounting matches a list-based replay over random sequences") {
    std::mt19937 rng(808);
    std::uniform_int_distribution<int> op_dist(0, 2); // 0,1 = push, 2 = read

    LiouStack stack;
    // replay model: every push ends up dropped, fresh-read, or current-unread
    std::int64_t pushes = 0;
    std::int64_t fresh_reads = 0;
    std::int64_t dropped = 0;
    bool unread_top = false;
    std::int64_t ts = 0;
    std::string expected_top;

    for (int i = 0; i < 5000; ++i) {
        if (op_dist(rng) != 2) {
            const std::string caption = "cap" + std::to_string(i);
            stack.push(caption, i, ts += 10);
            if (unread_top) ++dropped;
            expected_top = caption;
            unread_top = true;
            ++pushes;
        } else {
            const auto top = stack.read();
            if (pushes == 0) {
                REQUIRE_FALSE(top.has_value());
            } else {
                REQUIRE(top->caption == expected_top);
                if (unread_top) {
                    ++fresh_reads;
                    unread_top = false;
                }
            }
        }
        REQUIRE(stack.dropped_count() == dropped);
        REQUIRE(stack.fresh_read_count() == fresh_reads);
        REQUIRE(stack.push_count() == pushes);
        REQUIRE(dropped + fresh_reads + (unread_top ? 1 : 0) == pushes);
    }
}

TEST_CASE("assemble_prompt matches the golden five-line template byte for byte") {
    PromptBundle bundle;
    bundle.scene_caption = "two fruits on a table";
    bundle.roi_caption = "a red apple";
    bundle.utterance = "What am I looking at?";
    REQUIRE(assemble_prompt(bundle) == read_file(hux_test::golden_path("prompt_with_roi.txt")));
}

TEST_CASE("assemble_prompt omits the gazing line when there is no roi caption") {
    PromptBundle bundle;
    bundle.scene_caption = "two fruits on a table";
    bundle.utterance = "What do you see?";
    const std::string prompt = assemble_prompt(bundle);
    REQUIRE(prompt == read_file(hux_test::golden_path("prompt_without_roi.txt")));
    REQUIRE(prompt.find("gazing") == std::string::npos);
}

TEST_CASE("assemble_prompt requires an utterance") {
    PromptBundle bundle;
    bundle.scene_caption = "anything";
    REQUIRE_THROWS_AS(assemble_prompt(bundle), EmptyUtterance);
}

TEST_CASE("assemble_prompt embeds each slot exactly once") {
    PromptBundle bundle;
    bundle.scene_caption = "SENTINEL_SCENE_93b1";
    bundle.roi_caption = "SENTINEL_ROI_5a77";
    bundle.utterance = "SENTINEL_QUERY_c0de";
    const std::string prompt = assemble_prompt(bundle);
    REQUIRE(count_occurrences(prompt, "SENTINEL_SCENE_93b1") == 1);
    REQUIRE(count_occurrences(prompt, "SENTINEL_ROI_5a77") == 1);
    REQUIRE(count_occurrences(prompt, "SENTINEL_QUERY_c0de") == 1);
    REQUIRE(count_occurrences(prompt, "SENTINEL") == 3);
}

TEST_CASE("mock caption renders sorted category counts") {
    MockBackend backend;
    FrameRecord frame;
    frame.frame_id = 7;
    frame.width = 1000;
    frame.height = 1000;
    frame.detections = {hux_test::make_detection("banana", 10, 10),
                        hux_test::make_detection("apple", 100, 100),
                        hux_test::make_detection("apple", 200, 200)};
    frame.image_ref = make_scene_ref(frame);

    REQUIRE(backend.caption(frame.image_ref, "Describe the image.") ==
            "A scene containing 2 apple, 1 banana");

    FrameRecord empty;
    empty.frame_id = 8;
    empty.width = 1000;
    empty.height = 1000;
    empty.image_ref = make_scene_ref(empty);
    REQUIRE(backend.caption(empty.image_ref, "Describe the image.") ==
            "A scene containing nothing of interest");
}

TEST_CASE("mock caption returns text refs verbatim and rejects real paths") {
    MockBackend backend;
    REQUIRE(backend.caption(make_text_ref("Imam wearing a yellow t-shirt"), "x") ==
            "Imam wearing a yellow t-shirt");
    REQUIRE_THROWS_AS(backend.caption("/tmp/not_synthetic.png", "x"), UnresolvableImage);
    REQUIRE_THROWS_AS(backend.caption("synth:bogus:f1:10x10:", "x"), UnresolvableImage);
}

TEST_CASE("mock completion echoes the gazing line for looking-at queries") {
    MockBackend backend;
    PromptBundle bundle;
    bundle.scene_caption = "A scene containing 2 apple, 1 banana";
    bundle.roi_caption = "a red apple";
    bundle.utterance = "What are we looking at?";
    const auto answer = backend.complete(assemble_prompt(bundle), {});
    REQUIRE(answer.find("red apple") != std::string::npos);
}

TEST_CASE("mock completion answers how-many from the scene line") {
    MockBackend backend;
    PromptBundle bundle;
    bundle.scene_caption = "A scene containing 2 apple, 1 banana";
    bundle.utterance = "How many apples do you see?";
    REQUIRE(backend.complete(assemble_prompt(bundle), {}) == "There are 2 apple.");
}

TEST_CASE("mock completion answers how-many from history when the scene is silent") {
    MockBackend backend;
    PromptBundle bundle;
    bundle.scene_caption = "A scene containing 1 board";
    bundle.utterance = "How many defects did you see?";
    const std::vector<Turn> history = {
        {Speaker::user, "Are there any defects?"},
        {Speaker::assistant, "There are 3 defects: all mouse bites."}};
    REQUIRE(backend.complete(assemble_prompt(bundle), history) == "There are 3 defects.");
}

TEST_CASE("mock completion refuses nouns never observed") {
    MockBackend backend;
    PromptBundle bundle;
    bundle.scene_caption = "A scene containing 1 board";
    bundle.utterance = "How many flowers did you see?";
    const auto answer = backend.complete(assemble_prompt(bundle), {});
    REQUIRE(answer.rfind("None", 0) == 0);
    REQUIRE(answer.find("flowers") != std::string::npos);
}

TEST_CASE("mock completion without a gazing line echoes the scene") {
    MockBackend backend;
    PromptBundle bundle;
    bundle.scene_caption = "A scene containing 1 banana";
    bundle.utterance = "Do you see any fruits?";
    const auto answer = backend.complete(assemble_prompt(bundle), {});
    REQUIRE(answer.find("1 banana") != std::string::npos);
}

TEST_CASE("mock caption and completion are pure functions of their inputs") {
    MockBackend backend;
    PromptBundle bundle;
    bundle.scene_caption = "A scene containing 3 apple";
    bundle.roi_caption = "A scene containing 1 apple";
    bundle.utterance = "What am I looking at?";
    const std::string prompt = assemble_prompt(bundle);
    REQUIRE(backend.complete(prompt, {}) == backend.complete(prompt, {}));

    FrameRecord frame;
    frame.frame_id = 1;
    frame.width = 100;
    frame.height = 100;
    frame.image_ref = make_scene_ref(frame);
    REQUIRE(backend.caption(frame.image_ref, "a") == backend.caption(frame.image_ref, "b"));
}

TEST_CASE("remote backend speaks the chat-completions wire shape") {
    nlohmann::json seen_completion;
    nlohmann::json seen_caption;
    std::string seen_auth;

    httplib::Server server;
    server.Post("/v1/chat/completions",
                [&](const httplib::Request& req, httplib::Response& res) {
                    const auto body = nlohmann::json::parse(req.body);
                    if (body["messages"].back()["content"].is_array()) seen_caption = body;
                    else seen_completion = body;
                    if (req.has_header("Authorization"))
                        seen_auth = req.get_header_value("Authorization");
                    const nlohmann::json reply = {
                        {"choices",
                         {{{"message", {{"role", "assistant"}, {"content", "stub reply"}}}}}}};
                    res.set_content(reply.dump(), "application/json");
                });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread listener([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    setenv("HUX_BACKEND_TOKEN", "sekrit", 1);
    BackendProfile profile;
    profile.kind = BackendProfile::Kind::remote;
    profile.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    profile.model_name = "test-model";
    auto backend = make_backend(profile);

    SECTION("completion carries history as role-tagged messages") {
        const std::vector<Turn> history = {{Speaker::system, "be terse"},
                                           {Speaker::user, "hi"},
                                           {Speaker::assistant, "hello"}};
        const auto reply = backend->complete("prompt text", history);
        REQUIRE(reply == "stub reply");
        REQUIRE(seen_completion["model"] == "test-model");
        REQUIRE(seen_completion["messages"].size() == 4);
        REQUIRE(seen_completion["messages"][0]["role"] == "system");
        REQUIRE(seen_completion["messages"][2]["role"] == "assistant");
        REQUIRE(seen_completion["messages"][3]["content"] == "prompt text");
        REQUIRE(seen_auth == "Bearer sekrit");
    }

    SECTION("caption sends the image as a data-URL content part") {
        const std::string image_path = "/tmp/hux_test_image.png";
        std::ofstream(image_path, std::ios::binary) << "fakepngbytes";
        const auto reply = backend->caption(image_path, "Describe the image.");
        REQUIRE(!reply.empty());
        const auto& parts = seen_caption["messages"][0]["content"];
        REQUIRE(parts.size() == 2);
        REQUIRE(parts[0]["type"] == "text");
        REQUIRE(parts[1]["type"] == "image_url");
        const std::string url = parts[1]["image_url"]["url"].get<std::string>();
        REQUIRE(url.rfind("data:image/png;base64,", 0) == 0);
    }

    SECTION("synthetic locators cannot be sent to a remote captioner") {
        REQUIRE_THROWS_AS(backend->caption("synth:scene:f1:10x10:", "x"), UnresolvableImage);
    }

    SECTION("keyword generation lowercases and strips list markers from reply lines") {
        // the stub replies "stub reply" for any request; a single keyword line
        const auto kws = backend->keywords("ooi", "scene", "ctx");
        REQUIRE(kws == std::vector<std::string>{"stub reply"});
    }

    server.stop();
    listener.join();
}

TEST_CASE("remote backend retries transient server errors") {
    int requests = 0;
    httplib::Server server;
    server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        ++requests;
        if (requests < 3) {
            res.status = 503;
            return;
        }
        const nlohmann::json reply = {
            {"choices", {{{"message", {{"role", "assistant"}, {"content", "recovered"}}}}}}};
        res.set_content(reply.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread listener([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    BackendProfile profile;
    profile.kind = BackendProfile::Kind::remote;
    profile.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    profile.model_name = "test-model";
    auto backend = make_backend(profile);

    REQUIRE(backend->complete("x", {}) == "recovered");
    REQUIRE(requests == 3);
    server.stop();
    listener.join();

    // a client error is surfaced immediately, without retries
    httplib::Server denying;
    denying.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        res.status = 401;
    });
    const int port2 = denying.bind_to_any_port("127.0.0.1");
    std::thread listener2([&] { denying.listen_after_bind(); });
    denying.wait_until_ready();
    BackendProfile denied = profile;
    denied.endpoint = "http://127.0.0.1:" + std::to_string(port2) + "/v1/chat/completions";
    auto denied_backend = make_backend(denied);
    REQUIRE_THROWS_AS(denied_backend->complete("x", {}), BackendUnavailable);
    denying.stop();
    listener2.join();
}

TEST_CASE("remote backend reports unreachable services") {
    BackendProfile profile;
    profile.kind = BackendProfile::Kind::remote;
    profile.endpoint = "http://127.0.0.1:1/v1/chat/completions"; // nothing listens here
    profile.model_name = "test-model";
    profile.timeout_ms = 200;
    auto backend = make_backend(profile);
    REQUIRE_THROWS_AS(backend->complete("x", {}), BackendUnavailable);
}
