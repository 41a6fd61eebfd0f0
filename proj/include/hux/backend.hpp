#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hux/errors.hpp"
#include "hux/image_ref.hpp"
#include "hux/prompt.hpp"
#include "hux/tasks_grid.hpp"
#include "hux/text_util.hpp"

namespace hux {

struct BackendProfile {
    enum class Kind { mock, remote };
    Kind kind = Kind::mock;
    std::string endpoint;   // full URL of a chat-completions style endpoint
    std::string model_name;
    std::int64_t caption_latency_ms = 0; // simulated captioner latency
    std::int64_t timeout_ms = 30000;     // remote connect/read timeout
};

// Inference adapter: image captioning, chat completion, keyword generation.
// The mock is a pure function of its inputs; the remote proxies a service.
class Backend {
  public:
    virtual ~Backend() = default;
    virtual std::string caption(const std::string& image_ref, const std::string& instruction) = 0;
    virtual std::string complete(const std::string& prompt, const std::vector<Turn>& history) = 0;
    virtual std::vector<std::string> keywords(const std::string& ooi_caption,
                                              const std::string& scene_caption,
                                              const std::string& user_context) = 0;
    virtual std::string name() const = 0;
};

namespace detail {

inline std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += sep;
        out += p;
    }
    return out;
}

// Find "<prefix><rest-of-line>" in a prompt and return rest-of-line.
inline std::optional<std::string> line_after(const std::string& text, const std::string& prefix) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
    }
    return std::nullopt;
}

// Scan text for "<number> <noun-variant>" and return the number when found.
inline std::optional<std::pair<int, std::string>>
find_counted_noun(const std::string& text, const std::vector<std::string>& variants) {
    const auto tokens = tokenize(text);
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        if (tokens[i].empty() || !std::isdigit(static_cast<unsigned char>(tokens[i][0]))) continue;
        for (const auto& variant : variants) {
            if (tokens[i + 1] == variant)
                return std::make_pair(std::stoi(tokens[i]), variant);
        }
    }
    return std::nullopt;
}

} // namespace detail

// Deterministic stand-in for the vision and language models. Caption and
// completion are pure functions of their inputs so scenario runs replay
// byte-identically.
class MockBackend : public Backend {
  public:
    explicit MockBackend(std::int64_t caption_latency_ms = 0)
        : caption_latency_ms_(caption_latency_ms) {}

    // synth:scene / synth:roi  -> "A scene containing 2 apple, 1 banana"
    // synth:labeled            -> per-defect enumeration with grid cells
    // synth:text               -> the embedded caption, verbatim
    std::string caption(const std::string& image_ref,
                        const std::string& /*instruction*/) override {
        if (!is_synthetic_ref(image_ref))
            throw UnresolvableImage("mock backend cannot open image file: " + image_ref);
        const SyntheticImage img = parse_synthetic_ref(image_ref);
        switch (img.kind) {
            case SyntheticKind::text:
                return img.text;
            case SyntheticKind::labeled:
                return caption_labeled(img);
            case SyntheticKind::scene:
            case SyntheticKind::roi:
                return caption_counts(img.counts);
        }
        throw UnresolvableImage("unsupported synthetic locator: " + image_ref);
    }

    // Canonical answers synthesized from the prompt's own lines:
    //   1. gazing line echoed when the utterance says "looking at"
    //   2. "how many <noun>" answered from scene, ROI, then history; a noun
    //      never mentioned anywhere yields a refusal starting with "None"
    //   3. otherwise the scene description is echoed
    std::string complete(const std::string& prompt, const std::vector<Turn>& history) override {
        if (prompt.empty()) throw BackendUnavailable("mock completion requires a prompt");
        const auto scene = detail::line_after(prompt, kPromptScenePrefix);
        const auto roi = detail::line_after(prompt, kPromptGazePrefix);
        const auto query = detail::line_after(prompt, kPromptQueryPrefix).value_or("");
        const std::string query_lower = to_lower(query);

        if (roi && query_lower.find("looking at") != std::string::npos)
            return "You are looking at: " + *roi;

        const auto tokens = tokenize(query_lower);
        for (std::size_t i = 0; i + 2 < tokens.size(); ++i) {
            if (tokens[i] != "how" || tokens[i + 1] != "many") continue;
            const std::string& noun = tokens[i + 2];
            std::vector<std::string> variants = {noun};
            if (noun.size() > 1 && noun.back() == 's') variants.push_back(noun.substr(0, noun.size() - 1));
            else variants.push_back(noun + "s");

            if (scene) {
                if (auto hit = detail::find_counted_noun(*scene, variants))
                    return "There are " + std::to_string(hit->first) + " " + hit->second + ".";
            }
            if (roi) {
                if (auto hit = detail::find_counted_noun(*roi, variants))
                    return "There are " + std::to_string(hit->first) + " " + hit->second + ".";
            }
            for (auto it = history.rbegin(); it != history.rend(); ++it) {
                if (it->speaker != Speaker::assistant) continue;
                if (auto hit = detail::find_counted_noun(it->text, variants))
                    return "There are " + std::to_string(hit->first) + " " + hit->second + ".";
            }
            return "None. There is no mention of " + noun + " in this conversation.";
        }

        if (scene && !scene->empty()) return "Current scene: " + *scene;
        return "Nothing has been observed yet.";
    }

    // Deduplicated content words plus adjacent content-word phrases from the
    // captions and the spoken context.
    std::vector<std::string> keywords(const std::string& ooi_caption,
                                      const std::string& scene_caption,
                                      const std::string& user_context) override {
        std::vector<std::string> out;
        std::set<std::string> seen;
        auto add = [&](const std::string& kw) {
            if (seen.insert(kw).second) out.push_back(kw);
        };
        for (const std::string* source : {&ooi_caption, &scene_caption, &user_context}) {
            const auto words = words_of(*source);
            for (std::size_t i = 0; i < words.size(); ++i) {
                if (is_stopword(words[i])) continue;
                add(words[i]);
                if (i + 1 < words.size() && !is_stopword(words[i + 1]))
                    add(words[i] + " " + words[i + 1]);
            }
        }
        return out;
    }

    std::string name() const override { return "mock"; }

    std::int64_t caption_latency_ms() const { return caption_latency_ms_; }

  private:
    static std::string caption_counts(const std::map<std::string, int>& counts) {
        if (counts.empty()) return "A scene containing nothing of interest";
        std::vector<std::string> parts;
        for (const auto& [cat, n] : counts) parts.push_back(std::to_string(n) + " " + cat);
        return "A scene containing " + detail::join(parts, ", ");
    }

    static std::string caption_labeled(const SyntheticImage& img) {
        if (img.labeled.empty())
            return "no " + detail::join(img.label_categories, ", ") + " found";
        std::vector<std::string> entries;
        for (const auto& [cat, cell] : img.labeled)
            entries.push_back(cat + " at the " + grid_cell_name(cell));
        return "There are " + std::to_string(img.labeled.size()) + " labeled objects: " +
               detail::join(entries, "; ") + ".";
    }

    std::int64_t caption_latency_ms_;
};

std::unique_ptr<Backend> make_remote_backend(const BackendProfile& profile);

inline std::unique_ptr<Backend> make_backend(const BackendProfile& profile) {
    if (profile.kind == BackendProfile::Kind::mock)
        return std::make_unique<MockBackend>(profile.caption_latency_ms);
    return make_remote_backend(profile);
}

} // namespace hux

#include "hux/backend_remote.hpp"
