#pragma once

// Remote inference client speaking the chat-completions wire shape:
// POST {model, messages:[{role, content}]} ; first choice message content is
// the reply. Images travel as base64 data-URL content parts.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "httplib.h"

#include "hux/backend.hpp"
#include "hux/errors.hpp"

namespace hux {

namespace detail {

inline std::string base64_encode(const std::string& bytes) {
    static const char* alphabet =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 2 < bytes.size()) {
        const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                           (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                           static_cast<unsigned char>(bytes[i + 2]);
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out.push_back(alphabet[(v >> 6) & 63]);
        out.push_back(alphabet[v & 63]);
        i += 3;
    }
    if (i + 1 == bytes.size()) {
        const unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out += "==";
    } else if (i + 2 == bytes.size()) {
        const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                           (static_cast<unsigned char>(bytes[i + 1]) << 8);
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out.push_back(alphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

inline std::string mime_for_path(const std::string& path) {
    const auto dot = path.rfind('.');
    const std::string ext = dot == std::string::npos ? "" : to_lower(path.substr(dot + 1));
    if (ext == "jpg" || ext == "jpeg") return "image/jpeg";
    if (ext == "gif") return "image/gif";
    if (ext == "bmp") return "image/bmp";
    return "image/png";
}

// Split "http://host:port/some/path" into client base and request path.
inline std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    const auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos)
        throw BackendUnavailable("endpoint is not a URL: " + endpoint);
    const auto path_start = endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {endpoint, "/"};
    return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

} // namespace detail

class RemoteBackend : public Backend {
  public:
    explicit RemoteBackend(BackendProfile profile) : profile_(std::move(profile)) {
        if (profile_.endpoint.empty())
            throw BackendUnavailable("remote backend requires an endpoint");
    }

    std::string caption(const std::string& image_ref, const std::string& instruction) override {
        const std::string data_url = data_url_for(image_ref); // may throw; keep json assembly clean
        nlohmann::json content = nlohmann::json::array();
        content.push_back({{"type", "text"}, {"text", instruction}});
        content.push_back({{"type", "image_url"}, {"image_url", {{"url", data_url}}}});
        nlohmann::json messages = nlohmann::json::array();
        messages.push_back({{"role", "user"}, {"content", content}});
        return post_chat(messages);
    }

    std::string complete(const std::string& prompt, const std::vector<Turn>& history) override {
        nlohmann::json messages = nlohmann::json::array();
        for (const auto& turn : history)
            messages.push_back({{"role", to_string(turn.speaker)}, {"content", turn.text}});
        messages.push_back({{"role", "user"}, {"content", prompt}});
        return post_chat(messages);
    }

    std::vector<std::string> keywords(const std::string& ooi_caption,
                                      const std::string& scene_caption,
                                      const std::string& user_context) override {
        const std::string prompt =
            "Generate retrieval keywords and short phrases, one per line, for a memory with:\n"
            "Object of interest: " + ooi_caption + "\n" +
            "Scene description: " + scene_caption + "\n" +
            "User context: " + user_context + "\n" +
            "Output only the keywords.";
        const std::string reply = post_chat(nlohmann::json::array(
            {nlohmann::json{{"role", "user"}, {"content", prompt}}}));
        std::vector<std::string> out;
        std::istringstream in(reply);
        std::string line;
        while (std::getline(in, line)) {
            while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
            std::size_t start = line.find_first_not_of("0123456789.-* \t");
            if (start == std::string::npos) continue;
            out.push_back(to_lower(line.substr(start)));
        }
        return out;
    }

    std::string name() const override { return "remote:" + profile_.model_name; }

  private:
    std::string data_url_for(const std::string& image_ref) const {
        if (is_synthetic_ref(image_ref))
            throw UnresolvableImage("remote backend needs a real image file, got: " + image_ref);
        std::ifstream in(image_ref, std::ios::binary);
        if (!in) throw UnresolvableImage("cannot open image file: " + image_ref);
        std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return "data:" + detail::mime_for_path(image_ref) + ";base64," +
               detail::base64_encode(bytes);
    }

    std::string post_chat(const nlohmann::json& messages) const {
        const auto [base, path] = detail::split_endpoint(profile_.endpoint);

        nlohmann::json body;
        body["model"] = profile_.model_name;
        body["messages"] = messages;

        httplib::Client client(base);
        client.set_connection_timeout(profile_.timeout_ms / 1000,
                                      (profile_.timeout_ms % 1000) * 1000);
        client.set_read_timeout(profile_.timeout_ms / 1000, (profile_.timeout_ms % 1000) * 1000);

        httplib::Headers headers;
        if (const char* token = std::getenv("HUX_BACKEND_TOKEN"))
            headers.emplace("Authorization", std::string("Bearer ") + token);

        std::string last_error;
        for (int attempt = 0; attempt < 3; ++attempt) {
            auto res = client.Post(path, headers, body.dump(), "application/json");
            if (!res) {
                last_error = "connection failed: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status >= 500) {
                last_error = "server error " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200)
                throw BackendUnavailable("backend returned status " +
                                         std::to_string(res->status));
            try {
                const auto doc = nlohmann::json::parse(res->body);
                return doc.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const std::exception& e) {
                throw BackendUnavailable(std::string("malformed backend response: ") + e.what());
            }
        }
        throw BackendUnavailable("backend unreachable after retries: " + last_error);
    }

    BackendProfile profile_;
};

inline std::unique_ptr<Backend> make_remote_backend(const BackendProfile& profile) {
    return std::make_unique<RemoteBackend>(profile);
}

} // namespace hux
