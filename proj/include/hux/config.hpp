#pragma once

#include <fstream>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "hux/backend.hpp"
#include "hux/eoi.hpp"
#include "hux/errors.hpp"

namespace hux {

// Tool-level configuration: backend selection, policy defaults, paths.
// Precedence elsewhere is flags > scenario header > config file > built-ins.
struct Config {
    BackendProfile backend;
    CaptionPolicy default_policy = CaptionPolicy::hybrid;
    std::int64_t default_caption_latency_ms = 1000;
    std::string store_path = "hux_memory.jsonl";
    std::string reports_dir = "reports";
    std::optional<std::string> registry_path;
};

inline Config config_from_json(const nlohmann::json& doc) {
    Config config;
    if (doc.contains("backend")) {
        const auto& b = doc["backend"];
        const std::string kind = b.value("kind", "mock");
        if (kind == "mock") config.backend.kind = BackendProfile::Kind::mock;
        else if (kind == "remote") config.backend.kind = BackendProfile::Kind::remote;
        else throw ConfigError("backend.kind", "backend.kind must be 'mock' or 'remote'");
        config.backend.endpoint = b.value("endpoint", "");
        config.backend.model_name = b.value("model_name", "");
        config.backend.caption_latency_ms = b.value("caption_latency_ms", std::int64_t{0});
        config.backend.timeout_ms = b.value("timeout_ms", std::int64_t{30000});
        if (config.backend.kind == BackendProfile::Kind::remote && config.backend.endpoint.empty())
            throw ConfigError("backend.endpoint", "remote backend requires backend.endpoint");
        if (config.backend.kind == BackendProfile::Kind::mock && !config.backend.endpoint.empty())
            throw ConfigError("backend.endpoint", "mock backend must not set backend.endpoint");
    }
    if (doc.contains("policy")) {
        const std::string p = doc["policy"].get<std::string>();
        if (p == "naive") config.default_policy = CaptionPolicy::naive;
        else if (p == "hybrid") config.default_policy = CaptionPolicy::hybrid;
        else throw ConfigError("policy", "policy must be 'naive' or 'hybrid'");
    }
    if (doc.contains("caption_latency_ms")) {
        config.default_caption_latency_ms = doc["caption_latency_ms"].get<std::int64_t>();
        if (config.default_caption_latency_ms < 0)
            throw ConfigError("caption_latency_ms", "caption_latency_ms must be >= 0");
    }
    if (doc.contains("paths")) {
        const auto& p = doc["paths"];
        config.store_path = p.value("store", config.store_path);
        config.reports_dir = p.value("reports", config.reports_dir);
        if (p.contains("registry")) config.registry_path = p["registry"].get<std::string>();
    }
    return config;
}

inline Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file: " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("", "malformed config " + path + ": " + e.what());
    }
    try {
        return config_from_json(doc);
    } catch (const ConfigError&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("", std::string("invalid config field: ") + e.what());
    }
}

} // namespace hux
