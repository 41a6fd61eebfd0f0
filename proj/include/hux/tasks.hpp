#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hux/backend.hpp"
#include "hux/errors.hpp"
#include "hux/profile.hpp"
#include "hux/scene.hpp"
#include "hux/tasks_grid.hpp"
#include "hux/text_util.hpp"

namespace hux {

// A task-specific detector tool: when its trigger terms appear in an
// utterance the tool's detector output is labeled and captioned.
struct ToolSpec {
    std::string tool_id;
    std::set<std::string> trigger_terms; // stored lowercased
    TaskProfile profile;
    std::string tool_caption_instruction; // may contain the <checkfor> placeholder
};

class ToolRegistry {
  public:
    void add(ToolSpec tool) {
        for (const auto& existing : tools_)
            if (existing.tool_id == tool.tool_id)
                throw Error("duplicate tool_id in registry: " + tool.tool_id);
        if (tool.trigger_terms.empty())
            throw Error("tool " + tool.tool_id + " has no trigger terms");
        tools_.push_back(std::move(tool));
    }

    static ToolRegistry from_json(const nlohmann::json& doc) {
        ToolRegistry registry;
        for (const auto& entry : doc.at("tools")) {
            ToolSpec tool;
            tool.tool_id = entry.at("tool_id").get<std::string>();
            for (const auto& term : entry.at("trigger_terms"))
                tool.trigger_terms.insert(to_lower(term.get<std::string>()));
            tool.tool_caption_instruction = entry.value("tool_caption_instruction", "");
            const auto& p = entry.at("profile");
            tool.profile.task_id = p.value("task_id", tool.tool_id);
            for (const auto& cat : p.at("ooi_categories"))
                tool.profile.ooi_categories.insert(cat.get<std::string>());
            if (tool.profile.ooi_categories.empty())
                throw Error("tool " + tool.tool_id + " has an empty ooi_categories list");
            tool.profile.min_confidence = p.value("min_confidence", 0.5);
            tool.profile.move_threshold_px = p.value("move_threshold_px", 25.0);
            tool.profile.scale_ratio_threshold = p.value("scale_ratio_threshold", 1.5);
            tool.profile.caption_instruction = p.value("caption_instruction", "Describe the image.");
            tool.profile.context_instruction = p.value("context_instruction", "");
            registry.add(std::move(tool));
        }
        return registry;
    }

    static ToolRegistry load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw Error("cannot open tool registry: " + path);
        try {
            return from_json(nlohmann::json::parse(in));
        } catch (const nlohmann::json::exception& e) {
            throw Error("malformed tool registry " + path + ": " + e.what());
        }
    }

    const ToolSpec* find(const std::string& tool_id) const {
        for (const auto& tool : tools_)
            if (tool.tool_id == tool_id) return &tool;
        return nullptr;
    }

    const std::vector<ToolSpec>& tools() const { return tools_; }
    bool empty() const { return tools_.empty(); }

  private:
    std::vector<ToolSpec> tools_;
};

struct ToolSelection {
    std::string tool_id;
    std::map<std::string, std::string> action_input;
};

// Rule-based selector: a tool matches when a trigger term appears among the
// utterance's tokens; the matched term becomes action_input["checkfor"].
// No match means the agent answers without a tool. Two or more matching
// tools need the active task to break the tie.
inline std::optional<ToolSelection> select_tool(const std::string& utterance,
                                                const std::optional<std::string>& active_task,
                                                const ToolRegistry& registry) {
    const auto tokens = tokenize(utterance);

    std::vector<ToolSelection> matches;
    for (const auto& tool : registry.tools()) {
        for (const auto& token : tokens) {
            if (tool.trigger_terms.count(token)) {
                matches.push_back({tool.tool_id, {{"checkfor", token}}});
                break;
            }
        }
    }

    if (matches.empty()) return std::nullopt;
    if (matches.size() == 1) return matches.front();
    if (active_task) {
        for (const auto& m : matches)
            if (m.tool_id == *active_task) return m;
    }
    std::string ids;
    for (const auto& m : matches) ids += (ids.empty() ? "" : ", ") + m.tool_id;
    throw AmbiguousTool("utterance matches multiple tools: " + ids);
}

struct ToolResult {
    std::string labeled_image_ref;
    std::string tool_caption;
};

// Run a tool over a frame: label the tool-category annotations with their
// grid cells and caption the labeled overlay. The scenario's annotations
// stand in for the tool's detector.
inline ToolResult apply_tool(const ToolSpec& tool, const FrameRecord& frame,
                             const std::map<std::string, std::string>& action_input,
                             Backend& backend) {
    if (frame.detections.empty())
        throw NoAnnotations("frame " + std::to_string(frame.frame_id) +
                            " carries no annotations for tool " + tool.tool_id);

    std::vector<std::pair<std::string, int>> entries;
    for (const auto& det : frame.detections) {
        if (!tool.profile.is_ooi(det.category)) continue;
        if (det.confidence < tool.profile.min_confidence) continue;
        entries.emplace_back(det.category, grid_cell_index(det.bbox, frame.width, frame.height));
    }

    std::vector<std::string> categories(tool.profile.ooi_categories.begin(),
                                        tool.profile.ooi_categories.end());
    ToolResult result;
    result.labeled_image_ref =
        make_labeled_ref(frame.frame_id, frame.width, frame.height, entries, categories);

    std::string instruction = tool.tool_caption_instruction;
    const auto checkfor = action_input.find("checkfor");
    if (checkfor != action_input.end()) {
        const std::string placeholder = "<checkfor>";
        const auto pos = instruction.find(placeholder);
        if (pos != std::string::npos)
            instruction.replace(pos, placeholder.size(), checkfor->second);
    }

    result.tool_caption = backend.caption(result.labeled_image_ref, instruction);
    return result;
}

} // namespace hux
