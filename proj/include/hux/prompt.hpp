#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hux/errors.hpp"

namespace hux {

enum class Speaker { system, user, assistant };

inline const char* to_string(Speaker s) {
    switch (s) {
        case Speaker::system: return "system";
        case Speaker::user: return "user";
        case Speaker::assistant: return "assistant";
    }
    return "user";
}

struct Turn {
    Speaker speaker = Speaker::user;
    std::string text;
};

// Everything a context-processing episode feeds the language model.
// History is carried as structured prior turns, not inlined into the prompt.
struct PromptBundle {
    std::string scene_caption;
    std::optional<std::string> roi_caption;
    std::string utterance;
    std::vector<Turn> history;
};

inline constexpr const char* kPromptPreamble =
    "Based on the previous responses and new multi-modal information, answer the next question:";
inline constexpr const char* kPromptScenePrefix =
    "General detailed description of user environment: ";
inline constexpr const char* kPromptGazePrefix = "User is specifically gazing at: ";
inline constexpr const char* kPromptQueryPrefix = "Human's speech query: ";
inline constexpr const char* kPromptClosing =
    "Give only a relevant and precise answer to the Human's speech query:";

// Render the fixed five-line prompt. The gazing line is omitted entirely
// (not left blank) when there is no ROI caption.
inline std::string assemble_prompt(const PromptBundle& bundle) {
    if (bundle.utterance.empty()) throw EmptyUtterance("prompt requires a non-empty utterance");

    std::string prompt;
    prompt += kPromptPreamble;
    prompt += '\n';
    prompt += kPromptScenePrefix;
    prompt += bundle.scene_caption;
    prompt += '\n';
    if (bundle.roi_caption) {
        prompt += kPromptGazePrefix;
        prompt += *bundle.roi_caption;
        prompt += '\n';
    }
    prompt += kPromptQueryPrefix;
    prompt += bundle.utterance;
    prompt += '\n';
    prompt += kPromptClosing;
    return prompt;
}

} // namespace hux
