#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

namespace hux {

struct FrameDelta;

// Application-defined predicate evaluated against every frame delta.
struct CustomRule {
    std::string name;
    std::function<bool(const FrameDelta&)> predicate;
};

// Per-task bundle: which categories the analyzer watches, the thresholds that
// turn motion into behavior events, and the instructions handed to the
// caption/completion backends.
struct TaskProfile {
    std::string task_id;
    std::set<std::string> ooi_categories;
    double min_confidence = 0.5;
    double move_threshold_px = 25.0;
    double scale_ratio_threshold = 1.5;
    std::vector<CustomRule> custom_rules;
    std::string caption_instruction = "Describe the image.";
    std::string context_instruction;

    bool is_ooi(const std::string& category) const {
        return ooi_categories.count(category) > 0;
    }
};

} // namespace hux
