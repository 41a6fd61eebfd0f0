#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hux/errors.hpp"
#include "hux/scene.hpp"

// Synthetic image locators. Scenario frames carry no pixels, so locators
// embed the annotation summary a captioner would have seen:
//
//   synth:scene:f<frame_id>:<w>x<h>:<cat>=<n>[,<cat>=<n>...]
//   synth:roi:f<frame_id>:<w>x<h>:<cat>=<n>[,...]
//   synth:labeled:f<frame_id>:<w>x<h>:<cat>@<cell>[,...]:cats=<cat>[;<cat>...]
//   synth:text:<verbatim caption>
//
// Anything else is treated as a path to a real image on disk.

namespace hux {

enum class SyntheticKind { scene, roi, labeled, text };

struct SyntheticImage {
    SyntheticKind kind = SyntheticKind::scene;
    std::int64_t frame_id = 0;
    int width = 0;
    int height = 0;
    std::map<std::string, int> counts;                     // scene / roi
    std::vector<std::pair<std::string, int>> labeled;      // labeled: (category, cell)
    std::vector<std::string> label_categories;             // labeled: tool categories
    std::string text;                                      // text
};

inline bool is_synthetic_ref(const std::string& ref) {
    return ref.rfind("synth:", 0) == 0;
}

namespace detail {

inline std::string counts_fragment(const std::map<std::string, int>& counts) {
    std::string out;
    for (const auto& [cat, n] : counts) {
        if (!out.empty()) out.push_back(',');
        out += cat + "=" + std::to_string(n);
    }
    return out;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream in(s);
    while (std::getline(in, part, sep)) parts.push_back(part);
    if (!s.empty() && s.back() == sep) parts.push_back("");
    return parts;
}

} // namespace detail

inline std::string make_scene_ref(const FrameRecord& frame) {
    std::map<std::string, int> counts;
    for (const auto& det : frame.detections) ++counts[det.category];
    return "synth:scene:f" + std::to_string(frame.frame_id) + ":" + std::to_string(frame.width) +
           "x" + std::to_string(frame.height) + ":" + detail::counts_fragment(counts);
}

// ROI locator: annotations whose bbox center falls inside rect.
inline std::string make_roi_ref(const FrameRecord& frame, const Rect& rect) {
    std::map<std::string, int> counts;
    for (const auto& det : frame.detections) {
        if (contains_point(rect, center_x(det.bbox), center_y(det.bbox))) ++counts[det.category];
    }
    return "synth:roi:f" + std::to_string(frame.frame_id) + ":" + std::to_string(rect.w) + "x" +
           std::to_string(rect.h) + ":" + detail::counts_fragment(counts);
}

inline std::string make_labeled_ref(std::int64_t frame_id, int width, int height,
                                    const std::vector<std::pair<std::string, int>>& entries,
                                    const std::vector<std::string>& categories) {
    std::string body;
    for (const auto& [cat, cell] : entries) {
        if (!body.empty()) body.push_back(',');
        body += cat + "@" + std::to_string(cell);
    }
    std::string cats;
    for (const auto& cat : categories) {
        if (!cats.empty()) cats.push_back(';');
        cats += cat;
    }
    return "synth:labeled:f" + std::to_string(frame_id) + ":" + std::to_string(width) + "x" +
           std::to_string(height) + ":" + body + ":cats=" + cats;
}

inline std::string make_text_ref(const std::string& caption) {
    return "synth:text:" + caption;
}

inline SyntheticImage parse_synthetic_ref(const std::string& ref) {
    if (!is_synthetic_ref(ref)) throw UnresolvableImage("not a synthetic locator: " + ref);
    const std::string rest = ref.substr(6);

    SyntheticImage img;
    if (rest.rfind("text:", 0) == 0) {
        img.kind = SyntheticKind::text;
        img.text = rest.substr(5);
        return img;
    }

    const auto parts = detail::split(rest, ':');
    if (parts.size() < 4) throw UnresolvableImage("malformed synthetic locator: " + ref);
    const std::string& kind = parts[0];
    if (kind == "scene") img.kind = SyntheticKind::scene;
    else if (kind == "roi") img.kind = SyntheticKind::roi;
    else if (kind == "labeled") img.kind = SyntheticKind::labeled;
    else throw UnresolvableImage("unknown synthetic kind in: " + ref);

    try {
        if (parts[1].size() < 2 || parts[1][0] != 'f')
            throw UnresolvableImage("missing frame id in: " + ref);
        img.frame_id = std::stoll(parts[1].substr(1));
        const auto x_pos = parts[2].find('x');
        if (x_pos == std::string::npos)
            throw UnresolvableImage("missing dimensions in: " + ref);
        img.width = std::stoi(parts[2].substr(0, x_pos));
        img.height = std::stoi(parts[2].substr(x_pos + 1));

        if (img.kind == SyntheticKind::labeled) {
            if (parts.size() < 5 || parts[4].rfind("cats=", 0) != 0)
                throw UnresolvableImage("labeled locator missing category list: " + ref);
            for (const auto& entry : detail::split(parts[3], ',')) {
                if (entry.empty()) continue;
                const auto at = entry.find('@');
                if (at == std::string::npos)
                    throw UnresolvableImage("bad labeled entry in: " + ref);
                img.labeled.emplace_back(entry.substr(0, at), std::stoi(entry.substr(at + 1)));
            }
            for (const auto& cat : detail::split(parts[4].substr(5), ';')) {
                if (!cat.empty()) img.label_categories.push_back(cat);
            }
        } else {
            for (const auto& entry : detail::split(parts[3], ',')) {
                if (entry.empty()) continue;
                const auto eq = entry.find('=');
                if (eq == std::string::npos)
                    throw UnresolvableImage("bad count entry in: " + ref);
                img.counts[entry.substr(0, eq)] = std::stoi(entry.substr(eq + 1));
            }
        }
    } catch (const UnresolvableImage&) {
        throw;
    } catch (const std::exception&) {
        throw UnresolvableImage("malformed synthetic locator: " + ref);
    }
    return img;
}

} // namespace hux
