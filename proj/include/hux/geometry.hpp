#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace hux {

// Axis-aligned rectangle in pixel coordinates, top-left origin.
struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    friend bool operator==(const Rect&, const Rect&) = default;
};

inline std::int64_t area(const Rect& r) {
    return static_cast<std::int64_t>(r.w) * r.h;
}

inline double center_x(const Rect& r) { return r.x + r.w / 2.0; }
inline double center_y(const Rect& r) { return r.y + r.h / 2.0; }

inline bool contains_point(const Rect& r, double px, double py) {
    return px >= r.x && px < r.x + r.w && py >= r.y && py < r.y + r.h;
}

inline std::int64_t intersection_area(const Rect& a, const Rect& b) {
    const int left = std::max(a.x, b.x);
    const int top = std::max(a.y, b.y);
    const int right = std::min(a.x + a.w, b.x + b.w);
    const int bottom = std::min(a.y + a.h, b.y + b.h);
    if (right <= left || bottom <= top) return 0;
    return static_cast<std::int64_t>(right - left) * (bottom - top);
}

inline double iou(const Rect& a, const Rect& b) {
    const std::int64_t inter = intersection_area(a, b);
    if (inter == 0) return 0.0;
    const std::int64_t uni = area(a) + area(b) - inter;
    return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

inline double center_distance(const Rect& a, const Rect& b) {
    return std::hypot(center_x(b) - center_x(a), center_y(b) - center_y(a));
}

} // namespace hux
