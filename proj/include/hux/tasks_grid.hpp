#pragma once

#include <array>
#include <string>

#include "hux/geometry.hpp"

namespace hux {

// 3x3 grid used to verbalize where in the frame a box sits. Cells are indexed
// row-major, 0 = top left, 8 = bottom right. A center exactly on a cell
// boundary resolves to the lower-index cell.
inline constexpr std::array<const char*, 9> kGridCellNames = {
    "top left",    "top center",    "top right",
    "middle left", "center",        "middle right",
    "bottom left", "bottom center", "bottom right"};

inline std::string grid_cell_name(int cell_index) {
    if (cell_index < 0 || cell_index >= 9) return "unknown";
    return kGridCellNames[static_cast<std::size_t>(cell_index)];
}

namespace detail {

// Integer-exact third classifier over doubled coordinates: coord2 is twice
// the box-center coordinate, extent the frame dimension.
inline int third_of(std::int64_t coord2, std::int64_t extent) {
    // boundaries sit at extent/3 and 2*extent/3; equality goes to the lower third
    if (coord2 * 3 <= extent * 2) return 0;
    if (coord2 * 3 <= extent * 4) return 1;
    return 2;
}

} // namespace detail

inline int grid_cell_index(const Rect& bbox, int frame_width, int frame_height) {
    const std::int64_t cx2 = 2LL * bbox.x + bbox.w;
    const std::int64_t cy2 = 2LL * bbox.y + bbox.h;
    const int col = detail::third_of(cx2, frame_width);
    const int row = detail::third_of(cy2, frame_height);
    return row * 3 + col;
}

} // namespace hux
