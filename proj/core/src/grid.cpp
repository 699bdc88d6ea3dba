#include "trajseq/grid.hpp"

#include <cmath>

#include "trajseq/state.hpp"

namespace trajseq {

GridSpec GridSpec::covering(const Bounds& box, double cell_size, std::string coordinate_space) {
    if (!(cell_size > 0.0) || !std::isfinite(cell_size)) throw Error("grid cell_size must be a positive finite number");
    if (!(box.xmax > box.xmin) || !(box.ymax > box.ymin)) throw Error("grid bounding box is empty");
    GridSpec g;
    g.origin_x = box.xmin;
    g.origin_y = box.ymin;
    g.cell_size = cell_size;
    g.n_cols = static_cast<std::int32_t>(std::ceil((box.xmax - box.xmin) / cell_size));
    g.n_rows = static_cast<std::int32_t>(std::ceil((box.ymax - box.ymin) / cell_size));
    g.coordinate_space = std::move(coordinate_space);
    g.validate();
    return g;
}

void GridSpec::validate() const {
    if (!(cell_size > 0.0) || !std::isfinite(cell_size)) throw Error("grid cell_size must be a positive finite number");
    if (!std::isfinite(origin_x) || !std::isfinite(origin_y)) throw Error("grid origin must be finite");
    if (n_cols <= 0 || n_rows <= 0) throw Error("grid n_cols and n_rows must be positive");
}

Bounds GridSpec::cell_bounds(CellId c) const noexcept {
    const double x0 = origin_x + cell_size * c.col;
    const double y0 = origin_y + cell_size * c.row;
    return {x0, y0, x0 + cell_size, y0 + cell_size};
}

Bounds GridSpec::extent() const noexcept {
    return {origin_x, origin_y, origin_x + cell_size * n_cols, origin_y + cell_size * n_rows};
}

std::optional<CellId> assign_cell(double x, double y, const GridSpec& grid) noexcept {
    if (!std::isfinite(x) || !std::isfinite(y)) return std::nullopt;
    const double fc = std::floor((x - grid.origin_x) / grid.cell_size);
    const double fr = std::floor((y - grid.origin_y) / grid.cell_size);
    if (fc < 0.0 || fr < 0.0 || fc >= grid.n_cols || fr >= grid.n_rows) return std::nullopt;
    return CellId{static_cast<std::int32_t>(fc), static_cast<std::int32_t>(fr)};
}

}  // namespace trajseq
