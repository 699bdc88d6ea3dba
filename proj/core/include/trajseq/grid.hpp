#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "trajseq/error.hpp"

namespace trajseq {

struct CellId {
    std::int32_t col = 0;
    std::int32_t row = 0;

    friend constexpr auto operator<=>(const CellId&, const CellId&) = default;
};

struct CellIdHash {
    std::size_t operator()(const CellId& c) const noexcept {
        return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.col)) << 32) |
                                          static_cast<std::uint32_t>(c.row));
    }
};

struct Bounds {
    double xmin, ymin, xmax, ymax;
};

/// Axis-aligned square grid in the input coordinate space.
///
/// Cells are half-open, [x0, x0 + cell_size) x [y0, y0 + cell_size), so a
/// point on a shared edge belongs to the cell on its right/top. Degree cells
/// are not equal-area; project the input first if that matters.
struct GridSpec {
    double origin_x = 0.0;
    double origin_y = 0.0;
    double cell_size = 1.0;
    std::int32_t n_cols = 1;
    std::int32_t n_rows = 1;
    std::string coordinate_space = "unspecified";

    /// Smallest grid with the given cell size covering [xmin,xmax) x [ymin,ymax).
    static GridSpec covering(const Bounds& box, double cell_size, std::string coordinate_space = "EPSG:4326");

    /// Throws trajseq::Error if the invariants do not hold.
    void validate() const;

    std::size_t n_cells() const noexcept {
        return static_cast<std::size_t>(n_cols) * static_cast<std::size_t>(n_rows);
    }
    double cell_area() const noexcept { return cell_size * cell_size; }

    bool contains(CellId c) const noexcept {
        return c.col >= 0 && c.row >= 0 && c.col < n_cols && c.row < n_rows;
    }

    /// Row-major linear index (row * n_cols + col).
    std::size_t linear_index(CellId c) const noexcept {
        return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(n_cols) +
               static_cast<std::size_t>(c.col);
    }
    CellId cell_at(std::size_t linear) const noexcept {
        return {static_cast<std::int32_t>(linear % static_cast<std::size_t>(n_cols)),
                static_cast<std::int32_t>(linear / static_cast<std::size_t>(n_cols))};
    }

    Bounds cell_bounds(CellId c) const noexcept;
    Bounds extent() const noexcept;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Cell containing (x, y): col = floor((x - origin_x) / cell_size), likewise
/// for rows. Returns nullopt for non-finite or out-of-bounds coordinates.
std::optional<CellId> assign_cell(double x, double y, const GridSpec& grid) noexcept;

}  // namespace trajseq
