#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "trajseq/grid.hpp"

namespace trajseq {

using PropertyValue = std::variant<std::string, long long, double>;

/// Streams a GeoJSON FeatureCollection of grid-cell polygons. The
/// collection is closed by finish() or the destructor.
class GeoJsonWriter {
public:
    GeoJsonWriter(std::ostream& out, const std::vector<std::string>& metadata);
    ~GeoJsonWriter();
    GeoJsonWriter(const GeoJsonWriter&) = delete;
    GeoJsonWriter& operator=(const GeoJsonWriter&) = delete;

    void cell(const GridSpec& grid, CellId c, const std::vector<std::pair<std::string, std::string>>& props);
    void cell(const GridSpec& grid, CellId c, const std::vector<std::pair<std::string, PropertyValue>>& props);
    void finish();

private:
    std::ostream& out_;
    bool first_ = true;
    bool finished_ = false;
};

}  // namespace trajseq
