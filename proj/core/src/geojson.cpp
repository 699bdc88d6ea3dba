#include "trajseq/geojson.hpp"

#include <nlohmann/json.hpp>

#include "trajseq/csv.hpp"

namespace trajseq {

GeoJsonWriter::GeoJsonWriter(std::ostream& out, const std::vector<std::string>& metadata) : out_(out) {
    out_ << "{\"type\":\"FeatureCollection\",\"metadata\":" << nlohmann::json(metadata).dump() << ",\"features\":[\n";
}

GeoJsonWriter::~GeoJsonWriter() {
    if (!finished_) {
        try {
            finish();
        } catch (...) {
        }
    }
}

void GeoJsonWriter::finish() {
    out_ << "]}\n";
    finished_ = true;
}

namespace {

void write_feature(std::ostream& out, const GridSpec& grid, CellId c, const std::string& properties) {
    const Bounds b = grid.cell_bounds(c);
    const std::string x0 = format_double(b.xmin), x1 = format_double(b.xmax);
    const std::string y0 = format_double(b.ymin), y1 = format_double(b.ymax);
    out << "{\"type\":\"Feature\",\"properties\":" << properties
        << ",\"geometry\":{\"type\":\"Polygon\",\"coordinates\":[[[" << x0 << ',' << y0 << "],[" << x1 << ',' << y0
        << "],[" << x1 << ',' << y1 << "],[" << x0 << ',' << y1 << "],[" << x0 << ',' << y0 << "]]]}}";
}

}  // namespace

void GeoJsonWriter::cell(const GridSpec& grid, CellId c, const std::vector<std::pair<std::string, std::string>>& props) {
    nlohmann::ordered_json p;
    p["cell_col"] = c.col;
    p["cell_row"] = c.row;
    for (const auto& [k, v] : props) p[k] = v;
    if (!first_) out_ << ",\n";
    first_ = false;
    write_feature(out_, grid, c, p.dump());
}

void GeoJsonWriter::cell(const GridSpec& grid, CellId c, const std::vector<std::pair<std::string, PropertyValue>>& props) {
    nlohmann::ordered_json p;
    p["cell_col"] = c.col;
    p["cell_row"] = c.row;
    for (const auto& [k, v] : props) std::visit([&](const auto& value) { p[k] = value; }, v);
    if (!first_) out_ << ",\n";
    first_ = false;
    write_feature(out_, grid, c, p.dump());
}

}  // namespace trajseq
