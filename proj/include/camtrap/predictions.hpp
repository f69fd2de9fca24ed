#pragma once

// Per-image or per-sequence probability tables and their CSV form:
//   image level      sequence_id,image_id,<cat_0>,...
//   sequence level   sequence_id,<cat_0>,...
// Values are probabilities in [0, 1] written with 17 significant digits.

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "camtrap/csv.hpp"
#include "camtrap/errors.hpp"

namespace camtrap {

struct PredictionTable {
    std::vector<std::string> categories;
    bool sequence_level = false;

    struct Row {
        std::string sequence_id;
        std::string image_id; // unused at sequence level
        std::vector<double> values;
    };
    std::vector<Row> rows;

    std::size_t category_index(std::string_view name) const {
        for (std::size_t i = 0; i < categories.size(); ++i)
            if (categories[i] == name) return i;
        fail(errc::vocabulary_mismatch, "no category named '" + std::string(name) + "'");
    }

    static std::string key_of(const Row& row) { return row.sequence_id + '\x1f' + row.image_id; }

    std::unordered_map<std::string, std::size_t> key_index() const {
        std::unordered_map<std::string, std::size_t> index;
        index.reserve(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (!index.emplace(key_of(rows[i]), i).second)
                fail(errc::duplicate_image, "duplicate prediction key " + rows[i].sequence_id +
                                                "/" + rows[i].image_id);
        }
        return index;
    }
};

inline void save_predictions(const PredictionTable& table, const std::filesystem::path& path) {
    std::string out = "sequence_id";
    if (!table.sequence_level) out += ",image_id";
    for (const auto& name : table.categories) {
        out += ',';
        out += name;
    }
    out += '\n';
    for (const auto& row : table.rows) {
        out += row.sequence_id;
        if (!table.sequence_level) {
            out += ',';
            out += row.image_id;
        }
        for (double value : row.values) {
            out += ',';
            out += format_double(value);
        }
        out += '\n';
    }
    write_text(path, out);
}

inline PredictionTable load_predictions(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) fail(errc::malformed_row, "missing header in " + path.string());
    const auto header = split_csv(lines[0]);
    if (header.empty() || header[0] != "sequence_id")
        fail(errc::malformed_row, "prediction header must start with sequence_id");

    PredictionTable table;
    table.sequence_level = header.size() < 2 || header[1] != "image_id";
    const std::size_t fixed = table.sequence_level ? 1 : 2;
    if (header.size() <= fixed)
        fail(errc::malformed_row, "prediction header names no categories");
    table.categories.assign(header.begin() + static_cast<std::ptrdiff_t>(fixed), header.end());

    for (std::size_t line_no = 1; line_no < lines.size(); ++line_no) {
        if (lines[line_no].empty() && line_no + 1 == lines.size()) break;
        const std::string at = " (line " + std::to_string(line_no + 1) + ")";
        const auto cells = split_csv(lines[line_no]);
        if (cells.size() != header.size())
            fail(errc::inconsistent_width, "row width differs from header" + at);
        PredictionTable::Row row;
        row.sequence_id = cells[0];
        if (!table.sequence_level) row.image_id = cells[1];
        row.values.reserve(table.categories.size());
        for (std::size_t i = fixed; i < cells.size(); ++i) {
            double value = 0.0;
            if (!parse_double(cells[i], value) || !(value >= 0.0 && value <= 1.0))
                fail(errc::malformed_row, "probability outside [0,1]: '" + cells[i] + "'" + at);
            row.values.push_back(value);
        }
        table.rows.push_back(std::move(row));
    }
    table.key_index(); // rejects duplicate keys
    return table;
}

} // namespace camtrap
