#pragma once

// Dataset manifests: one row per image with season / sequence / image ids,
// the row index into the companion feature file, and a multi-hot label
// vector over the vocabulary defined by the CSV header.
//
// CSV format:
//   season,sequence_id,image_id,feature_row,<cat_0>,...,<cat_{k-1}>
// Label cells are 0/1. The category column whose name equals `empty_name`
// (default "empty") is the designated empty class.

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "camtrap/csv.hpp"
#include "camtrap/errors.hpp"

namespace camtrap {

struct LabelVocabulary {
    std::vector<std::string> names;
    std::size_t empty_index = 0;

    std::size_t size() const noexcept { return names.size(); }

    const std::string& empty_name() const { return names[empty_index]; }

    void validate() const {
        if (names.size() < 2)
            fail(errc::invalid_argument, "vocabulary needs at least the empty class and one animal class");
        if (empty_index >= names.size())
            fail(errc::invalid_argument, "empty_index out of range");
        std::unordered_set<std::string_view> seen;
        for (const auto& name : names) {
            if (name.empty()) fail(errc::invalid_argument, "empty category name");
            if (!seen.insert(name).second)
                fail(errc::invalid_argument, "duplicate category name: " + name);
        }
    }
};

struct ImageRecord {
    std::string season;
    std::string sequence_id;
    std::string image_id;
    std::uint32_t feature_row = 0;
    std::vector<std::uint8_t> labels; // 0/1 per vocabulary entry
};

struct Manifest {
    LabelVocabulary vocabulary;
    std::vector<ImageRecord> records;
    std::uint32_t feature_dim = 0; // 0 until bound to a feature store

    std::size_t size() const noexcept { return records.size(); }
};

namespace detail {

inline void validate_record_labels(const ImageRecord& record, const LabelVocabulary& vocab,
                                   std::size_t line_no) {
    const std::string at = " (line " + std::to_string(line_no) + ")";
    if (record.labels.size() != vocab.size())
        fail(errc::inconsistent_width, "label width differs from vocabulary" + at);
    std::size_t positives = 0;
    for (std::uint8_t cell : record.labels) {
        if (cell > 1) fail(errc::malformed_row, "non-binary label" + at);
        positives += cell;
    }
    if (positives == 0) fail(errc::no_positive_label, "record has no positive label" + at);
    if (record.labels[vocab.empty_index] == 1 && positives > 1)
        fail(errc::empty_conflict, "empty flag co-set with an animal label" + at);
}

} // namespace detail

inline Manifest load_manifest(const std::filesystem::path& path,
                              std::string_view empty_name = "empty") {
    const auto lines = read_lines(path);
    if (lines.empty()) fail(errc::malformed_row, "missing header in " + path.string());

    const auto header = split_csv(lines[0]);
    static const char* fixed[] = {"season", "sequence_id", "image_id", "feature_row"};
    if (header.size() < 5)
        fail(errc::malformed_row, "header needs the 4 fixed columns plus categories");
    for (std::size_t i = 0; i < 4; ++i)
        if (header[i] != fixed[i])
            fail(errc::malformed_row, "header column " + std::to_string(i) + " must be " + fixed[i]);

    Manifest manifest;
    manifest.vocabulary.names.assign(header.begin() + 4, header.end());
    bool found_empty = false;
    for (std::size_t i = 0; i < manifest.vocabulary.names.size(); ++i) {
        if (manifest.vocabulary.names[i] == empty_name) {
            manifest.vocabulary.empty_index = i;
            found_empty = true;
            break;
        }
    }
    if (!found_empty)
        fail(errc::malformed_row, "no category column named '" + std::string(empty_name) + "'");
    manifest.vocabulary.validate();

    const std::size_t expected_cols = 4 + manifest.vocabulary.size();
    std::set<std::pair<std::string, std::string>> keys;
    for (std::size_t line_no = 1; line_no < lines.size(); ++line_no) {
        if (lines[line_no].empty() && line_no + 1 == lines.size()) break; // trailing newline
        const std::string at = " (line " + std::to_string(line_no + 1) + ")";
        const auto cells = split_csv(lines[line_no]);
        if (cells.size() < 5) fail(errc::malformed_row, "too few columns" + at);
        if (cells.size() != expected_cols)
            fail(errc::inconsistent_width, "label width differs between rows" + at);

        ImageRecord record;
        record.season = cells[0];
        record.sequence_id = cells[1];
        record.image_id = cells[2];
        if (record.season.empty() || record.sequence_id.empty() || record.image_id.empty())
            fail(errc::malformed_row, "empty id field" + at);
        if (!parse_u32(cells[3], record.feature_row))
            fail(errc::malformed_row, "bad feature_row '" + cells[3] + "'" + at);

        record.labels.reserve(manifest.vocabulary.size());
        for (std::size_t i = 4; i < cells.size(); ++i) {
            if (cells[i] == "0") record.labels.push_back(0);
            else if (cells[i] == "1") record.labels.push_back(1);
            else fail(errc::malformed_row, "non-binary label '" + cells[i] + "'" + at);
        }
        detail::validate_record_labels(record, manifest.vocabulary, line_no + 1);

        if (!keys.emplace(record.sequence_id, record.image_id).second)
            fail(errc::duplicate_image,
                 "duplicate (sequence_id, image_id) = (" + record.sequence_id + ", " +
                     record.image_id + ")" + at);
        manifest.records.push_back(std::move(record));
    }
    return manifest;
}

inline void save_manifest(const Manifest& manifest, const std::filesystem::path& path) {
    std::string out = "season,sequence_id,image_id,feature_row";
    for (const auto& name : manifest.vocabulary.names) {
        out += ',';
        out += name;
    }
    out += '\n';
    for (const auto& record : manifest.records) {
        out += record.season;
        out += ',';
        out += record.sequence_id;
        out += ',';
        out += record.image_id;
        out += ',';
        out += std::to_string(record.feature_row);
        for (std::uint8_t cell : record.labels) out += cell ? ",1" : ",0";
        out += '\n';
    }
    write_text(path, out);
}

// Record indices per sequence, each group in manifest order.
inline std::map<std::string, std::vector<std::size_t>> group_by_sequence(const Manifest& manifest) {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < manifest.records.size(); ++i)
        groups[manifest.records[i].sequence_id].push_back(i);
    return groups;
}

} // namespace camtrap
