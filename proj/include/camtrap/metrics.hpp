#pragma once

// Sequence-level scoring. The aggregated log loss sums per-category binary
// log losses within each sequence and averages the sums over sequences
// (`raw`); `normalized` divides once more by the category count. Scoreboards
// disagree on that normalization, so both are reported.
//
// Truth CSV: `sequence_id,<cat_0>,...` with 0/1 cells, one row per sequence.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "camtrap/csv.hpp"
#include "camtrap/errors.hpp"
#include "camtrap/manifest.hpp"
#include "camtrap/predictions.hpp"

namespace camtrap {

inline constexpr double k_metric_clamp = 1e-15;

struct SequenceGroundTruth {
    std::string sequence_id;
    std::vector<std::uint8_t> labels;
};

struct TruthSet {
    std::vector<std::string> categories;
    std::size_t empty_index = 0;
    std::vector<SequenceGroundTruth> sequences;
};

struct AggLogLoss {
    double raw = 0.0;
    double normalized = 0.0;
};

struct MetricReport {
    double agg_log_loss_raw = 0.0;
    double agg_log_loss_normalized = 0.0;
    double accuracy = 0.0;
    double empty_accuracy = 0.0;
    std::size_t sequences = 0;
};

inline void save_truth(const TruthSet& truth, const std::filesystem::path& path) {
    std::string out = "sequence_id";
    for (const auto& name : truth.categories) {
        out += ',';
        out += name;
    }
    out += '\n';
    for (const auto& sequence : truth.sequences) {
        out += sequence.sequence_id;
        for (std::uint8_t cell : sequence.labels) out += cell ? ",1" : ",0";
        out += '\n';
    }
    write_text(path, out);
}

inline TruthSet load_truth(const std::filesystem::path& path,
                           std::string_view empty_name = "empty") {
    const auto lines = read_lines(path);
    if (lines.empty()) fail(errc::malformed_row, "missing header in " + path.string());
    const auto header = split_csv(lines[0]);
    if (header.size() < 3 || header[0] != "sequence_id")
        fail(errc::malformed_row, "truth header must be sequence_id,<categories...>");

    TruthSet truth;
    truth.categories.assign(header.begin() + 1, header.end());
    bool found_empty = false;
    for (std::size_t i = 0; i < truth.categories.size(); ++i) {
        if (truth.categories[i] == empty_name) {
            truth.empty_index = i;
            found_empty = true;
            break;
        }
    }
    if (!found_empty)
        fail(errc::malformed_row, "no truth column named '" + std::string(empty_name) + "'");

    std::unordered_map<std::string, bool> seen;
    for (std::size_t line_no = 1; line_no < lines.size(); ++line_no) {
        if (lines[line_no].empty() && line_no + 1 == lines.size()) break;
        const std::string at = " (line " + std::to_string(line_no + 1) + ")";
        const auto cells = split_csv(lines[line_no]);
        if (cells.size() != header.size())
            fail(errc::inconsistent_width, "truth row width differs from header" + at);
        SequenceGroundTruth sequence;
        sequence.sequence_id = cells[0];
        std::size_t positives = 0;
        for (std::size_t i = 1; i < cells.size(); ++i) {
            if (cells[i] == "0") sequence.labels.push_back(0);
            else if (cells[i] == "1") sequence.labels.push_back(1);
            else fail(errc::malformed_row, "non-binary truth cell '" + cells[i] + "'" + at);
            positives += sequence.labels.back();
        }
        if (positives == 0) fail(errc::no_positive_label, "truth row has no positive label" + at);
        if (sequence.labels[truth.empty_index] == 1 && positives > 1)
            fail(errc::empty_conflict, "empty flag co-set with an animal label" + at);
        if (!seen.emplace(sequence.sequence_id, true).second)
            fail(errc::duplicate_image, "duplicate sequence_id " + sequence.sequence_id + at);
        truth.sequences.push_back(std::move(sequence));
    }
    return truth;
}

// Sequence truth from an image manifest: a category is present when any
// image in the sequence carries it; a sequence is empty when no animal is.
inline TruthSet derive_sequence_truth(const Manifest& manifest) {
    TruthSet truth;
    truth.categories = manifest.vocabulary.names;
    truth.empty_index = manifest.vocabulary.empty_index;

    std::unordered_map<std::string, std::size_t> position;
    for (const auto& record : manifest.records) {
        auto [it, inserted] = position.emplace(record.sequence_id, truth.sequences.size());
        if (inserted)
            truth.sequences.push_back({record.sequence_id, record.labels});
        else {
            auto& labels = truth.sequences[it->second].labels;
            for (std::size_t c = 0; c < labels.size(); ++c)
                labels[c] = std::max(labels[c], record.labels[c]);
        }
    }
    for (auto& sequence : truth.sequences) {
        std::size_t animals = 0;
        for (std::size_t c = 0; c < sequence.labels.size(); ++c)
            if (c != truth.empty_index) animals += sequence.labels[c];
        sequence.labels[truth.empty_index] = animals == 0 ? 1 : 0;
    }
    return truth;
}

namespace detail {

// Rows of `predictions` matched to `truth` sequences, in truth order.
inline std::vector<const PredictionTable::Row*> match_rows(const PredictionTable& predictions,
                                                           const TruthSet& truth) {
    if (!predictions.sequence_level)
        fail(errc::invalid_argument, "metrics expect a sequence-level table; aggregate first");
    if (predictions.categories != truth.categories)
        fail(errc::vocabulary_mismatch, "prediction/truth categories differ");
    if (predictions.rows.size() != truth.sequences.size())
        fail(errc::key_mismatch, "prediction/truth sequence sets differ in size");
    const auto index = predictions.key_index();
    std::vector<const PredictionTable::Row*> rows;
    rows.reserve(truth.sequences.size());
    for (const auto& sequence : truth.sequences) {
        const auto it = index.find(sequence.sequence_id + '\x1f');
        if (it == index.end())
            fail(errc::key_mismatch, "no prediction for sequence " + sequence.sequence_id);
        rows.push_back(&predictions.rows[it->second]);
    }
    return rows;
}

inline double clamped(double p) {
    if (p < k_metric_clamp) return k_metric_clamp;
    if (p > 1.0 - k_metric_clamp) return 1.0 - k_metric_clamp;
    return p;
}

} // namespace detail

inline AggLogLoss agg_log_loss(const PredictionTable& predictions, const TruthSet& truth) {
    const auto rows = detail::match_rows(predictions, truth);
    if (rows.empty()) fail(errc::invalid_argument, "no sequences to score");

    double total = 0.0;
    for (std::size_t s = 0; s < rows.size(); ++s) {
        const auto& labels = truth.sequences[s].labels;
        const auto& values = rows[s]->values;
        double sequence_sum = 0.0;
        for (std::size_t c = 0; c < labels.size(); ++c) {
            const double p = detail::clamped(values[c]);
            sequence_sum -= labels[c] ? std::log(p) : std::log(1.0 - p);
        }
        total += sequence_sum;
    }
    AggLogLoss loss;
    loss.raw = total / static_cast<double>(rows.size());
    loss.normalized = loss.raw / static_cast<double>(truth.categories.size());
    return loss;
}

// A sequence counts as correct when the argmax category (ties to the lowest
// index) is among its positive labels.
inline double accuracy(const PredictionTable& predictions, const TruthSet& truth) {
    const auto rows = detail::match_rows(predictions, truth);
    if (rows.empty()) fail(errc::invalid_argument, "no sequences to score");
    std::size_t correct = 0;
    for (std::size_t s = 0; s < rows.size(); ++s) {
        const auto& values = rows[s]->values;
        std::size_t best = 0;
        for (std::size_t c = 1; c < values.size(); ++c)
            if (values[c] > values[best]) best = c;
        if (truth.sequences[s].labels[best] == 1) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(rows.size());
}

// Binary accuracy of (p_empty >= threshold) against (label_empty == 1).
inline double empty_accuracy(const PredictionTable& predictions, const TruthSet& truth,
                             double threshold = 0.5) {
    if (!(threshold > 0.0 && threshold < 1.0))
        fail(errc::invalid_argument, "threshold must be in (0,1)");
    const auto rows = detail::match_rows(predictions, truth);
    if (rows.empty()) fail(errc::invalid_argument, "no sequences to score");
    std::size_t correct = 0;
    for (std::size_t s = 0; s < rows.size(); ++s) {
        const bool said_empty = rows[s]->values[truth.empty_index] >= threshold;
        const bool is_empty = truth.sequences[s].labels[truth.empty_index] == 1;
        if (said_empty == is_empty) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(rows.size());
}

inline MetricReport evaluate(const PredictionTable& predictions, const TruthSet& truth,
                             double threshold = 0.5) {
    MetricReport report;
    const AggLogLoss loss = agg_log_loss(predictions, truth);
    report.agg_log_loss_raw = loss.raw;
    report.agg_log_loss_normalized = loss.normalized;
    report.accuracy = accuracy(predictions, truth);
    report.empty_accuracy = empty_accuracy(predictions, truth, threshold);
    report.sequences = truth.sequences.size();
    return report;
}

} // namespace camtrap
