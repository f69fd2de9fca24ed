#pragma once

// Combining predictions from several models, and collapsing image-level
// tables to sequence level.
//
//   mean         arithmetic mean per key and category
//   gmean        geometric mean, inputs clamped to [1e-7, 1] first
//   class_aware  geometric mean for the empty category, arithmetic mean for
//                every animal category
//
// The weighted forms are sum(w_i p_i) and exp(sum(w_i ln p_i)); combine() is
// the uniform-weight case. A single input table is returned unchanged.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "camtrap/errors.hpp"
#include "camtrap/predictions.hpp"

namespace camtrap {

enum class CombinerKind { mean, gmean, class_aware };

inline constexpr double k_gmean_clamp = 1e-7;

inline CombinerKind combiner_from_name(std::string_view name) {
    if (name == "mean") return CombinerKind::mean;
    if (name == "gmean") return CombinerKind::gmean;
    if (name == "class_aware") return CombinerKind::class_aware;
    fail(errc::invalid_argument, "unknown combiner '" + std::string(name) + "'");
}

inline const char* combiner_name(CombinerKind kind) noexcept {
    switch (kind) {
        case CombinerKind::mean: return "mean";
        case CombinerKind::gmean: return "gmean";
        default: return "class_aware";
    }
}

namespace detail {

inline double weighted_mean(std::span<const double> values, std::span<const double> weights) {
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) acc += weights[i] * values[i];
    return acc;
}

inline double weighted_gmean(std::span<const double> values, std::span<const double> weights) {
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        double v = values[i];
        if (v < k_gmean_clamp) v = k_gmean_clamp;
        if (v > 1.0) v = 1.0;
        acc += weights[i] * std::log(v);
    }
    return std::exp(acc);
}

} // namespace detail

inline PredictionTable weighted_combine(std::span<const PredictionTable> tables,
                                        std::span<const double> weights, CombinerKind kind,
                                        std::size_t empty_index) {
    if (tables.empty()) fail(errc::empty_table_list, "no tables to combine");
    if (weights.size() != tables.size())
        fail(errc::weight_mismatch, "weight count != table count");
    double weight_sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) fail(errc::bad_weights, "weights must be non-negative");
        weight_sum += w;
    }
    if (std::abs(weight_sum - 1.0) > 1e-9)
        fail(errc::bad_weights, "weights must sum to 1");

    const PredictionTable& first = tables[0];
    if (empty_index >= first.categories.size())
        fail(errc::invalid_argument, "empty_index out of range");
    for (const auto& table : tables.subspan(1)) {
        if (table.categories != first.categories || table.sequence_level != first.sequence_level)
            fail(errc::vocabulary_mismatch, "tables disagree on categories");
        if (table.rows.size() != first.rows.size())
            fail(errc::key_mismatch, "tables disagree on key sets");
    }
    if (tables.size() == 1) return first; // identity, clamping never applies

    std::vector<std::unordered_map<std::string, std::size_t>> indices;
    indices.reserve(tables.size() - 1);
    for (const auto& table : tables.subspan(1)) indices.push_back(table.key_index());

    PredictionTable out;
    out.categories = first.categories;
    out.sequence_level = first.sequence_level;
    out.rows.reserve(first.rows.size());

    std::vector<double> column(tables.size());
    for (const auto& row : first.rows) {
        const std::string key = PredictionTable::key_of(row);
        std::vector<const PredictionTable::Row*> sources;
        sources.reserve(tables.size());
        sources.push_back(&row);
        for (std::size_t t = 1; t < tables.size(); ++t) {
            const auto& index = indices[t - 1];
            const auto it = index.find(key);
            if (it == index.end())
                fail(errc::key_mismatch, "key missing from table " + std::to_string(t) + ": " +
                                             row.sequence_id + "/" + row.image_id);
            sources.push_back(&tables[t].rows[it->second]);
        }

        PredictionTable::Row combined{row.sequence_id, row.image_id, {}};
        combined.values.resize(first.categories.size());
        for (std::size_t c = 0; c < combined.values.size(); ++c) {
            for (std::size_t t = 0; t < sources.size(); ++t) column[t] = sources[t]->values[c];
            const bool geometric =
                kind == CombinerKind::gmean ||
                (kind == CombinerKind::class_aware && c == empty_index);
            combined.values[c] = geometric ? detail::weighted_gmean(column, weights)
                                           : detail::weighted_mean(column, weights);
        }
        out.rows.push_back(std::move(combined));
    }
    return out;
}

inline PredictionTable combine(std::span<const PredictionTable> tables, CombinerKind kind,
                               std::size_t empty_index) {
    if (tables.empty()) fail(errc::empty_table_list, "no tables to combine");
    const std::vector<double> uniform(tables.size(), 1.0 / static_cast<double>(tables.size()));
    return weighted_combine(tables, uniform, kind, empty_index);
}

// Arithmetic mean of each sequence's image vectors, sequences in first-
// appearance order. Single-image sequences pass through unchanged.
inline PredictionTable aggregate_sequence(const PredictionTable& table) {
    if (table.rows.empty()) fail(errc::invalid_argument, "cannot aggregate an empty table");

    PredictionTable out;
    out.categories = table.categories;
    out.sequence_level = true;

    std::unordered_map<std::string, std::size_t> position;
    std::vector<std::size_t> counts;
    for (const auto& row : table.rows) {
        auto [it, inserted] = position.emplace(row.sequence_id, out.rows.size());
        if (inserted) {
            out.rows.push_back({row.sequence_id, "", row.values});
            counts.push_back(1);
            continue;
        }
        auto& acc = out.rows[it->second].values;
        if (acc.size() != row.values.size())
            fail(errc::inconsistent_width, "row width varies within sequence " + row.sequence_id);
        for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += row.values[c];
        ++counts[it->second];
    }
    for (std::size_t i = 0; i < out.rows.size(); ++i) {
        const double inv = 1.0 / static_cast<double>(counts[i]);
        for (double& value : out.rows[i].values) value *= inv;
    }
    return out;
}

} // namespace camtrap
