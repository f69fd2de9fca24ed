#pragma once

// Desk-scale synthetic dataset: Gaussian class-conditional feature clusters
// with a separability knob, empty-dominated sequences and a geometric
// popularity skew across animal categories. Every image of a sequence
// carries the sequence's labels; features are the sum of the member
// categories' cluster centers plus unit Gaussian noise. The empty class has
// a cluster of its own (vegetation looks like something, not like nothing).
// The flipped store holds an independent second draw from the same cluster
// per image.
//
// All draws come from substream(seed, "synth") in one documented order, so
// one seed yields byte-identical output files.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "camtrap/errors.hpp"
#include "camtrap/features.hpp"
#include "camtrap/manifest.hpp"
#include "camtrap/metrics.hpp"
#include "camtrap/rng.hpp"

namespace camtrap {

struct SynthConfig {
    std::size_t categories = 3; // animal categories; the empty class is added on top
    std::size_t sequences = 1000;
    std::vector<std::size_t> images_per_sequence = {1, 2, 3}; // uniform choice
    double empty_fraction = 0.75;
    std::size_t seasons = 10;
    std::size_t feature_dim = 16;
    double separability = 16.0;
    double co_occurrence = 0.0; // chance a non-empty sequence carries a second category
    double imbalance = 0.7;     // geometric ratio of successive category popularities
    std::uint64_t seed = 0;
    std::string empty_name = "empty";

    void validate() const {
        if (categories == 0 || sequences == 0 || seasons == 0 || feature_dim == 0)
            fail(errc::invalid_argument, "counts must be positive");
        if (images_per_sequence.empty())
            fail(errc::invalid_argument, "images_per_sequence must name at least one size");
        for (std::size_t size : images_per_sequence)
            if (size == 0) fail(errc::invalid_argument, "sequence sizes must be positive");
        if (!(empty_fraction >= 0.0 && empty_fraction < 1.0))
            fail(errc::invalid_argument, "empty_fraction must be in [0,1)");
        if (!(co_occurrence >= 0.0 && co_occurrence <= 1.0))
            fail(errc::invalid_argument, "co_occurrence must be in [0,1]");
        if (!(imbalance > 0.0 && imbalance <= 1.0))
            fail(errc::invalid_argument, "imbalance must be in (0,1]");
        if (!(separability >= 0.0)) fail(errc::invalid_argument, "separability must be >= 0");
    }
};

struct SynthDataset {
    Manifest manifest;
    FeatureStore features;
    FeatureStore flipped_features;
    TruthSet truth;
};

inline SynthDataset synth_dataset(const SynthConfig& config) {
    config.validate();
    auto rng = substream(config.seed, "synth");

    // Cluster centers: separability * (random unit vector); index 0 is the
    // empty class, 1.. the animal categories.
    std::vector<std::vector<double>> centers(config.categories + 1);
    for (auto& center : centers) {
        center.resize(config.feature_dim);
        double norm_sq = 0.0;
        for (double& c : center) {
            c = rng.gaussian();
            norm_sq += c * c;
        }
        const double norm = std::sqrt(norm_sq);
        const double scale = norm > 0.0 ? config.separability / norm : 0.0;
        for (double& c : center) c *= scale;
    }

    // Geometric popularity weights over animal categories.
    std::vector<double> cumulative(config.categories);
    {
        double acc = 0.0, w = 1.0;
        for (std::size_t c = 0; c < config.categories; ++c, w *= config.imbalance)
            cumulative[c] = (acc += w);
    }
    auto pick_category = [&](std::size_t excluded) {
        // excluded == categories means "none"; otherwise renormalize without it.
        while (true) {
            const double u = rng.unit() * cumulative.back();
            std::size_t c = 0;
            while (u >= cumulative[c]) ++c;
            if (c != excluded) return c;
        }
    };

    SynthDataset data;
    data.manifest.vocabulary.names.push_back(config.empty_name);
    for (std::size_t c = 0; c < config.categories; ++c)
        data.manifest.vocabulary.names.push_back("species_" + std::to_string(c));
    data.manifest.vocabulary.empty_index = 0;
    data.manifest.vocabulary.validate();
    data.manifest.feature_dim = static_cast<std::uint32_t>(config.feature_dim);
    data.truth.categories = data.manifest.vocabulary.names;
    data.truth.empty_index = 0;

    const std::size_t vocab_size = config.categories + 1;
    std::vector<float> normal_rows;
    std::vector<float> flipped_rows;
    std::vector<double> center(config.feature_dim);
    std::uint32_t image_count = 0;

    for (std::size_t s = 0; s < config.sequences; ++s) {
        const std::string season = std::to_string(1 + rng.below(config.seasons));
        const std::string sequence_id = "seq" + std::to_string(s);
        const std::size_t images =
            config.images_per_sequence[rng.below(config.images_per_sequence.size())];

        std::vector<std::uint8_t> labels(vocab_size, 0);
        if (rng.bernoulli(config.empty_fraction)) {
            labels[0] = 1;
        } else {
            const std::size_t primary = pick_category(config.categories);
            labels[1 + primary] = 1;
            if (config.categories >= 2 && rng.bernoulli(config.co_occurrence))
                labels[1 + pick_category(primary)] = 1;
        }

        std::fill(center.begin(), center.end(), 0.0);
        for (std::size_t c = 0; c < vocab_size; ++c)
            if (labels[c])
                for (std::size_t d = 0; d < config.feature_dim; ++d) center[d] += centers[c][d];

        data.truth.sequences.push_back({sequence_id, labels});
        for (std::size_t i = 0; i < images; ++i) {
            ImageRecord record;
            record.season = season;
            record.sequence_id = sequence_id;
            record.image_id = sequence_id + "_img" + std::to_string(i);
            record.feature_row = image_count++;
            record.labels = labels;
            data.manifest.records.push_back(std::move(record));
            for (std::size_t d = 0; d < config.feature_dim; ++d)
                normal_rows.push_back(static_cast<float>(center[d] + rng.gaussian()));
            for (std::size_t d = 0; d < config.feature_dim; ++d)
                flipped_rows.push_back(static_cast<float>(center[d] + rng.gaussian()));
        }
    }

    data.features = FeatureStore(image_count, config.feature_dim, std::move(normal_rows));
    data.flipped_features = FeatureStore(image_count, config.feature_dim, std::move(flipped_rows));
    return data;
}

struct SynthPaths {
    std::filesystem::path manifest;
    std::filesystem::path features;
    std::filesystem::path flipped_features;
    std::filesystem::path truth;
};

inline SynthPaths synth_paths(const std::filesystem::path& dir) {
    return {dir / "manifest.csv", dir / "features.bin", dir / "features_flipped.bin",
            dir / "truth.csv"};
}

inline SynthPaths write_synth(const SynthDataset& data, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(errc::io_failure, "cannot create " + dir.string() + ": " + ec.message());
    const SynthPaths paths = synth_paths(dir);
    save_manifest(data.manifest, paths.manifest);
    data.features.save(paths.features);
    data.flipped_features.save(paths.flipped_features);
    save_truth(data.truth, paths.truth);
    return paths;
}

} // namespace camtrap
