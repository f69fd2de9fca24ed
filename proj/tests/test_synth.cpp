#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "camtrap/ablation.hpp"
#include "camtrap/synth.hpp"
#include "test_util.hpp"

using camtrap::errc;
using camtrap::Error;
using camtrap::SynthConfig;
using Catch::Matchers::WithinAbs;

TEST_CASE("synthetic sequences respect the empty fraction") {
    SynthConfig config;
    config.categories = 3;
    config.sequences = 10000;
    config.empty_fraction = 0.75;
    config.seed = 7;
    const auto data = camtrap::synth_dataset(config);

    std::size_t empties = 0;
    for (const auto& sequence : data.truth.sequences)
        empties += sequence.labels[data.truth.empty_index];
    const double share = static_cast<double>(empties) / 10000.0;
    CHECK(share >= 0.73); // binomial 3-sigma band
    CHECK(share <= 0.77);
}

TEST_CASE("zero co-occurrence means exactly one animal per non-empty image") {
    SynthConfig config;
    config.categories = 2;
    config.sequences = 500;
    config.co_occurrence = 0.0;
    config.seed = 8;
    const auto data = camtrap::synth_dataset(config);
    for (const auto& record : data.manifest.records) {
        const std::size_t positives =
            static_cast<std::size_t>(std::count(record.labels.begin(), record.labels.end(), 1));
        CHECK(positives == 1);
    }
}

TEST_CASE("co-occurrence adds second categories") {
    SynthConfig config;
    config.categories = 4;
    config.sequences = 2000;
    config.empty_fraction = 0.0;
    config.co_occurrence = 1.0;
    config.seed = 9;
    const auto data = camtrap::synth_dataset(config);
    for (const auto& sequence : data.truth.sequences) {
        const std::size_t positives = static_cast<std::size_t>(
            std::count(sequence.labels.begin(), sequence.labels.end(), 1));
        CHECK(positives == 2);
    }
}

TEST_CASE("synthetic output files are byte-identical per seed") {
    testutil::TempDir dir_a, dir_b;
    SynthConfig config;
    config.categories = 3;
    config.sequences = 200;
    config.seed = 10;
    const auto paths_a = camtrap::write_synth(camtrap::synth_dataset(config), dir_a.path);
    const auto paths_b = camtrap::write_synth(camtrap::synth_dataset(config), dir_b.path);
    CHECK(testutil::read_file(paths_a.manifest) == testutil::read_file(paths_b.manifest));
    CHECK(testutil::read_file(paths_a.features) == testutil::read_file(paths_b.features));
    CHECK(testutil::read_file(paths_a.flipped_features) ==
          testutil::read_file(paths_b.flipped_features));
    CHECK(testutil::read_file(paths_a.truth) == testutil::read_file(paths_b.truth));

    config.seed = 11;
    const auto paths_c = camtrap::write_synth(camtrap::synth_dataset(config), dir_b.path);
    CHECK(testutil::read_file(paths_a.features) != testutil::read_file(paths_c.features));
}

TEST_CASE("synthetic files reload consistently") {
    testutil::TempDir dir;
    SynthConfig config;
    config.categories = 2;
    config.sequences = 100;
    config.seed = 12;
    const auto data = camtrap::synth_dataset(config);
    const auto paths = camtrap::write_synth(data, dir.path);

    auto manifest = camtrap::load_manifest(paths.manifest);
    const auto store = camtrap::FeatureStore::load(paths.features);
    camtrap::bind_features(manifest, store);
    CHECK(manifest.records.size() == data.manifest.records.size());
    CHECK(manifest.feature_dim == config.feature_dim);
    CHECK(store.rows() == data.features.rows());

    const auto truth = camtrap::load_truth(paths.truth);
    REQUIRE(truth.sequences.size() == data.truth.sequences.size());

    // image labels agree with the sequence truth
    const auto derived = camtrap::derive_sequence_truth(manifest);
    REQUIRE(derived.sequences.size() == truth.sequences.size());
    for (std::size_t s = 0; s < truth.sequences.size(); ++s) {
        CHECK(derived.sequences[s].sequence_id == truth.sequences[s].sequence_id);
        CHECK(derived.sequences[s].labels == truth.sequences[s].labels);
    }
}

TEST_CASE("synth validates its configuration") {
    SynthConfig config;
    config.sequences = 0;
    CHECK_THROWS_AS(camtrap::synth_dataset(config), Error);
    config = SynthConfig{};
    config.empty_fraction = 1.0;
    CHECK_THROWS_AS(camtrap::synth_dataset(config), Error);
    config = SynthConfig{};
    config.images_per_sequence = {};
    CHECK_THROWS_AS(camtrap::synth_dataset(config), Error);
    config = SynthConfig{};
    config.imbalance = 0.0;
    CHECK_THROWS_AS(camtrap::synth_dataset(config), Error);
}

TEST_CASE("ablation reports singles and ensembles") {
    SynthConfig config;
    config.categories = 2;
    config.sequences = 400;
    config.separability = 16.0;
    config.seed = 13;
    const auto data = camtrap::synth_dataset(config);

    camtrap::AblationOptions options;
    options.seeds = {5};

    SECTION("a single preset yields one row and no ensembles") {
        options.presets = {2};
        const auto rows = camtrap::run_ablation(data.manifest, data.features, data.truth, options);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].model == "preset_2");
        CHECK(rows[0].seed == 5);
    }

    SECTION("duplicate presets make the mean ensemble equal the single model") {
        options.presets = {1, 1};
        const auto rows = camtrap::run_ablation(data.manifest, data.features, data.truth, options);
        REQUIRE(rows.size() == 5); // two singles + three ensembles
        CHECK(rows[0].agg_log_loss_normalized == rows[1].agg_log_loss_normalized);
        const auto mean_row =
            std::find_if(rows.begin(), rows.end(),
                         [](const auto& row) { return row.model == "ensemble_mean"; });
        REQUIRE(mean_row != rows.end());
        CHECK_THAT(mean_row->agg_log_loss_normalized,
                   WithinAbs(rows[0].agg_log_loss_normalized, 1e-12));
    }
}

TEST_CASE("ensembles never lose to the average single model") {
    // Binary log loss is convex in the prediction, so the mean-combined
    // table can only improve on the members' average; the geometric kinds
    // track it closely in practice.
    SynthConfig config;
    config.categories = 3;
    config.sequences = 4000;
    config.separability = 32.0;
    config.seed = 13;
    const auto data = camtrap::synth_dataset(config);

    camtrap::AblationOptions options;
    options.presets = {1, 2, 3, 4};
    options.seeds = {5};
    const auto rows = camtrap::run_ablation(data.manifest, data.features, data.truth, options);
    REQUIRE(rows.size() == 7);
    double single_sum = 0.0;
    for (std::size_t i = 0; i < 4; ++i) single_sum += rows[i].agg_log_loss_normalized;
    const double single_average = single_sum / 4.0;
    for (std::size_t i = 4; i < 7; ++i)
        CHECK(rows[i].agg_log_loss_normalized <= single_average + 1e-12);
}

TEST_CASE("ablation reports serialize") {
    testutil::TempDir dir;
    const std::vector<camtrap::AblationRow> rows = {{1, "preset_1", 0.125},
                                                    {1, "ensemble_mean", 0.0625}};
    const auto path = dir.file("report.csv");
    camtrap::save_ablation(rows, path);
    const auto lines = camtrap::read_lines(path);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == "seed,model,agg_log_loss_normalized");
    CHECK(lines[1] == "1,preset_1,0.125");
}
