#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "camtrap/ensemble.hpp"
#include "camtrap/metrics.hpp"
#include "test_util.hpp"

using camtrap::errc;
using camtrap::Error;
using camtrap::PredictionTable;
using camtrap::TruthSet;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

TruthSet truth_of(std::vector<std::vector<std::uint8_t>> rows, std::size_t empty_index = 0) {
    TruthSet truth;
    for (std::size_t c = 0; c < rows[0].size(); ++c)
        truth.categories.push_back(c == empty_index ? "empty" : "c" + std::to_string(c));
    truth.empty_index = empty_index;
    for (std::size_t i = 0; i < rows.size(); ++i)
        truth.sequences.push_back({"seq" + std::to_string(i), std::move(rows[i])});
    return truth;
}

PredictionTable preds_of(std::vector<std::vector<double>> rows, std::size_t empty_index = 0) {
    PredictionTable table;
    table.sequence_level = true;
    for (std::size_t c = 0; c < rows[0].size(); ++c)
        table.categories.push_back(c == empty_index ? "empty" : "c" + std::to_string(c));
    for (std::size_t i = 0; i < rows.size(); ++i)
        table.rows.push_back({"seq" + std::to_string(i), "", std::move(rows[i])});
    return table;
}

// Plain restatement of the metric, accumulated per category then per
// sequence in long double; independent of the library's loop structure.
long double oracle_raw_loss(const PredictionTable& preds, const TruthSet& truth) {
    long double total = 0.0L;
    for (std::size_t c = 0; c < truth.categories.size(); ++c) {
        for (std::size_t s = 0; s < truth.sequences.size(); ++s) {
            long double p = preds.rows[s].values[c];
            if (p < 1e-15L) p = 1e-15L;
            if (p > 1.0L - 1e-15L) p = 1.0L - 1e-15L;
            total -= truth.sequences[s].labels[c] ? std::log(static_cast<double>(p))
                                                  : std::log(static_cast<double>(1.0L - p));
        }
    }
    return total / static_cast<long double>(truth.sequences.size());
}

} // namespace

TEST_CASE("perfect one-hot predictions score at the clamp floor") {
    const auto truth = truth_of({{1, 0, 0}, {0, 1, 0}});
    const auto preds = preds_of({{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}});
    const auto loss = camtrap::agg_log_loss(preds, truth);
    CHECK(loss.raw >= 0.0);
    CHECK(loss.raw <= 3.0 * 2e-15);
}

TEST_CASE("uniform 0.5 predictions cost ln 2 per category") {
    // powers of two keep every addition exact, so normalized == ln 2 exactly
    std::vector<std::vector<double>> rows(8, std::vector<double>(4, 0.5));
    std::vector<std::vector<std::uint8_t>> labels(8, std::vector<std::uint8_t>{0, 1, 0, 0});
    const auto loss = camtrap::agg_log_loss(preds_of(std::move(rows)), truth_of(std::move(labels)));
    CHECK(loss.raw == 4.0 * std::log(2.0));
    CHECK(loss.normalized == std::log(2.0));

    // non-power-of-two width lands within an ulp or two
    std::vector<std::vector<double>> rows3(5, std::vector<double>(3, 0.5));
    std::vector<std::vector<std::uint8_t>> labels3(5, std::vector<std::uint8_t>{1, 0, 0});
    const auto odd = camtrap::agg_log_loss(preds_of(std::move(rows3)), truth_of(std::move(labels3)));
    CHECK_THAT(odd.normalized, WithinAbs(std::log(2.0), 1e-15));
}

TEST_CASE("single-sequence loss matches the scalar oracle") {
    const auto truth = truth_of({{1, 0, 0}});
    const auto preds = preds_of({{0.8, 0.1, 0.3}});
    const auto loss = camtrap::agg_log_loss(preds, truth);
    const double expected = -(std::log(0.8) + std::log(0.9) + std::log(0.7));
    CHECK_THAT(loss.raw, WithinRel(expected, 1e-14));
    CHECK_THAT(loss.normalized, WithinRel(expected / 3.0, 1e-14));
    CHECK_THAT(loss.normalized, WithinAbs(0.2283930036369228, 1e-12));
}

TEST_CASE("agg_log_loss matches a brute-force reimplementation") {
    camtrap::SplitMix64 rng(83);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t sequences = 1 + rng.below(30);
        const std::size_t categories = 2 + rng.below(6);
        std::vector<std::vector<double>> rows(sequences, std::vector<double>(categories));
        std::vector<std::vector<std::uint8_t>> labels(sequences,
                                                      std::vector<std::uint8_t>(categories, 0));
        for (std::size_t s = 0; s < sequences; ++s) {
            for (double& p : rows[s]) p = rng.unit();
            const std::size_t hot = rng.below(categories);
            labels[s][hot] = 1;
            if (hot != 0 && rng.below(2) == 1) labels[s][1 + rng.below(categories - 1)] = 1;
        }
        // keep empty exclusivity: position 0 is the empty class
        for (auto& row : labels)
            if (row[0] == 1) std::fill(row.begin() + 1, row.end(), 0);

        const auto preds = preds_of(std::move(rows));
        const auto truth = truth_of(std::move(labels));
        const auto loss = camtrap::agg_log_loss(preds, truth);
        const double expected = static_cast<double>(oracle_raw_loss(preds, truth));
        CHECK_THAT(loss.raw, WithinAbs(expected, 1e-12));
    }
}

TEST_CASE("the loss is minimized at the target") {
    const auto truth = truth_of({{0, 1, 0}});
    const auto best = camtrap::agg_log_loss(preds_of({{0.0, 1.0, 0.0}}), truth);
    for (const double delta : {1e-6, 1e-3, 0.05, 0.4}) {
        CHECK(camtrap::agg_log_loss(preds_of({{delta, 1.0, 0.0}}), truth).raw > best.raw);
        CHECK(camtrap::agg_log_loss(preds_of({{0.0, 1.0 - delta, 0.0}}), truth).raw > best.raw);
        CHECK(camtrap::agg_log_loss(preds_of({{0.0, 1.0, delta}}), truth).raw > best.raw);
    }
}

TEST_CASE("mean ensembles beat the average member on noisy predictions") {
    // Seeded Monte-Carlo: three noisy views of one truth; count how often the
    // mean-combined loss undercuts the members' average loss.
    camtrap::SplitMix64 rng(97);
    int wins = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t sequences = 40;
        std::vector<std::vector<std::uint8_t>> labels(sequences, std::vector<std::uint8_t>(3, 0));
        for (auto& row : labels) row[rng.below(3)] = 1;
        for (auto& row : labels)
            if (row[0] == 1) std::fill(row.begin() + 1, row.end(), 0);
        const auto truth = truth_of(std::move(labels));

        std::vector<PredictionTable> members;
        double average_loss = 0.0;
        for (int member = 0; member < 3; ++member) {
            std::vector<std::vector<double>> rows(sequences, std::vector<double>(3));
            for (std::size_t s = 0; s < sequences; ++s)
                for (std::size_t c = 0; c < 3; ++c) {
                    const double noisy =
                        0.75 * truth.sequences[s].labels[c] + 0.5 * rng.unit() - 0.125;
                    rows[s][c] = std::clamp(noisy, 0.0, 1.0);
                }
            members.push_back(preds_of(std::move(rows)));
            average_loss += camtrap::agg_log_loss(members.back(), truth).raw / 3.0;
        }
        const auto combined = camtrap::combine(members, camtrap::CombinerKind::mean, 0);
        if (camtrap::agg_log_loss(combined, truth).raw < average_loss) ++wins;
    }
    CHECK(wins >= 95);
}

TEST_CASE("accuracy uses argmax membership with low-index ties") {
    const auto truth = truth_of({{0, 1, 0}, {0, 1, 1}, {1, 0, 0}});
    SECTION("all argmaxes hit") {
        const auto preds = preds_of({{0.1, 0.8, 0.3}, {0.2, 0.9, 0.8}, {0.9, 0.1, 0.2}});
        CHECK(camtrap::accuracy(preds, truth) == 1.0);
    }
    SECTION("multi-label truth accepts either positive") {
        const auto preds = preds_of({{0.1, 0.8, 0.3}, {0.2, 0.3, 0.8}, {0.9, 0.1, 0.2}});
        CHECK(camtrap::accuracy(preds, truth) == 1.0);
    }
    SECTION("two of three correct") {
        const auto preds = preds_of({{0.9, 0.8, 0.3}, {0.2, 0.9, 0.1}, {0.9, 0.1, 0.2}});
        CHECK_THAT(camtrap::accuracy(preds, truth), WithinRel(2.0 / 3.0, 1e-15));
    }
    SECTION("ties break toward the lowest index") {
        const auto preds = preds_of({{0.5, 0.5, 0.5}});
        const auto single = truth_of({{1, 0, 0}});
        CHECK(camtrap::accuracy(preds, single) == 1.0); // index 0 wins the tie
        const auto other = truth_of({{0, 1, 0}});
        CHECK(camtrap::accuracy(preds, other) == 0.0);
    }
}

TEST_CASE("empty accuracy thresholds the empty probability") {
    const auto truth = truth_of({{1, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    const auto preds = preds_of({{0.9, 0.1, 0.1},   // empty, said empty
                                 {0.5, 0.2, 0.2},   // empty, 0.5 >= 0.5 counts as empty
                                 {0.6, 0.9, 0.1},   // animal, wrongly said empty
                                 {0.1, 0.2, 0.9}}); // animal, said animal
    CHECK_THAT(camtrap::empty_accuracy(preds, truth, 0.5), WithinRel(0.75, 1e-15));
    CHECK_THROWS_AS(camtrap::empty_accuracy(preds, truth, 0.0), Error);
}

TEST_CASE("metrics validate key sets and vocabularies") {
    const auto truth = truth_of({{1, 0, 0}});
    auto preds = preds_of({{0.5, 0.5, 0.5}});
    preds.rows[0].sequence_id = "other";
    try {
        camtrap::agg_log_loss(preds, truth);
        FAIL("expected key_mismatch");
    } catch (const Error& e) {
        CHECK(e.code() == errc::key_mismatch);
    }

    auto renamed = preds_of({{0.5, 0.5, 0.5}});
    renamed.categories[2] = "renamed";
    try {
        camtrap::agg_log_loss(renamed, truth);
        FAIL("expected vocabulary_mismatch");
    } catch (const Error& e) {
        CHECK(e.code() == errc::vocabulary_mismatch);
    }

    auto image_level = preds_of({{0.5, 0.5, 0.5}});
    image_level.sequence_level = false;
    CHECK_THROWS_AS(camtrap::accuracy(image_level, truth), Error);
}

TEST_CASE("reports are bit-for-bit deterministic") {
    camtrap::SplitMix64 rng(101);
    std::vector<std::vector<double>> rows(20, std::vector<double>(4));
    std::vector<std::vector<std::uint8_t>> labels(20, std::vector<std::uint8_t>(4, 0));
    for (std::size_t s = 0; s < 20; ++s) {
        for (double& p : rows[s]) p = rng.unit();
        labels[s][rng.below(4)] = 1;
    }
    for (auto& row : labels)
        if (row[0] == 1) std::fill(row.begin() + 1, row.end(), 0);
    const auto preds = preds_of(std::move(rows));
    const auto truth = truth_of(std::move(labels));

    const auto a = camtrap::evaluate(preds, truth);
    const auto b = camtrap::evaluate(preds, truth);
    CHECK(a.agg_log_loss_raw == b.agg_log_loss_raw);
    CHECK(a.agg_log_loss_normalized == b.agg_log_loss_normalized);
    CHECK(a.accuracy == b.accuracy);
    CHECK(a.empty_accuracy == b.empty_accuracy);
    CHECK(a.sequences == 20);
}

TEST_CASE("truth files round-trip") {
    testutil::TempDir dir;
    const auto truth = truth_of({{1, 0, 0}, {0, 1, 1}});
    const auto path = dir.file("truth.csv");
    camtrap::save_truth(truth, path);
    const auto loaded = camtrap::load_truth(path);
    REQUIRE(loaded.sequences.size() == 2);
    CHECK(loaded.categories == truth.categories);
    CHECK(loaded.empty_index == truth.empty_index);
    for (std::size_t s = 0; s < 2; ++s) {
        CHECK(loaded.sequences[s].sequence_id == truth.sequences[s].sequence_id);
        CHECK(loaded.sequences[s].labels == truth.sequences[s].labels);
    }

    const auto bad = testutil::write_file(dir, "bad.csv", "sequence_id,empty,a\nseq0,1,1\n");
    CHECK_THROWS_AS(camtrap::load_truth(bad), Error);
}

TEST_CASE("sequence truth derives from image labels") {
    auto manifest = testutil::make_manifest(4, {"1"}, 3, 2);
    // seq 0: images 0..2, seq 1: image 3
    manifest.records[0].labels = {0, 1, 0};
    manifest.records[1].labels = {0, 0, 1};
    manifest.records[2].labels = {1, 0, 0}; // one empty frame inside an animal sequence
    manifest.records[3].labels = {1, 0, 0};

    const auto truth = camtrap::derive_sequence_truth(manifest);
    REQUIRE(truth.sequences.size() == 2);
    CHECK(truth.sequences[0].labels == std::vector<std::uint8_t>{0, 1, 1}); // union of animals
    CHECK(truth.sequences[1].labels == std::vector<std::uint8_t>{1, 0, 0}); // stays empty
}
