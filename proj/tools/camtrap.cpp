// Command-line front end for the camtrap pipeline. Every subcommand is a
// thin shell over the library; outputs go only to the requested --out paths.
//
// Exit codes: 0 success, 2 input validation failure, 3 numerical failure,
// 4 I/O failure.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "camtrap/camtrap.hpp"

namespace {

struct GlobalFlags {
    std::uint64_t seed = 0;
    std::string empty_name = "empty";
    bool quiet = false;
    camtrap::PipelineRun run;
};

void note(const GlobalFlags& global, const std::string& message) {
    if (!global.quiet) std::cerr << message << "\n";
}

void record_input(GlobalFlags& global, const std::string& path) {
    global.run.inputs.push_back({path, camtrap::digest_file(path)});
}

void record_output(GlobalFlags& global, const std::string& path) {
    global.run.outputs.push_back(path);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    for (const auto& field : camtrap::split_csv(text))
        if (!field.empty()) items.push_back(field);
    return items;
}

std::vector<std::size_t> parse_size_list(const std::string& text, const char* what) {
    std::vector<std::size_t> sizes;
    for (const auto& field : split_list(text)) {
        std::uint32_t value = 0;
        if (!camtrap::parse_u32(field, value))
            camtrap::fail(camtrap::errc::invalid_argument,
                          std::string(what) + ": bad entry '" + field + "'");
        sizes.push_back(value);
    }
    return sizes;
}

camtrap::SamplingStrategy make_strategy(const std::string& name, const std::string& tails) {
    camtrap::SamplingStrategy strategy;
    strategy.kind = camtrap::strategy_from_name(name);
    strategy.tail_seasons = split_list(tails);
    return strategy;
}

// Loads manifest + features and binds the feature dimension.
struct Dataset {
    camtrap::Manifest manifest;
    camtrap::FeatureStore features;
    std::optional<camtrap::FeatureStore> flipped;
};

Dataset load_dataset(GlobalFlags& global, const std::string& manifest_path,
                     const std::string& features_path, const std::string& flipped_path) {
    Dataset data;
    data.manifest = camtrap::load_manifest(manifest_path, global.empty_name);
    data.features = camtrap::FeatureStore::load(features_path);
    camtrap::bind_features(data.manifest, data.features);
    record_input(global, manifest_path);
    record_input(global, features_path);
    if (!flipped_path.empty()) {
        data.flipped = camtrap::FeatureStore::load(flipped_path);
        if (data.flipped->dim() != data.features.dim())
            camtrap::fail(camtrap::errc::dimension_mismatch,
                          "flipped feature store dim mismatch");
        record_input(global, flipped_path);
    }
    return data;
}

void add_synth(CLI::App& app, GlobalFlags& global) {
    auto* cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
    auto config = std::make_shared<camtrap::SynthConfig>();
    auto sizes = std::make_shared<std::string>("1,2,3");
    auto out_dir = std::make_shared<std::string>();
    cmd->add_option("--categories", config->categories, "Animal categories (plus empty)");
    cmd->add_option("--sequences", config->sequences, "Sequence count");
    cmd->add_option("--images-per-seq", *sizes, "Comma list of sizes drawn uniformly");
    cmd->add_option("--empty-fraction", config->empty_fraction, "Share of empty sequences");
    cmd->add_option("--seasons", config->seasons, "Season count (tags 1..N)");
    cmd->add_option("--feature-dim", config->feature_dim, "Feature vector width");
    cmd->add_option("--separability", config->separability, "Cluster center radius");
    cmd->add_option("--co-occurrence", config->co_occurrence, "Second-category rate");
    cmd->add_option("--imbalance", config->imbalance, "Geometric popularity ratio");
    cmd->add_option("--out-dir", *out_dir, "Output directory")->required();
    cmd->callback([=, &global]() {
        config->seed = global.seed;
        config->empty_name = global.empty_name;
        config->images_per_sequence = parse_size_list(*sizes, "--images-per-seq");
        const auto data = camtrap::synth_dataset(*config);
        const auto paths = camtrap::write_synth(data, *out_dir);
        for (const auto& path :
             {paths.manifest, paths.features, paths.flipped_features, paths.truth})
            record_output(global, path.string());
        note(global, "wrote " + paths.manifest.string() + " (" +
                         std::to_string(data.manifest.records.size()) + " images, " +
                         std::to_string(data.truth.sequences.size()) + " sequences)");
    });
}

void add_sample_plan(CLI::App& app, GlobalFlags& global) {
    auto* cmd = app.add_subcommand("sample-plan", "Emit the epoch visitation order");
    auto manifest_path = std::make_shared<std::string>();
    auto strategy = std::make_shared<std::string>("random");
    auto tails = std::make_shared<std::string>("9,10");
    auto flip_probability = std::make_shared<double>(0.5);
    auto out = std::make_shared<std::string>();
    cmd->add_option("--manifest", *manifest_path, "Manifest CSV")->required();
    cmd->add_option("--strategy", *strategy, "random | season_by_season");
    cmd->add_option("--tail-seasons", *tails, "Seasons visited last (comma list)");
    cmd->add_option("--flip-probability", *flip_probability, "Per-entry flip chance");
    cmd->add_option("--out", *out, "Plan CSV path")->required();
    cmd->callback([=, &global]() {
        const auto manifest = camtrap::load_manifest(*manifest_path, global.empty_name);
        record_input(global, *manifest_path);
        const auto plan = camtrap::build_plan(manifest, make_strategy(*strategy, *tails),
                                              global.seed, *flip_probability);
        camtrap::save_plan(plan, *out);
        record_output(global, *out);
        note(global, "wrote " + *out + " (" + std::to_string(plan.order.size()) + " entries)");
    });
}

void add_schedule_dump(CLI::App& app, GlobalFlags& global) {
    auto* cmd = app.add_subcommand("schedule-dump", "Emit step,lr for the one-cycle policy");
    auto batch_size = std::make_shared<std::uint64_t>(16);
    auto grad_accum = std::make_shared<std::uint64_t>(2);
    auto config = std::make_shared<camtrap::ScheduleConfig>();
    auto warmup_override = std::make_shared<std::int64_t>(-1);
    auto out = std::make_shared<std::string>();
    cmd->add_option("--batch-size", *batch_size, "Batch size");
    cmd->add_option("--grad-accum", *grad_accum, "Gradient accumulation factor");
    cmd->add_option("--total-steps", config->total_steps, "Optimizer step count")->required();
    cmd->add_option("--max-lr", config->max_lr, "Peak learning rate");
    cmd->add_option("--end-lr", config->end_lr, "Final learning rate");
    cmd->add_option("--warmup-steps", *warmup_override, "Override derived warm-up steps");
    cmd->add_option("--out", *out, "Schedule CSV path")->required();
    cmd->callback([=, &global]() {
        config->warmup_steps =
            *warmup_override >= 0
                ? static_cast<std::uint64_t>(*warmup_override)
                : camtrap::warmup_steps_from_defaults(*batch_size, *grad_accum);
        camtrap::save_schedule(*config, *out);
        record_output(global, *out);
        note(global, "wrote " + *out + " (" + std::to_string(config->total_steps) + " steps)");
    });
}

void add_train(CLI::App& app, GlobalFlags& global) {
    auto* cmd = app.add_subcommand("train", "Train for exactly one epoch");
    auto manifest_path = std::make_shared<std::string>();
    auto features_path = std::make_shared<std::string>();
    auto flipped_path = std::make_shared<std::string>();
    auto preset = std::make_shared<int>(0);
    auto batch_size = std::make_shared<std::uint64_t>(16);
    auto grad_accum = std::make_shared<std::uint64_t>(2);
    auto strategy = std::make_shared<std::string>("random");
    auto tails = std::make_shared<std::string>("9,10");
    auto dropout = std::make_shared<double>(0.0);
    auto hidden = std::make_shared<std::string>("64");
    auto max_lr = std::make_shared<double>(camtrap::k_default_max_lr);
    auto end_lr = std::make_shared<double>(camtrap::k_default_end_lr);
    auto warmup_override = std::make_shared<std::int64_t>(-1);
    auto flip_probability = std::make_shared<double>(0.5);
    auto out = std::make_shared<std::string>();
    cmd->add_option("--manifest", *manifest_path, "Manifest CSV")->required();
    cmd->add_option("--features", *features_path, "Feature file")->required();
    cmd->add_option("--flipped-features", *flipped_path, "Flipped feature file");
    cmd->add_option("--preset", *preset, "Model preset 1..4 (overrides BS/GA/strategy/dropout)");
    cmd->add_option("--batch-size", *batch_size, "Batch size");
    cmd->add_option("--grad-accum", *grad_accum, "Gradient accumulation factor");
    cmd->add_option("--strategy", *strategy, "random | season_by_season");
    cmd->add_option("--tail-seasons", *tails, "Seasons visited last (comma list)");
    cmd->add_option("--dropout", *dropout, "Hidden-layer dropout rate");
    cmd->add_option("--hidden-dims", *hidden, "Hidden widths, comma list; empty = linear");
    cmd->add_option("--max-lr", *max_lr, "Peak learning rate");
    cmd->add_option("--end-lr", *end_lr, "Final learning rate");
    cmd->add_option("--warmup-steps", *warmup_override, "Override derived warm-up steps");
    cmd->add_option("--flip-probability", *flip_probability, "Training flip chance");
    cmd->add_option("--out", *out, "Model file path")->required();
    cmd->callback([=, &global]() {
        camtrap::TrainConfig config;
        if (*preset != 0) {
            config = camtrap::preset_config(*preset);
        } else {
            config.batch_size = *batch_size;
            config.grad_accum = *grad_accum;
            config.strategy = make_strategy(*strategy, *tails);
            config.dropout = *dropout;
        }
        config.strategy.tail_seasons = split_list(*tails);
        config.seed = global.seed;
        config.hidden_dims = parse_size_list(*hidden, "--hidden-dims");
        config.flip_probability = *flip_probability;

        camtrap::ScheduleConfig schedule;
        schedule.max_lr = *max_lr;
        schedule.end_lr = *end_lr;
        schedule.warmup_steps =
            *warmup_override >= 0
                ? static_cast<std::uint64_t>(*warmup_override)
                : camtrap::warmup_steps_from_defaults(config.batch_size, config.grad_accum);

        const auto data = load_dataset(global, *manifest_path, *features_path, *flipped_path);
        const auto model = camtrap::train_one_epoch(
            data.manifest, data.features, data.flipped ? &*data.flipped : nullptr, config,
            schedule);
        camtrap::save_model(model, *out);
        record_output(global, *out);
        note(global, "wrote " + *out + " (" + std::to_string(model.parameter_count()) +
                         " parameters, " + std::to_string(model.step) + " optimizer steps)");
    });
}

void add_predict(CLI::App& app, GlobalFlags& global) {
    auto* cmd = app.add_subcommand("predict", "Per-image probabilities for a trained model");
    auto model_path = std::make_shared<std::string>();
    auto manifest_path = std::make_shared<std::string>();
    auto features_path = std::make_shared<std::string>();
    auto flipped_path = std::make_shared<std::string>();
    auto tta_flip = std::make_shared<bool>(false);
    auto out = std::make_shared<std::string>();
    cmd->add_option("--model", *model_path, "Model file")->required();
    cmd->add_option("--manifest", *manifest_path, "Manifest CSV")->required();
    cmd->add_option("--features", *features_path, "Feature file")->required();
    cmd->add_option("--flipped-features", *flipped_path, "Flipped feature file");
    cmd->add_flag("--tta-flip", *tta_flip, "Average normal and flipped passes");
    cmd->add_option("--out", *out, "Prediction CSV path")->required();
    cmd->callback([=, &global]() {
        const auto data = load_dataset(global, *manifest_path, *features_path, *flipped_path);
        const auto model = camtrap::load_model(*model_path);
        record_input(global, *model_path);
        const auto table = camtrap::predict(model, data.manifest, data.features, *tta_flip,
                                            data.flipped ? &*data.flipped : nullptr);
        camtrap::save_predictions(table, *out);
        record_output(global, *out);
        note(global, "wrote " + *out + " (" + std::to_string(table.rows.size()) + " rows)");
    });
}

void add_ensemble(CLI::App& app, GlobalFlags& global) {
    auto* cmd = app.add_subcommand("ensemble", "Combine prediction tables");
    auto inputs = std::make_shared<std::vector<std::string>>();
    auto kind = std::make_shared<std::string>("mean");
    auto weights_text = std::make_shared<std::string>();
    auto aggregate = std::make_shared<bool>(false);
    auto out = std::make_shared<std::string>();
    cmd->add_option("--in", *inputs, "Prediction CSVs")->required()->expected(-1);
    cmd->add_option("--kind", *kind, "mean | gmean | class_aware");
    cmd->add_option("--weights", *weights_text, "Comma list; uniform when omitted");
    cmd->add_flag("--aggregate-sequences", *aggregate, "Collapse images to sequences");
    cmd->add_option("--out", *out, "Combined CSV path")->required();
    cmd->callback([=, &global]() {
        std::vector<camtrap::PredictionTable> tables;
        tables.reserve(inputs->size());
        for (const auto& path : *inputs) {
            tables.push_back(camtrap::load_predictions(path));
            record_input(global, path);
        }
        if (tables.empty()) camtrap::fail(camtrap::errc::empty_table_list, "no input tables");

        const std::size_t empty_index = tables[0].category_index(global.empty_name);
        camtrap::PredictionTable combined;
        if (weights_text->empty()) {
            combined = camtrap::combine(tables, camtrap::combiner_from_name(*kind), empty_index);
        } else {
            std::vector<double> weights;
            for (const auto& field : split_list(*weights_text)) {
                double w = 0.0;
                if (!camtrap::parse_double(field, w))
                    camtrap::fail(camtrap::errc::bad_weights, "bad weight '" + field + "'");
                weights.push_back(w);
            }
            combined = camtrap::weighted_combine(tables, weights,
                                                 camtrap::combiner_from_name(*kind), empty_index);
        }
        if (*aggregate) combined = camtrap::aggregate_sequence(combined);
        camtrap::save_predictions(combined, *out);
        record_output(global, *out);
        note(global, "wrote " + *out + " (" + std::to_string(combined.rows.size()) + " rows)");
    });
}

void add_evaluate(CLI::App& app, GlobalFlags& global) {
    auto* cmd = app.add_subcommand("evaluate", "Score sequence-level predictions");
    auto pred_path = std::make_shared<std::string>();
    auto truth_path = std::make_shared<std::string>();
    auto threshold = std::make_shared<double>(0.5);
    cmd->add_option("--pred", *pred_path, "Sequence-level prediction CSV")->required();
    cmd->add_option("--truth", *truth_path, "Truth CSV")->required();
    cmd->add_option("--threshold", *threshold, "Empty-detection threshold");
    cmd->callback([=, &global]() {
        const auto predictions = camtrap::load_predictions(*pred_path);
        const auto truth = camtrap::load_truth(*truth_path, global.empty_name);
        record_input(global, *pred_path);
        record_input(global, *truth_path);
        const auto report = camtrap::evaluate(predictions, truth, *threshold);
        std::printf("agg_log_loss_raw=%.6g\n", report.agg_log_loss_raw);
        std::printf("agg_log_loss_normalized=%.6g\n", report.agg_log_loss_normalized);
        std::printf("accuracy=%.6g\n", report.accuracy);
        std::printf("empty_accuracy=%.6g\n", report.empty_accuracy);
        std::printf("sequences=%zu\n", report.sequences);
    });
}

void add_ablation(CLI::App& app, GlobalFlags& global) {
    auto* cmd = app.add_subcommand("ablation", "Train presets and report single vs ensemble loss");
    auto manifest_path = std::make_shared<std::string>();
    auto features_path = std::make_shared<std::string>();
    auto truth_path = std::make_shared<std::string>();
    auto seeds_text = std::make_shared<std::string>();
    auto presets_text = std::make_shared<std::string>("1,2,3,4");
    auto hidden = std::make_shared<std::string>("64");
    auto out = std::make_shared<std::string>();
    cmd->add_option("--manifest", *manifest_path, "Manifest CSV")->required();
    cmd->add_option("--features", *features_path, "Feature file")->required();
    cmd->add_option("--truth", *truth_path, "Truth CSV (derived from manifest when omitted)");
    cmd->add_option("--seeds", *seeds_text, "Comma list of seeds (default: global --seed)");
    cmd->add_option("--presets", *presets_text, "Comma list of presets 1..4");
    cmd->add_option("--hidden-dims", *hidden, "Hidden widths, comma list");
    cmd->add_option("--out", *out, "Report CSV path")->required();
    cmd->callback([=, &global]() {
        const auto data = load_dataset(global, *manifest_path, *features_path, "");
        const auto truth = truth_path->empty()
                               ? camtrap::derive_sequence_truth(data.manifest)
                               : camtrap::load_truth(*truth_path, global.empty_name);
        if (!truth_path->empty()) record_input(global, *truth_path);

        camtrap::AblationOptions options;
        options.hidden_dims = parse_size_list(*hidden, "--hidden-dims");
        options.presets.clear();
        for (const auto& field : split_list(*presets_text)) {
            std::uint32_t p = 0;
            if (!camtrap::parse_u32(field, p))
                camtrap::fail(camtrap::errc::invalid_argument, "bad preset '" + field + "'");
            options.presets.push_back(static_cast<int>(p));
        }
        options.seeds.clear();
        if (seeds_text->empty()) {
            options.seeds.push_back(global.seed);
        } else {
            for (const auto& field : split_list(*seeds_text)) {
                std::uint64_t s = 0;
                if (!camtrap::parse_u64(field, s))
                    camtrap::fail(camtrap::errc::invalid_argument, "bad seed '" + field + "'");
                options.seeds.push_back(s);
            }
        }

        const auto rows = camtrap::run_ablation(data.manifest, data.features, truth, options);
        camtrap::save_ablation(rows, *out);
        record_output(global, *out);
        note(global, "wrote " + *out + " (" + std::to_string(rows.size()) + " rows)");
    });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Desk-scale camera-trap pipeline: single-epoch training, "
                 "ensembling, sequence aggregation and challenge-style scoring"};
    app.require_subcommand(1);
    app.fallthrough();
    const auto started = std::chrono::steady_clock::now();

    GlobalFlags global;
    app.add_option("--seed", global.seed, "Base seed for every random stream");
    app.add_option("--empty-name", global.empty_name, "Name of the empty category column");
    app.add_flag("--quiet", global.quiet, "Suppress progress notes");

    add_synth(app, global);
    add_sample_plan(app, global);
    add_schedule_dump(app, global);
    add_train(app, global);
    add_predict(app, global);
    add_ensemble(app, global);
    add_evaluate(app, global);
    add_ablation(app, global);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const camtrap::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return camtrap::exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    for (int i = 0; i < argc; ++i) {
        global.run.command_line += ' ';
        global.run.command_line += argv[i];
    }
    global.run.seed = global.seed;
    global.run.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    note(global, camtrap::format_run(global.run));
    return 0;
}
