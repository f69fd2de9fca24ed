#pragma once

// Post-hoc ablation: train every requested preset, score each model alone,
// then score the three ensemble combiners over all trained models with
// uniform weights. One block of rows per seed; each preset's training seed
// is derived from (seed, preset number) so repeated presets reproduce the
// same model.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "camtrap/csv.hpp"
#include "camtrap/ensemble.hpp"
#include "camtrap/errors.hpp"
#include "camtrap/metrics.hpp"
#include "camtrap/trainer.hpp"

namespace camtrap {

struct AblationOptions {
    std::vector<int> presets = {1, 2, 3, 4};
    std::vector<std::uint64_t> seeds = {0};
    std::vector<std::size_t> hidden_dims = {64};
    double max_lr = k_default_max_lr;
    double end_lr = k_default_end_lr;
};

struct AblationRow {
    std::uint64_t seed = 0;
    std::string model;
    double agg_log_loss_normalized = 0.0;
};

template <class Store>
std::vector<AblationRow> run_ablation(const Manifest& manifest, const Store& features,
                                      const TruthSet& truth, const AblationOptions& options) {
    if (options.presets.empty()) fail(errc::invalid_argument, "no presets requested");
    if (options.seeds.empty()) fail(errc::invalid_argument, "no seeds requested");

    std::vector<AblationRow> report;
    for (const std::uint64_t seed : options.seeds) {
        std::vector<PredictionTable> image_tables;
        image_tables.reserve(options.presets.size());

        for (const int preset : options.presets) {
            TrainConfig config = preset_config(preset);
            config.seed = derive_seed(seed, "preset:" + std::to_string(preset));
            config.hidden_dims = options.hidden_dims;

            ScheduleConfig schedule;
            schedule.warmup_steps = warmup_steps_from_defaults(config.batch_size, config.grad_accum);
            schedule.max_lr = options.max_lr;
            schedule.end_lr = options.end_lr;

            const ModelState model =
                train_one_epoch(manifest, features, static_cast<const Store*>(nullptr), config,
                                schedule);
            image_tables.push_back(predict(model, manifest, features));

            const AggLogLoss loss = agg_log_loss(aggregate_sequence(image_tables.back()), truth);
            report.push_back({seed, "preset_" + std::to_string(preset), loss.normalized});
        }

        if (image_tables.size() < 2) continue;
        const std::size_t empty_index = manifest.vocabulary.empty_index;
        for (const CombinerKind kind :
             {CombinerKind::mean, CombinerKind::gmean, CombinerKind::class_aware}) {
            const PredictionTable combined = combine(image_tables, kind, empty_index);
            const AggLogLoss loss = agg_log_loss(aggregate_sequence(combined), truth);
            report.push_back({seed, std::string("ensemble_") + combiner_name(kind),
                              loss.normalized});
        }
    }
    return report;
}

inline void save_ablation(const std::vector<AblationRow>& rows,
                          const std::filesystem::path& path) {
    std::string out = "seed,model,agg_log_loss_normalized\n";
    for (const auto& row : rows) {
        out += std::to_string(row.seed);
        out += ',';
        out += row.model;
        out += ',';
        out += format_double(row.agg_log_loss_normalized);
        out += '\n';
    }
    write_text(path, out);
}

} // namespace camtrap
