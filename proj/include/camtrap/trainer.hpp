#pragma once

// Single-epoch streaming trainer. Every record is visited exactly once in
// sample-plan order; gradients are summed over grad_accum consecutive
// batches and averaged over the examples that contributed, then one Adam
// step applies with the one-cycle rate for that step. The final partial
// accumulation group still triggers a step.
//
// A Store must provide rows(), dim() and row(i) -> span of float (see
// FeatureStore). Flip flags read the same row from the flipped store when
// one is supplied, otherwise they are a no-op.

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "camtrap/adam.hpp"
#include "camtrap/errors.hpp"
#include "camtrap/manifest.hpp"
#include "camtrap/model.hpp"
#include "camtrap/predictions.hpp"
#include "camtrap/rng.hpp"
#include "camtrap/sampler.hpp"
#include "camtrap/schedule.hpp"

namespace camtrap {

struct TrainConfig {
    std::size_t batch_size = 16;
    std::size_t grad_accum = 2;
    SamplingStrategy strategy;
    double dropout = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> hidden_dims = {64};
    AdamParams adam;
    double flip_probability = 0.5;

    void validate() const {
        if (batch_size == 0 || grad_accum == 0)
            fail(errc::invalid_argument, "batch_size and grad_accum must be positive");
        if (!(dropout >= 0.0 && dropout < 1.0))
            fail(errc::invalid_argument, "dropout must be in [0,1)");
    }
};

// Presets 1..4 bundle batch size, accumulation factor, sampling strategy
// and dropout (0.0, 0.0, 0.2, 0.3).
inline TrainConfig preset_config(int preset) {
    TrainConfig config;
    switch (preset) {
        case 1:
            config.batch_size = 16;
            config.grad_accum = 2;
            config.strategy.kind = StrategyKind::season_by_season;
            config.dropout = 0.0;
            break;
        case 2:
            config.batch_size = 13;
            config.grad_accum = 3;
            config.strategy.kind = StrategyKind::random;
            config.dropout = 0.0;
            break;
        case 3:
            config.batch_size = 16;
            config.grad_accum = 2;
            config.strategy.kind = StrategyKind::season_by_season;
            config.dropout = 0.2;
            break;
        case 4:
            config.batch_size = 11;
            config.grad_accum = 3;
            config.strategy.kind = StrategyKind::random;
            config.dropout = 0.3;
            break;
        default:
            fail(errc::invalid_argument, "preset must be 1..4");
    }
    return config;
}

struct TrainHooks {
    // Called once per optimizer step with the rate actually applied.
    std::function<void(std::uint64_t step, double lr)> on_step;
};

namespace detail {

inline void check_finite_grads(const std::vector<Layer>& grads, std::uint64_t step) {
    for (const auto& layer : grads) {
        for (double g : layer.w)
            if (!std::isfinite(g))
                fail(errc::non_finite_gradient,
                     "non-finite gradient at optimizer step " + std::to_string(step));
        for (double g : layer.b)
            if (!std::isfinite(g))
                fail(errc::non_finite_gradient,
                     "non-finite gradient at optimizer step " + std::to_string(step));
    }
}

inline void check_finite_params(const ModelState& model, std::uint64_t step) {
    for (const auto& layer : model.layers) {
        for (double w : layer.w)
            if (!std::isfinite(w))
                fail(errc::non_finite_gradient,
                     "non-finite parameter after optimizer step " + std::to_string(step));
        for (double b : layer.b)
            if (!std::isfinite(b))
                fail(errc::non_finite_gradient,
                     "non-finite parameter after optimizer step " + std::to_string(step));
    }
}

template <class Store>
void load_row(const Store& store, std::size_t row, std::vector<double>& x) {
    const auto values = store.row(row);
    x.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) x[i] = static_cast<double>(values[i]);
}

} // namespace detail

// The schedule's total_steps is derived from the plan (ceil(ceil(N/BS)/GA));
// the field is ignored on input. warmup_steps is clamped to total_steps - 1
// so tiny datasets stay trainable.
template <class Store>
ModelState train_one_epoch(const Manifest& manifest, const Store& features,
                           const Store* flipped_features, const TrainConfig& config,
                           ScheduleConfig schedule, const TrainHooks* hooks = nullptr) {
    config.validate();
    if (manifest.records.empty()) fail(errc::empty_manifest, "cannot train on an empty manifest");
    for (const auto& record : manifest.records)
        if (record.feature_row >= features.rows())
            fail(errc::dimension_mismatch, "feature store does not cover record " + record.image_id);
    if (flipped_features &&
        (flipped_features->dim() != features.dim() || flipped_features->rows() < features.rows()))
        fail(errc::dimension_mismatch, "flipped feature store shape mismatch");

    const std::size_t n = manifest.records.size();
    schedule.total_steps = total_steps_for(n, config.batch_size, config.grad_accum);
    if (schedule.warmup_steps >= schedule.total_steps)
        schedule.warmup_steps = schedule.total_steps - 1;
    schedule.validate();

    const SamplePlan plan =
        build_plan(manifest, config.strategy, config.seed, config.flip_probability);
    const auto plan_batches = batches(plan, config.batch_size);

    ModelState model = init_model(features.dim(), config.hidden_dims,
                                  manifest.vocabulary.size(), config.seed);
    auto dropout_rng = substream(config.seed, "dropout");

    std::vector<Layer> grads = zero_gradients(model);
    std::size_t group_examples = 0;
    std::uint64_t step = 0;
    std::vector<double> x;

    for (std::size_t b = 0; b < plan_batches.size(); ++b) {
        for (const PlanEntry& entry : plan_batches[b]) {
            const ImageRecord& record = manifest.records[entry.record_index];
            const Store& source =
                (entry.flip && flipped_features) ? *flipped_features : features;
            detail::load_row(source, record.feature_row, x);

            DropoutMask mask;
            const bool use_dropout = config.dropout > 0.0;
            if (use_dropout) mask = draw_dropout_mask(model, config.dropout, dropout_rng);
            const ForwardTrace trace = forward_trace(model, x, use_dropout ? &mask : nullptr);
            accumulate_gradients(model, trace, record.labels, use_dropout ? &mask : nullptr,
                                 grads);
            ++group_examples;
        }

        const bool group_done = (b + 1) % config.grad_accum == 0 || b + 1 == plan_batches.size();
        if (!group_done) continue;

        detail::check_finite_grads(grads, step);
        const double scale = 1.0 / static_cast<double>(group_examples);
        for (auto& layer : grads) {
            for (double& g : layer.w) g *= scale;
            for (double& g : layer.b) g *= scale;
        }

        const double lr = lr_at(step, schedule);
        if (hooks && hooks->on_step) hooks->on_step(step, lr);

        const std::uint64_t t = ++model.step;
        for (std::size_t l = 0; l < model.layers.size(); ++l) {
            adam_update(model.layers[l].w, model.moment1[l].w, model.moment2[l].w, grads[l].w,
                        lr, t, config.adam);
            adam_update(model.layers[l].b, model.moment1[l].b, model.moment2[l].b, grads[l].b,
                        lr, t, config.adam);
        }
        detail::check_finite_params(model, step);

        for (auto& layer : grads) {
            std::fill(layer.w.begin(), layer.w.end(), 0.0);
            std::fill(layer.b.begin(), layer.b.end(), 0.0);
        }
        group_examples = 0;
        ++step;
    }
    return model;
}

// One forward pass per image, two with flip TTA (arithmetic mean of the two
// probability vectors). Dropout is never applied here.
template <class Store>
PredictionTable predict(const ModelState& model, const Manifest& manifest, const Store& features,
                        bool tta_flip = false, const Store* flipped_features = nullptr) {
    if (tta_flip && !flipped_features)
        fail(errc::missing_flipped_features, "flip TTA requires a flipped feature store");
    if (model.output_dim() != manifest.vocabulary.size())
        fail(errc::dimension_mismatch, "model output width != vocabulary size");
    if (tta_flip && flipped_features->dim() != features.dim())
        fail(errc::dimension_mismatch, "flipped feature store dim mismatch");

    PredictionTable table;
    table.categories = manifest.vocabulary.names;
    table.sequence_level = false;
    table.rows.reserve(manifest.records.size());

    std::vector<double> x;
    for (const auto& record : manifest.records) {
        detail::load_row(features, record.feature_row, x);
        ProbabilityVector probs = forward(model, x);
        if (tta_flip) {
            detail::load_row(*flipped_features, record.feature_row, x);
            const ProbabilityVector flipped = forward(model, x);
            for (std::size_t j = 0; j < probs.values.size(); ++j)
                probs.values[j] = 0.5 * (probs.values[j] + flipped.values[j]);
        }
        table.rows.push_back({record.sequence_id, record.image_id, std::move(probs.values)});
    }
    return table;
}

} // namespace camtrap
