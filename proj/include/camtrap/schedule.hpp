#pragma once

// One-cycle learning-rate policy: linear warm start from end_lr up to max_lr
// over warmup_steps optimizer steps, then cosine annealing back down so the
// final step lands exactly on end_lr.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>

#include "camtrap/csv.hpp"
#include "camtrap/errors.hpp"

namespace camtrap {

// Defaults shared by every model configuration.
inline constexpr double k_default_max_lr = 1e-4;
inline constexpr double k_default_end_lr = 1e-6;
inline constexpr std::uint64_t k_warmup_iterations = 600;

struct ScheduleConfig {
    std::uint64_t warmup_steps = 0;
    double max_lr = k_default_max_lr;
    double end_lr = k_default_end_lr;
    std::uint64_t total_steps = 1;

    void validate() const {
        if (total_steps == 0) fail(errc::invalid_argument, "total_steps must be positive");
        if (warmup_steps >= total_steps)
            fail(errc::invalid_argument, "warmup_steps must be < total_steps");
        if (!(max_lr > 0.0) || !(end_lr > 0.0))
            fail(errc::invalid_argument, "learning rates must be positive");
        if (end_lr > max_lr) fail(errc::invalid_argument, "end_lr must not exceed max_lr");
    }
};

// The warm start covers 600 forward iterations at the configured batch size
// (600 * BS images); under gradient accumulation that is ceil(600 / GA)
// optimizer steps. batch_size participates only through the image count.
inline std::uint64_t warmup_steps_from_defaults(std::uint64_t batch_size,
                                                std::uint64_t grad_accum) {
    if (batch_size == 0 || grad_accum == 0)
        fail(errc::invalid_argument, "batch_size and grad_accum must be positive");
    return (k_warmup_iterations + grad_accum - 1) / grad_accum;
}

inline double lr_at(std::uint64_t step, const ScheduleConfig& config) {
    config.validate();
    if (step >= config.total_steps)
        fail(errc::step_out_of_range,
             "step " + std::to_string(step) + " >= total_steps " +
                 std::to_string(config.total_steps));

    if (step < config.warmup_steps) {
        const double t = static_cast<double>(step) / static_cast<double>(config.warmup_steps);
        return config.end_lr + (config.max_lr - config.end_lr) * t;
    }

    // Anchors are exact: the peak at the warm-up junction, end_lr at the
    // final step (cos(pi * u) would leave ~1 ulp of residue at both).
    if (step == config.warmup_steps) return config.max_lr;
    if (step == config.total_steps - 1) return config.end_lr;

    const std::uint64_t span = config.total_steps - 1 - config.warmup_steps;
    const double u =
        static_cast<double>(step - config.warmup_steps) / static_cast<double>(span);
    constexpr double pi = 3.141592653589793238462643383279;
    return config.end_lr + 0.5 * (config.max_lr - config.end_lr) * (1.0 + std::cos(pi * u));
}

// Optimizer steps for one epoch: ceil(ceil(N / BS) / GA).
inline std::uint64_t total_steps_for(std::uint64_t record_count, std::uint64_t batch_size,
                                     std::uint64_t grad_accum) {
    if (batch_size == 0 || grad_accum == 0)
        fail(errc::invalid_argument, "batch_size and grad_accum must be positive");
    const std::uint64_t batch_count = (record_count + batch_size - 1) / batch_size;
    return (batch_count + grad_accum - 1) / grad_accum;
}

inline void save_schedule(const ScheduleConfig& config, const std::filesystem::path& path) {
    std::string out = "step,lr\n";
    for (std::uint64_t step = 0; step < config.total_steps; ++step) {
        out += std::to_string(step);
        out += ',';
        out += format_double(lr_at(step, config));
        out += '\n';
    }
    write_text(path, out);
}

} // namespace camtrap
