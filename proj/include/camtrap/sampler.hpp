#pragma once

// Single-epoch visitation order. Two strategies:
//   random            one seeded uniform permutation over all records
//   season_by_season  records grouped per season; non-tail seasons in
//                     ascending tag order (numeric when the tag parses as an
//                     integer, lexicographic otherwise), then the configured
//                     tail seasons in their listed order; each season chunk
//                     is shuffled with substream(seed, "season:" + tag)
//
// Every entry carries a horizontal-flip flag drawn from substream(seed,
// "flip") in final plan order, so stripping the flags never changes the
// permutation.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "camtrap/csv.hpp"
#include "camtrap/errors.hpp"
#include "camtrap/manifest.hpp"
#include "camtrap/rng.hpp"

namespace camtrap {

enum class StrategyKind { random, season_by_season };

struct SamplingStrategy {
    StrategyKind kind = StrategyKind::random;
    std::vector<std::string> tail_seasons = {"9", "10"};
};

struct PlanEntry {
    std::uint32_t record_index = 0;
    bool flip = false;
};

struct SamplePlan {
    std::vector<PlanEntry> order;
    std::uint64_t seed = 0;
};

namespace detail {

struct SeasonTag {
    std::string tag;
    bool numeric = false;
    std::uint64_t value = 0;
};

inline SeasonTag make_season_tag(const std::string& tag) {
    SeasonTag t{tag, false, 0};
    t.numeric = parse_u64(tag, t.value);
    return t;
}

// Numeric tags sort before non-numeric ones; ties fall back to the string.
inline bool season_less(const SeasonTag& a, const SeasonTag& b) {
    if (a.numeric != b.numeric) return a.numeric;
    if (a.numeric && a.value != b.value) return a.value < b.value;
    return a.tag < b.tag;
}

} // namespace detail

inline SamplePlan build_plan(const Manifest& manifest, const SamplingStrategy& strategy,
                             std::uint64_t seed, double flip_probability = 0.5) {
    if (manifest.records.empty()) fail(errc::empty_manifest, "cannot plan over an empty manifest");
    if (!(flip_probability >= 0.0 && flip_probability <= 1.0))
        fail(errc::invalid_argument, "flip_probability must lie in [0, 1]");
    {
        std::unordered_set<std::string> seen;
        for (const auto& tag : strategy.tail_seasons)
            if (!seen.insert(tag).second)
                fail(errc::invalid_argument, "duplicate tail season: " + tag);
    }

    const std::size_t n = manifest.records.size();
    std::vector<std::uint32_t> permutation;
    permutation.reserve(n);

    if (strategy.kind == StrategyKind::random) {
        permutation.resize(n);
        for (std::size_t i = 0; i < n; ++i) permutation[i] = static_cast<std::uint32_t>(i);
        auto rng = substream(seed, "shuffle");
        fisher_yates(permutation, rng);
    } else {
        std::map<std::string, std::vector<std::uint32_t>> by_season;
        for (std::size_t i = 0; i < n; ++i)
            by_season[manifest.records[i].season].push_back(static_cast<std::uint32_t>(i));

        std::unordered_set<std::string> tail_set(strategy.tail_seasons.begin(),
                                                 strategy.tail_seasons.end());
        std::vector<detail::SeasonTag> head;
        for (const auto& [tag, indices] : by_season)
            if (!tail_set.contains(tag)) head.push_back(detail::make_season_tag(tag));
        std::sort(head.begin(), head.end(), detail::season_less);

        std::vector<std::string> chunk_order;
        for (const auto& tag : head) chunk_order.push_back(tag.tag);
        for (const auto& tag : strategy.tail_seasons)
            if (by_season.contains(tag)) chunk_order.push_back(tag); // absent tails are skipped

        for (const auto& tag : chunk_order) {
            auto chunk = by_season.at(tag);
            auto rng = substream(seed, "season:" + tag);
            fisher_yates(chunk, rng);
            permutation.insert(permutation.end(), chunk.begin(), chunk.end());
        }
    }

    SamplePlan plan;
    plan.seed = seed;
    plan.order.reserve(n);
    auto flip_rng = substream(seed, "flip");
    for (std::uint32_t index : permutation)
        plan.order.push_back({index, flip_rng.bernoulli(flip_probability)});
    return plan;
}

// Consecutive slices of the plan; the final batch may be smaller.
inline std::vector<std::span<const PlanEntry>> batches(const SamplePlan& plan,
                                                       std::size_t batch_size) {
    if (batch_size == 0) fail(errc::invalid_argument, "batch_size must be positive");
    std::vector<std::span<const PlanEntry>> out;
    const std::size_t n = plan.order.size();
    out.reserve((n + batch_size - 1) / batch_size);
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t len = std::min(batch_size, n - start);
        out.push_back({plan.order.data() + start, len});
    }
    return out;
}

inline void save_plan(const SamplePlan& plan, const std::filesystem::path& path) {
    std::string out = "position,record_index,flip\n";
    for (std::size_t i = 0; i < plan.order.size(); ++i) {
        out += std::to_string(i);
        out += ',';
        out += std::to_string(plan.order[i].record_index);
        out += plan.order[i].flip ? ",1\n" : ",0\n";
    }
    write_text(path, out);
}

inline StrategyKind strategy_from_name(std::string_view name) {
    if (name == "random") return StrategyKind::random;
    if (name == "season_by_season") return StrategyKind::season_by_season;
    fail(errc::invalid_argument, "unknown strategy '" + std::string(name) + "'");
}

inline const char* strategy_name(StrategyKind kind) noexcept {
    return kind == StrategyKind::random ? "random" : "season_by_season";
}

} // namespace camtrap
