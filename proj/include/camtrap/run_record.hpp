#pragma once

// Reproducibility record for one CLI run: the exact command line, the seed,
// a digest per input file, the output paths and the wall-clock duration.
// The rendered line is enough to reconstruct and verify the run.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "camtrap/errors.hpp"
#include "camtrap/rng.hpp"

namespace camtrap {

struct PipelineRun {
    std::string command_line;
    std::uint64_t seed = 0;
    struct Input {
        std::string path;
        std::uint64_t digest = 0;
    };
    std::vector<Input> inputs;
    std::vector<std::string> outputs;
    double seconds = 0.0;
};

inline std::uint64_t digest_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(errc::io_failure, "cannot open " + path.string() + " for digest");
    std::uint64_t hash = 0xCBF29CE484222325ULL;
    char buffer[1 << 15];
    while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
        const std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            hash ^= static_cast<std::uint8_t>(buffer[i]);
            hash *= 0x100000001B3ULL;
        }
    }
    return hash;
}

inline std::string format_run(const PipelineRun& run) {
    char hex[32];
    std::string out = "run:";
    out += run.command_line;
    out += " | seed=" + std::to_string(run.seed);
    for (const auto& input : run.inputs) {
        std::snprintf(hex, sizeof(hex), "%016llx",
                      static_cast<unsigned long long>(input.digest));
        out += " | in " + input.path + "#" + hex;
    }
    for (const auto& output : run.outputs) out += " | out " + output;
    std::snprintf(hex, sizeof(hex), "%.3f", run.seconds);
    out += std::string(" | ") + hex + "s";
    return out;
}

} // namespace camtrap
