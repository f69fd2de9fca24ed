#pragma once

#include <stdexcept>
#include <string>

namespace camtrap {

enum class errc {
    invalid_argument,
    malformed_row,
    duplicate_image,
    empty_conflict,
    inconsistent_width,
    no_positive_label,
    empty_manifest,
    step_out_of_range,
    dimension_mismatch,
    length_mismatch,
    non_finite_gradient,
    missing_flipped_features,
    key_mismatch,
    vocabulary_mismatch,
    empty_table_list,
    weight_mismatch,
    bad_weights,
    bad_format,
    io_failure,
};

/// Single exception type for the whole library; the code tells callers
/// (and the CLI exit-code mapping) what went wrong.
class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& message) {
    throw Error(code, message);
}

// Process exit codes: 0 success, 2 input validation, 3 numerical, 4 I/O.
inline int exit_code_for(errc code) noexcept {
    switch (code) {
        case errc::non_finite_gradient: return 3;
        case errc::io_failure: return 4;
        default: return 2;
    }
}

} // namespace camtrap
