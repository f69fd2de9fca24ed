#pragma once

// Flat binary feature file: 16-byte header of four unsigned little-endian
// 32-bit integers `magic | version | rows | dim`, followed by rows*dim
// little-endian 32-bit floats in row-major order.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <vector>

#include "camtrap/errors.hpp"
#include "camtrap/manifest.hpp"

namespace camtrap {

inline constexpr std::uint32_t k_feature_magic = 0x31465443; // "CTF1"
inline constexpr std::uint32_t k_feature_version = 1;

static_assert(std::endian::native == std::endian::little,
              "feature/model files are little-endian; big-endian hosts unsupported");

class FeatureStore {
public:
    FeatureStore() = default;

    FeatureStore(std::size_t rows, std::size_t dim, std::vector<float> data)
        : rows_(rows), dim_(dim), data_(std::move(data)) {
        if (dim_ == 0) fail(errc::invalid_argument, "feature dim must be positive");
        if (data_.size() != rows_ * dim_)
            fail(errc::invalid_argument, "feature data size does not match rows*dim");
    }

    static FeatureStore load(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) fail(errc::io_failure, "cannot open " + path.string());
        std::uint32_t header[4];
        in.read(reinterpret_cast<char*>(header), sizeof(header));
        if (!in) fail(errc::io_failure, "short read on " + path.string());
        if (header[0] != k_feature_magic)
            fail(errc::bad_format, "bad magic in " + path.string());
        if (header[1] != k_feature_version)
            fail(errc::bad_format, "unsupported feature file version " + std::to_string(header[1]));
        const std::size_t rows = header[2];
        const std::size_t dim = header[3];
        if (dim == 0) fail(errc::bad_format, "zero feature dim in " + path.string());
        std::vector<float> data(rows * dim);
        in.read(reinterpret_cast<char*>(data.data()),
                static_cast<std::streamsize>(data.size() * sizeof(float)));
        if (!in) fail(errc::bad_format, "truncated feature data in " + path.string());
        char extra;
        if (in.read(&extra, 1))
            fail(errc::bad_format, "trailing bytes in " + path.string());
        return FeatureStore(rows, dim, std::move(data));
    }

    void save(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) fail(errc::io_failure, "cannot open " + path.string() + " for writing");
        const std::uint32_t header[4] = {k_feature_magic, k_feature_version,
                                         static_cast<std::uint32_t>(rows_),
                                         static_cast<std::uint32_t>(dim_)};
        out.write(reinterpret_cast<const char*>(header), sizeof(header));
        out.write(reinterpret_cast<const char*>(data_.data()),
                  static_cast<std::streamsize>(data_.size() * sizeof(float)));
        if (!out) fail(errc::io_failure, "write error on " + path.string());
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t dim() const noexcept { return dim_; }

    std::span<const float> row(std::size_t index) const {
        if (index >= rows_) fail(errc::dimension_mismatch, "feature row out of range");
        return {data_.data() + index * dim_, dim_};
    }

private:
    std::size_t rows_ = 0;
    std::size_t dim_ = 0;
    std::vector<float> data_;
};

// Fills manifest.feature_dim and checks every record's row exists.
inline void bind_features(Manifest& manifest, const FeatureStore& store) {
    for (const auto& record : manifest.records)
        if (record.feature_row >= store.rows())
            fail(errc::dimension_mismatch,
                 "feature_row " + std::to_string(record.feature_row) + " >= store rows " +
                     std::to_string(store.rows()));
    manifest.feature_dim = static_cast<std::uint32_t>(store.dim());
}

} // namespace camtrap
