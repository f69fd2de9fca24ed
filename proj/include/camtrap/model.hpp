#pragma once

// Multi-label classifier over feature vectors: affine layers with ReLU
// between hidden layers, independent sigmoids on the output layer. Dropout
// (inverted scaling) applies to hidden activations during training only.
// Parameters, gradients and Adam moments are all doubles.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "camtrap/errors.hpp"
#include "camtrap/rng.hpp"

namespace camtrap {

inline constexpr double k_bce_clamp = 1e-7;

struct ProbabilityVector {
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
};

struct Layer {
    std::size_t out = 0;
    std::size_t in = 0;
    std::vector<double> w; // out x in, row-major
    std::vector<double> b; // out

    static Layer zeros(std::size_t out, std::size_t in) {
        return Layer{out, in, std::vector<double>(out * in, 0.0), std::vector<double>(out, 0.0)};
    }
};

// One scale per hidden unit: 0 when dropped, 1/(1-rate) when kept.
struct DropoutMask {
    std::vector<std::vector<double>> layer_scales;
};

struct ModelState {
    std::size_t input_dim = 0;
    std::vector<Layer> layers;
    std::vector<Layer> moment1; // Adam m, same shapes as layers
    std::vector<Layer> moment2; // Adam v
    std::uint64_t step = 0;

    std::size_t output_dim() const { return layers.back().out; }
    std::size_t hidden_layer_count() const { return layers.size() - 1; }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& layer : layers) n += layer.w.size() + layer.b.size();
        return n;
    }
};

inline ModelState init_model(std::size_t input_dim, std::span<const std::size_t> hidden_dims,
                             std::size_t output_dim, std::uint64_t seed) {
    if (input_dim == 0 || output_dim == 0)
        fail(errc::invalid_argument, "model dimensions must be positive");
    for (std::size_t width : hidden_dims)
        if (width == 0) fail(errc::invalid_argument, "hidden layer width must be positive");

    ModelState model;
    model.input_dim = input_dim;
    auto rng = substream(seed, "init");
    std::size_t fan_in = input_dim;
    auto push_layer = [&](std::size_t out, bool zero) {
        Layer layer = Layer::zeros(out, fan_in);
        if (!zero) {
            // Glorot uniform; biases start at zero.
            const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + out));
            for (double& w : layer.w) w = (2.0 * rng.unit() - 1.0) * limit;
        }
        model.layers.push_back(std::move(layer));
        fan_in = out;
    };
    for (std::size_t width : hidden_dims) push_layer(width, false);
    // Zero output layer: every logit starts at 0 (p = 0.5) regardless of the
    // feature scale, so the first steps never fight saturated random logits.
    push_layer(output_dim, true);

    for (const auto& layer : model.layers) {
        model.moment1.push_back(Layer::zeros(layer.out, layer.in));
        model.moment2.push_back(Layer::zeros(layer.out, layer.in));
    }
    return model;
}

inline DropoutMask draw_dropout_mask(const ModelState& model, double rate, SplitMix64& rng) {
    if (!(rate >= 0.0 && rate < 1.0)) fail(errc::invalid_argument, "dropout rate must be in [0,1)");
    DropoutMask mask;
    const double keep_scale = 1.0 / (1.0 - rate);
    for (std::size_t l = 0; l < model.hidden_layer_count(); ++l) {
        std::vector<double> scales(model.layers[l].out);
        for (double& s : scales) s = rng.bernoulli(rate) ? 0.0 : keep_scale;
        mask.layer_scales.push_back(std::move(scales));
    }
    return mask;
}

struct ForwardTrace {
    // act[0] is the input; act[l+1] the post-ReLU (and post-dropout)
    // activation of hidden layer l. probs holds the sigmoid outputs.
    std::vector<std::vector<double>> act;
    ProbabilityVector probs;
};

namespace detail {

inline void affine(const Layer& layer, std::span<const double> x, std::vector<double>& z) {
    z.assign(layer.b.begin(), layer.b.end());
    for (std::size_t j = 0; j < layer.out; ++j) {
        const double* row = layer.w.data() + j * layer.in;
        double acc = z[j];
        for (std::size_t i = 0; i < layer.in; ++i) acc += row[i] * x[i];
        z[j] = acc;
    }
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

} // namespace detail

inline ForwardTrace forward_trace(const ModelState& model, std::span<const double> features,
                                  const DropoutMask* mask = nullptr) {
    if (features.size() != model.input_dim)
        fail(errc::dimension_mismatch,
             "feature length " + std::to_string(features.size()) + " != model input width " +
                 std::to_string(model.input_dim));
    if (mask && mask->layer_scales.size() != model.hidden_layer_count())
        fail(errc::dimension_mismatch, "dropout mask layer count mismatch");

    ForwardTrace trace;
    trace.act.emplace_back(features.begin(), features.end());
    std::vector<double> z;
    for (std::size_t l = 0; l < model.hidden_layer_count(); ++l) {
        detail::affine(model.layers[l], trace.act.back(), z);
        for (double& v : z) v = v > 0.0 ? v : 0.0;
        if (mask) {
            const auto& scales = mask->layer_scales[l];
            if (scales.size() != z.size())
                fail(errc::dimension_mismatch, "dropout mask width mismatch");
            for (std::size_t j = 0; j < z.size(); ++j) z[j] *= scales[j];
        }
        trace.act.push_back(z);
    }
    detail::affine(model.layers.back(), trace.act.back(), z);
    trace.probs.values.resize(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) trace.probs.values[j] = detail::sigmoid(z[j]);
    return trace;
}

inline ProbabilityVector forward(const ModelState& model, std::span<const double> features,
                                 const DropoutMask* mask = nullptr) {
    return forward_trace(model, features, mask).probs;
}

// Sum over categories of -[t ln p + (1-t) ln(1-p)], p clamped to
// [k_bce_clamp, 1 - k_bce_clamp].
inline double bce_multilabel(const ProbabilityVector& pred, std::span<const std::uint8_t> target) {
    if (pred.size() != target.size())
        fail(errc::length_mismatch, "prediction/target length mismatch");
    double loss = 0.0;
    for (std::size_t j = 0; j < target.size(); ++j) {
        double p = pred[j];
        if (p < k_bce_clamp) p = k_bce_clamp;
        if (p > 1.0 - k_bce_clamp) p = 1.0 - k_bce_clamp;
        loss -= target[j] ? std::log(p) : std::log(1.0 - p);
    }
    return loss;
}

// Accumulates d(bce_multilabel(forward(x)))/d(theta) for one example into
// `grads` (shapes mirror model.layers). The trace must come from the same
// model and mask.
inline void accumulate_gradients(const ModelState& model, const ForwardTrace& trace,
                                 std::span<const std::uint8_t> target, const DropoutMask* mask,
                                 std::vector<Layer>& grads) {
    if (target.size() != model.output_dim())
        fail(errc::length_mismatch, "target length != model output width");

    // d(loss)/d(logit) = p - t for sigmoid + binary cross entropy. The BCE
    // clamp guards only the reported loss value; training keeps the full
    // gradient so saturated-wrong logits can still recover.
    std::vector<double> delta(model.output_dim());
    for (std::size_t j = 0; j < delta.size(); ++j)
        delta[j] = trace.probs[j] - static_cast<double>(target[j]);

    std::vector<double> next_delta;
    for (std::size_t l = model.layers.size(); l-- > 0;) {
        const Layer& layer = model.layers[l];
        const auto& input = trace.act[l];
        Layer& grad = grads[l];
        for (std::size_t j = 0; j < layer.out; ++j) {
            grad.b[j] += delta[j];
            double* grow = grad.w.data() + j * layer.in;
            for (std::size_t i = 0; i < layer.in; ++i) grow[i] += delta[j] * input[i];
        }
        if (l == 0) break;
        next_delta.assign(layer.in, 0.0);
        for (std::size_t j = 0; j < layer.out; ++j) {
            const double* row = layer.w.data() + j * layer.in;
            for (std::size_t i = 0; i < layer.in; ++i) next_delta[i] += row[i] * delta[j];
        }
        // Through ReLU (and the dropout scale when one was applied).
        const auto& act = trace.act[l];
        for (std::size_t i = 0; i < next_delta.size(); ++i) {
            const double scale = mask ? mask->layer_scales[l - 1][i] : 1.0;
            next_delta[i] = act[i] > 0.0 ? next_delta[i] * scale : 0.0;
        }
        delta.swap(next_delta);
    }
}

inline std::vector<Layer> zero_gradients(const ModelState& model) {
    std::vector<Layer> grads;
    grads.reserve(model.layers.size());
    for (const auto& layer : model.layers) grads.push_back(Layer::zeros(layer.out, layer.in));
    return grads;
}

// ---------------------------------------------------------------------------
// Model file: header `magic | version | layer_count | input_dim` (u32 LE),
// then per layer `out | in` (u32 LE), then per layer weights (row-major) and
// bias as little-endian 64-bit floats. Adam moments are not persisted.
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t k_model_magic = 0x314D5443; // "CTM1"
inline constexpr std::uint32_t k_model_version = 1;

inline void save_model(const ModelState& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(errc::io_failure, "cannot open " + path.string() + " for writing");
    auto put_u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    put_u32(k_model_magic);
    put_u32(k_model_version);
    put_u32(static_cast<std::uint32_t>(model.layers.size()));
    put_u32(static_cast<std::uint32_t>(model.input_dim));
    for (const auto& layer : model.layers) {
        put_u32(static_cast<std::uint32_t>(layer.out));
        put_u32(static_cast<std::uint32_t>(layer.in));
    }
    for (const auto& layer : model.layers) {
        out.write(reinterpret_cast<const char*>(layer.w.data()),
                  static_cast<std::streamsize>(layer.w.size() * sizeof(double)));
        out.write(reinterpret_cast<const char*>(layer.b.data()),
                  static_cast<std::streamsize>(layer.b.size() * sizeof(double)));
    }
    if (!out) fail(errc::io_failure, "write error on " + path.string());
}

inline ModelState load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(errc::io_failure, "cannot open " + path.string());
    auto get_u32 = [&]() {
        std::uint32_t v = 0;
        in.read(reinterpret_cast<char*>(&v), 4);
        return v;
    };
    const std::uint32_t magic = get_u32();
    const std::uint32_t version = get_u32();
    const std::uint32_t layer_count = get_u32();
    const std::uint32_t input_dim = get_u32();
    if (!in || magic != k_model_magic) fail(errc::bad_format, "bad magic in " + path.string());
    if (version != k_model_version)
        fail(errc::bad_format, "unsupported model version " + std::to_string(version));
    if (layer_count == 0 || input_dim == 0)
        fail(errc::bad_format, "degenerate model header in " + path.string());

    ModelState model;
    model.input_dim = input_dim;
    std::size_t expect_in = input_dim;
    for (std::uint32_t l = 0; l < layer_count; ++l) {
        const std::uint32_t out_dim = get_u32();
        const std::uint32_t in_dim = get_u32();
        if (!in || out_dim == 0 || in_dim != expect_in)
            fail(errc::bad_format, "inconsistent layer shapes in " + path.string());
        model.layers.push_back(Layer::zeros(out_dim, in_dim));
        expect_in = out_dim;
    }
    for (auto& layer : model.layers) {
        in.read(reinterpret_cast<char*>(layer.w.data()),
                static_cast<std::streamsize>(layer.w.size() * sizeof(double)));
        in.read(reinterpret_cast<char*>(layer.b.data()),
                static_cast<std::streamsize>(layer.b.size() * sizeof(double)));
    }
    if (!in) fail(errc::bad_format, "truncated parameters in " + path.string());
    char extra;
    if (in.read(&extra, 1)) fail(errc::bad_format, "trailing bytes in " + path.string());
    for (const auto& layer : model.layers) {
        model.moment1.push_back(Layer::zeros(layer.out, layer.in));
        model.moment2.push_back(Layer::zeros(layer.out, layer.in));
    }
    return model;
}

} // namespace camtrap
