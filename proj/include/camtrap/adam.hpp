#pragma once

// Adam with bias correction:
//   m <- b1 m + (1-b1) g        mhat = m / (1 - b1^t)
//   v <- b2 v + (1-b2) g^2      vhat = v / (1 - b2^t)
//   theta <- theta - lr * mhat / (sqrt(vhat) + eps)

#include <cmath>
#include <cstdint>
#include <span>

#include "camtrap/errors.hpp"

namespace camtrap {

struct AdamParams {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// One update over a flat parameter array; t is the 1-based step count.
inline void adam_update(std::span<double> theta, std::span<double> m, std::span<double> v,
                        std::span<const double> grad, double lr, std::uint64_t t,
                        const AdamParams& params = {}) {
    if (theta.size() != m.size() || theta.size() != v.size() || theta.size() != grad.size())
        fail(errc::dimension_mismatch, "adam buffers must share one shape");
    if (t == 0) fail(errc::invalid_argument, "adam step count is 1-based");

    const double bc1 = 1.0 - std::pow(params.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(params.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double g = grad[i];
        m[i] = params.beta1 * m[i] + (1.0 - params.beta1) * g;
        v[i] = params.beta2 * v[i] + (1.0 - params.beta2) * g * g;
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        theta[i] -= lr * mhat / (std::sqrt(vhat) + params.eps);
    }
}

} // namespace camtrap
