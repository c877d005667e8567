#pragma once

// Per-pixel fields of the hybrid process: gradient magnitude of the clean
// image, the Perona-Malik diffusion coefficient, and the resulting
// non-isotropic noise coefficient / marginal variance.
//
// The gradient is a function of x0 only, so it is time-invariant and can be
// computed once per sample and cached (see data.hpp).

#include <cmath>
#include <stdexcept>

#include "epd/schedule.hpp"
#include "epd/tensor.hpp"

namespace epd {

template <typename Scalar>
using GradientField = Tensor<Scalar>;

template <typename Scalar>
using NoiseCoefficientField = Tensor<Scalar>;

enum class GradientMode { per_channel, luminance };

// Central-difference gradient magnitude with replicate boundary handling.
// per_channel keeps one field per channel; luminance pools channels first
// (Rec.601 weights for 3-channel data, plain mean otherwise) and broadcasts
// the pooled magnitude back to every channel.
template <typename Scalar>
GradientField<Scalar> gradient_magnitude(const ImageBatch<Scalar>& x0,
                                         GradientMode mode = GradientMode::per_channel) {
    if (x0.h < 3 || x0.w < 3)
        throw std::invalid_argument("gradient_magnitude requires spatial dims >= 3");

    const int H = x0.h, W = x0.w;
    GradientField<Scalar> out(x0.n, x0.c, H, W);

    auto magnitude_plane = [H, W](const Scalar* p, Scalar* g) {
        auto pix = [&](int y, int x) -> double {
            y = std::clamp(y, 0, H - 1);
            x = std::clamp(x, 0, W - 1);
            return static_cast<double>(p[y * W + x]);
        };
        for (int y = 0; y < H; ++y) {
            for (int x = 0; x < W; ++x) {
                const double gx = 0.5 * (pix(y, x + 1) - pix(y, x - 1));
                const double gy = 0.5 * (pix(y + 1, x) - pix(y - 1, x));
                g[y * W + x] = static_cast<Scalar>(std::sqrt(gx * gx + gy * gy));
            }
        }
    };

    if (mode == GradientMode::per_channel) {
        for (int in = 0; in < x0.n; ++in)
            for (int ic = 0; ic < x0.c; ++ic)
                magnitude_plane(&x0.at(in, ic, 0, 0), &out.at(in, ic, 0, 0));
        return out;
    }

    std::vector<Scalar> luma(static_cast<size_t>(H) * W);
    std::vector<Scalar> g(luma.size());
    for (int in = 0; in < x0.n; ++in) {
        for (int y = 0; y < H; ++y) {
            for (int x = 0; x < W; ++x) {
                double v = 0.0;
                if (x0.c == 3) {
                    v = 0.299 * x0.at(in, 0, y, x) + 0.587 * x0.at(in, 1, y, x) +
                        0.114 * x0.at(in, 2, y, x);
                } else {
                    for (int ic = 0; ic < x0.c; ++ic) v += x0.at(in, ic, y, x);
                    v /= x0.c;
                }
                luma[y * W + x] = static_cast<Scalar>(v);
            }
        }
        magnitude_plane(luma.data(), g.data());
        for (int ic = 0; ic < x0.c; ++ic)
            std::copy(g.begin(), g.end(), &out.at(in, ic, 0, 0));
    }
    return out;
}

// c = 1 / sqrt(1 + g / lambda), in (0, 1]; equals 1 on flat regions and
// decreases monotonically with the gradient response.
template <typename Scalar>
Tensor<Scalar> perona_malik_coefficient(const GradientField<Scalar>& grad, double lambda_t) {
    if (!(lambda_t > 0.0)) throw std::invalid_argument("edge sensitivity must be positive");
    Tensor<Scalar> out(grad.n, grad.c, grad.h, grad.w);
    for (size_t i = 0; i < grad.size(); ++i)
        out[i] = static_cast<Scalar>(
            1.0 / std::sqrt(1.0 + static_cast<double>(grad[i]) / lambda_t));
    return out;
}

// Per-pixel noise coefficient of the hybrid forward process:
//   sigma_t = sqrt(1 - alpha_bar_t) / ((1 - tau) * sqrt(1 + g/lambda) + tau).
// At tau = 1 this collapses to the isotropic sqrt(1 - alpha_bar_t).
template <typename Scalar>
NoiseCoefficientField<Scalar> hybrid_noise_coefficient(const GradientField<Scalar>& grad, int t,
                                                       const NoiseSchedule& sched,
                                                       const HybridNoiseConfig& cfg) {
    sched.check_step(t);
    const double tau = transition_value(t, cfg, sched.T);
    const double lambda = edge_sensitivity(t, cfg, sched.T);
    const double iso = std::sqrt(1.0 - sched.alpha_bar[t]);

    NoiseCoefficientField<Scalar> out(grad.n, grad.c, grad.h, grad.w);
    for (size_t i = 0; i < grad.size(); ++i) {
        const double pm = std::sqrt(1.0 + static_cast<double>(grad[i]) / lambda);
        out[i] = static_cast<Scalar>(iso / ((1.0 - tau) * pm + tau));
    }
    return out;
}

// Forward-process variance sigma^2(t), evaluated in its expanded form:
//   (1 - alpha_bar_t) / [ (1-tau)^2 (1 + g/lambda)
//                         + 2 (1-tau) sqrt(1 + g/lambda) tau + tau^2 ].
template <typename Scalar>
Tensor<Scalar> marginal_variance(const GradientField<Scalar>& grad, int t,
                                 const NoiseSchedule& sched, const HybridNoiseConfig& cfg) {
    sched.check_step(t);
    const double tau = transition_value(t, cfg, sched.T);
    const double lambda = edge_sensitivity(t, cfg, sched.T);
    const double one_minus_abar = 1.0 - sched.alpha_bar[t];

    Tensor<Scalar> out(grad.n, grad.c, grad.h, grad.w);
    for (size_t i = 0; i < grad.size(); ++i) {
        const double pm2 = 1.0 + static_cast<double>(grad[i]) / lambda;
        const double pm = std::sqrt(pm2);
        const double denom =
            (1.0 - tau) * (1.0 - tau) * pm2 + 2.0 * (1.0 - tau) * pm * tau + tau * tau;
        out[i] = static_cast<Scalar>(one_minus_abar / denom);
    }
    return out;
}

}  // namespace epd
