#pragma once

// Backward-process machinery: x0 reconstruction from the predicted combined
// noise, the non-isotropic Gaussian posterior q(x_s | x_t, x0), and ancestral
// sampling down the chain.
//
// The model predicts the combined noise sigma_t . epsilon_t, so reconstruction
// divides by the signal coefficient only. At inference the clean-image
// gradient is unknown; by default the posterior fields are evaluated on
// ||grad(x0_hat)|| recomputed from the current reconstruction, with an
// optional pinned external field for guided generation.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "epd/forward_process.hpp"

namespace epd {

template <typename Scalar>
struct PosteriorParams {
    Tensor<Scalar> mean;      // mu_{t -> s}
    Tensor<Scalar> variance;  // sigma^2_{t -> s}, strictly positive
    int s = 0;
    int t = 0;
};

// x0_hat = (x_t - predicted_noise) / sqrt(alpha_bar_t).
template <typename Scalar>
ImageBatch<Scalar> reconstruct_x0(const ImageBatch<Scalar>& x_t,
                                  const Tensor<Scalar>& predicted_noise, int t,
                                  const NoiseSchedule& sched, bool clamp_output = false) {
    if (!x_t.same_shape(predicted_noise))
        throw std::invalid_argument("reconstruct_x0: noise shape does not match x_t");
    sched.check_step(t);
    const Scalar inv_signal = static_cast<Scalar>(1.0 / std::sqrt(sched.alpha_bar[t]));
    ImageBatch<Scalar> x0(x_t.n, x_t.c, x_t.h, x_t.w);
    for (size_t i = 0; i < x_t.size(); ++i) x0[i] = (x_t[i] - predicted_noise[i]) * inv_signal;
    if (clamp_output) clamp_inplace(x0, Scalar(-1), Scalar(1));
    return x0;
}

// Gaussian posterior of the hybrid chain:
//   variance = (1/sigma^2(s) + gamma_ts^2 / var_ts)^-1
//   mean     = variance * (gamma_ts / var_ts * x_t + gamma_s / sigma^2(s) * x0_hat)
// evaluated elementwise with the per-pixel variance fields.
template <typename Scalar>
PosteriorParams<Scalar> posterior_params(const ImageBatch<Scalar>& x_t,
                                         const ImageBatch<Scalar>& x0_hat, int s, int t,
                                         const GradientField<Scalar>& grad,
                                         const NoiseSchedule& sched,
                                         const HybridNoiseConfig& cfg) {
    if (!x_t.same_shape(x0_hat))
        throw std::invalid_argument("posterior_params: x0_hat shape does not match x_t");
    const auto trans = transition_coefficients(s, t, grad, sched, cfg);
    const auto var_s = marginal_variance(grad, s, sched, cfg);
    const double gamma_s = std::sqrt(sched.alpha_bar[s]);

    PosteriorParams<Scalar> post;
    post.s = s;
    post.t = t;
    post.mean = Tensor<Scalar>(x_t.n, x_t.c, x_t.h, x_t.w);
    post.variance = Tensor<Scalar>(x_t.n, x_t.c, x_t.h, x_t.w);
    for (size_t i = 0; i < x_t.size(); ++i) {
        const double vts = static_cast<double>(trans.var_ts[i]);
        const double vs = static_cast<double>(var_s[i]);
        const double prec = 1.0 / vs + trans.gamma_ts * trans.gamma_ts / vts;
        const double variance = 1.0 / prec;
        const double mean = variance * (trans.gamma_ts / vts * static_cast<double>(x_t[i]) +
                                        gamma_s / vs * static_cast<double>(x0_hat[i]));
        post.variance[i] = static_cast<Scalar>(variance);
        post.mean[i] = static_cast<Scalar>(mean);
    }
    return post;
}

// Where the sampler gets the gradient field for the posterior: recomputed
// from the running x0_hat (default), or pinned to an external guide image.
template <typename Scalar>
struct GradSource {
    enum class Kind { predicted, fixed };
    Kind kind = Kind::predicted;
    const GradientField<Scalar>* fixed_field = nullptr;
    GradientMode mode = GradientMode::per_channel;

    static GradSource predicted(GradientMode m = GradientMode::per_channel) {
        return GradSource{Kind::predicted, nullptr, m};
    }
    static GradSource fixed(const GradientField<Scalar>& field) {
        return GradSource{Kind::fixed, &field, GradientMode::per_channel};
    }
};

struct SamplerOptions {
    bool clamp_x0_hat = true;  // stabilizes sampling; off in algebraic tests
};

// One ancestral step x_t -> x_s with an injected standard-normal innovation.
// The final step (s = 0) returns the posterior mean without added noise.
template <typename Scalar>
ImageBatch<Scalar> ancestral_step(const ImageBatch<Scalar>& x_t,
                                  const Tensor<Scalar>& model_output, int s, int t,
                                  const GradSource<Scalar>& grad_source,
                                  const Tensor<Scalar>& innovation, const NoiseSchedule& sched,
                                  const HybridNoiseConfig& cfg, const SamplerOptions& opts = {}) {
    const auto x0_hat = reconstruct_x0(x_t, model_output, t, sched, opts.clamp_x0_hat);
    GradientField<Scalar> grad_local;
    const GradientField<Scalar>* grad = nullptr;
    if (grad_source.kind == GradSource<Scalar>::Kind::fixed) {
        if (!grad_source.fixed_field)
            throw std::invalid_argument("ancestral_step: fixed gradient source without field");
        grad = grad_source.fixed_field;
    } else {
        grad_local = gradient_magnitude(x0_hat, grad_source.mode);
        grad = &grad_local;
    }
    const auto post = posterior_params(x_t, x0_hat, s, t, *grad, sched, cfg);
    if (s == 0) return post.mean;

    if (!innovation.same_shape(x_t))
        throw std::invalid_argument("ancestral_step: innovation shape does not match x_t");
    ImageBatch<Scalar> x_s(x_t.n, x_t.c, x_t.h, x_t.w);
    for (size_t i = 0; i < x_s.size(); ++i) {
        x_s[i] = static_cast<Scalar>(static_cast<double>(post.mean[i]) +
                                     std::sqrt(static_cast<double>(post.variance[i])) *
                                         static_cast<double>(innovation[i]));
    }
    return x_s;
}

// Same, drawing the innovation from the given source (no draw when s = 0).
template <typename Scalar>
ImageBatch<Scalar> ancestral_step(const ImageBatch<Scalar>& x_t,
                                  const Tensor<Scalar>& model_output, int s, int t,
                                  const GradSource<Scalar>& grad_source, Rng& rng,
                                  const NoiseSchedule& sched, const HybridNoiseConfig& cfg,
                                  const SamplerOptions& opts = {}) {
    Tensor<Scalar> innovation;
    if (s != 0) innovation = Tensor<Scalar>::randn(x_t.n, x_t.c, x_t.h, x_t.w, rng);
    return ancestral_step(x_t, model_output, s, t, grad_source, innovation, sched, cfg, opts);
}

// Full ancestral sampling loop. Model is any callable
//   Tensor<Scalar> model(const ImageBatch<Scalar>& x_t, const std::vector<int>& t)
// returning the predicted combined noise for a batch.
template <typename Scalar, typename Model>
ImageBatch<Scalar> generate(Model&& model, int n, int channels, int height, int width, Rng& rng,
                            const NoiseSchedule& sched, const HybridNoiseConfig& cfg,
                            const SamplerOptions& opts = {},
                            GradientMode grad_mode = GradientMode::per_channel) {
    if (n < 0) throw std::invalid_argument("generate: negative sample count");
    if (n == 0) return ImageBatch<Scalar>(0, channels, height, width);

    ImageBatch<Scalar> x = Tensor<Scalar>::randn(n, channels, height, width, rng);
    const auto grad_source = GradSource<Scalar>::predicted(grad_mode);
    std::vector<int> t_batch(n);
    for (int t = sched.T - 1; t >= 1; --t) {
        std::fill(t_batch.begin(), t_batch.end(), t);
        const auto out = model(x, t_batch);
        x = ancestral_step(x, out, t - 1, t, grad_source, rng, sched, cfg, opts);
    }
    clamp_inplace(x, Scalar(-1), Scalar(1));
    return x;
}

}  // namespace epd
