#pragma once

// Forward corruption q(x_t | x0) of the hybrid process and the Markov
// transition coefficients between two interior steps.

#include <cmath>
#include <stdexcept>

#include "epd/edge_field.hpp"
#include "epd/rng.hpp"
#include "epd/schedule.hpp"
#include "epd/tensor.hpp"

namespace epd {

template <typename Scalar>
struct ForwardSample {
    ImageBatch<Scalar> x_t;
    Tensor<Scalar> epsilon;                 // the standard-normal draw
    int t = 0;
    NoiseCoefficientField<Scalar> sigma_t;  // per-pixel noise coefficient
};

// x_t = sqrt(alpha_bar_t) * x0 + sigma_t . epsilon, with epsilon injected.
template <typename Scalar>
ForwardSample<Scalar> sample_forward(const ImageBatch<Scalar>& x0,
                                     const GradientField<Scalar>& grad, int t,
                                     const Tensor<Scalar>& epsilon, const NoiseSchedule& sched,
                                     const HybridNoiseConfig& cfg) {
    if (!x0.same_shape(epsilon))
        throw std::invalid_argument("sample_forward: epsilon shape does not match x0");
    if (!x0.same_shape(grad))
        throw std::invalid_argument("sample_forward: gradient field shape does not match x0");
    sched.check_step(t);

    ForwardSample<Scalar> out;
    out.t = t;
    out.sigma_t = hybrid_noise_coefficient(grad, t, sched, cfg);
    out.epsilon = epsilon;
    out.x_t = Tensor<Scalar>(x0.n, x0.c, x0.h, x0.w);
    const Scalar signal = static_cast<Scalar>(std::sqrt(sched.alpha_bar[t]));
    for (size_t i = 0; i < x0.size(); ++i)
        out.x_t[i] = signal * x0[i] + out.sigma_t[i] * epsilon[i];
    return out;
}

// Same, drawing epsilon from the given source.
template <typename Scalar>
ForwardSample<Scalar> sample_forward(const ImageBatch<Scalar>& x0,
                                     const GradientField<Scalar>& grad, int t, Rng& rng,
                                     const NoiseSchedule& sched, const HybridNoiseConfig& cfg) {
    const auto eps = Tensor<Scalar>::randn(x0.n, x0.c, x0.h, x0.w, rng);
    return sample_forward(x0, grad, t, eps, sched, cfg);
}

// Convenience overload computing the gradient field from x0 on the fly.
template <typename Scalar>
ForwardSample<Scalar> sample_forward(const ImageBatch<Scalar>& x0, int t, Rng& rng,
                                     const NoiseSchedule& sched, const HybridNoiseConfig& cfg) {
    const auto grad = gradient_magnitude(x0);
    return sample_forward(x0, grad, t, rng, sched, cfg);
}

template <typename Scalar>
struct TransitionCoefficients {
    double gamma_ts = 0.0;      // sqrt(alpha_bar_t / alpha_bar_s)
    Tensor<Scalar> var_ts;      // sigma^2(t) - gamma_ts^2 * sigma^2(s), per pixel
};

// Coefficients of q(x_t | x_s) for 0 <= s < t < T. A non-positive transition
// variance anywhere means the schedule/lambda/tau combination is not
// consistent with a Gaussian chain; that is a hard error, never a clamp.
template <typename Scalar>
TransitionCoefficients<Scalar> transition_coefficients(int s, int t,
                                                       const GradientField<Scalar>& grad,
                                                       const NoiseSchedule& sched,
                                                       const HybridNoiseConfig& cfg) {
    if (s >= t) throw std::invalid_argument("transition_coefficients requires s < t");
    sched.check_step(s);
    sched.check_step(t);

    TransitionCoefficients<Scalar> out;
    const double gamma_sq = sched.alpha_bar[t] / sched.alpha_bar[s];
    out.gamma_ts = std::sqrt(gamma_sq);

    const auto var_t = marginal_variance(grad, t, sched, cfg);
    const auto var_s = marginal_variance(grad, s, sched, cfg);
    out.var_ts = Tensor<Scalar>(grad.n, grad.c, grad.h, grad.w);
    for (size_t i = 0; i < grad.size(); ++i) {
        const double v = static_cast<double>(var_t[i]) - gamma_sq * static_cast<double>(var_s[i]);
        if (!(v > 0.0))
            throw std::domain_error(
                "non-positive transition variance: schedule is not Gaussian-consistent at "
                "(s=" + std::to_string(s) + ", t=" + std::to_string(t) + ")");
        out.var_ts[i] = static_cast<Scalar>(v);
    }
    return out;
}

}  // namespace epd
