#pragma once

// Scalar isotropic DDPM written from the textbook closed forms, independent
// of the library's general Gaussian algebra. The reduction tests compare the
// hybrid process at tau == 1 against this implementation.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "epd/rng.hpp"
#include "epd/tensor.hpp"

namespace epd_test {

struct ScalarDdpm {
    int T;
    std::vector<double> beta, alpha, alpha_bar;

    ScalarDdpm(int T_, double beta_min, double beta_max) : T(T_) {
        beta.resize(T);
        alpha.resize(T);
        alpha_bar.resize(T);
        double prod = 1.0;
        for (int t = 0; t < T; ++t) {
            beta[t] = beta_min + (beta_max - beta_min) * static_cast<double>(t) / (T - 1);
            alpha[t] = 1.0 - beta[t];
            prod *= alpha[t];
            alpha_bar[t] = prod;
        }
    }

    // x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) eps
    template <typename S>
    epd::Tensor<S> forward(const epd::Tensor<S>& x0, int t, const epd::Tensor<S>& eps) const {
        epd::Tensor<S> out(x0.n, x0.c, x0.h, x0.w);
        const double a = std::sqrt(alpha_bar[t]);
        const double s = std::sqrt(1.0 - alpha_bar[t]);
        for (size_t i = 0; i < x0.size(); ++i)
            out[i] = static_cast<S>(a * x0[i] + s * eps[i]);
        return out;
    }

    // beta_tilde_t for the s = t-1 posterior.
    double posterior_variance(int t) const {
        const double abar_prev = alpha_bar[t - 1];
        return (1.0 - abar_prev) / (1.0 - alpha_bar[t]) * beta[t];
    }

    // mu = [sqrt(abar_{t-1}) beta_t x0 + sqrt(alpha_t) (1 - abar_{t-1}) x_t] / (1 - abar_t)
    double posterior_mean(double x_t, double x0, int t) const {
        const double abar_prev = alpha_bar[t - 1];
        return (std::sqrt(abar_prev) * beta[t] * x0 +
                std::sqrt(alpha[t]) * (1.0 - abar_prev) * x_t) /
               (1.0 - alpha_bar[t]);
    }

    // Loss against the eps-scaled target: mean((f - sqrt(1-abar_t) eps)^2).
    template <typename S>
    double loss(const epd::Tensor<S>& model_out, const std::vector<int>& t,
                const epd::Tensor<S>& eps) const {
        double acc = 0.0;
        const size_t per = model_out.pixels_per_image();
        for (int in = 0; in < model_out.n; ++in) {
            const double s = std::sqrt(1.0 - alpha_bar[t[in]]);
            for (size_t i = 0; i < per; ++i) {
                const double d = static_cast<double>(model_out.image(in)[i]) -
                                 s * static_cast<double>(eps.image(in)[i]);
                acc += d * d;
            }
        }
        return acc / static_cast<double>(model_out.size());
    }

    // Full ancestral chain consuming rng draws in the same order as the
    // library sampler: one randn batch to start, then one per interior step.
    template <typename S, typename Model>
    epd::Tensor<S> sample_chain(Model&& model, int n, int c, int h, int w, epd::Rng& rng,
                                bool clamp_x0) const {
        epd::Tensor<S> x = epd::Tensor<S>::randn(n, c, h, w, rng);
        std::vector<int> tb(n);
        for (int t = T - 1; t >= 1; --t) {
            std::fill(tb.begin(), tb.end(), t);
            const auto f = model(x, tb);
            epd::Tensor<S> x0(n, c, h, w);
            const double inv = 1.0 / std::sqrt(alpha_bar[t]);
            for (size_t i = 0; i < x.size(); ++i)
                x0[i] = static_cast<S>((static_cast<double>(x[i]) -
                                        static_cast<double>(f[i])) * inv);
            if (clamp_x0) epd::clamp_inplace(x0, S(-1), S(1));
            const double var = posterior_variance(t);
            const double sd = std::sqrt(var);
            epd::Tensor<S> next(n, c, h, w);
            for (size_t i = 0; i < x.size(); ++i) {
                const double mu = posterior_mean(static_cast<double>(x[i]),
                                                 static_cast<double>(x0[i]), t);
                next[i] = static_cast<S>(t - 1 == 0 ? mu : mu + sd * rng.normal());
            }
            x = next;
        }
        epd::clamp_inplace(x, S(-1), S(1));
        return x;
    }
};

}  // namespace epd_test
