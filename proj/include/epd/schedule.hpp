#pragma once

// Discrete time grid and the three scalar schedules that drive the hybrid
// process: the beta/alpha/alpha_bar noise schedule, the transition function
// tau(t) blending edge-preserving into isotropic noise, and the time-varying
// edge sensitivity lambda(t).
//
// Time is zero-based: t in {0, ..., T-1}, alpha_bar[t] = prod_{i<=t} alpha[i].

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace epd {

struct NoiseSchedule {
    int T = 0;
    std::vector<double> beta;       // beta[t] in (0,1)
    std::vector<double> alpha;      // 1 - beta[t]
    std::vector<double> alpha_bar;  // running product of alpha, strictly decreasing

    void check_step(int t) const {
        if (t < 0 || t >= T) throw std::out_of_range("timestep out of range: " + std::to_string(t));
    }
};

// Linear beta ramp from beta_min to beta_max over T steps.
inline NoiseSchedule make_beta_schedule(int T, double beta_min, double beta_max) {
    if (T < 2) throw std::invalid_argument("schedule needs T >= 2");
    if (!(beta_min > 0.0 && beta_min < beta_max && beta_max < 1.0))
        throw std::invalid_argument("require 0 < beta_min < beta_max < 1");

    NoiseSchedule s;
    s.T = T;
    s.beta.resize(T);
    s.alpha.resize(T);
    s.alpha_bar.resize(T);
    double prod = 1.0;
    for (int t = 0; t < T; ++t) {
        s.beta[t] = beta_min + (beta_max - beta_min) * static_cast<double>(t) / (T - 1);
        s.alpha[t] = 1.0 - s.beta[t];
        prod *= s.alpha[t];
        s.alpha_bar[t] = prod;
    }
    return s;
}

enum class TransitionKind { linear, cosine, sigmoid, constant_one };
enum class LambdaKind { linear, sigmoid, constant };

inline TransitionKind transition_kind_from_string(const std::string& s) {
    if (s == "linear") return TransitionKind::linear;
    if (s == "cosine") return TransitionKind::cosine;
    if (s == "sigmoid") return TransitionKind::sigmoid;
    if (s == "constant_one" || s == "constant-one") return TransitionKind::constant_one;
    throw std::invalid_argument("unknown transition_kind: " + s);
}

inline std::string to_string(TransitionKind k) {
    switch (k) {
        case TransitionKind::linear: return "linear";
        case TransitionKind::cosine: return "cosine";
        case TransitionKind::sigmoid: return "sigmoid";
        case TransitionKind::constant_one: return "constant_one";
    }
    return "?";
}

inline LambdaKind lambda_kind_from_string(const std::string& s) {
    if (s == "linear") return LambdaKind::linear;
    if (s == "sigmoid") return LambdaKind::sigmoid;
    if (s == "constant") return LambdaKind::constant;
    throw std::invalid_argument("unknown lambda_kind: " + s);
}

inline std::string to_string(LambdaKind k) {
    switch (k) {
        case LambdaKind::linear: return "linear";
        case LambdaKind::sigmoid: return "sigmoid";
        case LambdaKind::constant: return "constant";
    }
    return "?";
}

struct HybridNoiseConfig {
    TransitionKind transition_kind = TransitionKind::linear;
    double t_phi = 0.5;  // transition point as a fraction of T, in (0, 1]
    LambdaKind lambda_kind = LambdaKind::linear;
    double lambda_min = 1e-4;
    double lambda_max = 1e-1;
    // lambda(t) ramps from lambda_min up to lambda_max by default: fine detail
    // is preserved early in the chain, behaviour turns near-isotropic towards
    // the transition point. Set false to ramp downwards instead.
    bool lambda_increasing = true;

    void validate(int T) const {
        if (!(lambda_min > 0.0)) throw std::invalid_argument("lambda_min must be positive");
        if (lambda_min > lambda_max)
            throw std::invalid_argument("require lambda_min <= lambda_max");
        if (transition_kind != TransitionKind::constant_one) {
            if (!(t_phi > 0.0 && t_phi <= 1.0))
                throw std::invalid_argument("t_phi must lie in (0, 1]");
            if (t_phi * T <= 0.0)
                throw std::invalid_argument("transition point t_phi*T must be positive");
        }
    }

    static HybridNoiseConfig ddpm_baseline() {
        HybridNoiseConfig c;
        c.transition_kind = TransitionKind::constant_one;
        return c;
    }
};

namespace detail {

// Logistic ramp on [0,1] rescaled to hit exactly 0 and 1 at the endpoints.
inline double rescaled_logistic(double u) {
    constexpr double k = 10.0;
    const double lo = 1.0 / (1.0 + std::exp(k / 2.0));
    const double hi = 1.0 / (1.0 + std::exp(-k / 2.0));
    const double raw = 1.0 / (1.0 + std::exp(-k * (u - 0.5)));
    return (raw - lo) / (hi - lo);
}

}  // namespace detail

// tau(t): 0 at t=0, monotone ramp, exactly 1 for all t >= t_phi*T.
inline double transition_value(int t, const HybridNoiseConfig& cfg, int T) {
    if (t < 0 || t >= T) throw std::out_of_range("timestep out of range");
    if (cfg.transition_kind == TransitionKind::constant_one) return 1.0;
    cfg.validate(T);
    const double u = std::min(static_cast<double>(t) / (cfg.t_phi * T), 1.0);
    switch (cfg.transition_kind) {
        case TransitionKind::linear: return u;
        case TransitionKind::cosine: return 0.5 * (1.0 - std::cos(3.141592653589793 * u));
        case TransitionKind::sigmoid: return detail::rescaled_logistic(u);
        default: return 1.0;
    }
}

// lambda(t): bounded ramp inside [lambda_min, lambda_max].
inline double edge_sensitivity(int t, const HybridNoiseConfig& cfg, int T) {
    if (t < 0 || t >= T) throw std::out_of_range("timestep out of range");
    cfg.validate(T);
    if (cfg.lambda_kind == LambdaKind::constant) return cfg.lambda_min;
    const double u = (T > 1) ? static_cast<double>(t) / (T - 1) : 0.0;
    const double ramp =
        (cfg.lambda_kind == LambdaKind::linear) ? u : detail::rescaled_logistic(u);
    const double v = cfg.lambda_increasing ? ramp : 1.0 - ramp;
    return cfg.lambda_min + v * (cfg.lambda_max - cfg.lambda_min);
}

}  // namespace epd
