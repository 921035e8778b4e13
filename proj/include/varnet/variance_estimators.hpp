#pragma once
// Conditional variance estimation on top of a fitted mean network.
//
// Three estimator kinds:
//   residual      — regress squared residuals on the covariates
//   direct        — E[Y^2|X] fit minus the squared clipped mean fit
//   homoscedastic — single scalar, the truncated mean of squared residuals
//
// Clipped predictions bound both stages; bounds default to data-driven
// maxima (max |y| for the mean, max squared target for the variance stage).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "varnet/dataset.hpp"
#include "varnet/relu_net.hpp"

namespace varnet {

// Floor applied to |g| before square roots and divisions downstream.
inline constexpr double kVarianceFloor = 1e-8;

struct FittedMean {
    Network net;
    double clip_bound = 1.0;   // A
    double train_loss = 0.0;

    double predict(std::span<const double> x) const {
        return clip(forward(net, x), clip_bound);
    }
};

enum class VarianceKind { residual, direct, homoscedastic };

struct FittedVariance {
    VarianceKind kind = VarianceKind::residual;
    double clip_bound = 1.0;            // B
    Network net;                        // residual: g-net; direct: h-net
    double sigma2 = 0.0;                // homoscedastic value in [0, B]
    std::optional<FittedMean> mean;     // direct kind composes with the mean fit

    // Signed prediction; the direct kind can go negative.
    double predict(std::span<const double> x) const {
        switch (kind) {
            case VarianceKind::residual:
                return clip(forward(net, x), clip_bound);
            case VarianceKind::direct: {
                const double m = mean->predict(x);
                return clip(forward(net, x), clip_bound) - m * m;
            }
            case VarianceKind::homoscedastic:
                return sigma2;
        }
        return 0.0;
    }

    // sqrt(|g(x)|); multiplies noise when synthesizing responses.
    double stddev(std::span<const double> x) const {
        return std::sqrt(std::abs(predict(x)));
    }

    // sqrt(max(|g(x)|, floor)); used wherever the scale ends up in a
    // denominator.
    double stddev_floored(std::span<const double> x) const {
        return std::sqrt(std::max(std::abs(predict(x)), kVarianceFloor));
    }
};

inline double default_mean_clip_bound(const Dataset& data) { return max_abs_response(data); }

inline std::uint64_t mix_seed(const TrainConfig& cfg, std::string_view label) {
    return derive_seed(cfg.rng_seed, label);
}

// Trains a network on (xs, ys) by mini-batch Adam and wraps it with a clip
// bound. Initialization and shuffling streams are derived from cfg.rng_seed.
inline FittedMean fit_mean(const Dataset& train_data, const NetworkArch& arch,
                           const TrainConfig& cfg, double clip_bound) {
    if (clip_bound <= 0.0) throw std::invalid_argument("fit_mean: clip bound must be positive");
    train_data.validate();
    Network net = init_network(arch, mix_seed(cfg, "fit/init"));
    TrainResult result = train(std::move(net), train_data.xs, train_data.ys, cfg);
    return {std::move(result.net), clip_bound, result.final_loss};
}

// eps_i = y_i - clipped mean prediction
inline std::vector<double> residuals(const FittedMean& mean, const Dataset& data) {
    data.validate();
    std::vector<double> out(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        out[i] = data.ys[i] - mean.predict(data.x(i));
    return out;
}

inline double default_variance_clip_bound(const std::vector<double>& squared_targets) {
    double m = 0.0;
    for (double t : squared_targets) m = std::max(m, t);
    return std::max(m, kVarianceFloor);
}

// Second-stage fit: squared residuals regressed on the covariates of
// var_data (the same block as the mean fit under the full-data strategy,
// the held-out half under the split strategy).
inline FittedVariance fit_variance_residual(const FittedMean& mean, const Dataset& var_data,
                                            const NetworkArch& arch, const TrainConfig& cfg,
                                            double clip_bound) {
    if (clip_bound <= 0.0)
        throw std::invalid_argument("fit_variance_residual: clip bound must be positive");
    const std::vector<double> eps = residuals(mean, var_data);
    std::vector<double> targets(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) targets[i] = eps[i] * eps[i];
    Network net = init_network(arch, mix_seed(cfg, "fit/init"));
    TrainResult result = train(std::move(net), var_data.xs, targets, cfg);
    FittedVariance out;
    out.kind = VarianceKind::residual;
    out.clip_bound = clip_bound;
    out.net = std::move(result.net);
    return out;
}

// g_dir(x) = h(x) - (clipped mean(x))^2 with h fit on squared responses.
// Predictions are reported as-is, including negative values.
inline FittedVariance fit_variance_direct(const FittedMean& mean, const Dataset& data,
                                          const NetworkArch& arch, const TrainConfig& cfg,
                                          double clip_bound) {
    if (clip_bound <= 0.0)
        throw std::invalid_argument("fit_variance_direct: clip bound must be positive");
    data.validate();
    std::vector<double> targets(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) targets[i] = data.ys[i] * data.ys[i];
    Network net = init_network(arch, mix_seed(cfg, "fit/init"));
    TrainResult result = train(std::move(net), data.xs, targets, cfg);
    FittedVariance out;
    out.kind = VarianceKind::direct;
    out.clip_bound = clip_bound;
    out.net = std::move(result.net);
    out.mean = mean;
    return out;
}

// argmin over v in [0, B] of sum_i (eps_i^2 - v)^2, which is the mean of the
// squared residuals projected onto [0, B].
inline FittedVariance fit_sigma2_homoscedastic(const FittedMean& mean, const Dataset& data,
                                               double clip_bound) {
    if (clip_bound <= 0.0)
        throw std::invalid_argument("fit_sigma2_homoscedastic: clip bound must be positive");
    const std::vector<double> eps = residuals(mean, data);
    double acc = 0.0;
    for (double e : eps) acc += e * e;
    const double v = acc / static_cast<double>(eps.size());
    FittedVariance out;
    out.kind = VarianceKind::homoscedastic;
    out.clip_bound = clip_bound;
    out.sigma2 = std::clamp(v, 0.0, clip_bound);
    return out;
}

using VarianceFn = std::function<double(std::span<const double>)>;

// (1/n) sum_i (ghat(x_i) - gstar(x_i))^2
inline double variance_mse(const VarianceFn& ghat, const Matrix& xs, const VarianceFn& gstar) {
    if (xs.rows() == 0) throw std::invalid_argument("variance_mse: empty evaluation set");
    double acc = 0.0;
    for (std::size_t i = 0; i < xs.rows(); ++i) {
        const double d = ghat(xs.row(i)) - gstar(xs.row(i));
        acc += d * d;
    }
    return acc / static_cast<double>(xs.rows());
}

inline double variance_mse(const FittedVariance& est, const Matrix& xs, const VarianceFn& gstar) {
    return variance_mse([&est](std::span<const double> x) { return est.predict(x); }, xs, gstar);
}

}  // namespace varnet
