#pragma once
// Robust bootstrap confidence intervals for the conditional mean, plus the
// naive and standard bootstrap baselines.
//
// The interval construction runs in six stages on a four-way sample split:
//   1. fit the mean network on I1;
//   2. fit the residual variance network on I2;
//   3. standardize the I2 residuals, resample them to synthesize responses
//      on I3, and refit B + B_tilde replicate means (plus the variance net
//      of replicate B+1, the only one the calibration reads);
//   4. take a high quantile a1 of the replicate losses on the held-out I4;
//   5. assemble the corrected radius a(alpha) from a1, two deviation terms,
//      the I4 variance-fit mean, and the bias correction a0;
//   6. half-width Delta = 2 sqrt(a / (alpha B_tilde)) + b(alpha), centered
//      at the average of the last B_tilde replicate fits.
//
// a0 and b(alpha) each come in a theoretical variant, alpha-scaled inverse
// powers of log n, and an empirical plug-in variant built from the law of
// total variance; a0 additionally has a homoscedastic plug-in.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "varnet/csv.hpp"
#include "varnet/dataset.hpp"
#include "varnet/parallel.hpp"
#include "varnet/relu_net.hpp"
#include "varnet/rng.hpp"
#include "varnet/variance_estimators.hpp"

namespace varnet {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const { return hi - lo; }
    bool contains(double v) const { return lo <= v && v <= hi; }
};

// ---------------------------------------------------------------------
// sample splitting

struct SplitIndices {
    std::vector<std::size_t> i1, i2, i3, i4;
};

// Random partition of {0..n-1} into four blocks of size floor(n/4) or
// ceil(n/4), via a seeded Fisher-Yates shuffle. Blocks are sorted.
inline SplitIndices split_indices(std::size_t n, std::uint64_t seed) {
    if (n < 8) throw std::invalid_argument("split_indices: need n >= 8");
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    Rng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_int(i + 1)]);

    SplitIndices out;
    const std::size_t base = n / 4, rem = n % 4;
    std::vector<std::size_t>* blocks[4] = {&out.i1, &out.i2, &out.i3, &out.i4};
    std::size_t pos = 0;
    for (std::size_t k = 0; k < 4; ++k) {
        const std::size_t len = base + (k < rem ? 1 : 0);
        blocks[k]->assign(perm.begin() + pos, perm.begin() + pos + len);
        std::sort(blocks[k]->begin(), blocks[k]->end());
        pos += len;
    }
    return out;
}

// ---------------------------------------------------------------------
// empirical residual distribution

class DegenerateDistribution : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Finite multiset of residual atoms with uniform resampling and
// order-statistic quantile access.
class EmpiricalDistribution {
public:
    explicit EmpiricalDistribution(std::vector<double> atoms) : atoms_(std::move(atoms)) {
        if (atoms_.empty())
            throw std::invalid_argument("empirical distribution: no atoms");
        for (double a : atoms_)
            if (!std::isfinite(a))
                throw std::invalid_argument("empirical distribution: non-finite atom");
        sorted_ = atoms_;
        std::sort(sorted_.begin(), sorted_.end());
    }

    const std::vector<double>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }

    double sample(Rng& rng) const { return atoms_[rng.uniform_int(atoms_.size())]; }

    // ceil(level * m)-th smallest atom (1-based), clamped to [1, m].
    double quantile(double level) const {
        return sorted_quantile(sorted_, level);
    }

    static double sorted_quantile(const std::vector<double>& sorted_ascending, double level) {
        const std::size_t m = sorted_ascending.size();
        if (m == 0) throw std::invalid_argument("quantile of empty sample");
        double pos = std::ceil(level * static_cast<double>(m));
        pos = std::clamp(pos, 1.0, static_cast<double>(m));
        return sorted_ascending[static_cast<std::size_t>(pos) - 1];
    }

private:
    std::vector<double> atoms_;
    std::vector<double> sorted_;
};

// Order-statistic quantile of an arbitrary sample, same convention.
inline double order_quantile(std::vector<double> values, double level) {
    std::sort(values.begin(), values.end());
    return EmpiricalDistribution::sorted_quantile(values, level);
}

// Residuals scaled by the fitted conditional standard deviation and then
// shifted/scaled to sample mean 0 and variance 1 (divisor m).
inline EmpiricalDistribution standardized_residuals(const FittedMean& mean,
                                                    const FittedVariance& var,
                                                    const Dataset& block) {
    block.validate();
    const std::size_t m = block.size();
    std::vector<double> eps(m);
    for (std::size_t i = 0; i < m; ++i)
        eps[i] = (block.ys[i] - mean.predict(block.x(i))) / var.stddev_floored(block.x(i));

    double mu = 0.0;
    for (double e : eps) mu += e;
    mu /= static_cast<double>(m);
    double var_hat = 0.0;
    for (double e : eps) var_hat += (e - mu) * (e - mu);
    var_hat /= static_cast<double>(m);
    const double sd = std::sqrt(var_hat);
    if (!(sd > 0.0) || !std::isfinite(sd))
        throw DegenerateDistribution("standardized residuals have zero variance");
    for (double& e : eps) e = (e - mu) / sd;
    return EmpiricalDistribution(std::move(eps));
}

// count i.i.d. draws with replacement from the atoms.
inline std::vector<double> sample_noise(const EmpiricalDistribution& dist, std::size_t count,
                                        std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> out(count);
    for (double& v : out) v = dist.sample(rng);
    return out;
}

// y~_i = fhat(x_i) + sqrt(|ghat(x_i)|) * eps~_i on the third block, with the
// noise stream of replicate j derived from (seed, j).
inline std::vector<double> make_bootstrap_responses(const FittedMean& mean,
                                                    const FittedVariance& var,
                                                    const Dataset& block3,
                                                    const EmpiricalDistribution& dist,
                                                    std::size_t replicate_j,
                                                    std::uint64_t seed) {
    const std::vector<double> noise = sample_noise(
        dist, block3.size(), derive_seed(seed, "replicate-noise/" + std::to_string(replicate_j)));
    std::vector<double> out(block3.size());
    for (std::size_t i = 0; i < block3.size(); ++i)
        out[i] = mean.predict(block3.x(i)) + var.stddev(block3.x(i)) * noise[i];
    return out;
}

// ---------------------------------------------------------------------
// configuration and calibration

enum class A0Variant { theoretical, empirical, homoscedastic };
enum class BAlphaVariant { theoretical, empirical };

struct CiConfig {
    double alpha = 0.1;
    std::size_t B = 1500;
    std::size_t B_tilde = 1000;
    double A_n = 0.0;                       // <= 0: use max |y| over the sample
    A0Variant a0_variant = A0Variant::theoretical;
    BAlphaVariant b_variant = BAlphaVariant::theoretical;
    double log_power_s = 2.0;               // exponent s in the log^s n corrections
    NetworkArch mean_arch{2, 2, 64};
    NetworkArch var_arch{2, 2, 64};
    TrainConfig base_train{};
    TrainConfig replicate_train{};
    std::uint64_t rng_seed = 0;

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw std::invalid_argument("ci config: alpha must be in (0,1)");
        if (B < 1 || B_tilde < 1 || B_tilde >= B)
            throw std::invalid_argument("ci config: need 1 <= B_tilde < B");
        mean_arch.validate();
        var_arch.validate();
    }
};

// Scalar context assembled by the pipeline; everything the correction
// formulas can consume. Optional fields are only required by the variant
// that reads them.
struct CiCalibration {
    std::size_t n = 0;                       // full sample size
    std::size_t B_tilde = 1;
    double A_n = 1.0;
    double log_power_s = 2.0;
    double mean_g_b1_i4 = 0.0;               // (1/|I4|) sum ghat^{(B+1)}(x_i)
    std::optional<double> var_y_hat;          // sample variance of y, divisor n-1
    std::optional<double> mean_sq_center_dev; // (1/|I4|) sum (fhat^{(B+1)}(x_i) - ybar)^2
    std::optional<double> loss_b1_i4;         // (1/|I4|) sum (fhat^{(B+1)}(x_i) - y_i)^2
    std::optional<double> sigma2_hom;         // homoscedastic plug-in variance
};

namespace detail {
inline double require(const std::optional<double>& v, const char* what) {
    if (!v) throw std::invalid_argument(std::string("ci calibration: missing ") + what);
    return *v;
}
}  // namespace detail

// (1 - alpha/(4 B_tilde))-quantile of the B held-out replicate losses.
inline double quantile_a1(const std::vector<double>& losses, double alpha,
                          std::size_t B_tilde) {
    if (losses.empty()) throw std::invalid_argument("quantile_a1: empty losses");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("quantile_a1: bad alpha");
    return order_quantile(losses, 1.0 - alpha / (4.0 * static_cast<double>(B_tilde)));
}

inline double compute_a0(A0Variant variant, const CiCalibration& c, double alpha) {
    switch (variant) {
        case A0Variant::theoretical:
            return alpha / (100.0 * std::pow(std::log(static_cast<double>(c.n)), c.log_power_s));
        case A0Variant::empirical:
            return std::abs(detail::require(c.var_y_hat, "var_y_hat") -
                            detail::require(c.mean_sq_center_dev, "mean_sq_center_dev") -
                            c.mean_g_b1_i4);
        case A0Variant::homoscedastic:
            return std::abs(detail::require(c.sigma2_hom, "sigma2_hom") - c.mean_g_b1_i4);
    }
    throw std::logic_error("unreachable");
}

inline double compute_b_alpha(BAlphaVariant variant, const CiCalibration& c, double alpha) {
    switch (variant) {
        case BAlphaVariant::theoretical:
            return 1.0 / (100.0 * std::pow(std::log(static_cast<double>(c.n)), c.log_power_s));
        case BAlphaVariant::empirical: {
            const double inner =
                std::abs(detail::require(c.loss_b1_i4, "loss_b1_i4") - c.mean_g_b1_i4);
            return 32.0 / (5.0 * alpha * (1.0 - 0.58 * alpha)) * std::sqrt(inner);
        }
    }
    throw std::logic_error("unreachable");
}

// The two finite-sample deviation terms entering a(alpha).
inline double deviation_term_a2(double A_n, double alpha, std::size_t B_tilde, std::size_t n) {
    return A_n * A_n *
           std::sqrt(32.0 * (std::log(8.0 / alpha) + std::log(static_cast<double>(B_tilde))) /
                     static_cast<double>(n));
}

inline double deviation_term_a3(double A_n, double alpha, std::size_t B_tilde, std::size_t n) {
    return A_n * std::sqrt(8.0 * (std::log(64.0 / alpha) + std::log(static_cast<double>(B_tilde))) /
                           static_cast<double>(n));
}

// a(alpha) = | a1 + a2-term + a3-term - mean_g + a0 |
inline double compute_a_alpha(double a1, double a0, const CiCalibration& c, double alpha) {
    return std::abs(a1 + deviation_term_a2(c.A_n, alpha, c.B_tilde, c.n) +
                    deviation_term_a3(c.A_n, alpha, c.B_tilde, c.n) - c.mean_g_b1_i4 + a0);
}

// Delta(alpha) = 2 sqrt(a / (alpha B_tilde)) + b
inline double delta_alpha(double a_alpha, double alpha, std::size_t B_tilde, double b_alpha) {
    return 2.0 * std::sqrt(a_alpha / (alpha * static_cast<double>(B_tilde))) + b_alpha;
}

// ---------------------------------------------------------------------
// replicate fitting

struct ReplicateSet {
    std::vector<FittedMean> means;   // B + B_tilde replicate mean fits
    FittedVariance var_b1;           // variance net of replicate B+1
};

// Fits one replicate mean per bootstrap response vector; only replicate
// B+1 additionally gets a variance fit, the single one the calibration in
// stages 4-5 consumes. Replicates run in parallel over disjoint seed
// streams and land in per-index slots.
inline ReplicateSet fit_replicates(const FittedMean& mean, const FittedVariance& var,
                                   const Dataset& block3, const EmpiricalDistribution& dist,
                                   const CiConfig& cfg) {
    cfg.validate();
    const std::size_t total = cfg.B + cfg.B_tilde;
    ReplicateSet out;
    out.means.resize(total);
    std::vector<double> responses_b1;

    parallel_for(total, [&](std::size_t idx) {
        const std::size_t j = idx + 1;  // replicate numbering is 1-based
        std::vector<double> responses =
            make_bootstrap_responses(mean, var, block3, dist, j, cfg.rng_seed);
        TrainConfig tc = cfg.replicate_train;
        tc.rng_seed = derive_seed(cfg.rng_seed, "replicate-fit/" + std::to_string(j));
        Network net = init_network(cfg.mean_arch,
                                   derive_seed(cfg.rng_seed, "replicate-init/" + std::to_string(j)));
        TrainResult res;
        try {
            res = train(std::move(net), block3.xs, responses, tc);
        } catch (const TrainingDiverged& e) {
            throw std::runtime_error("replicate " + std::to_string(j) + ": " + e.what());
        }
        out.means[idx] = FittedMean{std::move(res.net), mean.clip_bound, res.final_loss};
        if (j == cfg.B + 1) responses_b1 = std::move(responses);
    });

    // Variance fit of replicate B+1 on its synthesized responses.
    const std::size_t b1 = cfg.B;  // 0-based index of replicate B+1
    std::vector<double> targets(block3.size());
    for (std::size_t i = 0; i < block3.size(); ++i) {
        const double r = responses_b1[i] - out.means[b1].predict(block3.x(i));
        targets[i] = r * r;
    }
    TrainConfig tc = cfg.replicate_train;
    tc.rng_seed = derive_seed(cfg.rng_seed, "replicate-var-fit");
    Network gnet = init_network(cfg.var_arch, derive_seed(cfg.rng_seed, "replicate-var-init"));
    TrainResult gres = train(std::move(gnet), block3.xs, targets, tc);
    out.var_b1.kind = VarianceKind::residual;
    out.var_b1.clip_bound = mean.clip_bound;
    out.var_b1.net = std::move(gres.net);
    return out;
}

// ---------------------------------------------------------------------
// the interval

struct CiResult {
    double alpha = 0.1;
    std::size_t B = 0;
    std::size_t B_tilde = 0;
    double A_n = 0.0;
    std::size_t n = 0;

    double a1 = 0.0;
    double a2_term = 0.0;
    double a3_term = 0.0;
    double mean_g_b1_i4 = 0.0;
    double a0 = 0.0;
    double b_alpha = 0.0;
    double a_alpha = 0.0;
    double half_width = 0.0;                 // Delta(alpha)

    std::vector<FittedMean> center_ensemble;  // replicates B+1 .. B+B_tilde

    double center(std::span<const double> x) const {
        double acc = 0.0;
        for (const auto& m : center_ensemble) acc += m.predict(x);
        return acc / static_cast<double>(center_ensemble.size());
    }

    Interval interval_at(std::span<const double> x) const {
        const double c = center(x);
        return {c - half_width, c + half_width};
    }
};

namespace detail {
template <typename F>
auto run_stage(const char* label, F&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("build_interval[") + label + "]: " + e.what());
    }
}
}  // namespace detail

inline CiResult build_interval(const CiConfig& cfg, const Dataset& data) {
    cfg.validate();
    data.validate();
    const std::size_t n = data.size();
    const SplitIndices split = detail::run_stage(
        "split", [&] { return split_indices(n, derive_seed(cfg.rng_seed, "split")); });

    const double A_n = cfg.A_n > 0.0 ? cfg.A_n : max_abs_response(data);
    if (!(A_n > 0.0)) throw std::runtime_error("build_interval: A_n must be positive");

    const Dataset block1 = data.subset(split.i1);
    const Dataset block2 = data.subset(split.i2);
    const Dataset block3 = data.subset(split.i3);
    const Dataset block4 = data.subset(split.i4);

    // Stage 1: base mean fit.
    const FittedMean mean = detail::run_stage("mean-fit", [&] {
        TrainConfig tc = cfg.base_train;
        tc.rng_seed = derive_seed(cfg.rng_seed, "base-mean");
        return fit_mean(block1, cfg.mean_arch, tc, A_n);
    });

    // Stage 2: base variance fit on the second block.
    const FittedVariance var = detail::run_stage("variance-fit", [&] {
        TrainConfig tc = cfg.base_train;
        tc.rng_seed = derive_seed(cfg.rng_seed, "base-var");
        return fit_variance_residual(mean, block2, cfg.var_arch, tc, A_n);
    });

    // Stage 3: residual distribution and replicate fits.
    const EmpiricalDistribution dist = detail::run_stage(
        "standardize", [&] { return standardized_residuals(mean, var, block2); });
    const ReplicateSet replicates = detail::run_stage(
        "replicates", [&] { return fit_replicates(mean, var, block3, dist, cfg); });

    // Stage 4: held-out losses of the first B replicates.
    const std::vector<double> losses = detail::run_stage("losses", [&] {
        std::vector<double> out(cfg.B);
        parallel_for(cfg.B, [&](std::size_t j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < block4.size(); ++i) {
                const double r = block4.ys[i] - replicates.means[j].predict(block4.x(i));
                acc += r * r;
            }
            out[j] = acc / static_cast<double>(block4.size());
        });
        return out;
    });

    CiResult res;
    res.alpha = cfg.alpha;
    res.B = cfg.B;
    res.B_tilde = cfg.B_tilde;
    res.A_n = A_n;
    res.n = n;
    res.a1 = quantile_a1(losses, cfg.alpha, cfg.B_tilde);

    // Stage 5: calibration context and corrected radius.
    CiCalibration calib;
    detail::run_stage("calibration", [&] {
        calib.n = n;
        calib.B_tilde = cfg.B_tilde;
        calib.A_n = A_n;
        calib.log_power_s = cfg.log_power_s;

        const FittedMean& f_b1 = replicates.means[cfg.B];
        double mean_g = 0.0, loss_b1 = 0.0;
        for (std::size_t i = 0; i < block4.size(); ++i) {
            const auto x = block4.x(i);
            mean_g += replicates.var_b1.predict(x);
            const double f = f_b1.predict(x);
            loss_b1 += (f - block4.ys[i]) * (f - block4.ys[i]);
        }
        double ybar = 0.0;
        for (double y : data.ys) ybar += y;
        ybar /= static_cast<double>(n);
        double var_y = 0.0;
        for (double y : data.ys) var_y += (y - ybar) * (y - ybar);
        var_y /= static_cast<double>(n - 1);

        double dev = 0.0;
        for (std::size_t i = 0; i < block4.size(); ++i) {
            const double f = f_b1.predict(block4.x(i));
            dev += (f - ybar) * (f - ybar);
        }
        const double m4 = static_cast<double>(block4.size());
        calib.mean_g_b1_i4 = mean_g / m4;
        calib.var_y_hat = var_y;
        calib.mean_sq_center_dev = dev / m4;
        calib.loss_b1_i4 = loss_b1 / m4;
        calib.sigma2_hom = fit_sigma2_homoscedastic(mean, block2, A_n).sigma2;
        return 0;
    });

    res.a2_term = deviation_term_a2(A_n, cfg.alpha, cfg.B_tilde, n);
    res.a3_term = deviation_term_a3(A_n, cfg.alpha, cfg.B_tilde, n);
    res.mean_g_b1_i4 = calib.mean_g_b1_i4;
    res.a0 = compute_a0(cfg.a0_variant, calib, cfg.alpha);
    res.a_alpha = compute_a_alpha(res.a1, res.a0, calib, cfg.alpha);

    // Stage 6: half-width and center ensemble.
    res.b_alpha = compute_b_alpha(cfg.b_variant, calib, cfg.alpha);
    res.half_width = delta_alpha(res.a_alpha, cfg.alpha, cfg.B_tilde, res.b_alpha);
    res.center_ensemble.assign(replicates.means.begin() + static_cast<std::ptrdiff_t>(cfg.B),
                               replicates.means.end());
    return res;
}

// Record layout: alpha,B,B_tilde,A_n,a1,a0,b_alpha,a_alpha,delta followed by
// one center evaluation column per requested covariate.
inline void write_ci_csv(const CiResult& res, const Matrix& eval_points, std::ostream& out) {
    std::vector<std::string> header = {"alpha", "B",       "B_tilde", "A_n",  "a1",
                                       "a0",    "b_alpha", "a_alpha", "delta"};
    for (std::size_t k = 0; k < eval_points.rows(); ++k)
        header.push_back("center_" + std::to_string(k + 1));
    write_csv_row(out, header);
    std::vector<std::string> row = {fmt17(res.alpha),   std::to_string(res.B),
                                    std::to_string(res.B_tilde), fmt17(res.A_n),
                                    fmt17(res.a1),      fmt17(res.a0),
                                    fmt17(res.b_alpha), fmt17(res.a_alpha),
                                    fmt17(res.half_width)};
    for (std::size_t k = 0; k < eval_points.rows(); ++k)
        row.push_back(fmt17(res.center(eval_points.row(k))));
    write_csv_row(out, row);
}

// ---------------------------------------------------------------------
// bootstrap baselines

// Replicate ensemble whose pointwise empirical quantiles form the interval.
struct BootstrapEnsemble {
    std::vector<FittedMean> replicates;
    double alpha = 0.1;

    Interval interval_at(std::span<const double> x) const {
        std::vector<double> preds(replicates.size());
        for (std::size_t j = 0; j < replicates.size(); ++j) preds[j] = replicates[j].predict(x);
        std::sort(preds.begin(), preds.end());
        return {EmpiricalDistribution::sorted_quantile(preds, alpha / 2.0),
                EmpiricalDistribution::sorted_quantile(preds, 1.0 - alpha / 2.0)};
    }
};

// Stages 1-3 only; interval from the empirical quantiles of the replicate
// predictions. Uses all B + B_tilde replicates.
inline BootstrapEnsemble naive_bootstrap(const CiConfig& cfg, const Dataset& data) {
    cfg.validate();
    data.validate();
    const std::size_t n = data.size();
    const SplitIndices split = split_indices(n, derive_seed(cfg.rng_seed, "split"));
    const double A_n = cfg.A_n > 0.0 ? cfg.A_n : max_abs_response(data);

    const Dataset block1 = data.subset(split.i1);
    const Dataset block2 = data.subset(split.i2);
    const Dataset block3 = data.subset(split.i3);

    TrainConfig tc = cfg.base_train;
    tc.rng_seed = derive_seed(cfg.rng_seed, "base-mean");
    const FittedMean mean = fit_mean(block1, cfg.mean_arch, tc, A_n);
    tc.rng_seed = derive_seed(cfg.rng_seed, "base-var");
    const FittedVariance var = fit_variance_residual(mean, block2, cfg.var_arch, tc, A_n);
    const EmpiricalDistribution dist = standardized_residuals(mean, var, block2);
    ReplicateSet replicates = fit_replicates(mean, var, block3, dist, cfg);
    return {std::move(replicates.means), cfg.alpha};
}

inline Interval naive_bootstrap_interval(const CiConfig& cfg, const Dataset& data,
                                         std::span<const double> x_new) {
    return naive_bootstrap(cfg, data).interval_at(x_new);
}

// Classical nonparametric bootstrap: resample (x, y) pairs with replacement
// from the full sample and refit the mean, B + B_tilde times.
inline BootstrapEnsemble standard_bootstrap(const CiConfig& cfg, const Dataset& data) {
    cfg.validate();
    data.validate();
    const std::size_t n = data.size();
    const double A_n = cfg.A_n > 0.0 ? cfg.A_n : max_abs_response(data);
    const std::size_t total = cfg.B + cfg.B_tilde;

    BootstrapEnsemble out;
    out.alpha = cfg.alpha;
    out.replicates.resize(total);
    parallel_for(total, [&](std::size_t idx) {
        const std::size_t j = idx + 1;
        Rng rng(derive_seed(cfg.rng_seed, "standard-resample/" + std::to_string(j)));
        std::vector<std::size_t> pick(n);
        for (auto& v : pick) v = rng.uniform_int(n);
        const Dataset resampled = data.subset(pick);
        TrainConfig tc = cfg.replicate_train;
        tc.rng_seed = derive_seed(cfg.rng_seed, "standard-fit/" + std::to_string(j));
        Network net = init_network(cfg.mean_arch,
                                   derive_seed(cfg.rng_seed, "standard-init/" + std::to_string(j)));
        TrainResult res = train(std::move(net), resampled.xs, resampled.ys, tc);
        out.replicates[idx] = FittedMean{std::move(res.net), A_n, res.final_loss};
    });
    return out;
}

inline Interval standard_bootstrap_interval(const CiConfig& cfg, const Dataset& data,
                                            std::span<const double> x_new) {
    return standard_bootstrap(cfg, data).interval_at(x_new);
}

}  // namespace varnet
