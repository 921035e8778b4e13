#pragma once
// Experiment protocols: variance-estimation benchmarks over the synthetic
// scenarios, confidence-interval coverage studies, and the real-data
// prediction-interval protocol. Each run is reproducible from its seed and
// serializes to a fixed CSV schema with per-trial rows plus aggregates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "varnet/bootstrap_ci.hpp"
#include "varnet/csv.hpp"
#include "varnet/parallel.hpp"
#include "varnet/scenarios.hpp"
#include "varnet/variance_estimators.hpp"

namespace varnet {

enum class Strategy { full_data, split_half };
enum class EstimatorKind { nn_residual, nn_direct, sigma2_hom, oracle };
enum class CiMethod { nn, nn_emp, nn_hom, naive, standard };

inline const char* to_string(Strategy s) {
    return s == Strategy::full_data ? "full" : "split";
}
inline const char* to_string(EstimatorKind k) {
    switch (k) {
        case EstimatorKind::nn_residual: return "nn_res";
        case EstimatorKind::nn_direct: return "nn_dir";
        case EstimatorKind::sigma2_hom: return "sigma2_hom";
        case EstimatorKind::oracle: return "oracle";
    }
    return "?";
}
inline const char* to_string(CiMethod m) {
    switch (m) {
        case CiMethod::nn: return "nn";
        case CiMethod::nn_emp: return "nn_emp";
        case CiMethod::nn_hom: return "nn_hom";
        case CiMethod::naive: return "naive";
        case CiMethod::standard: return "standard";
    }
    return "?";
}

// Mean and sample standard deviation (divisor n-1; zero below two values).
inline std::pair<double, double> mean_and_std(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("mean_and_std: empty");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    if (values.size() < 2) return {mean, 0.0};
    double acc = 0.0;
    for (double v : values) acc += (v - mean) * (v - mean);
    return {mean, std::sqrt(acc / static_cast<double>(values.size() - 1))};
}

// Network shapes and training settings shared by the two fit stages.
struct FitConfig {
    NetworkArch mean_arch{2, 2, 64};   // input_dim is overwritten per dataset
    NetworkArch var_arch{2, 2, 64};
    TrainConfig train{};
};

// ---------------------------------------------------------------------
// variance benchmark

struct EstimatorTrials {
    EstimatorKind kind = EstimatorKind::nn_residual;
    std::vector<double> mses;   // one entry per trial
    double mean = 0.0;
    double std_dev = 0.0;
};

struct TrialReport {
    int scenario_id = 1;
    std::size_t n = 0;
    Strategy strategy = Strategy::full_data;
    std::vector<EstimatorTrials> series;
};

namespace detail {

struct StageBlocks {
    Dataset mean_block;
    Dataset var_block;
};

inline StageBlocks stage_blocks(const Dataset& data, Strategy strategy) {
    if (strategy == Strategy::full_data) return {data, data};
    const std::size_t half = data.size() / 2;
    std::vector<std::size_t> first(half), second(data.size() - half);
    for (std::size_t i = 0; i < half; ++i) first[i] = i;
    for (std::size_t i = half; i < data.size(); ++i) second[i - half] = i;
    return {data.subset(first), data.subset(second)};
}

}  // namespace detail

// One synthetic dataset, all requested estimators, MSE against g* over the
// full sample's covariates.
inline std::vector<double> run_variance_trial(const ScenarioSpec& spec, const Dataset& data,
                                              Strategy strategy,
                                              const std::vector<EstimatorKind>& estimators,
                                              const FitConfig& fit, std::uint64_t seed) {
    const auto blocks = detail::stage_blocks(data, strategy);
    NetworkArch mean_arch = fit.mean_arch;
    NetworkArch var_arch = fit.var_arch;
    mean_arch.input_dim = data.dim();
    var_arch.input_dim = data.dim();

    TrainConfig tc = fit.train;
    tc.rng_seed = derive_seed(seed, "mean");
    const double bound_a = std::max(default_mean_clip_bound(blocks.mean_block), kVarianceFloor);
    const FittedMean mean = fit_mean(blocks.mean_block, mean_arch, tc, bound_a);

    const VarianceFn gstar = [&spec](std::span<const double> x) { return eval_g_star(spec, x); };
    std::vector<double> out;
    out.reserve(estimators.size());
    for (EstimatorKind kind : estimators) {
        switch (kind) {
            case EstimatorKind::nn_residual: {
                const std::vector<double> eps = residuals(mean, blocks.var_block);
                std::vector<double> sq(eps.size());
                for (std::size_t i = 0; i < eps.size(); ++i) sq[i] = eps[i] * eps[i];
                TrainConfig vc = fit.train;
                vc.rng_seed = derive_seed(seed, "var-res");
                const FittedVariance est = fit_variance_residual(
                    mean, blocks.var_block, var_arch, vc, default_variance_clip_bound(sq));
                out.push_back(variance_mse(est, data.xs, gstar));
                break;
            }
            case EstimatorKind::nn_direct: {
                std::vector<double> sq(blocks.var_block.size());
                for (std::size_t i = 0; i < sq.size(); ++i)
                    sq[i] = blocks.var_block.ys[i] * blocks.var_block.ys[i];
                TrainConfig vc = fit.train;
                vc.rng_seed = derive_seed(seed, "var-dir");
                const FittedVariance est = fit_variance_direct(
                    mean, blocks.var_block, var_arch, vc, default_variance_clip_bound(sq));
                out.push_back(variance_mse(est, data.xs, gstar));
                break;
            }
            case EstimatorKind::sigma2_hom: {
                const std::vector<double> eps = residuals(mean, blocks.var_block);
                std::vector<double> sq(eps.size());
                for (std::size_t i = 0; i < eps.size(); ++i) sq[i] = eps[i] * eps[i];
                const FittedVariance est = fit_sigma2_homoscedastic(
                    mean, blocks.var_block, default_variance_clip_bound(sq));
                out.push_back(variance_mse(est, data.xs, gstar));
                break;
            }
            case EstimatorKind::oracle:
                out.push_back(variance_mse(gstar, data.xs, gstar));
                break;
        }
    }
    return out;
}

inline TrialReport run_variance_benchmark(const ScenarioSpec& spec, std::size_t n,
                                          std::size_t trials, Strategy strategy,
                                          const std::vector<EstimatorKind>& estimators,
                                          const FitConfig& fit, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("run_variance_benchmark: trials must be >= 1");
    TrialReport report;
    report.scenario_id = spec.id;
    report.n = n;
    report.strategy = strategy;
    report.series.resize(estimators.size());
    for (std::size_t e = 0; e < estimators.size(); ++e) {
        report.series[e].kind = estimators[e];
        report.series[e].mses.resize(trials);
    }

    parallel_for(trials, [&](std::size_t t) {
        const std::uint64_t trial_seed = derive_seed(seed, "trial/" + std::to_string(t + 1));
        const SyntheticSample sample =
            sample_dataset(spec, n, derive_seed(trial_seed, "data"));
        std::vector<double> mses;
        try {
            mses = run_variance_trial(spec, sample.dataset, strategy, estimators, fit,
                                      trial_seed);
        } catch (const std::exception& e) {
            throw std::runtime_error("trial " + std::to_string(t + 1) + ": " + e.what());
        }
        for (std::size_t e = 0; e < estimators.size(); ++e)
            report.series[e].mses[t] = mses[e];
    });

    for (auto& series : report.series) {
        const auto [m, s] = mean_and_std(series.mses);
        series.mean = m;
        series.std_dev = s;
    }
    return report;
}

// Schema: scenario,n,method,strategy,trial,mse — per-trial rows, then one
// "mean" and one "std" row per method.
inline void write_benchmark_csv(const TrialReport& report, std::ostream& out) {
    write_csv_row(out, {"scenario", "n", "method", "strategy", "trial", "mse"});
    const std::string scen = std::to_string(report.scenario_id);
    const std::string nstr = std::to_string(report.n);
    const std::string strat = to_string(report.strategy);
    for (const auto& series : report.series) {
        const std::string method = to_string(series.kind);
        for (std::size_t t = 0; t < series.mses.size(); ++t)
            write_csv_row(out, {scen, nstr, method, strat, std::to_string(t + 1),
                                fmt17(series.mses[t])});
        write_csv_row(out, {scen, nstr, method, strat, "mean", fmt17(series.mean)});
        write_csv_row(out, {scen, nstr, method, strat, "std", fmt17(series.std_dev)});
    }
}

// ---------------------------------------------------------------------
// coverage study

struct CoverageReport {
    int scenario_id = 1;
    std::size_t n = 0;
    double alpha = 0.1;
    CiMethod method = CiMethod::nn;
    std::vector<double> per_dataset_coverage;
    std::vector<double> per_dataset_prange;
    std::vector<double> per_dataset_half_width;   // robust method only, else mean length/2
    double coverage = 0.0;
    double prange = 0.0;
    bool prange_degenerate = false;
};

inline void apply_method(CiConfig& cfg, CiMethod method) {
    switch (method) {
        case CiMethod::nn:
            cfg.a0_variant = A0Variant::theoretical;
            cfg.b_variant = BAlphaVariant::theoretical;
            break;
        case CiMethod::nn_emp:
            cfg.a0_variant = A0Variant::empirical;
            cfg.b_variant = BAlphaVariant::empirical;
            break;
        case CiMethod::nn_hom:
            cfg.a0_variant = A0Variant::homoscedastic;
            cfg.b_variant = BAlphaVariant::theoretical;
            break;
        default:
            break;
    }
}

// For each synthetic dataset: build the interval, sample fresh covariates,
// record the containment proportion of f* and the mean interval length
// relative to the f* range over those covariates.
inline CoverageReport run_coverage_experiment(const ScenarioSpec& spec, std::size_t n,
                                              double alpha, CiMethod method,
                                              std::size_t datasets, std::size_t new_points,
                                              const CiConfig& base_cfg, std::uint64_t seed) {
    if (datasets < 1 || new_points < 1)
        throw std::invalid_argument("run_coverage_experiment: datasets and new_points >= 1");
    CoverageReport report;
    report.scenario_id = spec.id;
    report.n = n;
    report.alpha = alpha;
    report.method = method;
    report.per_dataset_coverage.resize(datasets);
    report.per_dataset_prange.resize(datasets);
    report.per_dataset_half_width.resize(datasets);

    for (std::size_t k = 0; k < datasets; ++k) {
        const std::uint64_t ds_seed = derive_seed(seed, "dataset/" + std::to_string(k + 1));
        const SyntheticSample sample = sample_dataset(spec, n, derive_seed(ds_seed, "data"));

        CiConfig cfg = base_cfg;
        cfg.alpha = alpha;
        cfg.mean_arch.input_dim = spec.dim;
        cfg.var_arch.input_dim = spec.dim;
        cfg.rng_seed = derive_seed(ds_seed, "ci");
        apply_method(cfg, method);

        // Fresh evaluation covariates.
        Rng rng(derive_seed(ds_seed, "new-points"));
        Matrix fresh(new_points, spec.dim);
        for (std::size_t i = 0; i < new_points; ++i)
            for (std::size_t j = 0; j < spec.dim; ++j) fresh(i, j) = rng.uniform01();

        std::vector<Interval> intervals(new_points);
        double half_width = 0.0;
        if (method == CiMethod::naive) {
            const BootstrapEnsemble ens = naive_bootstrap(cfg, sample.dataset);
            for (std::size_t i = 0; i < new_points; ++i)
                intervals[i] = ens.interval_at(fresh.row(i));
        } else if (method == CiMethod::standard) {
            const BootstrapEnsemble ens = standard_bootstrap(cfg, sample.dataset);
            for (std::size_t i = 0; i < new_points; ++i)
                intervals[i] = ens.interval_at(fresh.row(i));
        } else {
            const CiResult res = build_interval(cfg, sample.dataset);
            half_width = res.half_width;
            for (std::size_t i = 0; i < new_points; ++i)
                intervals[i] = res.interval_at(fresh.row(i));
        }

        double covered = 0.0, length = 0.0;
        double f_lo = std::numeric_limits<double>::infinity();
        double f_hi = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < new_points; ++i) {
            const double truth = eval_f_star(spec, fresh.row(i));
            if (intervals[i].contains(truth)) covered += 1.0;
            length += intervals[i].length();
            f_lo = std::min(f_lo, truth);
            f_hi = std::max(f_hi, truth);
        }
        report.per_dataset_coverage[k] = covered / static_cast<double>(new_points);
        const double range = f_hi - f_lo;
        if (range <= 0.0) {
            report.prange_degenerate = true;
            report.per_dataset_prange[k] = std::numeric_limits<double>::quiet_NaN();
        } else {
            report.per_dataset_prange[k] =
                (length / static_cast<double>(new_points)) / range;
        }
        report.per_dataset_half_width[k] =
            (method == CiMethod::naive || method == CiMethod::standard)
                ? length / (2.0 * static_cast<double>(new_points))
                : half_width;
    }

    report.coverage = mean_and_std(report.per_dataset_coverage).first;
    if (!report.prange_degenerate)
        report.prange = mean_and_std(report.per_dataset_prange).first;
    else
        report.prange = std::numeric_limits<double>::quiet_NaN();
    return report;
}

// Schema: scenario,n,alpha,method,dataset,coverage,prange — per-dataset
// rows then a "mean" row.
inline void write_coverage_csv(const CoverageReport& report, std::ostream& out) {
    write_csv_row(out, {"scenario", "n", "alpha", "method", "dataset", "coverage", "prange"});
    const std::string scen = std::to_string(report.scenario_id);
    const std::string nstr = std::to_string(report.n);
    const std::string astr = fmt17(report.alpha);
    const std::string method = to_string(report.method);
    for (std::size_t k = 0; k < report.per_dataset_coverage.size(); ++k)
        write_csv_row(out, {scen, nstr, astr, method, std::to_string(k + 1),
                            fmt17(report.per_dataset_coverage[k]),
                            fmt17(report.per_dataset_prange[k])});
    write_csv_row(out, {scen, nstr, astr, method, "mean", fmt17(report.coverage),
                        fmt17(report.prange)});
}

// ---------------------------------------------------------------------
// prediction intervals and the real-data protocol

// Training-set residuals scaled by the fitted standard deviation, frozen
// sorted so repeated interval queries reuse the quantile table.
struct PredictionIntervalModel {
    FittedMean mean;
    FittedVariance var;
    std::vector<double> sorted_scaled_residuals;

    static PredictionIntervalModel fit(FittedMean mean_fit, FittedVariance var_fit,
                                       const Dataset& train_data) {
        train_data.validate();
        PredictionIntervalModel model{std::move(mean_fit), std::move(var_fit), {}};
        model.sorted_scaled_residuals.resize(train_data.size());
        for (std::size_t i = 0; i < train_data.size(); ++i) {
            const auto x = train_data.x(i);
            model.sorted_scaled_residuals[i] =
                (train_data.ys[i] - model.mean.predict(x)) / model.var.stddev_floored(x);
        }
        std::sort(model.sorted_scaled_residuals.begin(), model.sorted_scaled_residuals.end());
        return model;
    }

    // [fhat + q_{alpha/2} s, fhat + q_{1-alpha/2} s] with signed residual
    // quantiles and s the floored fitted standard deviation.
    Interval interval_at(std::span<const double> x, double alpha) const {
        const double f = mean.predict(x);
        const double s = var.stddev_floored(x);
        const double q_lo =
            EmpiricalDistribution::sorted_quantile(sorted_scaled_residuals, alpha / 2.0);
        const double q_hi =
            EmpiricalDistribution::sorted_quantile(sorted_scaled_residuals, 1.0 - alpha / 2.0);
        return {f + q_lo * s, f + q_hi * s};
    }
};

inline Interval prediction_interval(const FittedMean& mean, const FittedVariance& var,
                                    const Dataset& train_data, std::span<const double> x_test,
                                    double alpha) {
    return PredictionIntervalModel::fit(mean, var, train_data).interval_at(x_test, alpha);
}

struct RealDataConfig {
    std::size_t train_size = 150;
    std::size_t splits = 5;
    std::vector<double> pi_alphas{0.05, 0.10};
    std::vector<double> ci_alphas{};              // empty disables the CI-length study
    std::vector<EstimatorKind> estimators{EstimatorKind::nn_residual,
                                          EstimatorKind::nn_direct};
    FitConfig fit{};
    CiConfig ci{};                                // B, B_tilde, replicate settings
    std::uint64_t seed = 0;
};

struct RealDataReport {
    struct PiRecord {
        std::size_t split;
        EstimatorKind kind;
        double alpha;
        double coverage;   // fraction of test responses inside the interval
    };
    struct CiRecord {
        std::size_t split;
        double alpha;
        double length;     // 2 * Delta(alpha)
    };
    std::vector<PiRecord> pi_records;
    std::vector<CiRecord> ci_records;

    double mean_pi_coverage(EstimatorKind kind, double alpha) const {
        std::vector<double> vals;
        for (const auto& r : pi_records)
            if (r.kind == kind && r.alpha == alpha) vals.push_back(r.coverage);
        return mean_and_std(vals).first;
    }
    double mean_ci_length(double alpha) const {
        std::vector<double> vals;
        for (const auto& r : ci_records)
            if (r.alpha == alpha) vals.push_back(r.length);
        return mean_and_std(vals).first;
    }
};

// Random train/test splits; per split, fit the two-stage pipeline on the
// training part, evaluate prediction-interval coverage on the test part,
// and optionally run the robust interval for its length.
inline RealDataReport run_real_data_study(const Dataset& data, const RealDataConfig& cfg) {
    data.validate();
    if (cfg.train_size < 8 || cfg.train_size >= data.size())
        throw std::invalid_argument("run_real_data_study: train_size out of range");
    if (cfg.splits < 1) throw std::invalid_argument("run_real_data_study: splits >= 1");

    RealDataReport report;
    for (std::size_t s = 0; s < cfg.splits; ++s) {
        const std::uint64_t split_seed = derive_seed(cfg.seed, "split/" + std::to_string(s + 1));
        std::vector<std::size_t> perm(data.size());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        Rng rng(derive_seed(split_seed, "perm"));
        for (std::size_t i = perm.size() - 1; i > 0; --i)
            std::swap(perm[i], perm[rng.uniform_int(i + 1)]);
        const std::vector<std::size_t> train_idx(perm.begin(),
                                                 perm.begin() + static_cast<std::ptrdiff_t>(cfg.train_size));
        const std::vector<std::size_t> test_idx(perm.begin() + static_cast<std::ptrdiff_t>(cfg.train_size),
                                                perm.end());
        const Dataset train_data = data.subset(train_idx);
        const Dataset test_data = data.subset(test_idx);

        NetworkArch mean_arch = cfg.fit.mean_arch;
        NetworkArch var_arch = cfg.fit.var_arch;
        mean_arch.input_dim = data.dim();
        var_arch.input_dim = data.dim();

        TrainConfig tc = cfg.fit.train;
        tc.rng_seed = derive_seed(split_seed, "mean");
        const double bound_a = std::max(default_mean_clip_bound(train_data), kVarianceFloor);
        const FittedMean mean = fit_mean(train_data, mean_arch, tc, bound_a);

        for (EstimatorKind kind : cfg.estimators) {
            if (kind == EstimatorKind::oracle)
                throw std::invalid_argument(
                    "run_real_data_study: no true variance available for the oracle kind");
            FittedVariance var;
            if (kind == EstimatorKind::nn_residual) {
                const std::vector<double> eps = residuals(mean, train_data);
                std::vector<double> sq(eps.size());
                for (std::size_t i = 0; i < eps.size(); ++i) sq[i] = eps[i] * eps[i];
                TrainConfig vc = cfg.fit.train;
                vc.rng_seed = derive_seed(split_seed, "var-res");
                var = fit_variance_residual(mean, train_data, var_arch, vc,
                                            default_variance_clip_bound(sq));
            } else if (kind == EstimatorKind::nn_direct) {
                std::vector<double> sq(train_data.size());
                for (std::size_t i = 0; i < sq.size(); ++i)
                    sq[i] = train_data.ys[i] * train_data.ys[i];
                TrainConfig vc = cfg.fit.train;
                vc.rng_seed = derive_seed(split_seed, "var-dir");
                var = fit_variance_direct(mean, train_data, var_arch, vc,
                                          default_variance_clip_bound(sq));
            } else {
                const std::vector<double> eps = residuals(mean, train_data);
                std::vector<double> sq(eps.size());
                for (std::size_t i = 0; i < eps.size(); ++i) sq[i] = eps[i] * eps[i];
                var = fit_sigma2_homoscedastic(mean, train_data,
                                               default_variance_clip_bound(sq));
            }
            const PredictionIntervalModel model =
                PredictionIntervalModel::fit(mean, var, train_data);
            for (double alpha : cfg.pi_alphas) {
                double covered = 0.0;
                for (std::size_t i = 0; i < test_data.size(); ++i) {
                    const Interval iv = model.interval_at(test_data.x(i), alpha);
                    if (iv.contains(test_data.ys[i])) covered += 1.0;
                }
                report.pi_records.push_back(
                    {s + 1, kind, alpha, covered / static_cast<double>(test_data.size())});
            }
        }

        for (double alpha : cfg.ci_alphas) {
            CiConfig ci = cfg.ci;
            ci.alpha = alpha;
            ci.mean_arch.input_dim = data.dim();
            ci.var_arch.input_dim = data.dim();
            ci.rng_seed = derive_seed(split_seed, "ci/" + fmt17(alpha));
            const CiResult res = build_interval(ci, train_data);
            report.ci_records.push_back({s + 1, alpha, 2.0 * res.half_width});
        }
    }
    return report;
}

// Schema: record,method,alpha,split,value — prediction-interval coverage
// rows ("pi_coverage") and interval-length rows ("ci_length"), each followed
// by "mean" aggregate rows.
inline void write_real_data_csv(const RealDataReport& report, std::ostream& out) {
    write_csv_row(out, {"record", "method", "alpha", "split", "value"});
    for (const auto& r : report.pi_records)
        write_csv_row(out, {"pi_coverage", to_string(r.kind), fmt17(r.alpha),
                            std::to_string(r.split), fmt17(r.coverage)});
    // aggregates per (kind, alpha), in first-appearance order
    std::vector<std::pair<EstimatorKind, double>> seen;
    for (const auto& r : report.pi_records) {
        const std::pair<EstimatorKind, double> key{r.kind, r.alpha};
        if (std::find(seen.begin(), seen.end(), key) == seen.end()) {
            seen.push_back(key);
            write_csv_row(out, {"pi_coverage", to_string(r.kind), fmt17(r.alpha), "mean",
                                fmt17(report.mean_pi_coverage(r.kind, r.alpha))});
        }
    }
    std::vector<double> seen_alpha;
    for (const auto& r : report.ci_records)
        write_csv_row(out, {"ci_length", "nn", fmt17(r.alpha), std::to_string(r.split),
                            fmt17(r.length)});
    for (const auto& r : report.ci_records) {
        if (std::find(seen_alpha.begin(), seen_alpha.end(), r.alpha) == seen_alpha.end()) {
            seen_alpha.push_back(r.alpha);
            write_csv_row(out, {"ci_length", "nn", fmt17(r.alpha), "mean",
                                fmt17(report.mean_ci_length(r.alpha))});
        }
    }
}

}  // namespace varnet
