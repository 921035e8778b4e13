// Command-line front end. Subcommands:
//   gradcheck          backprop vs. finite-difference verification
//   simulate-variance  synthetic variance-estimation benchmark
//   ci-benchmark       confidence-interval coverage study
//   real-data          prediction intervals / CI lengths on a CSV dataset
//   make-scenario-csv  export one synthetic sample for cross-checking
//
// Every run is reproducible from (--config file, --seed): identical flags
// and seed give byte-identical output CSVs. Flat key=value config files are
// accepted via --config and are overridden by command-line flags. The
// VARNET_THREADS environment variable caps worker threads.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "varnet/varnet.hpp"

namespace {

struct CommonOpts {
    std::uint64_t seed = 1;
    std::string out_path;
    std::string config_path;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--seed", opts.seed, "Master RNG seed");
    cmd->add_option("--out,-o", opts.out_path, "Output CSV path");
    cmd->add_option("--config", opts.config_path,
                    "Flat key=value defaults for this subcommand; flags override");
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

// Expands "--config FILE" in place: each "key=value" line becomes the long
// option --key, inserted where --config stood. Keys already given on the
// command line are skipped, so explicit flags always win. Values holding
// several whitespace-separated tokens feed multi-value options.
std::vector<std::string> expand_config_args(int argc, char** argv) {
    std::vector<std::string> tokens(argv + 1, argv + argc);
    std::string path;
    std::size_t insert_at = tokens.size();
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i] == "--config" && i + 1 < tokens.size()) {
            path = tokens[i + 1];
            tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                         tokens.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            insert_at = i;
            break;
        }
        if (tokens[i].rfind("--config=", 0) == 0) {
            path = tokens[i].substr(9);
            tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(i));
            insert_at = i;
            break;
        }
    }
    if (path.empty()) return tokens;

    std::set<std::string> given;
    for (const auto& t : tokens)
        if (t.rfind("--", 0) == 0) given.insert(t.substr(0, t.find('=')));

    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::vector<std::string> expanded;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": empty key");
        if (given.count("--" + key)) continue;  // command line overrides
        if (value.find_first_of(" \t") != std::string::npos) {
            expanded.push_back("--" + key);
            std::istringstream parts(value);
            std::string piece;
            while (parts >> piece) expanded.push_back(piece);
        } else {
            expanded.push_back("--" + key + "=" + value);
        }
    }
    tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(insert_at),
                  expanded.begin(), expanded.end());
    return tokens;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    return out;
}

varnet::Strategy parse_strategy(const std::string& s) {
    if (s == "full") return varnet::Strategy::full_data;
    if (s == "split") return varnet::Strategy::split_half;
    throw CLI::ValidationError("--strategy", "must be 'full' or 'split'");
}

varnet::EstimatorKind parse_estimator(const std::string& s) {
    if (s == "nn_res") return varnet::EstimatorKind::nn_residual;
    if (s == "nn_dir") return varnet::EstimatorKind::nn_direct;
    if (s == "sigma2_hom") return varnet::EstimatorKind::sigma2_hom;
    if (s == "oracle") return varnet::EstimatorKind::oracle;
    throw CLI::ValidationError("--estimators",
                               "must be one of nn_res, nn_dir, sigma2_hom, oracle");
}

varnet::CiMethod parse_method(const std::string& s) {
    if (s == "nn") return varnet::CiMethod::nn;
    if (s == "nn_emp") return varnet::CiMethod::nn_emp;
    if (s == "nn_hom") return varnet::CiMethod::nn_hom;
    if (s == "naive") return varnet::CiMethod::naive;
    if (s == "standard") return varnet::CiMethod::standard;
    throw CLI::ValidationError("--method",
                               "must be one of nn, nn_emp, nn_hom, naive, standard");
}

struct NetOpts {
    std::size_t depth = 2;
    std::size_t width = 64;
    std::size_t epochs = 200;
    std::size_t batch = 128;
    double lr = 1e-3;
};

void add_net_opts(CLI::App* cmd, NetOpts& opts) {
    cmd->add_option("--depth", opts.depth, "Hidden layers");
    cmd->add_option("--width", opts.width, "Units per hidden layer");
    cmd->add_option("--epochs", opts.epochs, "Training epochs");
    cmd->add_option("--batch", opts.batch, "Mini-batch size");
    cmd->add_option("--lr", opts.lr, "Adam learning rate");
}

varnet::FitConfig to_fit_config(const NetOpts& opts) {
    varnet::FitConfig fit;
    fit.mean_arch = {1, opts.depth, opts.width};
    fit.var_arch = {1, opts.depth, opts.width};
    fit.train.epochs = opts.epochs;
    fit.train.batch_size = opts.batch;
    fit.train.learning_rate = opts.lr;
    return fit;
}

int run_gradcheck(std::uint64_t seed, const std::vector<std::string>& arch_specs,
                  std::size_t samples, const std::string& out_path) {
    std::vector<varnet::NetworkArch> arches;
    if (arch_specs.empty()) {
        arches = {{2, 1, 4}, {2, 2, 8}, {5, 2, 8}};
    } else {
        for (const auto& spec : arch_specs) {
            varnet::NetworkArch a;
            if (std::sscanf(spec.c_str(), "%zu,%zu,%zu", &a.input_dim, &a.depth, &a.width) != 3)
                throw std::runtime_error("--arch expects d,L,nu (e.g. 2,2,8)");
            arches.push_back(a);
        }
    }
    double worst = 0.0;
    std::ostringstream csv;
    varnet::write_csv_row(csv, {"input_dim", "depth", "width", "seed", "samples",
                                "max_rel_err"});
    for (const auto& arch : arches) {
        const auto report = varnet::gradcheck(arch, seed, samples);
        worst = std::max(worst, report.max_rel_err);
        varnet::write_csv_row(csv, {std::to_string(arch.input_dim), std::to_string(arch.depth),
                                    std::to_string(arch.width), std::to_string(seed),
                                    std::to_string(samples), varnet::fmt17(report.max_rel_err)});
    }
    if (!out_path.empty()) open_out(out_path) << csv.str();
    std::printf("gradcheck: max relative error %.3e over %zu architectures -> %s\n", worst,
                arches.size(), worst < 1e-4 ? "ok" : "FAIL");
    return worst < 1e-4 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conditional variance estimation and bootstrap confidence intervals "
                 "with dense ReLU networks"};
    app.require_subcommand(1);

    // --- gradcheck ------------------------------------------------------
    CommonOpts gc_common;
    std::vector<std::string> gc_arches;
    std::size_t gc_samples = 10;
    auto* gc = app.add_subcommand("gradcheck", "Verify gradients against finite differences");
    add_common(gc, gc_common);
    gc->add_option("--arch", gc_arches, "Architecture d,L,nu (repeatable)");
    gc->add_option("--samples", gc_samples, "Random samples per check");

    // --- simulate-variance ----------------------------------------------
    CommonOpts sv_common;
    NetOpts sv_net;
    int sv_scenario = 1;
    std::size_t sv_n = 2000, sv_trials = 10;
    std::string sv_strategy = "full";
    std::vector<std::string> sv_estimators{"nn_res", "nn_dir"};
    auto* sv = app.add_subcommand("simulate-variance",
                                  "Variance-estimation benchmark on a synthetic scenario");
    add_common(sv, sv_common);
    add_net_opts(sv, sv_net);
    sv->add_option("--scenario", sv_scenario, "Scenario id 1..5")->required();
    sv->add_option("--n", sv_n, "Sample size per trial");
    sv->add_option("--trials", sv_trials, "Independent datasets");
    sv->add_option("--strategy", sv_strategy, "full | split");
    sv->add_option("--estimators", sv_estimators,
                   "Estimators: nn_res nn_dir sigma2_hom oracle");

    // --- ci-benchmark -----------------------------------------------------
    CommonOpts ci_common;
    NetOpts ci_net;
    int ci_scenario = 1;
    std::size_t ci_n = 2000, ci_datasets = 5, ci_new_points = 20;
    std::size_t ci_B = 100, ci_B_tilde = 50, ci_replicate_epochs = 100;
    double ci_alpha = 0.1, ci_A_n = 0.0, ci_log_power = 2.0;
    std::string ci_method = "nn";
    auto* ci = app.add_subcommand("ci-benchmark",
                                  "Confidence-interval coverage study on a synthetic scenario");
    add_common(ci, ci_common);
    add_net_opts(ci, ci_net);
    ci->add_option("--scenario", ci_scenario, "Scenario id 1..5")->required();
    ci->add_option("--n", ci_n, "Sample size per dataset");
    ci->add_option("--alpha", ci_alpha, "Miscoverage level in (0,1)");
    ci->add_option("--B", ci_B, "Bootstrap replicates for calibration");
    ci->add_option("--B-tilde", ci_B_tilde, "Replicates forming the center ensemble");
    ci->add_option("--datasets", ci_datasets, "Independent datasets");
    ci->add_option("--new-points", ci_new_points, "Fresh covariates per dataset");
    ci->add_option("--method", ci_method, "nn | nn_emp | nn_hom | naive | standard");
    ci->add_option("--replicate-epochs", ci_replicate_epochs, "Epochs for replicate fits");
    ci->add_option("--A-n", ci_A_n, "Clip bound; 0 = max |y| of the sample");
    ci->add_option("--log-power-s", ci_log_power, "Exponent s in the log^s n corrections");

    // --- real-data --------------------------------------------------------
    CommonOpts rd_common;
    NetOpts rd_net;
    rd_net.epochs = 200;
    std::string rd_path, rd_target;
    std::vector<std::string> rd_features;
    bool rd_log_target = false;
    std::size_t rd_train_size = 150, rd_splits = 5;
    std::vector<double> rd_pi_alphas{0.05, 0.10};
    std::vector<double> rd_ci_alphas;
    std::size_t rd_B = 20, rd_B_tilde = 10, rd_replicate_epochs = 100;
    std::vector<std::string> rd_estimators{"nn_res", "nn_dir"};
    auto* rd = app.add_subcommand("real-data",
                                  "Prediction-interval study on a delimited dataset");
    add_common(rd, rd_common);
    add_net_opts(rd, rd_net);
    rd->add_option("--data", rd_path, "Input CSV path")->required();
    rd->add_option("--features", rd_features, "Feature column names")->required();
    rd->add_option("--target", rd_target, "Target column name")->required();
    rd->add_flag("--log-target", rd_log_target, "Log-transform the target");
    rd->add_option("--train-size", rd_train_size, "Training rows per split");
    rd->add_option("--splits", rd_splits, "Random train/test splits");
    rd->add_option("--pi-alphas", rd_pi_alphas, "Prediction-interval miscoverage levels");
    rd->add_option("--ci-alphas", rd_ci_alphas,
                   "Confidence-interval levels (empty = skip CI lengths)");
    rd->add_option("--estimators", rd_estimators, "Estimators: nn_res nn_dir sigma2_hom");
    rd->add_option("--B", rd_B, "Bootstrap replicates for the CI study");
    rd->add_option("--B-tilde", rd_B_tilde, "Center-ensemble replicates");
    rd->add_option("--replicate-epochs", rd_replicate_epochs, "Epochs for replicate fits");

    // --- make-scenario-csv -------------------------------------------------
    CommonOpts ms_common;
    int ms_scenario = 1;
    std::size_t ms_n = 1000;
    auto* ms = app.add_subcommand("make-scenario-csv",
                                  "Export a synthetic sample with true f*/g* columns");
    add_common(ms, ms_common);
    ms->add_option("--scenario", ms_scenario, "Scenario id 1..5")->required();
    ms->add_option("--n", ms_n, "Rows to generate");

    try {
        std::vector<std::string> args = expand_config_args(argc, argv);
        std::reverse(args.begin(), args.end());  // CLI11 consumes reversed tokens
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }

    try {
        if (gc->parsed())
            return run_gradcheck(gc_common.seed, gc_arches, gc_samples, gc_common.out_path);

        if (sv->parsed()) {
            const auto spec = varnet::scenario(sv_scenario);
            std::vector<varnet::EstimatorKind> kinds;
            for (const auto& e : sv_estimators) kinds.push_back(parse_estimator(e));
            const auto report = varnet::run_variance_benchmark(
                spec, sv_n, sv_trials, parse_strategy(sv_strategy), kinds,
                to_fit_config(sv_net), sv_common.seed);
            std::ostringstream csv;
            varnet::write_benchmark_csv(report, csv);
            if (!sv_common.out_path.empty()) open_out(sv_common.out_path) << csv.str();
            std::printf("simulate-variance: scenario %d n=%zu trials=%zu |", sv_scenario,
                        sv_n, sv_trials);
            for (const auto& series : report.series)
                std::printf(" %s mean=%.4g (std %.4g)", varnet::to_string(series.kind),
                            series.mean, series.std_dev);
            std::printf("\n");
            return 0;
        }

        if (ci->parsed()) {
            const auto spec = varnet::scenario(ci_scenario);
            varnet::CiConfig cfg;
            cfg.alpha = ci_alpha;
            cfg.B = ci_B;
            cfg.B_tilde = ci_B_tilde;
            cfg.A_n = ci_A_n;
            cfg.log_power_s = ci_log_power;
            cfg.mean_arch = {spec.dim, ci_net.depth, ci_net.width};
            cfg.var_arch = {spec.dim, ci_net.depth, ci_net.width};
            cfg.base_train.epochs = ci_net.epochs;
            cfg.base_train.batch_size = ci_net.batch;
            cfg.base_train.learning_rate = ci_net.lr;
            cfg.replicate_train = cfg.base_train;
            cfg.replicate_train.epochs = ci_replicate_epochs;
            const auto report = varnet::run_coverage_experiment(
                spec, ci_n, ci_alpha, parse_method(ci_method), ci_datasets, ci_new_points,
                cfg, ci_common.seed);
            std::ostringstream csv;
            varnet::write_coverage_csv(report, csv);
            if (!ci_common.out_path.empty()) open_out(ci_common.out_path) << csv.str();
            std::printf("ci-benchmark: scenario %d n=%zu alpha=%.3g method=%s coverage=%.3f "
                        "prange=%.4f\n",
                        ci_scenario, ci_n, ci_alpha, ci_method.c_str(), report.coverage,
                        report.prange);
            return 0;
        }

        if (rd->parsed()) {
            auto table = varnet::load_csv(rd_path, rd_features, rd_target);
            if (rd_log_target) varnet::apply_log_target(table);
            auto [scaled, params] = varnet::minmax_scale(table);
            const varnet::Dataset data = varnet::to_dataset(scaled);

            varnet::RealDataConfig cfg;
            cfg.train_size = rd_train_size;
            cfg.splits = rd_splits;
            cfg.pi_alphas = rd_pi_alphas;
            cfg.ci_alphas = rd_ci_alphas;
            cfg.estimators.clear();
            for (const auto& e : rd_estimators) cfg.estimators.push_back(parse_estimator(e));
            cfg.fit = to_fit_config(rd_net);
            cfg.ci.B = rd_B;
            cfg.ci.B_tilde = rd_B_tilde;
            cfg.ci.mean_arch = cfg.fit.mean_arch;
            cfg.ci.var_arch = cfg.fit.var_arch;
            cfg.ci.base_train = cfg.fit.train;
            cfg.ci.replicate_train = cfg.fit.train;
            cfg.ci.replicate_train.epochs = rd_replicate_epochs;
            cfg.seed = rd_common.seed;

            const auto report = varnet::run_real_data_study(data, cfg);
            std::ostringstream csv;
            varnet::write_real_data_csv(report, csv);
            if (!rd_common.out_path.empty()) open_out(rd_common.out_path) << csv.str();
            std::printf("real-data: %zu splits of %s |", rd_splits, rd_path.c_str());
            for (const auto& e : cfg.estimators)
                for (double a : cfg.pi_alphas)
                    std::printf(" %s@%.0f%%: %.4f", varnet::to_string(e), 100 * (1 - a),
                                report.mean_pi_coverage(e, a));
            std::printf("\n");
            return 0;
        }

        if (ms->parsed()) {
            const auto spec = varnet::scenario(ms_scenario);
            const auto sample = varnet::sample_dataset(spec, ms_n, ms_common.seed);
            std::ostringstream csv;
            std::vector<std::string> header;
            for (std::size_t j = 0; j < spec.dim; ++j)
                header.push_back("x_" + std::to_string(j + 1));
            header.insert(header.end(), {"y", "f_star", "g_star"});
            varnet::write_csv_row(csv, header);
            for (std::size_t i = 0; i < ms_n; ++i) {
                std::vector<std::string> row;
                for (std::size_t j = 0; j < spec.dim; ++j)
                    row.push_back(varnet::fmt17(sample.dataset.xs(i, j)));
                row.push_back(varnet::fmt17(sample.dataset.ys[i]));
                row.push_back(varnet::fmt17(sample.f_values[i]));
                row.push_back(varnet::fmt17(sample.g_values[i]));
                varnet::write_csv_row(csv, row);
            }
            if (!ms_common.out_path.empty())
                open_out(ms_common.out_path) << csv.str();
            else
                std::cout << csv.str();
            std::fprintf(stderr, "make-scenario-csv: scenario %d, %zu rows\n", ms_scenario,
                         ms_n);
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
