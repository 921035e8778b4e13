#pragma once
// Dense fully connected ReLU networks with mean-squared-error training.
//
// The function class is the standard dense multilayer perceptron: depth L
// hidden layers of equal width nu, ReLU activations, scalar linear output.
// Parameters live in one flat vector with a fixed layout (per hidden layer s:
// weights row-major width x fan_in, then biases; finally output weights and
// output bias). That layout is also the serialization order, the Adam moment
// order, and the draw order at initialization.
//
// Everything is double precision and deterministic given the seeds handed in.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "varnet/matrix.hpp"
#include "varnet/rng.hpp"

namespace varnet {

struct NetworkArch {
    std::size_t input_dim = 1;  // d
    std::size_t depth = 1;      // L, number of hidden layers
    std::size_t width = 1;      // nu, equal across hidden layers

    void validate() const {
        if (input_dim < 1 || depth < 1 || width < 1)
            throw std::invalid_argument("arch: input_dim, depth, width must be >= 1");
    }

    bool operator==(const NetworkArch&) const = default;
};

// Truncation to [-bound, bound].
inline double clip(double value, double bound) {
    if (value > bound) return bound;
    if (value < -bound) return -bound;
    return value;
}

class Network {
public:
    Network() = default;
    explicit Network(const NetworkArch& arch) : arch_(arch) {
        arch.validate();
        params_.assign(param_count_for(arch), 0.0);
    }

    const NetworkArch& arch() const { return arch_; }
    std::size_t param_count() const { return params_.size(); }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    std::size_t fan_in(std::size_t layer) const {
        return layer == 0 ? arch_.input_dim : arch_.width;
    }

    // Flat-layout offsets. Layer index s in [0, depth).
    std::size_t weight_offset(std::size_t layer) const {
        std::size_t off = 0;
        for (std::size_t s = 0; s < layer; ++s)
            off += arch_.width * (fan_in(s) + 1);
        return off;
    }
    std::size_t bias_offset(std::size_t layer) const {
        return weight_offset(layer) + arch_.width * fan_in(layer);
    }
    std::size_t output_weight_offset() const { return weight_offset(arch_.depth); }
    std::size_t output_bias_offset() const { return output_weight_offset() + arch_.width; }

    // Row i of the layer weight matrix (the incoming weights of neuron i).
    std::span<const double> weight_row(std::size_t layer, std::size_t i) const {
        return {params_.data() + weight_offset(layer) + i * fan_in(layer), fan_in(layer)};
    }
    double bias(std::size_t layer, std::size_t i) const {
        return params_[bias_offset(layer) + i];
    }
    std::span<const double> output_weights() const {
        return {params_.data() + output_weight_offset(), arch_.width};
    }
    double output_bias() const { return params_[output_bias_offset()]; }

    bool all_finite() const {
        return std::all_of(params_.begin(), params_.end(),
                           [](double v) { return std::isfinite(v); });
    }

    static std::size_t param_count_for(const NetworkArch& arch) {
        std::size_t count = arch.width * (arch.input_dim + 1);           // first hidden layer
        count += (arch.depth - 1) * arch.width * (arch.width + 1);       // remaining hidden layers
        count += arch.width + 1;                                         // output layer
        return count;
    }

    bool operator==(const Network&) const = default;

private:
    NetworkArch arch_;
    std::vector<double> params_;
};

// He-style initialization: weights drawn i.i.d. N(0, 2/fan_in), biases and the
// output bias zero. Draw order follows the flat layout.
inline Network init_network(const NetworkArch& arch, std::uint64_t seed) {
    arch.validate();
    Network net(arch);
    Rng rng(seed);
    auto& p = net.params();
    for (std::size_t s = 0; s < arch.depth; ++s) {
        const double scale = std::sqrt(2.0 / static_cast<double>(net.fan_in(s)));
        const std::size_t w0 = net.weight_offset(s);
        const std::size_t nw = arch.width * net.fan_in(s);
        for (std::size_t k = 0; k < nw; ++k) p[w0 + k] = scale * rng.normal();
    }
    const double out_scale = std::sqrt(2.0 / static_cast<double>(arch.width));
    const std::size_t ow = net.output_weight_offset();
    for (std::size_t k = 0; k < arch.width; ++k) p[ow + k] = out_scale * rng.normal();
    return net;
}

namespace detail {

// Scratch buffers reused across samples during training and evaluation.
struct NetWorkspace {
    Matrix pre;   // depth x width, pre-activations
    Matrix act;   // depth x width, post-ReLU activations
    std::vector<double> delta;       // width
    std::vector<double> delta_prev;  // width

    void resize(const NetworkArch& arch) {
        pre = Matrix(arch.depth, arch.width);
        act = Matrix(arch.depth, arch.width);
        delta.assign(arch.width, 0.0);
        delta_prev.assign(arch.width, 0.0);
    }
};

// Forward pass recording pre/post activations. x must have length input_dim.
inline double forward_ws(const Network& net, std::span<const double> x, NetWorkspace& ws) {
    const auto& arch = net.arch();
    const double* p = net.params().data();
    for (std::size_t s = 0; s < arch.depth; ++s) {
        const std::size_t in = net.fan_in(s);
        const double* w = p + net.weight_offset(s);
        const double* b = p + net.bias_offset(s);
        const double* src = (s == 0) ? x.data() : ws.act.row(s - 1).data();
        auto z = ws.pre.row(s);
        auto a = ws.act.row(s);
        for (std::size_t i = 0; i < arch.width; ++i) {
            const double* wrow = w + i * in;
            double acc = b[i];
            for (std::size_t j = 0; j < in; ++j) acc += wrow[j] * src[j];
            z[i] = acc;
            a[i] = acc > 0.0 ? acc : 0.0;
        }
    }
    const double* ow = p + net.output_weight_offset();
    const double* last = ws.act.row(arch.depth - 1).data();
    double out = net.params()[net.output_bias_offset()];
    for (std::size_t i = 0; i < arch.width; ++i) out += ow[i] * last[i];
    return out;
}

// Accumulates d(loss)/d(theta) for loss contribution upstream_grad * pred.
// Must be called right after forward_ws on the same x. ReLU derivative at
// exactly zero is taken as zero.
inline void backward_ws(const Network& net, std::span<const double> x, double upstream_grad,
                        NetWorkspace& ws, std::vector<double>& grads) {
    const auto& arch = net.arch();
    const double* p = net.params().data();
    double* g = grads.data();

    g[net.output_bias_offset()] += upstream_grad;
    {
        const std::size_t ow = net.output_weight_offset();
        const double* last = ws.act.row(arch.depth - 1).data();
        const double* w = p + ow;
        auto pre = ws.pre.row(arch.depth - 1);
        for (std::size_t i = 0; i < arch.width; ++i) {
            g[ow + i] += upstream_grad * last[i];
            ws.delta[i] = (pre[i] > 0.0) ? upstream_grad * w[i] : 0.0;
        }
    }
    for (std::size_t s = arch.depth; s-- > 0;) {
        const std::size_t in = net.fan_in(s);
        const std::size_t w0 = net.weight_offset(s);
        const std::size_t b0 = net.bias_offset(s);
        const double* src = (s == 0) ? x.data() : ws.act.row(s - 1).data();
        for (std::size_t i = 0; i < arch.width; ++i) {
            const double d = ws.delta[i];
            g[b0 + i] += d;
            if (d == 0.0) continue;
            double* grow = g + w0 + i * in;
            for (std::size_t j = 0; j < in; ++j) grow[j] += d * src[j];
        }
        if (s == 0) break;
        std::fill(ws.delta_prev.begin(), ws.delta_prev.end(), 0.0);
        const double* w = p + w0;
        for (std::size_t i = 0; i < arch.width; ++i) {
            const double d = ws.delta[i];
            if (d == 0.0) continue;
            const double* wrow = w + i * in;
            for (std::size_t j = 0; j < in; ++j) ws.delta_prev[j] += d * wrow[j];
        }
        auto pre = ws.pre.row(s - 1);
        for (std::size_t j = 0; j < arch.width; ++j)
            ws.delta[j] = (pre[j] > 0.0) ? ws.delta_prev[j] : 0.0;
    }
}

}  // namespace detail

inline void check_dims(const Network& net, std::size_t x_len) {
    if (x_len != net.arch().input_dim)
        throw std::invalid_argument("forward: input length " + std::to_string(x_len) +
                                    " does not match input_dim " +
                                    std::to_string(net.arch().input_dim));
}

inline double forward(const Network& net, std::span<const double> x) {
    check_dims(net, x.size());
    detail::NetWorkspace ws;
    ws.resize(net.arch());
    return detail::forward_ws(net, x, ws);
}

// (1/n) sum_i (y_i - f(x_i))^2
inline double mse_loss(const Network& net, const Matrix& xs, const std::vector<double>& ys) {
    check_dims(net, xs.cols());
    if (xs.rows() != ys.size() || ys.empty())
        throw std::invalid_argument("mse_loss: xs/ys size mismatch or empty");
    detail::NetWorkspace ws;
    ws.resize(net.arch());
    double sse = 0.0;
    for (std::size_t i = 0; i < xs.rows(); ++i) {
        const double r = ys[i] - detail::forward_ws(net, xs.row(i), ws);
        sse += r * r;
    }
    return sse / static_cast<double>(xs.rows());
}

// Exact gradient of mse_loss with respect to every parameter, flat layout.
inline std::vector<double> backprop_grads(const Network& net, const Matrix& xs,
                                          const std::vector<double>& ys) {
    check_dims(net, xs.cols());
    if (xs.rows() != ys.size() || ys.empty())
        throw std::invalid_argument("backprop_grads: xs/ys size mismatch or empty");
    detail::NetWorkspace ws;
    ws.resize(net.arch());
    std::vector<double> grads(net.param_count(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(xs.rows());
    for (std::size_t i = 0; i < xs.rows(); ++i) {
        const double pred = detail::forward_ws(net, xs.row(i), ws);
        const double upstream = -2.0 * (ys[i] - pred) * inv_n;
        detail::backward_ws(net, xs.row(i), upstream, ws, grads);
    }
    return grads;
}

struct AdamState {
    std::size_t step_count = 0;
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    AdamState() = default;
    AdamState(std::size_t n_params, double lr)
        : first_moment(n_params, 0.0), second_moment(n_params, 0.0), learning_rate(lr) {}
};

// Standard bias-corrected Adam update; increments step_count.
inline void adam_step(Network& net, const std::vector<double>& grads, AdamState& state) {
    auto& p = net.params();
    if (grads.size() != p.size() || state.first_moment.size() != p.size())
        throw std::invalid_argument("adam_step: shape mismatch");
    state.step_count += 1;
    const double b1t = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double b2t = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    for (std::size_t k = 0; k < p.size(); ++k) {
        double& m = state.first_moment[k];
        double& v = state.second_moment[k];
        m = state.beta1 * m + (1.0 - state.beta1) * grads[k];
        v = state.beta2 * v + (1.0 - state.beta2) * grads[k] * grads[k];
        const double mhat = m / b1t;
        const double vhat = v / b2t;
        p[k] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
    }
}

struct TrainConfig {
    std::size_t epochs = 200;
    std::size_t batch_size = 128;       // >= n means full batch
    double learning_rate = 1e-3;
    std::uint64_t rng_seed = 0;         // drives batch shuffling
};

class TrainingDiverged : public std::runtime_error {
public:
    TrainingDiverged(std::size_t epoch_index)
        : std::runtime_error("training diverged: non-finite loss at epoch " +
                             std::to_string(epoch_index)),
          epoch(epoch_index) {}
    std::size_t epoch;
};

struct TrainResult {
    Network net;
    double final_loss = 0.0;
};

// Mini-batch Adam on mse_loss. Batches are contiguous chunks of a per-epoch
// Fisher-Yates shuffle driven by cfg.rng_seed; the last short batch is kept.
inline TrainResult train(Network net, const Matrix& xs, const std::vector<double>& ys,
                         const TrainConfig& cfg) {
    check_dims(net, xs.cols());
    if (xs.rows() != ys.size() || ys.empty())
        throw std::invalid_argument("train: xs/ys size mismatch or empty");
    const std::size_t n = xs.rows();
    const std::size_t batch = std::min(cfg.batch_size == 0 ? n : cfg.batch_size, n);

    AdamState state(net.param_count(), cfg.learning_rate);
    Rng shuffle_rng(derive_seed(cfg.rng_seed, "train/shuffle"));
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    detail::NetWorkspace ws;
    ws.resize(net.arch());
    std::vector<double> grads(net.param_count(), 0.0);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = n - 1; i > 0; --i)
            std::swap(order[i], order[shuffle_rng.uniform_int(i + 1)]);
        double epoch_sse = 0.0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t stop = std::min(start + batch, n);
            const double inv_m = 1.0 / static_cast<double>(stop - start);
            std::fill(grads.begin(), grads.end(), 0.0);
            for (std::size_t t = start; t < stop; ++t) {
                const auto x = xs.row(order[t]);
                const double pred = detail::forward_ws(net, x, ws);
                const double r = ys[order[t]] - pred;
                epoch_sse += r * r;
                detail::backward_ws(net, x, -2.0 * r * inv_m, ws, grads);
            }
            adam_step(net, grads, state);
        }
        if (!std::isfinite(epoch_sse)) throw TrainingDiverged(epoch);
    }
    const double final_loss = mse_loss(net, xs, ys);
    return {std::move(net), final_loss};
}

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::size_t params_checked = 0;
};

// Compares backprop_grads against central finite differences of mse_loss on
// random data. Intended for small architectures only.
inline GradCheckReport gradcheck(const NetworkArch& arch, std::uint64_t seed,
                                 std::size_t n_samples, double h = 1e-5) {
    arch.validate();
    Network net = init_network(arch, derive_seed(seed, "gradcheck/net"));
    Rng rng(derive_seed(seed, "gradcheck/data"));
    Matrix xs(n_samples, arch.input_dim);
    std::vector<double> ys(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        for (std::size_t j = 0; j < arch.input_dim; ++j) xs(i, j) = rng.uniform01();
        ys[i] = rng.normal();
    }
    const std::vector<double> analytic = backprop_grads(net, xs, ys);
    GradCheckReport report;
    report.params_checked = net.param_count();
    for (std::size_t k = 0; k < net.param_count(); ++k) {
        const double saved = net.params()[k];
        net.params()[k] = saved + h;
        const double up = mse_loss(net, xs, ys);
        net.params()[k] = saved - h;
        const double down = mse_loss(net, xs, ys);
        net.params()[k] = saved;
        const double fd = (up - down) / (2.0 * h);
        const double rel = std::abs(analytic[k] - fd) / std::max(1.0, std::abs(fd));
        report.max_rel_err = std::max(report.max_rel_err, rel);
    }
    return report;
}

// --- serialization -----------------------------------------------------
//
// Versioned text format: a header line, the architecture, then all
// parameters in flat-layout order, printed with %.17g so that reading back
// reproduces every double bit-exactly.

inline void save_network(const Network& net, std::ostream& out) {
    out << "varnet-network 1\n";
    out << net.arch().input_dim << ' ' << net.arch().depth << ' ' << net.arch().width << '\n';
    char buf[40];
    const auto& p = net.params();
    for (std::size_t k = 0; k < p.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", p[k]);
        out << buf << ((k + 1) % 8 == 0 ? '\n' : ' ');
    }
    out << '\n';
}

inline Network load_network(std::istream& in) {
    std::string tag;
    int version = 0;
    in >> tag >> version;
    if (tag != "varnet-network" || version != 1)
        throw std::runtime_error("load_network: unrecognized header");
    NetworkArch arch;
    in >> arch.input_dim >> arch.depth >> arch.width;
    arch.validate();
    Network net(arch);
    for (auto& v : net.params())
        if (!(in >> v)) throw std::runtime_error("load_network: truncated parameter block");
    return net;
}

inline void save_network_file(const Network& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_network: cannot open " + path);
    save_network(net, out);
}

inline Network load_network_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_network: cannot open " + path);
    return load_network(in);
}

// Architecture sizings from the theory: either logarithmic depth with width
// growing as n^{K/(2(2p+K))}, or the transposed deep-and-narrow regime.
enum class ArchRegime { log_depth, constant_width };

inline NetworkArch theory_arch(std::size_t input_dim, std::size_t n, double smoothness_p,
                               double intrinsic_dim_k, double c3 = 1.0, double c4 = 1.0,
                               ArchRegime regime = ArchRegime::log_depth) {
    if (n < 2) throw std::invalid_argument("theory_arch: n too small");
    const double logn = std::log(static_cast<double>(n));
    const double rate = std::pow(static_cast<double>(n),
                                 intrinsic_dim_k / (2.0 * (2.0 * smoothness_p + intrinsic_dim_k)));
    NetworkArch arch;
    arch.input_dim = input_dim;
    if (regime == ArchRegime::log_depth) {
        arch.depth = static_cast<std::size_t>(std::ceil(c3 * logn));
        arch.width = static_cast<std::size_t>(std::ceil(c4 * rate));
    } else {
        arch.depth = static_cast<std::size_t>(std::ceil(c3 * rate * logn));
        arch.width = static_cast<std::size_t>(std::ceil(c4));
    }
    arch.depth = std::max<std::size_t>(1, arch.depth);
    arch.width = std::max<std::size_t>(1, arch.width);
    return arch;
}

}  // namespace varnet
