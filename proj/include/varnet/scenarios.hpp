#pragma once
// The five synthetic data-generating processes used by the benchmarks.
// Each pairs a hierarchical-composition mean f* with an explicit variance
// function g* and a unit-variance noise law; responses follow
//   y = f*(x) + sqrt(g*(x)) * eps,   x ~ Uniform[0,1]^d.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "varnet/dataset.hpp"
#include "varnet/rng.hpp"

namespace varnet {

enum class NoiseLaw { standard_normal, uniform_sqrt3 };

struct ScenarioSpec {
    int id = 1;
    std::size_t dim = 2;
    NoiseLaw noise = NoiseLaw::standard_normal;
};

inline ScenarioSpec scenario(int id) {
    switch (id) {
        case 1: return {1, 2, NoiseLaw::standard_normal};
        case 2: return {2, 2, NoiseLaw::standard_normal};
        case 3: return {3, 2, NoiseLaw::standard_normal};
        case 4: return {4, 5, NoiseLaw::uniform_sqrt3};
        case 5: return {5, 10, NoiseLaw::uniform_sqrt3};
        default: throw std::invalid_argument("scenario id must be in 1..5");
    }
}

namespace detail {

inline void check_point(const ScenarioSpec& spec, std::span<const double> x) {
    if (x.size() != spec.dim)
        throw std::invalid_argument("scenario point has wrong dimension");
}

inline double norm2_centered(std::span<const double> x, std::span<const double> center) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - center[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

}  // namespace detail

inline double eval_f_star(const ScenarioSpec& spec, std::span<const double> x) {
    detail::check_point(spec, x);
    switch (spec.id) {
        case 1: {
            const double u = std::sqrt(x[0]) + x[0] * x[1];
            const double v = std::cos(2.0 * std::numbers::pi * x[1]);
            return std::sqrt(u + v * v) + u * u * v;
        }
        case 2: {
            const double u = std::log(1.0 + x[0] * x[0]) + x[0] * x[1];
            const double v = std::sin(3.0 * std::numbers::pi * x[1]) * std::exp(-x[0]);
            return std::cbrt(u * u + v * v) + u * u / (1.0 + std::abs(v));
        }
        case 3: {
            const double u = std::tan(x[0]) + x[0] * x[0] * x[1] * x[1];
            const double v = x[1] * x[1] * x[1] - 2.0 * x[0];
            return u * std::sin(v) + std::sqrt(std::abs(u - v)) + 1.0 / (1.0 + u * u);
        }
        case 4: {
            const double u = std::sin(x[0]) * x[1] * x[1] + std::exp(x[2]) - x[3] * x[4];
            const double v = std::cos(x[1]) + x[2] * std::tanh(x[3]) + x[4] * x[4] * x[4];
            return (u + v) * (u + v) + std::sqrt(std::abs(u * v));
        }
        case 5: {
            double u = 0.0, v = 0.0;
            for (std::size_t i = 0; i < 4; ++i) {
                u += x[i] * x[i];
                v += x[i];
            }
            for (std::size_t j = 4; j < 10; ++j) {
                u += x[j];
                v += x[j] * x[j];
            }
            return u + v + u * v;
        }
    }
    throw std::logic_error("unreachable");
}

inline double eval_g_star(const ScenarioSpec& spec, std::span<const double> x) {
    detail::check_point(spec, x);
    switch (spec.id) {
        case 1: {
            const double c[2] = {0.5, 0.5};
            return detail::norm2_centered(x, c);
        }
        case 2: {
            const double c[2] = {0.25, 0.75};
            return detail::norm2_centered(x, c);
        }
        case 3:
            return std::exp(-std::abs(x[0]) - std::abs(x[1] - 1.0));
        case 4: {
            const double shift[5] = {-0.5, 0.5, -0.5, 0.5, -0.5};
            double l2 = 0.0, l1 = 0.0;
            for (std::size_t i = 0; i < 5; ++i) {
                const double d = x[i] - shift[i];
                l2 += d * d;
                l1 += std::abs(d);
            }
            return std::exp(-std::sqrt(l2)) + std::sqrt(l1 + 1.0);
        }
        case 5: {
            double l2 = 0.0, l1 = 0.0;
            for (std::size_t i = 0; i < 10; ++i) {
                const double d = x[i] - 0.5;
                l2 += d * d;
                l1 += std::abs(d);
            }
            return std::sqrt(l2) + std::sqrt(l1);
        }
    }
    throw std::logic_error("unreachable");
}

struct SyntheticSample {
    Dataset dataset;
    std::vector<double> f_values;   // f*(x_i)
    std::vector<double> g_values;   // g*(x_i)
    std::vector<double> noise;      // the drawn eps_i
};

// Draw order: all covariates row by row first, then the n noise values.
inline SyntheticSample sample_dataset(const ScenarioSpec& spec, std::size_t n,
                                      std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_dataset: n must be >= 1");
    SyntheticSample out;
    out.dataset.xs = Matrix(n, spec.dim);
    out.dataset.ys.resize(n);
    out.f_values.resize(n);
    out.g_values.resize(n);
    out.noise.resize(n);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < spec.dim; ++j) out.dataset.xs(i, j) = rng.uniform01();
    const double s3 = std::sqrt(3.0);
    for (std::size_t i = 0; i < n; ++i) {
        out.noise[i] = (spec.noise == NoiseLaw::standard_normal) ? rng.normal()
                                                                 : rng.uniform(-s3, s3);
        const auto x = out.dataset.xs.row(i);
        out.f_values[i] = eval_f_star(spec, x);
        out.g_values[i] = eval_g_star(spec, x);
        out.dataset.ys[i] = out.f_values[i] + std::sqrt(out.g_values[i]) * out.noise[i];
    }
    return out;
}

}  // namespace varnet
