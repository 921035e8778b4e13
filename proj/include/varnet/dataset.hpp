#pragma once
// Regression sample container: covariates in [0,1]^d plus responses.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "varnet/matrix.hpp"

namespace varnet {

struct Dataset {
    Matrix xs;                // n x d, entries expected in [0,1]
    std::vector<double> ys;   // length n

    std::size_t size() const { return xs.rows(); }
    std::size_t dim() const { return xs.cols(); }

    std::span<const double> x(std::size_t i) const { return xs.row(i); }

    void validate() const {
        if (xs.rows() == 0) throw std::invalid_argument("dataset: empty");
        if (ys.size() != xs.rows())
            throw std::invalid_argument("dataset: xs/ys size mismatch");
        for (double y : ys)
            if (!std::isfinite(y)) throw std::invalid_argument("dataset: non-finite response");
    }

    // Rows selected by index, in the given order.
    Dataset subset(const std::vector<std::size_t>& idx) const {
        Dataset out;
        out.xs = Matrix(idx.size(), xs.cols());
        out.ys.resize(idx.size());
        for (std::size_t r = 0; r < idx.size(); ++r) {
            auto src = xs.row(idx[r]);
            auto dst = out.xs.row(r);
            for (std::size_t j = 0; j < src.size(); ++j) dst[j] = src[j];
            out.ys[r] = ys[idx[r]];
        }
        return out;
    }
};

inline double max_abs_response(const Dataset& data) {
    double m = 0.0;
    for (double y : data.ys) m = std::max(m, std::abs(y));
    return m;
}

}  // namespace varnet
