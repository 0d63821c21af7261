#include "fdreg/numerics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fdreg {

Tensor pairwise_distances(const Tensor& a, const Tensor& b) {
    a.require_ndim(2);
    b.require_ndim(2);
    if (a.cols() != b.cols())
        throw std::invalid_argument("pairwise_distances: point dimensions differ");
    const std::size_t m = a.rows(), k = b.rows(), d = a.cols();
    Tensor out({m, k});
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = &a.data[i * d];
        for (std::size_t j = 0; j < k; ++j) {
            const double* bj = &b.data[j * d];
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                double diff = ai[c] - bj[c];
                s += diff * diff;
            }
            out(i, j) = std::sqrt(s);
        }
    }
    return out;
}

Tensor row_softmax_neg_scaled(const Tensor& dist, double lambda) {
    dist.require_ndim(2);
    const std::size_t n = dist.rows();
    if (dist.cols() != n)
        throw std::invalid_argument("row_softmax_neg_scaled: matrix must be square");
    if (n < 2)
        throw std::invalid_argument("row_softmax_neg_scaled: need at least 2 points");
    if (!(lambda > 0.0))
        throw std::invalid_argument("row_softmax_neg_scaled: lambda must be positive");

    Tensor out({n, n});
    for (std::size_t i = 0; i < n; ++i) {
        // Shift by the row's smallest off-diagonal distance: the nearest
        // neighbor then has weight exp(0) = 1, and the result is exact even
        // when lambda is far below the distance scale.
        double dmin = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i && dist(i, j) < dmin) dmin = dist(i, j);
        double z = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double e = std::exp(-(dist(i, j) - dmin) / lambda);
            out(i, j) = e;
            z += e;
        }
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) out(i, j) /= z;
    }
    return out;
}

Tensor sample_gaussian(Rng& rng, double mu, double sigma, std::vector<std::size_t> shape) {
    if (sigma < 0.0) throw std::invalid_argument("sample_gaussian: negative sigma");
    Tensor t(std::move(shape));
    for (double& v : t.data) v = rng.gaussian(mu, sigma);
    return t;
}

Tensor sample_uniform(Rng& rng, double lo, double hi, std::vector<std::size_t> shape) {
    if (lo > hi) throw std::invalid_argument("sample_uniform: lo > hi");
    Tensor t(std::move(shape));
    for (double& v : t.data) v = rng.uniform(lo, hi);
    return t;
}

}  // namespace fdreg
