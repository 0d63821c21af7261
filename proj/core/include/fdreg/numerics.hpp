#pragma once

#include "fdreg/rng.hpp"
#include "fdreg/tensor.hpp"

#include <vector>

namespace fdreg {

// Euclidean distance matrix between the rows of a (m x d) and b (k x d).
// Entry (i, j) = ||a_i - b_j||. Throws std::invalid_argument on dimension
// mismatch.
Tensor pairwise_distances(const Tensor& a, const Tensor& b);

// Row-wise softmax over negative scaled distances, excluding the diagonal:
// out(i, j) = exp(-dist(i,j)/lambda) / sum_{u != i} exp(-dist(i,u)/lambda) for
// j != i, and out(i, i) = 0. Each row is shifted by its smallest off-diagonal
// entry before exponentiation, so tiny lambda cannot underflow every term.
// Requires n >= 2 (a row must have at least one neighbor) and lambda > 0.
Tensor row_softmax_neg_scaled(const Tensor& dist, double lambda);

// Seeded element-wise samplers. Gaussian draws are consumed even at sigma = 0.
Tensor sample_gaussian(Rng& rng, double mu, double sigma, std::vector<std::size_t> shape);
Tensor sample_uniform(Rng& rng, double lo, double hi, std::vector<std::size_t> shape);

}  // namespace fdreg
