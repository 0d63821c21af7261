#pragma once

#include "fdreg/rng.hpp"
#include "fdreg/tensor.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace fdreg {

// Tabular regression data: N x d1 features, N x d2 targets. d2 may be zero
// for pure point-cloud files (the divergence CLI reads those).
struct TabularDataset {
    Tensor X;  // N x d1
    Tensor Y;  // N x d2 (d2 == 0 -> Y.data empty, Y.shape == {N, 0} is not
               // representable, so Y.shape is {} and n_targets() reports 0)
    std::vector<std::string> feature_names;
    std::vector<std::string> target_names;

    std::size_t n_rows() const { return X.rows(); }
    std::size_t n_features() const { return X.cols(); }
    std::size_t n_targets() const { return Y.ndim() == 2 ? Y.cols() : 0; }
};

struct SplitIndices {
    std::vector<std::size_t> train, val, test;
};

// Per-feature mean and std, fit on training rows only; zero-variance features
// get std := 1 so they map to exactly zero.
struct Scaler {
    std::vector<double> mean, std_dev;
};

// Reads a UTF-8, comma-separated, '.'-decimal file with one header row; the
// last n_targets columns become Y and the rest X. Throws LoadError naming the
// offending row/column for ragged rows or non-numeric cells.
TabularDataset load_csv(const std::string& path, std::size_t n_targets);

// Writes the same dialect; values round-trip bit-exactly through load_csv.
void write_csv(const std::string& path, const TabularDataset& ds);

// Seeded uniform shuffle into train/validation/test. Validation and test each
// get max(1, floor(0.1 N)) rows; the remainder trains. Requires N >= 3.
SplitIndices split(std::size_t N, Rng& rng);

Scaler standardize_fit(const Tensor& train_X);
Tensor standardize_apply(const Scaler& scaler, const Tensor& X);

// The 1-D quadratic benchmark: x ~ U[-2, 2), y = a x^2 + b x + N(0, sigma^2).
// X is n x 1, Y is n x 1.
TabularDataset gen_quadratic(Rng& rng, std::size_t n, double a, double b, double sigma);

// Spectra-like synthetic regression data. Features are sums of K = 8 Gaussian
// bumps on a d1-point grid: bump centers and widths are drawn once per
// dataset, per-sample amplitudes a_ik ~ U[0.2, 1). Targets are fixed random
// linear + quadratic functionals of the amplitudes,
//   y_ij = sum_k L_jk a_ik + sum_k Q_jk a_ik^2 + noise_sigma * z_ij,
// with L_jk ~ U[-1, 1), Q_jk ~ U[-0.5, 0.5) drawn once per dataset. All draws
// are consumed even at noise_sigma = 0, so the same seed with zero noise
// yields the same features with clean targets.
TabularDataset gen_synthetic_spectra(Rng& rng, std::size_t N, std::size_t d1, std::size_t d2,
                                     double noise_sigma);

// Row-subset helpers used by the trainer and evaluators.
Tensor take_rows(const Tensor& m, const std::vector<std::size_t>& idx);

}  // namespace fdreg
