#pragma once

#include "fdreg/tensor.hpp"

#include <cstddef>
#include <vector>

namespace fdreg {

struct EvalReport {
    std::vector<double> per_target;  // RMSE per target column
    double overall = 0.0;            // sqrt(mean over all entries)
    std::size_t n = 0;               // sample count
};

// Root mean squared error, per target and pooled over all entries.
EvalReport rmse(const Tensor& preds, const Tensor& targets);

struct TTestResult {
    double t = 0.0;
    std::size_t df = 0;
    double p = 1.0;
    double level = 0.1;
    bool significant = false;
    bool degenerate = false;  // nonzero differences with zero variance
};

// Paired two-sided t-test on per-sample error vectors: d = a - b,
// t = mean(d) / (sd(d) / sqrt(N)) with the sample (N-1) standard deviation,
// and the p-value from the t distribution with N-1 degrees of freedom via the
// regularized incomplete beta function. All-zero differences give t = 0,
// p = 1; zero-variance nonzero differences are flagged degenerate with p = 0.
TTestResult paired_t_test(const std::vector<double>& errors_a,
                          const std::vector<double>& errors_b, double level = 0.1);

// Regularized incomplete beta I_x(a, b), exposed for tests. Continued-fraction
// (modified Lentz) evaluation; accurate to ~1e-14 over the t-test range.
double betai(double a, double b, double x);

}  // namespace fdreg
