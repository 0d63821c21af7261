#pragma once

#include "fdreg/tensor.hpp"

#include <cstddef>

namespace fdreg {

// Two labeled point clouds sharing a dimension: points_a are the targets
// (membership label 0), points_b the predictions (label 1). The pooled node
// ordering is fixed — all rows of points_a first, then all rows of points_b —
// and that ordering defines both the membership function and nearest-neighbor
// tie-breaking.
struct LabeledPointSet {
    Tensor points_a;  // n0 x d
    Tensor points_b;  // n1 x d

    std::size_t n0() const { return points_a.rows(); }
    std::size_t n1() const { return points_b.rows(); }
    std::size_t n() const { return n0() + n1(); }
    std::size_t dim() const { return points_a.cols(); }

    void validate() const;

    // Pooled (n x d) matrix in the fixed node order.
    Tensor pooled() const;
};

struct DivergenceReport {
    double cut_mass = 0.0;   // exact cut-edge count or smoothed cut mass
    std::size_t n = 0;       // total node count
    double alpha = 0.0;      // n0 / n
    double d_raw = 0.0;      // may exceed [0, 1] on finite samples
    double d_clamped = 0.0;  // clamp(d_raw, 0, 1)
};

// The convex function from the cut-edge asymptotics, normalized so f(1) = 0.
// Evaluated in a factored form — with u = alpha*(t-1) and B = 2*alpha-1,
//   f(t) = u * (u + 2B - B^2) / (4*alpha*(1-alpha) * (u+1))
// which is algebraically identical to the usual ratio expression but returns
// exactly 0 at t = 1 in floating point. Requires t >= 0 and alpha in (0, 1).
double f_alpha(double t, double alpha);

// Directed nearest-neighbor cut count: every pooled node contributes one
// directed edge to its nearest other node (distance ties broken by lowest
// pooled index); the count is over edges whose endpoints carry different
// labels. Requires n >= 2.
int nn_cut_count(const LabeledPointSet& sets);

// Exact graph-based divergence: invert the cut-edge ratio via
//   d_raw = 1 - n * t / (2 * n0 * n1),
// clamping only for the reported d_clamped.
DivergenceReport hp_divergence_exact(const LabeledPointSet& sets);

// Softmax relaxation of the cut count over the fully connected graph:
//   t_hat = sum_i sum_{j != i} [label_i != label_j] * softmax_row_i(j)
// with row softmax weights exp(-dist/lambda) normalized over each node's
// neighbors. Differentiable in the point coordinates; in [0, n].
double smoothed_cut_mass(const LabeledPointSet& sets, double lambda);

// Smoothed divergence d_raw = 1 - 2 * t_hat / n. Requires balanced sets
// (n0 == n1); the regularizer always compares equal-size batches.
DivergenceReport hp_divergence_smoothed(const LabeledPointSet& sets, double lambda);

// Analytic gradient of the smoothed d_raw with respect to the prediction
// coordinates (an n1 x d tensor). Derived by the chain rule through the row
// softmax; coincident point pairs contribute a zero direction.
Tensor smoothed_divergence_grad(const LabeledPointSet& sets, double lambda);

}  // namespace fdreg
