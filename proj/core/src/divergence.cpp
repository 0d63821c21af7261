#include "fdreg/divergence.hpp"

#include "fdreg/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fdreg {

void LabeledPointSet::validate() const {
    points_a.require_ndim(2);
    points_b.require_ndim(2);
    if (points_a.cols() != points_b.cols())
        throw std::invalid_argument("LabeledPointSet: point dimensions differ");
    // Tensor forbids zero dimensions, so both sets are nonempty by construction.
}

Tensor LabeledPointSet::pooled() const {
    validate();
    Tensor out({n(), dim()});
    std::copy(points_a.data.begin(), points_a.data.end(), out.data.begin());
    std::copy(points_b.data.begin(), points_b.data.end(),
              out.data.begin() + static_cast<std::ptrdiff_t>(points_a.numel()));
    return out;
}

double f_alpha(double t, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("f_alpha: alpha must lie in (0, 1)");
    if (t < 0.0)
        throw std::invalid_argument("f_alpha: t must be nonnegative");
    double u = alpha * (t - 1.0);
    double B = 2.0 * alpha - 1.0;
    return u * (u + 2.0 * B - B * B) / (4.0 * alpha * (1.0 - alpha) * (u + 1.0));
}

namespace {

// Clamp helper for the reported divergence.
double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

DivergenceReport make_report(double cut_mass, std::size_t n0, std::size_t n1) {
    DivergenceReport r;
    r.cut_mass = cut_mass;
    r.n = n0 + n1;
    r.alpha = static_cast<double>(n0) / static_cast<double>(r.n);
    r.d_raw = 1.0 - static_cast<double>(r.n) * cut_mass /
                        (2.0 * static_cast<double>(n0) * static_cast<double>(n1));
    r.d_clamped = clamp01(r.d_raw);
    return r;
}

}  // namespace

int nn_cut_count(const LabeledPointSet& sets) {
    sets.validate();
    const std::size_t n = sets.n(), n0 = sets.n0();
    if (n < 2) throw std::invalid_argument("nn_cut_count: need at least 2 points");

    Tensor pool = sets.pooled();
    Tensor dist = pairwise_distances(pool, pool);

    int cut = 0;
    for (std::size_t i = 0; i < n; ++i) {
        // Nearest other node; strict < keeps the lowest index on exact ties.
        std::size_t best = i == 0 ? 1 : 0;
        double best_d = dist(i, best);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            if (dist(i, j) < best_d) {
                best_d = dist(i, j);
                best = j;
            }
        }
        if ((i < n0) != (best < n0)) ++cut;
    }
    return cut;
}

DivergenceReport hp_divergence_exact(const LabeledPointSet& sets) {
    int t = nn_cut_count(sets);
    return make_report(static_cast<double>(t), sets.n0(), sets.n1());
}

double smoothed_cut_mass(const LabeledPointSet& sets, double lambda) {
    sets.validate();
    const std::size_t n = sets.n(), n0 = sets.n0();
    if (n < 2) throw std::invalid_argument("smoothed_cut_mass: need at least 2 points");
    if (!(lambda > 0.0)) throw std::invalid_argument("smoothed_cut_mass: lambda must be positive");

    Tensor pool = sets.pooled();
    Tensor dist = pairwise_distances(pool, pool);
    Tensor soft = row_softmax_neg_scaled(dist, lambda);

    double t_hat = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (j != i && (i < n0) != (j < n0)) t_hat += soft(i, j);
    return t_hat;
}

DivergenceReport hp_divergence_smoothed(const LabeledPointSet& sets, double lambda) {
    sets.validate();
    if (sets.n0() != sets.n1())
        throw std::invalid_argument("hp_divergence_smoothed: sets must be balanced (n0 == n1)");
    double t_hat = smoothed_cut_mass(sets, lambda);
    return make_report(t_hat, sets.n0(), sets.n1());
}

Tensor smoothed_divergence_grad(const LabeledPointSet& sets, double lambda) {
    sets.validate();
    if (sets.n0() != sets.n1())
        throw std::invalid_argument("smoothed_divergence_grad: sets must be balanced (n0 == n1)");
    if (!(lambda > 0.0))
        throw std::invalid_argument("smoothed_divergence_grad: lambda must be positive");

    const std::size_t n = sets.n(), n0 = sets.n0(), n1 = sets.n1(), d = sets.dim();
    Tensor pool = sets.pooled();
    Tensor dist = pairwise_distances(pool, pool);
    Tensor soft = row_softmax_neg_scaled(dist, lambda);

    // Row-wise cut mass C_i = sum over cross-label neighbors of the softmax
    // weight. For row i the softmax derivative gives
    //   d t_hat / d w(i,k) = (-1/lambda) * soft(i,k) * (cross(i,k) - C_i),
    // and each symmetric edge weight w(q,m) feeds rows q and m.
    std::vector<double> C(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (j != i && (i < n0) != (j < n0)) C[i] += soft(i, j);

    // d d_raw / d t_hat with n0 == n1: -2 / n.
    const double dd_dt = -2.0 / static_cast<double>(n);

    Tensor grad({n1, d});
    for (std::size_t q = n0; q < n; ++q) {
        double* g = &grad.data[(q - n0) * d];
        for (std::size_t m = 0; m < n; ++m) {
            if (m == q) continue;
            double w = dist(q, m);
            if (w == 0.0) continue;  // coincident pair: zero direction by convention
            double cross = ((q < n0) != (m < n0)) ? 1.0 : 0.0;
            double dt_dw = (-1.0 / lambda) *
                           (soft(q, m) * (cross - C[q]) + soft(m, q) * (cross - C[m]));
            double scale = dd_dt * dt_dw / w;
            const double* xq = &pool.data[q * d];
            const double* xm = &pool.data[m * d];
            for (std::size_t c = 0; c < d; ++c) g[c] += scale * (xq[c] - xm[c]);
        }
    }
    return grad;
}

}  // namespace fdreg
