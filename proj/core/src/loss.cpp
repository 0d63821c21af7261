#include "fdreg/loss.hpp"

#include "fdreg/divergence.hpp"

#include <stdexcept>

namespace fdreg {

void LossConfig::validate() const {
    if (w < 0.0) throw std::invalid_argument("LossConfig: w must be nonnegative");
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw std::invalid_argument("LossConfig: gamma must lie in [0, 1]");
    if (!(lambda > 0.0)) throw std::invalid_argument("LossConfig: lambda must be positive");
    if (l1_strength < 0.0 || l2_strength < 0.0)
        throw std::invalid_argument("LossConfig: penalty strengths must be nonnegative");
}

LossResult combined_loss(const Tensor& preds, const Tensor& targets, const LossConfig& cfg) {
    cfg.validate();
    preds.require_ndim(2);
    targets.require_ndim(2);
    if (!preds.same_shape(targets))
        throw std::invalid_argument("combined_loss: prediction/target shapes differ");
    const std::size_t b = preds.rows(), d2 = preds.cols();
    if (cfg.w > 0.0 && b < 2)
        throw std::invalid_argument(
            "combined_loss: the divergence regularizer needs at least 2 rows per batch");

    LossResult res;
    res.grad = Tensor({b, d2});

    const double denom = double(b) * double(d2);
    double sq = 0.0;
    for (std::size_t i = 0; i < preds.numel(); ++i) {
        double diff = preds.data[i] - targets.data[i];
        sq += diff * diff;
        res.grad.data[i] = 2.0 * diff / denom;
    }
    res.mse = sq / denom;
    res.loss = res.mse;

    if (cfg.w > 0.0) {
        LabeledPointSet sets{targets, preds};
        DivergenceReport rep = hp_divergence_smoothed(sets, cfg.lambda);
        Tensor dgrad = smoothed_divergence_grad(sets, cfg.lambda);
        res.d_raw = rep.d_raw;
        double dev = rep.d_raw - cfg.gamma;
        res.loss += cfg.w * dev * dev;
        double coeff = 2.0 * cfg.w * dev;
        for (std::size_t i = 0; i < res.grad.numel(); ++i)
            res.grad.data[i] += coeff * dgrad.data[i];
    }
    return res;
}

}  // namespace fdreg
