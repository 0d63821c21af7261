#pragma once

#include "fdreg/tensor.hpp"

namespace fdreg {

// Knobs of the combined objective. l1/l2 strengths ride along for the trainer
// (parameter penalties are added there, not inside combined_loss); dropout
// lives in the model spec.
struct LossConfig {
    double w = 0.0;       // divergence regularization strength, >= 0
    double gamma = 0.0;   // enforced divergence level, in [0, 1]
    double lambda = 2.0;  // softmax scale of the smoothed estimator, > 0
    double l1_strength = 0.0;
    double l2_strength = 0.0;

    void validate() const;
};

struct LossResult {
    double loss = 0.0;
    Tensor grad;          // d loss / d preds, same shape as preds
    double mse = 0.0;     // diagnostic
    double d_raw = 0.0;   // diagnostic (unclamped; 0 when w == 0)
};

// loss = sum((pred - target)^2) / (b * d2) + w * (d_raw - gamma)^2, where
// d_raw is the smoothed divergence between the prediction rows and the target
// rows of this batch (unclamped, so the pull never saturates). The gradient
// with respect to the predictions combines both terms. With w > 0 a batch of
// one row has no divergence and is a contract violation.
LossResult combined_loss(const Tensor& preds, const Tensor& targets, const LossConfig& cfg);

}  // namespace fdreg
