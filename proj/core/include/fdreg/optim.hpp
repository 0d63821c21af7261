#pragma once

#include "fdreg/model.hpp"

namespace fdreg {

// Adadelta accumulators, mirroring the learnable tensors of a ParameterSet.
struct AdadeltaState {
    ParameterSet sq_grad;   // E[g^2]
    ParameterSet sq_delta;  // E[dx^2]
    double rho = 0.95;
    double epsilon = 1e-6;
    bool initialized = false;
};

// One Adadelta update, elementwise over every learnable tensor:
//   E[g^2]  <- rho E[g^2] + (1-rho) g^2
//   dx      <- -sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps) * g
//   E[dx^2] <- rho E[dx^2] + (1-rho) dx^2
//   theta   <- theta + r * dx
// The state is created lazily on first use and must keep pairing with the
// same parameters.
void adadelta_step(const ModelSpec& spec, ParameterSet& params, ParameterSet& grads,
                   AdadeltaState& state, double r);

// Plain gradient descent, for tests and comparisons: theta <- theta - lr * g.
void sgd_step(const ModelSpec& spec, ParameterSet& params, ParameterSet& grads, double lr);

}  // namespace fdreg
