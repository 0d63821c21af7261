#include "fdreg/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace fdreg {

void adadelta_step(const ModelSpec& spec, ParameterSet& params, ParameterSet& grads,
                   AdadeltaState& state, double r) {
    if (!state.initialized) {
        state.sq_grad = zero_like(params);
        state.sq_delta = zero_like(params);
        state.initialized = true;
    }
    auto p = learnable_tensors(spec, params);
    auto g = learnable_tensors(spec, grads);
    auto eg2 = learnable_tensors(spec, state.sq_grad);
    auto ed2 = learnable_tensors(spec, state.sq_delta);

    for (std::size_t ti = 0; ti < p.size(); ++ti) {
        Tensor& theta = *p[ti].tensor;
        const Tensor& grad = *g[ti].tensor;
        Tensor& Eg = *eg2[ti].tensor;
        Tensor& Ed = *ed2[ti].tensor;
        if (!theta.same_shape(grad) || !theta.same_shape(Eg) || !theta.same_shape(Ed))
            throw std::invalid_argument("adadelta_step: tensor shapes disagree at " + p[ti].name);
        for (std::size_t i = 0; i < theta.numel(); ++i) {
            double gv = grad.data[i];
            Eg.data[i] = state.rho * Eg.data[i] + (1.0 - state.rho) * gv * gv;
            double dx = -std::sqrt(Ed.data[i] + state.epsilon) /
                        std::sqrt(Eg.data[i] + state.epsilon) * gv;
            Ed.data[i] = state.rho * Ed.data[i] + (1.0 - state.rho) * dx * dx;
            theta.data[i] += r * dx;
        }
    }
}

void sgd_step(const ModelSpec& spec, ParameterSet& params, ParameterSet& grads, double lr) {
    auto p = learnable_tensors(spec, params);
    auto g = learnable_tensors(spec, grads);
    for (std::size_t ti = 0; ti < p.size(); ++ti) {
        Tensor& theta = *p[ti].tensor;
        const Tensor& grad = *g[ti].tensor;
        if (!theta.same_shape(grad))
            throw std::invalid_argument("sgd_step: tensor shapes disagree at " + p[ti].name);
        for (std::size_t i = 0; i < theta.numel(); ++i) theta.data[i] -= lr * grad.data[i];
    }
}

}  // namespace fdreg
